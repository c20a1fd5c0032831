"""Run configuration: a single YAML file drives the whole pipeline."""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field
from datetime import date

import yaml

from .errors import ConfigError
from .ingest import PeriodSpec

__all__ = [
    "KdeSettings",
    "DiffusionSettings",
    "AcfSettings",
    "DetrendSettings",
    "MfdfaSettings",
    "RunConfig",
    "load_config",
]

ENV_INPUT = "STYLEFACTS_INPUT"
ENV_OUTPUT = "STYLEFACTS_OUTPUT"


@dataclass
class KdeSettings:
    bandwidth: float = 0.001
    bandwidth_mode: str = "normalized"  # kernel width relative to sample std, or "raw"
    grid_size: int = 2048


@dataclass
class DiffusionSettings:
    lags: list[int] | None = None  # None: auto log-spaced grid
    n_lags: int = 48
    max_lag: int = 46944  # ~326 days on a 10-minute grid
    regime_tolerance: float = 0.05


@dataclass
class AcfSettings:
    max_lag: int = 1000
    segment_length: int = 1000
    fit_lo: int = 1
    fit_hi: int = 10


@dataclass
class DetrendSettings:
    window: int = 1008  # one calendar week on a 10-minute grid
    collapse_lags: list[int] = field(default_factory=lambda: [1, 2, 4, 8, 16, 32, 64, 128])
    sweep: list[int] = field(default_factory=lambda: [36, 144, 432, 1008, 4032])
    sweep_lags: list[int] = field(default_factory=lambda: [144, 432, 1008])


@dataclass
class MfdfaSettings:
    input: str = "trended"  # run the scaling analysis on "trended" or "detrended" returns
    scales: list[int] | None = None
    orders: list[float] | None = None
    fit_lo: int | None = None
    fit_hi: int | None = None
    betas: list[float] = field(default_factory=lambda: [1.0, 0.1, 0.01, 0.001])
    slope_threshold: float = 0.01
    h_range_threshold: float = 0.1


@dataclass
class RunConfig:
    input_path: str
    output_dir: str
    periods: list[PeriodSpec]
    column_map: dict[str, str] = field(
        default_factory=lambda: {"timestamp": "timestamp", "price": "price"}
    )
    dt_minutes: int = 10
    max_gap: int = 6
    jump_threshold: float | None = None
    kde: KdeSettings = field(default_factory=KdeSettings)
    diffusion: DiffusionSettings = field(default_factory=DiffusionSettings)
    acf: AcfSettings = field(default_factory=AcfSettings)
    detrend: DetrendSettings = field(default_factory=DetrendSettings)
    mfdfa: MfdfaSettings = field(default_factory=MfdfaSettings)

    def to_dict(self) -> dict:
        d = {
            "input": self.input_path,
            "output_dir": self.output_dir,
            "columns": dict(self.column_map),
            "dt_minutes": self.dt_minutes,
            "max_gap": self.max_gap,
            "jump_threshold": self.jump_threshold,
            "periods": [
                {
                    "name": p.name,
                    "start": p.start_date.isoformat(),
                    "end": p.end_date.isoformat(),
                }
                for p in self.periods
            ],
            "kde": asdict(self.kde),
            "diffusion": asdict(self.diffusion),
            "acf": asdict(self.acf),
            "detrend": asdict(self.detrend),
            "mfdfa": asdict(self.mfdfa),
        }
        return d

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a mapping")
        try:
            periods = [
                PeriodSpec(
                    name=str(p["name"]),
                    start_date=_as_date(p["start"]),
                    end_date=_as_date(p["end"]),
                )
                for p in raw.get("periods", [])
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad period spec: {exc}") from exc
        try:
            cfg = cls(
                input_path=str(raw["input"]),
                output_dir=str(raw.get("output_dir", "stylefacts-out")),
                periods=periods,
                column_map={str(k): str(v) for k, v in raw.get("columns", {"timestamp": "timestamp", "price": "price"}).items()},
                dt_minutes=int(raw.get("dt_minutes", 10)),
                max_gap=int(raw.get("max_gap", 6)),
                jump_threshold=(None if raw.get("jump_threshold") is None else float(raw["jump_threshold"])),
                kde=_section(KdeSettings, raw.get("kde")),
                diffusion=_section(DiffusionSettings, raw.get("diffusion")),
                acf=_section(AcfSettings, raw.get("acf")),
                detrend=_section(DetrendSettings, raw.get("detrend")),
                mfdfa=_section(MfdfaSettings, raw.get("mfdfa")),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad config value: {exc}") from exc
        cfg.validate()
        return cfg

    def validate(self) -> None:
        """Check every numeric field against the preconditions of its consumer."""
        errors: list[str] = []
        if self.dt_minutes < 1:
            errors.append("dt_minutes must be >= 1")
        if self.max_gap < 0:
            errors.append("max_gap must be >= 0")
        if self.jump_threshold is not None and self.jump_threshold <= 0:
            errors.append("jump_threshold must be positive")
        if not self.periods:
            errors.append("at least one period is required")
        ordered = sorted(self.periods, key=lambda p: p.start_date)
        for a, b in zip(ordered, ordered[1:]):
            if b.start_date <= a.end_date:
                errors.append(f"periods {a.name!r} and {b.name!r} overlap")
        names = [p.name for p in self.periods]
        if len(set(names)) != len(names):
            errors.append("period names must be unique")

        if self.kde.bandwidth <= 0:
            errors.append("kde.bandwidth must be positive")
        if self.kde.bandwidth_mode not in ("normalized", "raw"):
            errors.append("kde.bandwidth_mode must be 'normalized' or 'raw'")
        if self.kde.grid_size < 16:
            errors.append("kde.grid_size must be >= 16")

        if self.diffusion.lags is not None:
            if not self.diffusion.lags or min(self.diffusion.lags) < 1:
                errors.append("diffusion.lags must be positive integers")
        if self.diffusion.n_lags < 8:
            errors.append("diffusion.n_lags must be >= 8")
        if self.diffusion.max_lag < 8:
            errors.append("diffusion.max_lag must be >= 8")
        if self.diffusion.regime_tolerance <= 0:
            errors.append("diffusion.regime_tolerance must be positive")

        if self.acf.max_lag < 1:
            errors.append("acf.max_lag must be >= 1")
        if self.acf.segment_length < 2:
            errors.append("acf.segment_length must be >= 2")
        if not 1 <= self.acf.fit_lo < self.acf.fit_hi:
            errors.append("acf fit range needs 1 <= fit_lo < fit_hi")

        if self.detrend.window < 1:
            errors.append("detrend.window must be >= 1")
        if not self.detrend.collapse_lags or min(self.detrend.collapse_lags) < 1:
            errors.append("detrend.collapse_lags must be positive integers")
        if not self.detrend.sweep_lags or min(self.detrend.sweep_lags) < 1:
            errors.append("detrend.sweep_lags must be positive integers")

        if self.mfdfa.input not in ("trended", "detrended"):
            errors.append("mfdfa.input must be 'trended' or 'detrended'")
        if self.mfdfa.scales is not None and (min(self.mfdfa.scales) < 4):
            errors.append("mfdfa.scales minimum is 4")
        if not self.mfdfa.betas:
            errors.append("mfdfa.betas must be non-empty")
        elif any(b <= 0 for b in self.mfdfa.betas) or any(
            b2 >= b1 for b1, b2 in zip(self.mfdfa.betas, self.mfdfa.betas[1:])
        ):
            errors.append("mfdfa.betas must be positive and strictly decreasing")
        if self.mfdfa.slope_threshold <= 0 or self.mfdfa.h_range_threshold <= 0:
            errors.append("mfdfa thresholds must be positive")

        if errors:
            raise ConfigError("; ".join(errors))


def _as_date(value) -> date:
    if isinstance(value, date):
        return value
    return date.fromisoformat(str(value))


def _section(cls, raw):
    if raw is None:
        return cls()
    if not isinstance(raw, dict):
        raise ConfigError(f"{cls.__name__} section must be a mapping")
    known = {f for f in cls.__dataclass_fields__}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown keys in {cls.__name__} section: {sorted(unknown)}")
    return cls(**raw)


def load_config(path: str) -> RunConfig:
    """Load a YAML config; STYLEFACTS_INPUT / STYLEFACTS_OUTPUT override paths."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = yaml.safe_load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config is not valid YAML: {exc}") from exc
    if raw is None:
        raise ConfigError("config file is empty")
    if os.environ.get(ENV_INPUT):
        raw["input"] = os.environ[ENV_INPUT]
    if os.environ.get(ENV_OUTPUT):
        raw["output_dir"] = os.environ[ENV_OUTPUT]
    return RunConfig.from_dict(raw)
