"""
Typed view of config.yaml.

    settings = load_settings()
    settings = apply_overrides(settings, {"constants.tail_to_moment_c": "3", "sphere.restarts": "8"})

Override values are parsed as YAML scalars, so "null", "3", "1e-9" and
"[1, 2]" mean what they look like.  Bare names resolve to the constants section.
"""

import dataclasses
import logging
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import yaml

from core.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path(__file__).resolve().parent.parent / "config.yaml"


@dataclass(frozen=True)
class EnumerationSettings:
    chaos_n_cap: int = 7
    ustat_configuration_cap: int = 65536
    product_support_cap: int = 65536
    symmetrization_cap: int = 262144


@dataclass(frozen=True)
class MonteCarloSettings:
    replicas: int = 100000
    block_size: int = 4096


@dataclass(frozen=True)
class ConstantSettings:
    tail_to_moment_c: float = 4.0
    lower_bound_c: float = 1.0
    bernstein_moment_c2: Optional[float] = None
    adamczak_c: float = 1.0
    mom1_c: float = 1.0
    decoupling_c: float = 4.0
    symmetrization_c: float = 16.0


@dataclass(frozen=True)
class ToleranceSettings:
    hermitian: float = 1e-12
    degeneracy: float = 1e-9
    ratio_slack: float = 1e-9
    identity: float = 1e-9


@dataclass(frozen=True)
class SphereSettings:
    restarts: int = 32
    gradient_tol: float = 1e-10
    max_iter: int = 500


@dataclass(frozen=True)
class SuiteDefaults:
    n_range: Tuple[int, int] = (2, 4)
    d_range: Tuple[int, int] = (1, 3)
    q_list: Tuple[float, ...] = (1.0, 2.0)
    support_sizes: Tuple[int, ...] = (2, 3)
    instances_per_cell: int = 50
    master_seed: int = 20240101
    tail_replicas: int = 100000


@dataclass(frozen=True)
class OutputSettings:
    reports_dir: str = "reports"
    logs_dir: str = "logs"


@dataclass(frozen=True)
class LoggingSettings:
    level: str = "INFO"
    file: Optional[str] = None


@dataclass(frozen=True)
class Settings:
    enumeration: EnumerationSettings = field(default_factory=EnumerationSettings)
    monte_carlo: MonteCarloSettings = field(default_factory=MonteCarloSettings)
    constants: ConstantSettings = field(default_factory=ConstantSettings)
    tolerances: ToleranceSettings = field(default_factory=ToleranceSettings)
    sphere: SphereSettings = field(default_factory=SphereSettings)
    suite: SuiteDefaults = field(default_factory=SuiteDefaults)
    output: OutputSettings = field(default_factory=OutputSettings)
    logging: LoggingSettings = field(default_factory=LoggingSettings)


def _coerce(section: str, name: str, default: Any, value: Any) -> Any:
    """Cast a raw YAML value to the type of the field default"""
    if value is None:
        if section == "constants" and name == "bernstein_moment_c2" or section == "logging" and name == "file":
            return None
        raise ConfigError(f"{section}.{name} may not be null")
    try:
        if isinstance(default, tuple):
            if not isinstance(value, (list, tuple)):
                raise ConfigError(f"{section}.{name} must be a list, got {value!r}")
            element = type(default[0]) if default else float
            return tuple(element(v) for v in value)
        if isinstance(default, bool):
            return bool(value)
        if isinstance(default, int):
            if isinstance(value, float) and not value.is_integer():
                raise ConfigError(f"{section}.{name} must be an integer, got {value!r}")
            return int(value)
        if isinstance(default, float) or default is None:
            return float(value)
        return str(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid value {value!r} for {section}.{name}: {e}") from e


def _build_section(section: str, cls, raw: Optional[Mapping]) -> Any:
    if raw is None:
        return cls()
    if not isinstance(raw, Mapping):
        raise ConfigError(f"section {section!r} must be a mapping")
    instance = cls()
    known = {f.name for f in fields(cls)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown keys in section {section!r}: {sorted(unknown)}")
    values = {name: _coerce(section, name, getattr(instance, name), value) for name, value in raw.items()}
    return replace(instance, **values)


def settings_from_dict(raw: Optional[Mapping]) -> Settings:
    raw = raw or {}
    sections = {f.name: f for f in fields(Settings)}
    unknown = set(raw) - set(sections)
    if unknown:
        raise ConfigError(f"unknown configuration sections: {sorted(unknown)}")
    built = {}
    for name, f in sections.items():
        built[name] = _build_section(name, f.default_factory, raw.get(name))
    settings = Settings(**built)
    validate_settings(settings)
    return settings


def load_settings(path: Union[str, Path, None] = None) -> Settings:
    path = Path(path) if path is not None else DEFAULT_CONFIG_PATH
    if not path.exists():
        logger.warning("config file %s not found; using built-in defaults", path)
        return Settings()
    try:
        with open(path) as f:
            raw = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot read configuration {path}: {e}") from e
    return settings_from_dict(raw)


def validate_settings(settings: Settings) -> None:
    suite = settings.suite
    if not suite.q_list:
        raise ConfigError("suite.q_list must not be empty")
    if any(q < 1 for q in suite.q_list):
        raise ConfigError(f"suite.q_list entries must be >= 1, got {list(suite.q_list)}")
    for name in ("n_range", "d_range"):
        lo_hi = getattr(suite, name)
        if len(lo_hi) != 2 or lo_hi[0] > lo_hi[1]:
            raise ConfigError(f"suite.{name} must be [low, high] with low <= high, got {list(lo_hi)}")
    if suite.n_range[0] < 2 or suite.d_range[0] < 1:
        raise ConfigError("suite needs n >= 2 and d >= 1")
    if suite.instances_per_cell < 1:
        raise ConfigError("suite.instances_per_cell must be >= 1")
    if settings.sphere.restarts < 0 or settings.sphere.max_iter < 1:
        raise ConfigError("sphere.restarts must be >= 0 and sphere.max_iter >= 1")
    if settings.monte_carlo.replicas < 1 or settings.monte_carlo.block_size < 1:
        raise ConfigError("monte_carlo.replicas and monte_carlo.block_size must be positive")


def apply_overrides(settings: Settings, overrides: Mapping[str, str]) -> Settings:
    """New Settings with dotted-key overrides applied; bare keys address the constants section"""
    raw: Dict[str, Dict[str, Any]] = {name: dataclasses.asdict(getattr(settings, name))
                                      for name in (f.name for f in fields(Settings))}
    for key, text in overrides.items():
        section, _, name = key.rpartition(".")
        section = section or "constants"
        if section not in raw:
            raise ConfigError(f"unknown configuration section {section!r} in override {key!r}")
        if name not in raw[section]:
            raise ConfigError(f"unknown configuration key {key!r}")
        try:
            raw[section][name] = yaml.safe_load(text) if isinstance(text, str) else text
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse override {key}={text!r}: {e}") from e
    logger.debug("applied overrides %s", dict(overrides))
    return settings_from_dict(raw)


def parse_override_args(pairs) -> Dict[str, str]:
    """['a.b=1', 'c=2'] -> {'a.b': '1', 'c': '2'}"""
    out = {}
    for pair in pairs or ():
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override {pair!r} must look like key=value")
        out[key.strip()] = value.strip()
    return out
