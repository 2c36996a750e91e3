"""Configuration management for relevant-sampling."""

import os
import yaml
from pathlib import Path
from typing import Dict, Any, Optional
from dataclasses import dataclass, field, fields, asdict

from relevant_sampling.core.exceptions import ConfigError


@dataclass
class NumericsConfig:
    """Numerical tolerances and solver choice."""
    eigen_floor: float = 1e-12
    rank_tol: float = 1e-10
    eigensolver: str = "lapack"  # lapack, jacobi


@dataclass
class RuntimeConfig:
    """Campaign execution settings."""
    workers: int = 1
    flake_reruns: int = 1


@dataclass
class AppConfig:
    """Main application configuration."""
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    runtime: RuntimeConfig = field(default_factory=RuntimeConfig)


EIGENSOLVERS = ("lapack", "jacobi")


class ConfigLoader:
    """Singleton configuration loader with hierarchical configuration support."""

    _instance = None
    _config = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if not getattr(self, '_initialized', False):
            self._config = self._load_config()
            self._initialized = True

    @property
    def config(self) -> AppConfig:
        """Get the loaded configuration."""
        return self._config

    def _load_config(self) -> AppConfig:
        """Load configuration from multiple sources in hierarchical order."""
        config_data = {}

        # 1. Load global config
        global_config_path = Path.home() / ".relevant-sampling" / "config.yaml"
        if global_config_path.exists():
            config_data.update(self._load_yaml_file(global_config_path))

        # 2. Load project config (override global)
        project_config_path = Path(".relevant-sampling.yaml")
        if project_config_path.exists():
            project_config = self._load_yaml_file(project_config_path)
            config_data = self._merge_configs(config_data, project_config)

        # 3. Load environment variables (override file configs)
        env_config = self._load_env_config()
        config_data = self._merge_configs(config_data, env_config)

        return self._create_app_config(config_data)

    def _load_yaml_file(self, file_path: Path) -> Dict[str, Any]:
        """Load YAML configuration file."""
        try:
            with open(file_path, 'r', encoding='utf-8') as f:
                data = yaml.safe_load(f)
                return data if data is not None else {}
        except yaml.YAMLError as e:
            raise ConfigError(f"Invalid YAML: {e}", path=str(file_path))
        except Exception as e:
            raise ConfigError(f"Failed to read config file: {e}", path=str(file_path))

    def _load_env_config(self) -> Dict[str, Any]:
        """Load configuration from environment variables."""
        config = {}

        if workers := os.getenv("RELSAMP_WORKERS"):
            config.setdefault("runtime", {})["workers"] = workers
        if solver := os.getenv("RELSAMP_EIGENSOLVER"):
            config.setdefault("numerics", {})["eigensolver"] = solver
        if floor := os.getenv("RELSAMP_EIGEN_FLOOR"):
            config.setdefault("numerics", {})["eigen_floor"] = floor

        return config

    def _merge_configs(self, base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
        """Merge two configuration dictionaries recursively."""
        result = base.copy()

        for key, value in override.items():
            if key in result and isinstance(result[key], dict) and isinstance(value, dict):
                result[key] = self._merge_configs(result[key], value)
            else:
                result[key] = value

        return result

    def _create_app_config(self, config_data: Dict[str, Any]) -> AppConfig:
        """Create AppConfig instance from configuration data."""
        numerics_data = config_data.get("numerics", {}) or {}
        runtime_data = config_data.get("runtime", {}) or {}

        try:
            numerics = NumericsConfig(
                eigen_floor=float(numerics_data.get("eigen_floor", 1e-12)),
                rank_tol=float(numerics_data.get("rank_tol", 1e-10)),
                eigensolver=str(numerics_data.get("eigensolver", "lapack")),
            )
            runtime = RuntimeConfig(
                workers=int(runtime_data.get("workers", 1)),
                flake_reruns=int(runtime_data.get("flake_reruns", 1)),
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid configuration value: {e}")

        if numerics.eigensolver not in EIGENSOLVERS:
            raise ConfigError(
                f"Unknown eigensolver '{numerics.eigensolver}' (expected one of {', '.join(EIGENSOLVERS)})"
            )
        if runtime.workers < 1:
            raise ConfigError("runtime.workers must be at least 1")

        return AppConfig(numerics=numerics, runtime=runtime)

    def save_config(self, config_path: Optional[Path] = None) -> None:
        """Save current configuration to file."""
        if config_path is None:
            config_path = Path.home() / ".relevant-sampling" / "config.yaml"

        config_path.parent.mkdir(parents=True, exist_ok=True)

        try:
            with open(config_path, 'w', encoding='utf-8') as f:
                yaml.dump(asdict(self._config), f, default_flow_style=False, indent=2)
        except Exception as e:
            raise ConfigError(f"Failed to save config: {e}", path=str(config_path))

    def set_value(self, key_path: str, value: str) -> None:
        """Set a configuration value using dot notation (e.g., 'runtime.workers')."""
        section, name = self._split_key(key_path)
        current = getattr(section, name)
        try:
            converted = type(current)(value)
        except ValueError:
            raise ConfigError(f"Invalid value for {key_path}: {value}")

        if name == "eigensolver" and converted not in EIGENSOLVERS:
            raise ConfigError(f"Unknown eigensolver '{value}'")
        if name == "workers" and converted < 1:
            raise ConfigError("runtime.workers must be at least 1")

        setattr(section, name, converted)

    def get_value(self, key_path: str) -> Any:
        """Get a configuration value using dot notation."""
        section, name = self._split_key(key_path)
        return getattr(section, name)

    def _split_key(self, key_path: str):
        keys = key_path.split('.')

        if len(keys) != 2:
            raise ConfigError(f"Invalid key path: {key_path}")

        section = getattr(self._config, keys[0], None)
        if section is None or keys[1] not in {f.name for f in fields(section)}:
            raise ConfigError(f"Unknown configuration key: {key_path}")

        return section, keys[1]

    @classmethod
    def _reset_instance(cls) -> None:
        """Reset singleton instance for testing."""
        cls._instance = None
        cls._config = None


def get_config() -> AppConfig:
    """Get the application configuration."""
    return ConfigLoader().config


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one Monte Carlo campaign.

    ``r``, ``M`` and ``quad_order`` may be left unset; the experiment module
    fills them from the sample-count formula, the basis size and the
    quadrature-order rule.
    """
    R: float
    d: int
    N: int
    nu: float
    delta_target: float
    epsilon: float
    trials: int
    base_seed: int
    r: Optional[int] = None
    M: Optional[int] = None
    quad_order: Optional[int] = None
    regime: str = "threshold"  # threshold, small
    workers: Optional[int] = None


# Field order used for file output and CSV echo columns.
EXPERIMENT_FIELDS = (
    "R", "d", "N", "M", "r", "nu", "delta_target", "epsilon",
    "trials", "base_seed", "quad_order", "regime", "workers",
)
REQUIRED_FIELDS = ("R", "d", "N", "nu", "delta_target", "epsilon", "trials", "base_seed")
_INT_FIELDS = {"d", "N", "M", "r", "trials", "base_seed", "quad_order", "workers"}
_FLOAT_FIELDS = {"R", "nu", "delta_target", "epsilon"}
REGIMES = ("threshold", "small")


def _coerce(key: str, value: Any, path: str, line: int) -> Any:
    if value is None and key not in REQUIRED_FIELDS:
        return None
    if key in _INT_FIELDS:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{key}' must be an integer, got {value!r}", path=path, line=line)
        return value
    if key in _FLOAT_FIELDS:
        # YAML 1.1 reads exponent literals without a dot (1e-3) as strings
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                pass
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"'{key}' must be a number, got {value!r}", path=path, line=line)
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"'{key}' must be a string, got {value!r}", path=path, line=line)
    return value


def _check_ranges(data: Dict[str, Any], lines: Dict[str, int], path: str) -> None:
    def fail(key: str, message: str):
        raise ConfigError(f"'{key}' {message}", path=path, line=lines.get(key))

    if data["R"] < 1:
        fail("R", "must be at least 1")
    if data["d"] < 1:
        fail("d", "must be at least 1")
    if data["N"] < 1:
        fail("N", "must be at least 1")
    if data["nu"] <= 0:
        fail("nu", "must be positive")
    if not 0 < data["delta_target"] < 1:
        fail("delta_target", "must lie in (0, 1)")
    if not 0 < data["epsilon"] < 1:
        fail("epsilon", "must lie in (0, 1)")
    if data["trials"] < 1:
        fail("trials", "must be at least 1")
    if data["base_seed"] < 0:
        fail("base_seed", "must be non-negative")
    for key in ("r", "M", "quad_order", "workers"):
        if data.get(key) is not None and data[key] < 1:
            fail(key, "must be at least 1")
    if data.get("M") is not None and data["M"] < data["N"]:
        fail("M", "must be at least N")
    if data.get("regime", "threshold") not in REGIMES:
        fail("regime", f"must be one of {', '.join(REGIMES)}")


def load_experiment_config(path) -> ExperimentConfig:
    """Load a flat key-value YAML experiment file.

    Raises:
        ConfigError: with the file and 1-based line of the offending entry
    """
    path = str(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"Failed to read config file: {e}", path=path)

    loader = yaml.SafeLoader(text)
    try:
        node = loader.get_single_node()
        if node is None:
            raise ConfigError("Config file is empty", path=path, line=1)
        if not isinstance(node, yaml.MappingNode):
            raise ConfigError(
                "Config must be a flat key-value mapping", path=path, line=node.start_mark.line + 1
            )

        data: Dict[str, Any] = {}
        lines: Dict[str, int] = {}
        for key_node, value_node in node.value:
            line = key_node.start_mark.line + 1
            if not isinstance(value_node, yaml.ScalarNode):
                raise ConfigError("Nested values are not allowed", path=path, line=line)
            key = loader.construct_object(key_node)
            if key not in EXPERIMENT_FIELDS:
                raise ConfigError(f"Unknown key '{key}'", path=path, line=line)
            if key in data:
                raise ConfigError(f"Duplicate key '{key}'", path=path, line=line)
            data[key] = _coerce(key, loader.construct_object(value_node), path, line)
            lines[key] = line
    except yaml.MarkedYAMLError as e:
        mark = e.problem_mark or e.context_mark
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"Invalid YAML: {e.problem}", path=path, line=line)
    finally:
        loader.dispose()

    for key in REQUIRED_FIELDS:
        if key not in data:
            raise ConfigError(f"Missing required key '{key}'", path=path)

    _check_ranges(data, lines, path)
    return ExperimentConfig(**data)


def save_experiment_config(cfg: ExperimentConfig, path) -> None:
    """Write an experiment config as flat YAML; unset optional keys are omitted."""
    data = {key: getattr(cfg, key) for key in EXPERIMENT_FIELDS if getattr(cfg, key) is not None}
    try:
        with open(path, 'w', encoding='utf-8') as f:
            yaml.safe_dump(data, f, default_flow_style=False, sort_keys=False)
    except OSError as e:
        raise ConfigError(f"Failed to save config: {e}", path=str(path))
