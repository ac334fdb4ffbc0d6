"""Configuration management for the typing simulator."""

import logging
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import yaml

from src.core.exceptions import ConfigError

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).parent / "data"
DEFAULT_CORPUS = DATA_DIR / "corpus.txt"
DEFAULT_PHRASES = DATA_DIR / "phrases.txt"


@dataclass
class SimConfig:
    """Presentation timing and decision constants for simulated typing."""

    # Time between onsets of two consecutive trials
    iti_ms: float = 150.0
    # m_s: sequences allowed before a forced decision
    max_sequences: int = 8
    # N_t: trials per sequence for the singleton paradigms
    trials_per_sequence: int = 14
    confidence_threshold: float = 0.9
    inter_sequence_pause_ms: float = 1000.0
    post_decision_pause_ms: float = 500.0
    # A phrase not finished within this much simulated time is incomplete
    phrase_time_budget_ms: float = 300_000.0
    max_consecutive_errors: int = 5
    rng_seed: int = 0

    def __post_init__(self) -> None:
        if self.iti_ms <= 0:
            raise ConfigError(f"iti_ms must be positive, got {self.iti_ms}", key="iti_ms")
        if self.max_sequences < 1:
            raise ConfigError("max_sequences must be a positive integer", key="max_sequences")
        if self.trials_per_sequence < 1:
            raise ConfigError(
                "trials_per_sequence must be a positive integer", key="trials_per_sequence"
            )
        if not 0.5 < self.confidence_threshold < 1.0:
            raise ConfigError(
                f"confidence_threshold must lie in (0.5, 1), got {self.confidence_threshold}",
                key="confidence_threshold",
            )
        for name in ("inter_sequence_pause_ms", "post_decision_pause_ms"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be nonnegative", key=name)
        if self.phrase_time_budget_ms <= 0:
            raise ConfigError("phrase_time_budget_ms must be positive", key="phrase_time_budget_ms")
        if self.max_consecutive_errors < 1:
            raise ConfigError(
                "max_consecutive_errors must be positive", key="max_consecutive_errors"
            )


@dataclass
class LanguageModelConfig:
    """Character n-gram settings."""

    order: int = 6
    backspace_prob: float = 0.05
    # Interpolation: top_weight on the highest seen order, scaled by decay per order below
    top_weight: float = 0.4
    decay: float = 0.6
    # Mass reserved for the uniform floor over the non-backspace symbols
    uniform_weight: float = 0.01
    corpus: Optional[str] = None  # None = bundled corpus
    phrases: Optional[str] = None  # None = bundled phrase pool

    def __post_init__(self) -> None:
        if self.order < 1:
            raise ConfigError("order must be >= 1", key="order")
        if not 0.0 <= self.backspace_prob < 1.0:
            raise ConfigError("backspace_prob must lie in [0, 1)", key="backspace_prob")
        if not 0.0 <= self.uniform_weight <= 1.0:
            raise ConfigError("uniform_weight must lie in [0, 1]", key="uniform_weight")
        if not 0.0 < self.top_weight <= 1.0 or not 0.0 < self.decay <= 1.0:
            raise ConfigError("top_weight and decay must lie in (0, 1]", key="top_weight")

    @property
    def corpus_path(self) -> Path:
        return Path(self.corpus) if self.corpus else DEFAULT_CORPUS

    @property
    def phrases_path(self) -> Path:
        return Path(self.phrases) if self.phrases else DEFAULT_PHRASES


@dataclass
class EvidenceConfig:
    """Calibration and quadrature settings for evidence models."""

    quadrature_points: int = 4096
    folds: int = 10
    lambda_grid: list[float] = field(default_factory=lambda: [0.0, 0.2, 0.4, 0.6, 0.8, 1.0])
    gamma_grid: list[float] = field(default_factory=lambda: [0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0])

    def __post_init__(self) -> None:
        if self.quadrature_points < 2048:
            raise ConfigError("quadrature_points must be >= 2048", key="quadrature_points")
        if self.folds < 2:
            raise ConfigError("folds must be >= 2", key="folds")
        for name in ("lambda_grid", "gamma_grid"):
            grid = getattr(self, name)
            if not grid or any(not 0.0 <= v <= 1.0 for v in grid):
                raise ConfigError(f"{name} must be a nonempty list in [0, 1]", key=name)


@dataclass
class WorkerConfig:
    """Parallel session execution."""

    workers: int = 1

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ConfigError("workers must be >= 1", key="workers")


@dataclass
class OutputConfig:
    """Where commands write their files."""

    directory: str = "./data/results"


@dataclass
class LoggingConfig:
    """Logging configuration."""

    level: str = "INFO"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    file: Optional[str] = None


@dataclass
class Config:
    """Main configuration container."""

    simulation: SimConfig = field(default_factory=SimConfig)
    language_model: LanguageModelConfig = field(default_factory=LanguageModelConfig)
    evidence: EvidenceConfig = field(default_factory=EvidenceConfig)
    worker: WorkerConfig = field(default_factory=WorkerConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)


_SECTIONS = {
    "simulation": SimConfig,
    "language_model": LanguageModelConfig,
    "evidence": EvidenceConfig,
    "worker": WorkerConfig,
    "output": OutputConfig,
    "logging": LoggingConfig,
}


def build_section(cls: type, data: Optional[dict[str, Any]], section: str) -> Any:
    """
    Construct a section dataclass, rejecting keys it does not declare.

    Args:
        cls: Section dataclass type
        data: Raw mapping from the file (None means all defaults)
        section: Section name used in error messages

    Returns:
        Populated section instance
    """
    data = data or {}
    if not isinstance(data, dict):
        raise ConfigError(f"Section '{section}' must be a mapping", key=section)
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(f"Unknown key(s) in '{section}': {', '.join(unknown)}", key=unknown[0])
    try:
        return cls(**data)
    except TypeError as e:
        raise ConfigError(f"Invalid value in '{section}': {e}", key=section) from e


def load_config(config_path: Optional[str] = None) -> Config:
    """
    Load configuration from YAML file with environment variable overrides.

    Args:
        config_path: Path to config file. Defaults to config/default.yaml

    Returns:
        Populated Config dataclass
    """
    if config_path is None:
        candidates = [
            Path("config/default.yaml"),
            Path(__file__).parent.parent / "config" / "default.yaml",
        ]
        for candidate in candidates:
            if candidate.exists():
                config_path = str(candidate)
                break
    elif not Path(config_path).exists():
        raise ConfigError(f"Config file not found: {config_path}", key="config")

    config = Config()

    if config_path and Path(config_path).exists():
        with open(config_path) as f:
            data = yaml.safe_load(f)

        if data:
            unknown = sorted(set(data) - set(_SECTIONS))
            if unknown:
                raise ConfigError(
                    f"Unknown config section(s): {', '.join(unknown)}", key=unknown[0]
                )
            for name, cls in _SECTIONS.items():
                if name in data:
                    setattr(config, name, build_section(cls, data[name], name))

    # Environment variable overrides
    if os.environ.get("RBSE_SIM_LOG_LEVEL"):
        config.logging.level = os.environ["RBSE_SIM_LOG_LEVEL"]
    if os.environ.get("RBSE_SIM_OUTPUT_DIR"):
        config.output.directory = os.environ["RBSE_SIM_OUTPUT_DIR"]
    if os.environ.get("RBSE_SIM_WORKERS"):
        config.worker = WorkerConfig(workers=int(os.environ["RBSE_SIM_WORKERS"]))
    if os.environ.get("RBSE_SIM_SEED"):
        config.simulation.rng_seed = int(os.environ["RBSE_SIM_SEED"])

    return config


def setup_logging(config: LoggingConfig) -> None:
    """
    Configure logging based on configuration.

    Args:
        config: Logging configuration
    """
    level = getattr(logging, config.level.upper(), logging.INFO)

    handlers: list[logging.Handler] = [logging.StreamHandler()]

    if config.file:
        log_path = Path(config.file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(config.file))

    logging.basicConfig(
        level=level,
        format=config.format,
        handlers=handlers,
        force=True,
    )

    # Reduce noise from third-party libraries
    logging.getLogger("concurrent.futures").setLevel(logging.WARNING)

    logger.info(f"Logging configured at level {config.level}")
