"""
Experiment manifests for the simulate command.

A manifest is a JSON object naming the arms to compare, the simulated users
and the study size. Arm definitions must be spelled out; everything else
falls back to the ambient configuration, and the fallbacks are logged so a
run's effective settings are visible at startup.

Example manifest:
    {
        "arms": [
            {"name": "rsvp_random", "paradigm": "rsvp_random"},
            {"name": "arsvp", "paradigm": "arsvp"}
        ],
        "auc_levels": [0.7, 0.8, 0.9],
        "reps": 20,
        "seed": 7,
        "timing": {"iti_ms": 150, "max_sequences": 8}
    }

Relative paths are resolved against the manifest's directory.
"""

import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

from src.config import Config, SimConfig, build_section
from src.core.exceptions import ConfigError
from src.core.models import DEFAULT_SYMBOLS, Vocabulary
from src.paradigms.arms import ArmSpec
from src.reporting import manifest_sha256
from src.simulation.study import DEFAULT_PHRASES_PER_LEVEL, DEFAULT_REPS

logger = logging.getLogger(__name__)

# Keys that fall back to the ambient configuration when absent
_DEFAULTABLE = frozenset(
    {
        "reps",
        "seed",
        "phrases_per_level",
        "vocabulary",
        "corpus",
        "phrases",
        "order",
        "backspace_prob",
        "timing",
    }
)
MANIFEST_KEYS = _DEFAULTABLE | {"arms", "auc_levels", "output_dir", "evidence_models"}


@dataclass
class ExperimentManifest:
    """Resolved contents of a manifest file."""

    arms: list[ArmSpec]
    auc_levels: list[float]
    reps: int
    seed: int
    phrases_per_level: int
    vocabulary: Vocabulary
    corpus: Path
    phrases: Path
    order: int
    backspace_prob: float
    simulation: SimConfig
    output_dir: Optional[Path] = None
    evidence_models: list[Path] = field(default_factory=list)
    # Hex digest of the file bytes (plus any command-line overrides)
    sha256: str = ""
    # Keys filled from the ambient configuration
    defaulted: list[str] = field(default_factory=list)

    def with_overrides(self, **overrides: Any) -> "ExperimentManifest":
        """
        Copy with command-line overrides applied; None values are ignored.

        The digest covers every override but the output directory.
        """
        applied = {k: v for k, v in overrides.items() if v is not None}
        if not applied:
            return self
        if "auc_levels" in applied:
            applied["auc_levels"] = _auc_levels(applied["auc_levels"])
        if "reps" in applied and applied["reps"] < 1:
            raise ConfigError(f"reps must be >= 1, got {applied['reps']}", key="reps")
        if "phrases_per_level" in applied and applied["phrases_per_level"] < 1:
            raise ConfigError("phrases_per_level must be >= 1", key="phrases_per_level")
        if "output_dir" in applied:
            applied["output_dir"] = Path(applied["output_dir"])
        affecting = {k: v for k, v in applied.items() if k != "output_dir"}
        digest = self.sha256
        if affecting:
            suffix = json.dumps(affecting, sort_keys=True)
            digest = manifest_sha256(f"{self.sha256}\n{suffix}".encode("utf-8"))
        return replace(self, sha256=digest, **applied)

    def describe(self) -> dict[str, Any]:
        """Effective settings, as logged at startup and stored in the summary."""
        return {
            "arms": [a.to_dict() for a in self.arms],
            "auc_levels": self.auc_levels,
            "reps": self.reps,
            "seed": self.seed,
            "phrases_per_level": self.phrases_per_level,
            "vocabulary": "".join(self.vocabulary.symbols),
            "corpus": self.corpus.name,
            "phrases": self.phrases.name,
            "order": self.order,
            "backspace_prob": self.backspace_prob,
            "timing": asdict(self.simulation),
            "evidence_models": [p.name for p in self.evidence_models],
        }


def _auc_levels(values: Any) -> list[float]:
    if not isinstance(values, list):
        raise ConfigError("auc_levels must be a list of numbers", key="auc_levels")
    levels = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not 0.5 <= v < 1.0:
            raise ConfigError(f"AUC level {v!r} outside [0.5, 1)", key="auc_levels")
        levels.append(float(v))
    return levels


def _int(data: dict[str, Any], key: str, default: int, minimum: int) -> int:
    value = data.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{key} must be an integer >= {minimum}, got {value!r}", key=key)
    return value


def _existing_path(raw: Any, base: Path, key: str) -> Path:
    if not isinstance(raw, str) or not raw:
        raise ConfigError(f"{key} must be a path string", key=key)
    path = Path(raw)
    if not path.is_absolute():
        path = base / path
    if not path.exists():
        raise ConfigError(f"{key} path does not exist: {path}", key=key)
    return path


def _vocabulary(raw: Any) -> Vocabulary:
    if not isinstance(raw, str):
        raise ConfigError("vocabulary must be a string of symbols", key="vocabulary")
    try:
        vocabulary = Vocabulary.from_string(raw)
    except ValueError as e:
        raise ConfigError(str(e), key="vocabulary") from e
    missing = sorted(set(DEFAULT_SYMBOLS) - set(vocabulary.symbols))
    if missing:
        raise ConfigError(
            f"vocabulary lacks symbols the corpus normalizes to: {''.join(missing)}",
            key="vocabulary",
        )
    return vocabulary


def parse_manifest(
    data: Any, config: Config, base_dir: Path, digest: str = ""
) -> ExperimentManifest:
    """
    Validate a decoded manifest against the ambient configuration.

    Args:
        data: Decoded JSON document
        config: Ambient configuration supplying the fallbacks
        base_dir: Directory relative paths are resolved against
        digest: sha256 of the manifest bytes

    Raises:
        ConfigError: unknown keys, missing arms, bad values or missing paths
    """
    if not isinstance(data, dict):
        raise ConfigError("Manifest must be a JSON object", key="manifest")
    unknown = sorted(set(data) - MANIFEST_KEYS)
    if unknown:
        raise ConfigError(f"Unknown manifest key(s): {', '.join(unknown)}", key=unknown[0])

    raw_arms = data.get("arms")
    if not isinstance(raw_arms, list) or not raw_arms:
        raise ConfigError("Manifest must define a nonempty 'arms' list", key="arms")
    arms = []
    for raw in raw_arms:
        if not isinstance(raw, dict):
            raise ConfigError("Each arm must be a JSON object", key="arms")
        arms.append(ArmSpec.from_dict(raw))

    defaulted = sorted(_DEFAULTABLE - set(data))
    lm_config = config.language_model

    evidence_paths = data.get("evidence_models", [])
    if not isinstance(evidence_paths, list):
        raise ConfigError("evidence_models must be a list of paths", key="evidence_models")
    evidence_models = [_existing_path(p, base_dir, "evidence_models") for p in evidence_paths]
    auc_levels = _auc_levels(data.get("auc_levels", []))
    if not auc_levels and not evidence_models:
        raise ConfigError(
            "Manifest needs auc_levels or evidence_models to define users", key="auc_levels"
        )

    seed = _int(data, "seed", config.simulation.rng_seed, 0)
    timing = data.get("timing", {})
    if not isinstance(timing, dict):
        raise ConfigError("timing must be an object", key="timing")
    if "rng_seed" in timing:
        raise ConfigError("Set the seed with the top-level 'seed' key", key="rng_seed")
    simulation = build_section(SimConfig, {**asdict(config.simulation), **timing}, "timing")
    simulation.rng_seed = seed

    backspace_prob = data.get("backspace_prob", lm_config.backspace_prob)
    if isinstance(backspace_prob, bool) or not isinstance(backspace_prob, (int, float)):
        raise ConfigError("backspace_prob must be a number", key="backspace_prob")
    if not 0.0 <= backspace_prob < 1.0:
        raise ConfigError("backspace_prob must lie in [0, 1)", key="backspace_prob")

    corpus = (
        _existing_path(data["corpus"], base_dir, "corpus")
        if "corpus" in data
        else _existing_path(str(lm_config.corpus_path), Path.cwd(), "corpus")
    )
    phrases = (
        _existing_path(data["phrases"], base_dir, "phrases")
        if "phrases" in data
        else _existing_path(str(lm_config.phrases_path), Path.cwd(), "phrases")
    )

    output_dir = data.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigError("output_dir must be a path string", key="output_dir")

    return ExperimentManifest(
        arms=arms,
        auc_levels=auc_levels,
        reps=_int(data, "reps", DEFAULT_REPS, 1),
        seed=seed,
        phrases_per_level=_int(data, "phrases_per_level", DEFAULT_PHRASES_PER_LEVEL, 1),
        vocabulary=_vocabulary(data.get("vocabulary", DEFAULT_SYMBOLS)),
        corpus=corpus,
        phrases=phrases,
        order=_int(data, "order", lm_config.order, 1),
        backspace_prob=float(backspace_prob),
        simulation=simulation,
        output_dir=(base_dir / output_dir) if output_dir else None,
        evidence_models=evidence_models,
        sha256=digest,
        defaulted=defaulted,
    )


def load_manifest(path: str | Path, config: Config) -> ExperimentManifest:
    """
    Read and validate a manifest file.

    Raises:
        ConfigError: missing file, invalid JSON or an invalid manifest
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"Cannot read manifest {path}: {e}", key="manifest") from e
    try:
        data = json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ConfigError(f"Manifest {path} is not valid JSON: {e}", key="manifest") from e
    manifest = parse_manifest(data, config, path.resolve().parent, manifest_sha256(raw))
    logger.info(
        f"Loaded manifest {path} ({len(manifest.arms)} arms, sha256 {manifest.sha256[:12]})"
    )
    return manifest


def log_effective_settings(manifest: ExperimentManifest) -> None:
    """Log every setting, marking those taken from the ambient configuration."""
    settings = manifest.describe()
    for key in sorted(settings):
        if key == "arms":
            continue
        source = "default" if key in manifest.defaulted else "manifest"
        logger.info(f"  {key} = {settings[key]} ({source})")
    for arm in manifest.arms:
        logger.info(f"  arm {arm.name}: {arm.paradigm.value}")
