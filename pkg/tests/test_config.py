"""Tests for configuration loading."""

import logging

import pytest

from src.config import (
    Config,
    EvidenceConfig,
    LoggingConfig,
    SimConfig,
    load_config,
    setup_logging,
)
from src.core.exceptions import ConfigError


class TestSimConfig:
    """Tests for timing and decision defaults."""

    def test_defaults(self):
        """Test the published presentation constants."""
        config = SimConfig()
        assert config.iti_ms == 150
        assert config.max_sequences == 8
        assert config.trials_per_sequence == 14
        assert 0.5 < config.confidence_threshold < 1

    @pytest.mark.parametrize(
        "kwargs,key",
        [
            ({"iti_ms": 0}, "iti_ms"),
            ({"max_sequences": 0}, "max_sequences"),
            ({"confidence_threshold": 0.5}, "confidence_threshold"),
            ({"confidence_threshold": 1.0}, "confidence_threshold"),
            ({"post_decision_pause_ms": -1}, "post_decision_pause_ms"),
        ],
    )
    def test_invalid_values(self, kwargs, key):
        with pytest.raises(ConfigError) as exc:
            SimConfig(**kwargs)
        assert exc.value.key == key


class TestEvidenceConfig:
    def test_quadrature_floor(self):
        with pytest.raises(ConfigError):
            EvidenceConfig(quadrature_points=1000)

    def test_grid_range(self):
        with pytest.raises(ConfigError):
            EvidenceConfig(lambda_grid=[0.0, 1.5])


class TestLoadConfig:
    """Tests for YAML loading and environment overrides."""

    def test_bundled_default_loads(self):
        config = load_config()
        assert isinstance(config, Config)
        assert config.simulation.max_sequences == 8

    def test_missing_explicit_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(str(tmp_path / "nope.yaml"))

    def test_partial_file_keeps_defaults(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("simulation:\n  iti_ms: 200\n")
        config = load_config(str(path))
        assert config.simulation.iti_ms == 200
        assert config.simulation.max_sequences == 8
        assert config.language_model.order == 6

    def test_unknown_section_rejected(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("database:\n  url: x\n")
        with pytest.raises(ConfigError) as exc:
            load_config(str(path))
        assert exc.value.key == "database"

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("simulation:\n  itii_ms: 200\n")
        with pytest.raises(ConfigError) as exc:
            load_config(str(path))
        assert exc.value.key == "itii_ms"

    def test_env_overrides(self, tmp_path, monkeypatch):
        """Test that environment variables win over the file."""
        monkeypatch.setenv("RBSE_SIM_OUTPUT_DIR", str(tmp_path / "out"))
        monkeypatch.setenv("RBSE_SIM_WORKERS", "3")
        monkeypatch.setenv("RBSE_SIM_SEED", "42")
        monkeypatch.setenv("RBSE_SIM_LOG_LEVEL", "DEBUG")
        config = load_config()
        assert config.output.directory == str(tmp_path / "out")
        assert config.worker.workers == 3
        assert config.simulation.rng_seed == 42
        assert config.logging.level == "DEBUG"

    def test_corpus_paths_default_to_bundled(self):
        config = load_config()
        assert config.language_model.corpus_path.name == "corpus.txt"
        assert config.language_model.phrases_path.exists()


class TestSetupLogging:
    def test_file_handler_creates_directory(self, tmp_path):
        log_file = tmp_path / "logs" / "run.log"
        setup_logging(LoggingConfig(level="WARNING", file=str(log_file)))
        logging.getLogger("src.test").warning("hello")
        assert log_file.parent.exists()
        assert logging.getLogger().level == logging.WARNING
