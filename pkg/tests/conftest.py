"""
Pytest configuration and fixtures for the typing simulator tests.
"""

import numpy as np
import pytest

from src.config import DEFAULT_CORPUS, DEFAULT_PHRASES, SimConfig
from src.core.models import Vocabulary
from src.evidence.density import gaussian_evidence_model, sigma_point_estimates
from src.language.ngram import train
from src.language.phrases import load_corpus, load_phrase_pool


@pytest.fixture
def vocab():
    """The default 28-symbol vocabulary (A-Z, backspace, space)."""
    return Vocabulary()


@pytest.fixture
def rng():
    """A seeded generator; tests never touch global random state."""
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def corpus_text():
    return load_corpus(DEFAULT_CORPUS)


@pytest.fixture(scope="session")
def english_lm(corpus_text):
    """Order-3 model on the bundled corpus (order 6 is sparse on so little text)."""
    return train(corpus_text, order=3)


@pytest.fixture(scope="session")
def phrase_pool():
    return load_phrase_pool(DEFAULT_PHRASES)


@pytest.fixture(scope="session")
def model_080():
    """Gaussian evidence model with AUC 0.8."""
    return gaussian_evidence_model(0.8)


@pytest.fixture(scope="session")
def sigma_080(model_080):
    return sigma_point_estimates(model_080)


@pytest.fixture
def sim_config():
    return SimConfig()


@pytest.fixture
def write_manifest(tmp_path):
    """Write a manifest dict to a JSON file and return its path."""
    import json

    def _write(data: dict, name: str = "manifest.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return path

    return _write
