"""Shared fixtures: a small synthetic benchmark and a model trained on it.

Session-scoped so the expensive pieces (generation, CV training) run once.
"""

import numpy as np
import pytest

from linkforge import classifier, synth
from linkforge.candidates import candidate_pairs
from linkforge.classifier import FeatureSpec
from linkforge.model import EmbeddingTable


def random_weights(rng: np.random.Generator, n: int, low: float = -2.0, high: float = 2.0) -> np.ndarray:
    """Symmetric weight matrix with zero diagonal, entries Uniform(low, high)."""
    w = np.zeros((n, n))
    iu, ju = np.triu_indices(n, 1)
    vals = rng.uniform(low, high, size=len(iu))
    w[iu, ju] = vals
    w[ju, iu] = vals
    return w


def ids_for(n: int) -> list[str]:
    return [f"x{i:04d}" for i in range(n)]


@pytest.fixture(scope="session")
def small_bench() -> synth.SynthBenchmark:
    cfg = synth.GeneratorConfig(
        n_base=60,
        n_subgraphs=3,
        sample_rate=0.5,
        dim=16,
        noise_sigma=0.15,
        cluster_sep=4.0,
        seed=42,
    )
    return synth.generate(cfg)


@pytest.fixture(scope="session")
def small_model(small_bench) -> classifier.LrModel:
    cands = candidate_pairs(small_bench.embeddings, 3)
    labeled = classifier.sample_training_pairs(cands.pairs, small_bench.truth, 60, seed=7)
    return classifier.train(labeled, small_bench.embeddings, FeatureSpec("cosine"), seed=7)


@pytest.fixture(scope="session")
def small_labels(small_bench) -> dict:
    cands = candidate_pairs(small_bench.embeddings, 3)
    return classifier.sample_training_pairs(cands.pairs, small_bench.truth, 60, seed=7)


@pytest.fixture
def tiny_table() -> EmbeddingTable:
    return EmbeddingTable.from_dict(
        {
            "a": [1.0, 0.0],
            "b": [0.9, 0.1],
            "c": [0.0, 1.0],
            "d": [-1.0, 0.0],
        }
    )
