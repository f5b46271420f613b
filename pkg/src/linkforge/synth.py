"""Semi-synthetic benchmarks with known ground truth.

Duplicate clusters come from a subgraph-sampling scheme: each base
entity is copied into every subgraph, and each copy is independently
renamed with probability ``sample_rate``. The distinct names produced
form one ground-truth cluster. Embeddings then place co-cluster members
around a shared center, with difficulty controlled by ``noise_sigma``
relative to ``cluster_sep``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .model import (
    ClusterPartition,
    EmbeddingTable,
    GroundTruth,
    LinkforgeError,
    Pair,
    ParameterError,
    gold_linkset,
)
from .rng import substream


class UndefinedRatioError(LinkforgeError, ZeroDivisionError):
    """A class ratio was requested over an empty denominator."""


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs for one benchmark.

    ``cluster_sep`` is the minimum *expected* Euclidean distance between
    cluster centers; ``noise_sigma`` is the per-coordinate scale of the
    Gaussian perturbation applied to each member.
    """

    n_base: int
    n_subgraphs: int
    sample_rate: float
    dim: int
    noise_sigma: float
    cluster_sep: float
    seed: int

    def __post_init__(self) -> None:
        if self.n_base < 1:
            raise ParameterError(f"n_base must be >= 1, got {self.n_base}")
        if self.n_subgraphs < 2:
            raise ParameterError(f"n_subgraphs must be >= 2, got {self.n_subgraphs}")
        if not 0.0 <= self.sample_rate <= 1.0:
            raise ParameterError(f"sample_rate must be in [0, 1], got {self.sample_rate}")
        if self.dim < 1:
            raise ParameterError(f"dim must be >= 1, got {self.dim}")
        if not self.noise_sigma >= 0.0:
            raise ParameterError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not self.cluster_sep >= 0.0:
            raise ParameterError(f"cluster_sep must be >= 0, got {self.cluster_sep}")


def _base_id(i: int) -> str:
    return f"e{i:06d}"


def generate_clusters(cfg: GeneratorConfig) -> GroundTruth:
    """Sample ground-truth duplicate clusters.

    For base entity ``i``, each of the ``n_subgraphs`` copies is renamed
    to ``e<i>/<subgraph>`` independently with probability
    ``sample_rate``. The cluster holds the m renamed IDs plus the shared
    original ID when m < n_subgraphs; renaming every copy (m =
    n_subgraphs) leaves no copy carrying the original name.
    """
    rng = substream(cfg.seed, "clusters")
    renamed = rng.random((cfg.n_base, cfg.n_subgraphs)) < cfg.sample_rate
    clusters: list[list[str]] = []
    for i in range(cfg.n_base):
        base = _base_id(i)
        members = [f"{base}/{s + 1}" for s in range(cfg.n_subgraphs) if renamed[i, s]]
        if len(members) < cfg.n_subgraphs:
            members.append(base)
        clusters.append(members)
    return ClusterPartition(clusters)


def generate_embeddings(truth: GroundTruth, cfg: GeneratorConfig) -> EmbeddingTable:
    """Embed every entity: cluster center plus Gaussian noise.

    Centers are uniform in a centered hypercube with side
    3·cluster_sep/√dim. For u, v independent uniforms in that cube,
    E|u_i − v_i| = side/3 per coordinate, so E‖u−v‖₁ = dim·side/3 and
    E‖u−v‖₂ ≥ E‖u−v‖₁/√dim = cluster_sep.
    """
    clusters = truth.clusters
    side = 3.0 * cfg.cluster_sep / math.sqrt(cfg.dim)
    centers = substream(cfg.seed, "centers").uniform(
        -side / 2.0, side / 2.0, size=(len(clusters), cfg.dim)
    )
    member_ids = [m for cluster in clusters for m in cluster]
    # Noise is always drawn (then scaled), so the stream consumed here
    # does not depend on noise_sigma.
    noise = substream(cfg.seed, "noise").standard_normal((len(member_ids), cfg.dim))
    rows = np.repeat(centers, [len(c) for c in clusters], axis=0)
    rows = rows + cfg.noise_sigma * noise
    order = sorted(range(len(member_ids)), key=lambda j: member_ids[j])
    return EmbeddingTable([member_ids[j] for j in order], rows[order])


@dataclass(frozen=True)
class SynthBenchmark:
    embeddings: EmbeddingTable
    truth: GroundTruth
    config: GeneratorConfig

    def __post_init__(self) -> None:
        if set(self.embeddings.ids) != self.truth.universe:
            raise ParameterError("embeddings and truth cover different entities")

    def save(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        io.write_embeddings_tsv(self.embeddings, out / "embeddings.tsv")
        io.write_clusters(self.truth, out / "clusters.txt")
        cfg = self.config
        io.write_config_kv(
            {
                "n_base": cfg.n_base,
                "n_subgraphs": cfg.n_subgraphs,
                "sample_rate": repr(cfg.sample_rate),
                "dim": cfg.dim,
                "noise_sigma": repr(cfg.noise_sigma),
                "cluster_sep": repr(cfg.cluster_sep),
                "seed": cfg.seed,
            },
            out / "config.txt",
        )

    @classmethod
    def load(cls, in_dir: str | Path) -> "SynthBenchmark":
        src = Path(in_dir)
        raw = io.read_config_kv(src / "config.txt")
        cfg = GeneratorConfig(
            n_base=int(raw["n_base"]),
            n_subgraphs=int(raw["n_subgraphs"]),
            sample_rate=float(raw["sample_rate"]),
            dim=int(raw["dim"]),
            noise_sigma=float(raw["noise_sigma"]),
            cluster_sep=float(raw["cluster_sep"]),
            seed=int(raw["seed"]),
        )
        return cls(
            embeddings=io.read_embeddings_tsv(src / "embeddings.tsv"),
            truth=io.read_clusters(src / "clusters.txt"),
            config=cfg,
        )


def generate(cfg: GeneratorConfig) -> SynthBenchmark:
    truth = generate_clusters(cfg)
    return SynthBenchmark(generate_embeddings(truth, cfg), truth, cfg)


def class_ratio(truth: GroundTruth, candidates: set[Pair]) -> tuple[float, float]:
    """Duplicate share among all pairs vs. among candidate pairs."""
    if not candidates:
        raise UndefinedRatioError("candidate set is empty")
    n = len(truth.universe)
    total = math.comb(n, 2)
    if total == 0:
        raise UndefinedRatioError("fewer than two entities")
    gold = gold_linkset(truth)
    return len(gold) / total, len(gold & candidates) / len(candidates)
