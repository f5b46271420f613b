"""linkforge: entity matching with exact cluster-editing repair.

The pipeline goes: exact kNN candidate pairs over embeddings, an
elastic-net logistic pair classifier trained on a small expert-labeled
sample, a probability cutoff θ into a tentative linkset, connected
components (capped in size), and then — instead of plain transitive
closure — an exact weighted cluster-editing repair of each component.
"""

from .candidates import CandidateSet, candidate_pairs, knn
from .classifier import FeatureSpec, LrModel, score, train
from .editing import pair_weight, repair, solve_exact
from .evaluation import SweepReport, sweep, theta_grid
from .graphops import connected_components, tentative_linkset, transitive_closure
from .model import (
    ClusterPartition,
    EmbeddingTable,
    EntityId,
    LinkforgeError,
    Linkset,
    Pair,
    canonical_pair,
    gold_linkset,
)
from .synth import GeneratorConfig, SynthBenchmark, generate

__version__ = "0.1.0"

__all__ = [
    "CandidateSet",
    "ClusterPartition",
    "EmbeddingTable",
    "EntityId",
    "FeatureSpec",
    "GeneratorConfig",
    "LinkforgeError",
    "Linkset",
    "LrModel",
    "Pair",
    "SweepReport",
    "SynthBenchmark",
    "__version__",
    "candidate_pairs",
    "canonical_pair",
    "connected_components",
    "generate",
    "gold_linkset",
    "knn",
    "pair_weight",
    "repair",
    "score",
    "solve_exact",
    "sweep",
    "tentative_linkset",
    "theta_grid",
    "train",
    "transitive_closure",
]
