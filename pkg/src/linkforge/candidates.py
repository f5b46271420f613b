"""Exact k-nearest-neighbor candidate pairs under Euclidean distance.

A kd-tree accelerates the search; :func:`knn_brute_force` is the plain
O(|E|²) scan kept as the reference implementation. Both routes rank
candidates by the same squared-distance expression and break distance
ties by lexicographic entity ID, so their outputs are identical — and
because each entity's query reads only the immutable index, results do
not depend on any parallel execution schedule.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .model import EmbeddingTable, EntityId, Pair, ParameterError, canonical_pair

# Relative + absolute slack applied to the k-th neighbor distance before
# the ball query, covering rounding differences between the tree's
# distance computation and ours. Exact ties sit inside the ball anyway
# (the query is inclusive).
_RADIUS_REL = 1e-12
_RADIUS_ABS = 1e-12


@dataclass(frozen=True)
class CandidateSet:
    """Canonicalized union of all (entity, neighbor) pairs for one k."""

    pairs: frozenset[Pair]
    k: int


def _sorted_view(table: EmbeddingTable) -> tuple[list[EntityId], np.ndarray]:
    order = sorted(range(len(table)), key=table.ids.__getitem__)
    ids = [table.ids[j] for j in order]
    return ids, table.vectors[order]


def _sq_dists(vectors: np.ndarray, i: int, idx: np.ndarray) -> np.ndarray:
    diff = vectors[idx] - vectors[i]
    return np.einsum("ij,ij->i", diff, diff)


def _rank(vectors: np.ndarray, i: int, idx: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest among ``idx``, ties broken by position
    (= lexicographic ID, since callers work in ID-sorted index space)."""
    d2 = _sq_dists(vectors, i, idx)
    return idx[np.lexsort((idx, d2))[:k]]


def _check_k(table: EmbeddingTable, k: int) -> None:
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if k >= len(table):
        raise ParameterError(f"k={k} must be smaller than the entity count {len(table)}")


def knn(table: EmbeddingTable, k: int) -> dict[EntityId, list[EntityId]]:
    """Per entity, its k nearest *other* entities, ascending by distance.

    Exact: the kd-tree only proposes a superset (everything within the
    k-th neighbor distance, slightly inflated); the final ranking comes
    from the same expression the brute-force scan uses.
    """
    _check_k(table, k)
    ids, vectors = _sorted_view(table)
    tree = cKDTree(vectors)
    # k+1 nearest including the query point itself, so the k-th nearest
    # other entity is always within the returned radius.
    dists, _ = tree.query(vectors, k=k + 1)
    radii = dists[:, -1] * (1.0 + _RADIUS_REL) + _RADIUS_ABS
    balls = tree.query_ball_point(vectors, radii)
    result: dict[EntityId, list[EntityId]] = {}
    for i, ball in enumerate(balls):
        idx = np.asarray([j for j in ball if j != i], dtype=np.intp)
        result[ids[i]] = [ids[j] for j in _rank(vectors, i, idx, k)]
    return result


def knn_brute_force(table: EmbeddingTable, k: int) -> dict[EntityId, list[EntityId]]:
    """Reference implementation: full distance scan, no index."""
    _check_k(table, k)
    ids, vectors = _sorted_view(table)
    n = len(ids)
    everyone = np.arange(n, dtype=np.intp)
    result: dict[EntityId, list[EntityId]] = {}
    for i in range(n):
        idx = np.delete(everyone, i)
        result[ids[i]] = [ids[j] for j in _rank(vectors, i, idx, k)]
    return result


def candidate_pairs(table: EmbeddingTable, k: int) -> CandidateSet:
    """Union of every entity's k nearest neighbors as canonical pairs.

    Mutual neighbors collapse to one pair, so the result holds at most
    k·|E| pairs and usually fewer.
    """
    neighbors = knn(table, k)
    pairs = {
        canonical_pair(e, nb) for e, nbs in neighbors.items() for nb in nbs
    }
    return CandidateSet(frozenset(pairs), k)
