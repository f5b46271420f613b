"""Shared domain types for entity-matching linksets.

Conventions used throughout the package:

* an entity id is an opaque non-empty string, compared byte-wise;
* an entity pair is a 2-tuple in canonical (ascending) order, so ``(x, y)``
  and ``(y, x)`` are one value;
* a linkset is a ``set`` of canonical pairs, interpreted as same-as
  assertions (self-pairs are excluded everywhere; reflexivity is left to
  downstream reasoners);
* expert labels are a ``dict`` mapping pair -> bool (True = duplicate) and
  classifier scores are a ``dict`` mapping pair -> probability.

All types here are immutable after construction and safe to share
read-only across concurrent workers.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

EntityId = str
Pair = tuple[EntityId, EntityId]
Linkset = set[Pair]


class LinkforgeError(Exception):
    """Base class for all errors raised by this package."""


class SelfLinkError(LinkforgeError, ValueError):
    """An entity was paired with itself."""


class ParameterError(LinkforgeError, ValueError):
    """A parameter is outside its documented range."""


class LookupError_(LinkforgeError, KeyError):
    """An entity id is missing from an embedding table."""


def canonical_pair(x: EntityId, y: EntityId) -> Pair:
    """Return the unordered pair (x, y) in canonical ascending order.

    Raises SelfLinkError when ``x == y``; self-links are rejected
    everywhere in the pipeline.
    """
    if x == y:
        raise SelfLinkError(f"self-link rejected: {x!r}")
    return (x, y) if x < y else (y, x)


def is_canonical(pair: Pair) -> bool:
    a, b = pair
    return a < b


def all_pairs(ids: Iterable[EntityId]) -> Iterator[Pair]:
    """Yield every canonical pair over ``ids`` (ids deduplicated, sorted)."""
    ordered = sorted(set(ids))
    return itertools.combinations(ordered, 2)


def validate_theta(theta: float) -> float:
    """Check a cutoff value lies strictly inside (0, 1)."""
    if not (0.0 < theta < 1.0) or math.isnan(theta):
        raise ParameterError(f"cutoff theta must be in (0, 1), got {theta!r}")
    return float(theta)


class EmbeddingTable:
    """Entity ids mapped to fixed-dimension real vectors.

    Row order is preserved from construction and is the deterministic
    iteration order everywhere. Vectors are stored as one contiguous
    float64 matrix; every component must be finite.
    """

    __slots__ = ("_ids", "_vectors", "_index")

    def __init__(self, ids: Sequence[EntityId], vectors: np.ndarray):
        ids = tuple(ids)
        # private copy, frozen: tables are immutable once built
        vectors = np.array(vectors, dtype=np.float64, order="C")
        vectors.setflags(write=False)
        if vectors.ndim != 2:
            raise ParameterError("vectors must be a 2-D array")
        if len(ids) != vectors.shape[0]:
            raise ParameterError(
                f"{len(ids)} ids but {vectors.shape[0]} vector rows"
            )
        if vectors.shape[1] < 1:
            raise ParameterError("embedding dimension must be positive")
        if not np.all(np.isfinite(vectors)):
            raise ParameterError("embedding vectors must be finite")
        index: dict[EntityId, int] = {}
        for row, eid in enumerate(ids):
            if not eid:
                raise ParameterError("entity ids must be non-empty")
            if eid in index:
                raise ParameterError(f"duplicate entity id {eid!r}")
            index[eid] = row
        self._ids = ids
        self._vectors = vectors
        self._index = index

    @classmethod
    def from_dict(cls, rows: Mapping[EntityId, Sequence[float]]) -> "EmbeddingTable":
        ids = list(rows)
        return cls(ids, np.asarray([rows[i] for i in ids], dtype=np.float64))

    @property
    def ids(self) -> tuple[EntityId, ...]:
        return self._ids

    @property
    def vectors(self) -> np.ndarray:
        return self._vectors

    @property
    def dim(self) -> int:
        return int(self._vectors.shape[1])

    def __len__(self) -> int:
        return len(self._ids)

    def __contains__(self, eid: object) -> bool:
        return eid in self._index

    def row(self, eid: EntityId) -> int:
        try:
            return self._index[eid]
        except KeyError:
            raise LookupError_(f"unknown entity id {eid!r}") from None

    def vector(self, eid: EntityId) -> np.ndarray:
        return self._vectors[self.row(eid)]

    def matrix(self, ids: Sequence[EntityId]) -> np.ndarray:
        """Vectors for ``ids`` as one (len(ids), dim) matrix."""
        rows = [self.row(e) for e in ids]
        return self._vectors[rows]


@dataclass(frozen=True)
class ClusterPartition:
    """A partition of an entity universe into disjoint non-empty clusters.

    Clusters are stored in canonical order (sorted by smallest member) with
    sorted members, so equal partitions compare and hash equal. The linkset
    induced by a partition (all intra-cluster pairs) is transitively closed
    by construction.
    """

    clusters: tuple[tuple[EntityId, ...], ...]

    def __init__(self, clusters: Iterable[Iterable[EntityId]]):
        canon: list[tuple[EntityId, ...]] = []
        seen: set[EntityId] = set()
        for cluster in clusters:
            members = tuple(sorted(set(cluster)))
            if not members:
                raise ParameterError("clusters must be non-empty")
            overlap = seen.intersection(members)
            if overlap:
                raise ParameterError(
                    f"clusters must be disjoint; {sorted(overlap)[0]!r} repeats"
                )
            seen.update(members)
            canon.append(members)
        canon.sort(key=lambda c: c[0])
        object.__setattr__(self, "clusters", tuple(canon))

    @property
    def universe(self) -> frozenset[EntityId]:
        return frozenset(itertools.chain.from_iterable(self.clusters))

    def __len__(self) -> int:
        return len(self.clusters)

    def cluster_of(self) -> dict[EntityId, int]:
        """Map each entity to the index of its cluster."""
        return {
            e: i for i, cluster in enumerate(self.clusters) for e in cluster
        }

    def sizes(self) -> list[int]:
        return [len(c) for c in self.clusters]


# The ground truth of a synthetic benchmark is exactly a partition of all
# generated entities into duplicate clusters.
GroundTruth = ClusterPartition


def gold_linkset(truth: ClusterPartition) -> Linkset:
    """All intra-cluster pairs of a ground-truth partition.

    The result has sum(C(|c|, 2)) links: singleton clusters contribute
    nothing and a cluster of n entities contributes the complete graph.
    """
    links: Linkset = set()
    for cluster in truth.clusters:
        links.update(itertools.combinations(cluster, 2))
    return links


def induced_linkset(partition: ClusterPartition) -> Linkset:
    """Alias of gold_linkset for non-gold partitions (same construction)."""
    return gold_linkset(partition)
