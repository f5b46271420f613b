"""Weighted cluster-editing instances.

A probability p and cutoff θ turn into the log-odds weight

    w = logit(p) − logit(θ),

positive exactly when p > θ. An instance is one connected component's
complete weight matrix (every unordered pair inside the component is
scored, candidate pair or not). ``kernelize`` applies two provably safe
reduction rules before the exponential search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .. import classifier
from ..graphops import Component
from ..model import (
    ClusterPartition,
    EmbeddingTable,
    EntityId,
    LinkforgeError,
    Pair,
    ParameterError,
    all_pairs,
    canonical_pair,
    validate_theta,
)

#: Probabilities must be clamped into [PROB_FLOOR, 1−PROB_FLOOR] before
#: any logit transform.
PROB_FLOOR = classifier.PROB_FLOOR


class DomainError(LinkforgeError, ValueError):
    """logit() was asked for a probability outside the clamped range."""


def _logit(p: float) -> float:
    return math.log(p) - math.log1p(-p)


def pair_weight(p: float, theta: float) -> float:
    """w = logit(p) − logit(θ); sign(w) = sign(p − θ)."""
    validate_theta(theta)
    if not PROB_FLOOR <= p <= 1.0 - PROB_FLOOR:
        raise DomainError(
            f"probability {p!r} outside [{PROB_FLOOR}, 1-{PROB_FLOOR}]; clamp first"
        )
    return _logit(p) - _logit(theta)


def pair_weights(p: np.ndarray, theta: float) -> np.ndarray:
    """Vectorized :func:`pair_weight`."""
    validate_theta(theta)
    p = np.asarray(p, dtype=np.float64)
    if p.size and not ((PROB_FLOOR <= p) & (p <= 1.0 - PROB_FLOOR)).all():
        raise DomainError("probabilities outside the clamped range; clamp first")
    return (np.log(p) - np.log1p(-p)) - _logit(theta)


@dataclass(frozen=True, eq=False)
class EditingInstance:
    """Entities (sorted, unique) and their symmetric weight matrix.

    The diagonal is unused and stored as zero; all weights are finite.
    Forbidden pairs are *not* representable here — they are carried
    separately (see :class:`KernelResult`) and applied by the solver.
    """

    entities: tuple[EntityId, ...]
    weights: np.ndarray

    def __init__(self, entities, weights):
        entities = tuple(entities)
        if list(entities) != sorted(set(entities)):
            raise ParameterError("entities must be sorted and unique")
        weights = np.array(weights, dtype=np.float64)
        n = len(entities)
        if weights.shape != (n, n):
            raise ParameterError(f"weight matrix must be {n}x{n}, got {weights.shape}")
        if not np.isfinite(weights).all():
            raise ParameterError("weights must be finite")
        if not np.array_equal(weights, weights.T):
            raise ParameterError("weight matrix must be symmetric")
        np.fill_diagonal(weights, 0.0)
        weights.setflags(write=False)
        object.__setattr__(self, "entities", entities)
        object.__setattr__(self, "weights", weights)

    @property
    def n(self) -> int:
        return len(self.entities)

    def index_of(self, entity: EntityId) -> int:
        # entities is sorted, so bisection would do; n ≤ 50 keeps this moot
        return self.entities.index(entity)


def build_instance(
    component: Component,
    model: classifier.LrModel,
    table: EmbeddingTable,
    labeled: Mapping[Pair, bool],
    theta: float,
) -> EditingInstance:
    """Score *every* pair inside the component (expert overrides
    applied), then weight via :func:`pair_weight`."""
    entities = sorted(component.entities)
    pairs = list(all_pairs(entities))
    scored = classifier.apply_label_override(
        classifier.score(model, pairs, table), labeled
    )
    index = {e: i for i, e in enumerate(entities)}
    W = np.zeros((len(entities), len(entities)))
    for pair in pairs:
        w = pair_weight(scored[pair], theta)
        i, j = index[pair[0]], index[pair[1]]
        W[i, j] = W[j, i] = w
    return EditingInstance(entities, W)


def partition_objective(inst: EditingInstance, partition: ClusterPartition) -> float:
    """Σ of intra-cluster weights, accumulated in canonical order.

    The order is fixed — clusters by smallest member, then within each
    sorted cluster pairs (a, b) by ascending b then ascending a — so
    the solver, the search engines and the enumeration oracle all
    produce bit-identical objectives for the same partition.
    """
    if partition.universe != set(inst.entities):
        raise ParameterError("partition does not cover the instance's entities")
    index = {e: i for i, e in enumerate(inst.entities)}
    W = inst.weights
    total = 0.0
    for cluster in partition.clusters:
        idx = [index[e] for e in cluster]
        for b in range(1, len(idx)):
            jb = idx[b]
            for a in range(b):
                total += W[idx[a], jb]
    return total


@dataclass(frozen=True)
class KernelResult:
    """Outcome of the safe reduction rules.

    ``instance`` is the reduced problem over representative entities;
    ``merges`` maps each representative to the full group it absorbed
    (itself included); ``forbidden`` lists representative pairs that
    must never share a cluster; ``offset`` is the objective already
    locked in by the merges (sum of merged-pair weights at merge time).
    """

    instance: EditingInstance
    merges: dict[EntityId, tuple[EntityId, ...]]
    forbidden: frozenset[Pair]
    offset: float

    def lift(self, reduced: ClusterPartition) -> ClusterPartition:
        """Expand a partition of the reduced instance back to the
        original entities."""
        return ClusterPartition(
            [
                sorted(e for rep in cluster for e in self.merges[rep])
                for cluster in reduced.clusters
            ]
        )


def kernelize(inst: EditingInstance) -> KernelResult:
    """Apply two safe rules; every forced decision keeps at least one
    optimal solution reachable.

    Rule (a), run to fixpoint first: merge i, j when

        w(i,j) ≥ Σ_{k≠i,j} (|w(i,k)| + |w(j,k)|) / 2.

    Safe because in any partition separating i and j, moving the
    endpoint with the lighter attachment into the other's cluster
    changes the objective by at least w(i,j) − min_side Σ|w| ≥ 0.

    Rule (b), run once afterwards: forbid i, j when w(i,j) < 0, they
    share no k with w(i,k) > 0 and w(j,k) > 0, and

        |w(i,j)| ≥ min( Σ_k max(0, w(i,k)), Σ_k max(0, w(j,k)) ).

    Safe because extracting the lighter endpoint into a singleton then
    costs at most its positive attachment and saves |w(i,j)|. Forbids
    compose (a singleton violates no forbid), but a merge after a
    forbid could not reuse the rule-(a) argument — hence the phase
    order, merges strictly before forbids.
    """
    n = inst.n
    W = np.array(inst.weights)
    alive = np.ones(n, dtype=bool)
    groups: list[list[int]] = [[i] for i in range(n)]
    offset = 0.0

    changed = True
    while changed:
        changed = False
        act = np.flatnonzero(alive)
        for ai, i in enumerate(act):
            for j in act[ai + 1 :]:
                others = alive.copy()
                others[i] = others[j] = False
                attach = np.abs(W[i, others]).sum() + np.abs(W[j, others]).sum()
                if W[i, j] >= attach / 2.0:
                    offset += W[i, j]
                    W[i, others] += W[j, others]
                    W[others, i] = W[i, others]
                    alive[j] = False
                    groups[i].extend(groups[j])
                    changed = True
                    break
            if changed:
                break

    forbidden: set[Pair] = set()
    act = np.flatnonzero(alive)
    for ai, i in enumerate(act):
        for j in act[ai + 1 :]:
            if W[i, j] >= 0.0:
                continue
            others = alive.copy()
            others[i] = others[j] = False
            if ((W[i, others] > 0.0) & (W[j, others] > 0.0)).any():
                continue
            gain_i = np.maximum(W[i, others], 0.0).sum()
            gain_j = np.maximum(W[j, others], 0.0).sum()
            if -W[i, j] >= min(gain_i, gain_j):
                forbidden.add(
                    canonical_pair(inst.entities[i], inst.entities[j])
                )

    reps = [int(i) for i in np.flatnonzero(alive)]
    reduced = EditingInstance(
        [inst.entities[i] for i in reps], W[np.ix_(reps, reps)]
    )
    merges = {
        inst.entities[i]: tuple(inst.entities[m] for m in sorted(groups[i]))
        for i in reps
    }
    return KernelResult(
        instance=reduced, merges=merges, forbidden=frozenset(forbidden), offset=offset
    )
