"""Exact cluster-editing solve, the enumeration oracle, and repair.

Two interchangeable search engines exist: the compiled ``_bb``
extension and the pure-Python ``bb_py``. The compiled one is preferred
when its build succeeded; set ``LINKFORGE_ENGINE=pure`` or
``LINKFORGE_ENGINE=compiled`` to force a choice (forcing ``compiled``
raises ImportError when the extension is missing rather than silently
falling back).
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .. import classifier
from ..graphops import Component
from ..model import (
    ClusterPartition,
    EmbeddingTable,
    EntityId,
    Linkset,
    Pair,
    ParameterError,
    all_pairs,
)
from . import bb_py
from .errors import BudgetExceededError
from .instance import EditingInstance, build_instance, kernelize, partition_objective

_forced = os.environ.get("LINKFORGE_ENGINE", "").strip()
if _forced == "pure":
    _engine = bb_py
elif _forced == "compiled":
    from . import _bb as _engine
elif _forced:
    raise ImportError(f"LINKFORGE_ENGINE must be 'pure' or 'compiled', got {_forced!r}")
else:
    try:
        from . import _bb as _engine
    except ImportError:
        _engine = bb_py

logger = logging.getLogger(__name__)

#: Search nodes allowed per component before it is given up on.
DEFAULT_NODE_BUDGET = 10_000_000

#: Enumeration limit: Bell(10) = 115975 partitions is still cheap.
_ORACLE_MAX = 10


def active_engine() -> str:
    """Which search engine this process is using: 'compiled' or 'pure'."""
    return "pure" if _engine is bb_py else "compiled"


@dataclass(frozen=True)
class EditingSolution:
    """Optimal partition of one instance; ``objective`` is the sum of
    intra-cluster weights and ``nodes`` the search effort spent."""

    partition: ClusterPartition
    objective: float
    nodes: int


@dataclass(frozen=True)
class ComponentReport:
    """Per-component solve diagnostics for the repair report."""

    anchor: EntityId  # smallest member, identifies the component
    size: int
    objective: float
    nodes: int
    seconds: float
    status: str  # "ok" | "budget-exceeded"


@dataclass(frozen=True)
class RepairResult:
    linkset: Linkset
    reports: tuple[ComponentReport, ...]


def solve_exact(
    inst: EditingInstance,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
    use_kernel: bool = True,
) -> EditingSolution:
    """Partition maximizing the sum of intra-cluster weights.

    Kernelizes first (safe reductions only), then runs branch-and-bound
    on the residue. The reported objective is recomputed over the
    original instance in canonical order, so it is directly comparable
    with :func:`brute_force_oracle` output. Ties prefer fewer clusters,
    then the lexicographically smallest encoding.
    """
    if inst.n < 1:
        raise ParameterError("instance must contain at least one entity")
    if use_kernel:
        kern = kernelize(inst)
        red = kern.instance
        W = np.array(red.weights)
        pos = {e: i for i, e in enumerate(red.entities)}
        for a, b in kern.forbidden:
            i, j = pos[a], pos[b]
            W[i, j] = W[j, i] = -np.inf
        clusters_idx, _, nodes = _engine.search(W, node_budget)
        partition = kern.lift(
            ClusterPartition([[red.entities[i] for i in c] for c in clusters_idx])
        )
    else:
        clusters_idx, _, nodes = _engine.search(np.array(inst.weights), node_budget)
        partition = ClusterPartition(
            [[inst.entities[i] for i in c] for c in clusters_idx]
        )
    return EditingSolution(partition, partition_objective(inst, partition), nodes)


def _partitions(n: int):
    """All set partitions of range(n) via restricted-growth strings."""
    assignment = [0] * n

    def rec(item: int, n_blocks: int):
        if item == n:
            clusters: list[list[int]] = [[] for _ in range(n_blocks)]
            for i, block in enumerate(assignment):
                clusters[block].append(i)
            yield clusters
            return
        for block in range(n_blocks + 1):
            assignment[item] = block
            yield from rec(item + 1, max(n_blocks, block + 1))

    yield from rec(0, 0)


def brute_force_oracle(inst: EditingInstance) -> EditingSolution:
    """Exhaustive maximization over all set partitions (n ≤ 10),
    applying the same objective summation order and tie-break ladder
    as the search engines."""
    n = inst.n
    if n > _ORACLE_MAX:
        raise ParameterError(
            f"refused: {n} entities means Bell({n}) partitions; limit is {_ORACLE_MAX}"
        )
    if n < 1:
        raise ParameterError("instance must contain at least one entity")
    W = inst.weights
    best_clusters = [[i] for i in range(n)]
    best_obj = 0.0
    for clusters in _partitions(n):
        # restricted-growth order is already canonical: members
        # ascending, clusters ordered by smallest member
        obj = bb_py.objective_of(W, clusters)
        if obj > best_obj + bb_py.TIE_EPS:
            best_obj, best_clusters = obj, clusters
        elif obj >= best_obj - bb_py.TIE_EPS and (len(clusters), clusters) < (
            len(best_clusters),
            best_clusters,
        ):
            best_obj, best_clusters = max(best_obj, obj), clusters
    partition = ClusterPartition([[inst.entities[i] for i in c] for c in best_clusters])
    return EditingSolution(partition, partition_objective(inst, partition), 0)


def repair(
    components: Iterable[Component],
    model: classifier.LrModel,
    table: EmbeddingTable,
    labeled: Mapping[Pair, bool],
    theta: float,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> RepairResult:
    """Solve every component and emit the union of its cliques.

    The result is transitively closed by construction. A component that
    exhausts the node budget is dropped from the output with a logged
    warning; its report row carries status "budget-exceeded" and the
    best objective found.
    """
    links: Linkset = set()
    reports: list[ComponentReport] = []
    for comp in components:
        inst = build_instance(comp, model, table, labeled, theta)
        anchor = inst.entities[0]
        started = time.perf_counter()
        try:
            sol = solve_exact(inst, node_budget=node_budget)
        except BudgetExceededError as exc:
            seconds = time.perf_counter() - started
            logger.warning(
                "dropping component at %s (%d entities): %s", anchor, inst.n, exc
            )
            reports.append(
                ComponentReport(
                    anchor=anchor,
                    size=inst.n,
                    objective=exc.best_objective,
                    nodes=exc.nodes,
                    seconds=seconds,
                    status="budget-exceeded",
                )
            )
            continue
        seconds = time.perf_counter() - started
        for cluster in sol.partition.clusters:
            if len(cluster) > 1:
                links.update(all_pairs(cluster))
        reports.append(
            ComponentReport(
                anchor=anchor,
                size=inst.n,
                objective=sol.objective,
                nodes=sol.nodes,
                seconds=seconds,
                status="ok",
            )
        )
    return RepairResult(links, tuple(reports))
