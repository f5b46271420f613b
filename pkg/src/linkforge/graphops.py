"""Tentative linkset, connected components, and the closure baseline.

Everything here is a pure function of immutable inputs; a θ sweep can
safely evaluate many cutoffs concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .model import (
    EntityId,
    Linkset,
    Pair,
    ParameterError,
    all_pairs,
    validate_theta,
)


class UnionFind:
    """Disjoint sets over arbitrary hashable items (path compression +
    union by size)."""

    def __init__(self) -> None:
        self._parent: dict = {}
        self._size: dict = {}

    def find(self, x):
        parent = self._parent
        if x not in parent:
            parent[x] = x
            self._size[x] = 1
            return x
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self._size[ra] < self._size[rb]:
            ra, rb = rb, ra
        self._parent[rb] = ra
        self._size[ra] += self._size[rb]


@dataclass(frozen=True)
class Component:
    """A connected component of the tentative graph: its entities and
    the tentative links among them. Isolated entities never form
    components — repair on a single node is vacuous."""

    entities: frozenset[EntityId]
    edges: frozenset[Pair]

    @property
    def size(self) -> int:
        return len(self.entities)


def tentative_linkset(
    scored: Mapping[Pair, float],
    labeled_dups: Iterable[Pair],
    theta: float,
) -> Linkset:
    """Pairs scoring strictly above θ, plus every expert duplicate.

    The inequality is strict: p = θ exactly is excluded.
    """
    validate_theta(theta)
    links = {pair for pair, p in scored.items() if p > theta}
    links.update(labeled_dups)
    return links


def connected_components(links: Linkset) -> list[Component]:
    """Undirected components of the link graph, ordered by smallest
    member ID. Unique regardless of edge traversal order."""
    uf = UnionFind()
    for a, b in links:
        uf.union(a, b)
    edges_by_root: dict[EntityId, set[Pair]] = {}
    for pair in links:
        edges_by_root.setdefault(uf.find(pair[0]), set()).add(pair)
    comps = [
        Component(
            entities=frozenset(e for pair in edges for e in pair),
            edges=frozenset(edges),
        )
        for edges in edges_by_root.values()
    ]
    comps.sort(key=lambda c: min(c.entities))
    return comps


def filter_components(
    comps: list[Component], max_size: int
) -> tuple[list[Component], list[Component]]:
    """Split components into (kept, discarded) at the size cap. Both
    the closure baseline and repair run on the same kept set."""
    if max_size < 2:
        raise ParameterError(f"max_size must be >= 2, got {max_size}")
    kept = [c for c in comps if c.size <= max_size]
    discarded = [c for c in comps if c.size > max_size]
    return kept, discarded


def transitive_closure(comps: Iterable[Component]) -> Linkset:
    """Complete each component into a clique (the closure of a
    connected component is its complete graph)."""
    links: Linkset = set()
    for comp in comps:
        links.update(all_pairs(comp.entities))
    return links
