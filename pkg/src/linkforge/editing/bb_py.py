"""Pure-Python branch-and-bound engine for weighted cluster editing.

Interchangeable with the compiled engine ``_bb``: both use the same
branching rule, the same floating-point operation order for weight
contractions, bounds and leaf objectives, and the same tie-break
ladder, so the two return identical (clusters, objective, nodes) on
every input. Reductions that a C loop would run left-to-right are
written here with ``np.cumsum``/first-max ``np.argmax`` — never
``np.sum``, whose pairwise order differs.

Engine contract (shared with ``_bb``):

  search(W, budget) -> (clusters, objective, nodes)

* ``W``: float64 n×n, symmetric, zero diagonal; ``-inf`` marks a
  forbidden pair (the pair may never share a cluster). No ``+inf`` or
  NaN. ``-inf`` survives contraction (x + -inf = -inf), which is
  exactly the propagation a forbidden pair needs.
* ``clusters``: canonical partition of 0..n-1 — members ascending,
  clusters by smallest member — maximizing the sum of intra-cluster
  weights; ties prefer fewer clusters, then the lexicographically
  smaller encoding.
* ``objective``: that sum, accumulated in canonical order over the
  *input* matrix, so equal partitions yield bit-equal objectives
  across engines and the enumeration oracle.
* ``nodes``: search nodes visited; exceeding ``budget`` raises
  :class:`BudgetExceededError`.

Branching: pick the largest non-negative active weight (first in
row-major upper-triangle order on ties); explore merge, then forbid.
Zero weights are branchable on purpose — merging them costs nothing
and the tie-break prefers fewer clusters. A node with no non-negative
active weight is a leaf: every remaining merge strictly hurts, so the
current groups as singletons are its unique best completion.
"""

from __future__ import annotations

import numpy as np

from .errors import BudgetExceededError

#: Pruning slack: a subtree is cut only when its upper bound is more
#: than this below the incumbent, so accumulated-float drift (≪ 1e-9
#: at n ≤ 50 with logit-scale weights) can never cut a true optimum.
PRUNE_EPS = 1e-9

#: Two leaf objectives within this of each other count as a tie and go
#: to the tie-break ladder instead of replacing the incumbent.
TIE_EPS = 1e-12

_TRIU_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _triu(m: int) -> tuple[np.ndarray, np.ndarray]:
    if m not in _TRIU_CACHE:
        _TRIU_CACHE[m] = np.triu_indices(m, 1)
    return _TRIU_CACHE[m]


def objective_of(W: np.ndarray, clusters: list[list[int]]) -> float:
    """Canonical-order objective: clusters in given (canonical) order,
    within a cluster pairs (a, b) by ascending b then ascending a,
    accumulated strictly left-to-right."""
    total = 0.0
    for c in clusters:
        for b in range(1, len(c)):
            jb = c[b]
            for a in range(b):
                total += W[c[a], jb]
    return float(total)


def search(W: np.ndarray, budget: int) -> tuple[list[list[int]], float, int]:
    W0 = np.array(W, dtype=np.float64)
    n = W0.shape[0]
    Wc = W0.copy()
    alive = np.ones(n, dtype=bool)
    groups: list[list[int]] = [[i] for i in range(n)]

    best_clusters: list[list[int]] = [[i] for i in range(n)]
    best_obj = 0.0  # the all-singleton partition is always feasible
    nodes = 0

    merge_saves: list[tuple[np.ndarray, int]] = []
    # Explicit DFS stack (recursion depth can exceed Python's limit:
    # one path may forbid O(n²) pairs). Ops run in LIFO order; a
    # node pushes its two children as apply/visit/undo triples.
    ops: list[tuple] = [("visit", 0.0)]

    while ops:
        op = ops.pop()
        kind = op[0]

        if kind == "visit":
            acc = op[1]
            nodes += 1
            if nodes > budget:
                raise BudgetExceededError(best_obj, nodes)
            idx = np.flatnonzero(alive)
            iu, ju = _triu(int(idx.size))
            vals = Wc[idx[iu], idx[ju]]
            nonneg = vals >= 0.0
            if not nonneg.any():
                clusters = sorted(
                    (sorted(groups[int(i)]) for i in idx), key=lambda c: c[0]
                )
                obj = objective_of(W0, clusters)
                if obj > best_obj + TIE_EPS:
                    best_obj, best_clusters = obj, clusters
                elif obj >= best_obj - TIE_EPS and (len(clusters), clusters) < (
                    len(best_clusters),
                    best_clusters,
                ):
                    # tie: fewer clusters, then smaller encoding; keep
                    # the incumbent objective monotone
                    best_obj, best_clusters = max(best_obj, obj), clusters
                continue
            bound = acc + float(np.cumsum(np.maximum(vals, 0.0))[-1])
            if bound < best_obj - PRUNE_EPS:
                continue
            k = int(np.argmax(np.where(nonneg, vals, -np.inf)))
            bi = int(idx[iu[k]])
            bj = int(idx[ju[k]])
            w_ij = float(Wc[bi, bj])
            ops.append(("unforbid", bi, bj, w_ij))
            ops.append(("visit", acc))
            ops.append(("forbid", bi, bj))
            ops.append(("unmerge", bi, bj))
            ops.append(("visit", acc + w_ij))
            ops.append(("merge", bi, bj))

        elif kind == "merge":
            _, bi, bj = op
            merge_saves.append((Wc[bi].copy(), len(groups[bi])))
            alive[bj] = False
            others = alive.copy()
            others[bi] = False
            Wc[bi, others] += Wc[bj, others]
            Wc[others, bi] = Wc[bi, others]
            groups[bi].extend(groups[bj])

        elif kind == "unmerge":
            _, bi, bj = op
            row, glen = merge_saves.pop()
            del groups[bi][glen:]
            alive[bj] = True
            # exact restore from the saved row: (a+b)-b is not a in
            # floating point, so no arithmetic undo
            Wc[bi, :] = row
            Wc[:, bi] = row

        elif kind == "forbid":
            _, bi, bj = op
            Wc[bi, bj] = Wc[bj, bi] = -np.inf

        else:  # unforbid
            _, bi, bj, w_ij = op
            Wc[bi, bj] = Wc[bj, bi] = w_ij

    return best_clusters, best_obj, nodes
