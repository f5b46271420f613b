# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: initializedcheck=False
"""Compiled branch-and-bound engine for weighted cluster editing.

Mirror of ``bb_py`` — same branching rule, same floating-point
operation order for contractions, bounds and leaf objectives, same
tie-break ladder — so the two engines return identical results on
every input and differ only in speed. See bb_py's docstring for the
engine contract; semantic changes must land in both files.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY

from linkforge.editing.errors import BudgetExceededError

cnp.import_array()

cdef double PRUNE_EPS = 1e-9
cdef double TIE_EPS = 1e-12


cdef class _Search:
    cdef double[:, ::1] W0      # input weights, frozen (leaf objectives)
    cdef double[:, ::1] Wc      # contracted weights, mutated under undo
    cdef unsigned char[::1] alive
    cdef int[::1] act           # scratch: active representatives
    cdef double[:, ::1] save_rows   # per-merge-depth saved row of Wc
    cdef int[::1] save_glens        # per-merge-depth saved group length
    cdef int n, merge_depth
    cdef long long nodes, budget
    cdef double best_obj
    cdef list groups, best_clusters

    def __init__(self, W, long long budget):
        W0 = np.array(W, dtype=np.float64, order="C")
        self.W0 = W0
        self.Wc = W0.copy()
        self.n = W0.shape[0]
        self.alive = np.ones(self.n, dtype=np.uint8)
        self.act = np.empty(self.n, dtype=np.intc)
        self.save_rows = np.empty((self.n, self.n), dtype=np.float64)
        self.save_glens = np.empty(self.n, dtype=np.intc)
        self.merge_depth = 0
        self.nodes = 0
        self.budget = budget
        self.groups = [[i] for i in range(self.n)]
        self.best_clusters = [[i] for i in range(self.n)]
        self.best_obj = 0.0  # all-singleton partition, always feasible

    cdef double _leaf_objective(self, list clusters):
        # canonical order: clusters as given, pairs (a, b) by ascending
        # b then ascending a, accumulated strictly left-to-right
        cdef double total = 0.0
        cdef int b, a, jb
        cdef list c
        for c in clusters:
            for b in range(1, len(c)):
                jb = <int> c[b]
                for a in range(b):
                    total += self.W0[<int> c[a], jb]
        return total

    cdef int _visit(self, double acc) except -1:
        cdef int m, ai, bpos, i, j, k, bi, bj, glen
        cdef double v, w, pos_sum, bound, w_ij, obj
        cdef bint has_nonneg
        cdef list clusters, grp

        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceededError(self.best_obj, self.nodes)

        m = 0
        for i in range(self.n):
            if self.alive[i]:
                self.act[m] = i
                m += 1

        # one row-major pass over active pairs: leaf test, bound sum,
        # and first-max selection of the branching pair
        has_nonneg = False
        pos_sum = 0.0
        v = -INFINITY
        bi = bj = -1
        for ai in range(m):
            i = self.act[ai]
            for bpos in range(ai + 1, m):
                j = self.act[bpos]
                w = self.Wc[i, j]
                if w >= 0.0:
                    has_nonneg = True
                    if w > 0.0:
                        pos_sum += w
                    if w > v:
                        v = w
                        bi = i
                        bj = j

        if not has_nonneg:
            clusters = [sorted(self.groups[self.act[ai]]) for ai in range(m)]
            clusters.sort(key=lambda c: c[0])
            obj = self._leaf_objective(clusters)
            if obj > self.best_obj + TIE_EPS:
                self.best_obj = obj
                self.best_clusters = clusters
            elif obj >= self.best_obj - TIE_EPS and (len(clusters), clusters) < (
                len(self.best_clusters),
                self.best_clusters,
            ):
                # tie: fewer clusters, then smaller encoding; keep the
                # incumbent objective monotone
                if obj > self.best_obj:
                    self.best_obj = obj
                self.best_clusters = clusters
            return 0

        bound = acc + pos_sum
        if bound < self.best_obj - PRUNE_EPS:
            return 0

        w_ij = self.Wc[bi, bj]

        # merge branch: contract bj into bi, exact undo from saved row
        # ((a+b)-b is not a in floating point)
        for k in range(self.n):
            self.save_rows[self.merge_depth, k] = self.Wc[bi, k]
        grp = self.groups[bi]
        self.save_glens[self.merge_depth] = len(grp)
        self.merge_depth += 1
        self.alive[bj] = 0
        for k in range(self.n):
            if self.alive[k] and k != bi:
                self.Wc[bi, k] = self.Wc[bi, k] + self.Wc[bj, k]
                self.Wc[k, bi] = self.Wc[bi, k]
        grp.extend(self.groups[bj])

        self._visit(acc + w_ij)

        self.merge_depth -= 1
        glen = self.save_glens[self.merge_depth]
        grp = self.groups[bi]
        del grp[glen:]
        self.alive[bj] = 1
        for k in range(self.n):
            self.Wc[bi, k] = self.save_rows[self.merge_depth, k]
            self.Wc[k, bi] = self.save_rows[self.merge_depth, k]

        # forbid branch
        self.Wc[bi, bj] = -INFINITY
        self.Wc[bj, bi] = -INFINITY

        self._visit(acc)

        self.Wc[bi, bj] = w_ij
        self.Wc[bj, bi] = w_ij
        return 0

    def run(self):
        self._visit(0.0)
        return self.best_clusters, self.best_obj, self.nodes


def search(W, budget):
    """See bb_py.search — identical contract and results."""
    clusters, obj, nodes = _Search(W, budget).run()
    return clusters, float(obj), int(nodes)
