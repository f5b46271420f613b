import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linkforge import classifier, editing
from linkforge.editing import (
    BudgetExceededError,
    DomainError,
    EditingInstance,
    brute_force_oracle,
    build_instance,
    kernelize,
    pair_weight,
    pair_weights,
    partition_objective,
    repair,
    solve_exact,
)
from linkforge.editing import bb_py
from linkforge.graphops import connected_components, transitive_closure
from linkforge.model import ClusterPartition, ParameterError, all_pairs

from conftest import ids_for, random_weights

try:
    from linkforge.editing import _bb
except ImportError:
    _bb = None


def _instance(W):
    return EditingInstance(ids_for(W.shape[0]), W)


def _triangle(w_ab, w_ac, w_bc):
    W = np.array([[0.0, w_ab, w_ac], [w_ab, 0.0, w_bc], [w_ac, w_bc, 0.0]])
    return EditingInstance(["a", "b", "c"], W)


# --- pair weights ----------------------------------------------------------


def test_pair_weight_against_high_precision_logit():
    mpmath = pytest.importorskip("mpmath")
    mpmath.mp.dps = 50

    def oracle(p, theta):
        return float(mpmath.log(mpmath.mpf(p) / (1 - mpmath.mpf(p)))
                     - mpmath.log(mpmath.mpf(theta) / (1 - mpmath.mpf(theta))))

    for p in (1e-12, 1e-6, 0.25, 0.5, 0.75, 1 - 1e-6, 1 - 1e-12):
        for theta in (0.005, 0.3, 0.5, 0.99):
            assert pair_weight(p, theta) == pytest.approx(oracle(p, theta), abs=1e-12)


def test_pair_weight_sign_law():
    assert pair_weight(0.7, 0.5) > 0
    assert pair_weight(0.3, 0.5) < 0
    assert pair_weight(0.5, 0.5) == 0.0
    assert pair_weight(0.25, 0.25) == 0.0  # identical expressions cancel exactly


def test_pair_weight_domain():
    with pytest.raises(DomainError):
        pair_weight(0.0, 0.5)  # below the probability floor
    with pytest.raises(DomainError):
        pair_weight(1.0, 0.5)
    with pytest.raises(ParameterError):
        pair_weight(0.5, 0.0)
    assert issubclass(DomainError, ValueError)


def test_pair_weights_matches_scalar():
    p = np.array([1e-12, 0.2, 0.5, 0.9, 1 - 1e-12])
    vec = pair_weights(p, 0.3)
    for i, pi in enumerate(p):
        assert vec[i] == pair_weight(float(pi), 0.3)


# --- instance construction -------------------------------------------------


def test_instance_validation():
    with pytest.raises(ParameterError):
        EditingInstance(["b", "a"], np.zeros((2, 2)))  # unsorted
    with pytest.raises(ParameterError):
        EditingInstance(["a", "a"], np.zeros((2, 2)))  # duplicate
    with pytest.raises(ParameterError):
        EditingInstance(["a", "b"], np.zeros((2, 3)))  # not square
    with pytest.raises(ParameterError):
        EditingInstance(["a", "b"], np.array([[0.0, 1.0], [2.0, 0.0]]))  # asymmetric
    with pytest.raises(ParameterError):
        EditingInstance(["a", "b"], np.array([[0.0, np.inf], [np.inf, 0.0]]))


def test_instance_zeroes_diagonal_and_freezes():
    inst = EditingInstance(["a", "b"], np.array([[5.0, 1.0], [1.0, 7.0]]))
    assert inst.weights[0, 0] == 0.0 and inst.weights[1, 1] == 0.0
    with pytest.raises(ValueError):
        inst.weights[0, 1] = 2.0
    assert inst.index_of("b") == 1


def test_partition_objective_hand_values():
    inst = _triangle(1.0, -0.5, 1.0)
    assert partition_objective(inst, ClusterPartition([["a", "b", "c"]])) == 1.5
    assert partition_objective(inst, ClusterPartition([["a", "b"], ["c"]])) == 1.0
    assert partition_objective(inst, ClusterPartition([["a"], ["b"], ["c"]])) == 0.0
    with pytest.raises(ParameterError):
        partition_objective(inst, ClusterPartition([["a", "b"]]))


# --- exact solver ----------------------------------------------------------


def test_solver_merges_weak_negative_triangle():
    # two strong positive links outweigh one mild conflict
    sol = solve_exact(_triangle(1.0, -0.5, 1.0))
    assert sol.partition == ClusterPartition([["a", "b", "c"]])
    assert sol.objective == 1.5


def test_solver_cuts_strong_negative_triangle():
    # w(a,c) = −3 forces a cut; both 2-1 splits score 1.0 and the
    # tie breaks to the lexicographically smaller partition
    sol = solve_exact(_triangle(1.0, -3.0, 1.0))
    assert sol.objective == 1.0
    assert sol.partition == ClusterPartition([["a"], ["b", "c"]])


def test_solver_all_negative_gives_singletons():
    sol = solve_exact(_triangle(-1.0, -2.0, -0.5))
    assert sol.partition == ClusterPartition([["a"], ["b"], ["c"]])
    assert sol.objective == 0.0


def test_solver_prefers_fewer_clusters_on_ties():
    sol = solve_exact(_triangle(0.0, 0.0, 0.0))
    assert sol.objective == 0.0
    assert sol.partition == ClusterPartition([["a", "b", "c"]])


def test_solver_matches_oracle_on_random_instances():
    rng = np.random.default_rng(21)
    for _ in range(120):
        n = int(rng.integers(2, 9))
        inst = _instance(random_weights(rng, n))
        got = solve_exact(inst)
        want = brute_force_oracle(inst)
        assert abs(got.objective - want.objective) <= 1e-9
        # reported objective is recomputed from the partition, so this
        # also certifies the partition itself is optimal
        assert got.objective == partition_objective(inst, got.partition)


def test_solver_handles_n1_and_n2():
    inst = EditingInstance(["a"], np.zeros((1, 1)))
    assert solve_exact(inst).partition == ClusterPartition([["a"]])
    inst = EditingInstance(["a", "b"], np.array([[0.0, 2.0], [2.0, 0.0]]))
    sol = solve_exact(inst)
    assert sol.partition == ClusterPartition([["a", "b"]]) and sol.objective == 2.0
    inst = EditingInstance(["a", "b"], np.array([[0.0, -2.0], [-2.0, 0.0]]))
    assert solve_exact(inst).partition == ClusterPartition([["a"], ["b"]])


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 6))
def test_solver_never_beaten_by_sampled_partitions(seed, n):
    rng = np.random.default_rng(seed)
    inst = _instance(random_weights(rng, n))
    sol = solve_exact(inst)
    ids = list(inst.entities)
    for _ in range(20):
        blocks = rng.integers(0, n, size=n)  # random partition of the ids
        clusters = {}
        for eid, b in zip(ids, blocks):
            clusters.setdefault(int(b), []).append(eid)
        cand = ClusterPartition(clusters.values())
        assert partition_objective(inst, cand) <= sol.objective + 1e-9


def test_solver_deterministic():
    rng = np.random.default_rng(33)
    inst = _instance(random_weights(rng, 7))
    a = solve_exact(inst)
    b = solve_exact(inst)
    assert a.partition == b.partition
    assert repr(a.objective) == repr(b.objective)
    assert a.nodes == b.nodes


# --- engine equivalence -----------------------------------------------------


@pytest.mark.skipif(_bb is None, reason="compiled engine not built")
def test_engines_bit_identical():
    """Pure and compiled engines must agree exactly: same clusters, same
    objective down to the last bit, same node count."""
    rng = np.random.default_rng(4)
    for trial in range(150):
        n = int(rng.integers(2, 9))
        W = random_weights(rng, n)
        c_py, o_py, n_py = bb_py.search(W.copy(), 10**7)
        c_cy, o_cy, n_cy = _bb.search(W.copy(), 10**7)
        assert c_py == c_cy
        assert repr(o_py) == repr(o_cy)
        assert n_py == n_cy


@pytest.mark.skipif(_bb is None, reason="compiled engine not built")
def test_engines_bit_identical_structured():
    rng = np.random.default_rng(5)
    member = np.array([0] * 10 + [1] * 10)
    W = np.zeros((20, 20))
    iu, ju = np.triu_indices(20, 1)
    same = member[iu] == member[ju]
    vals = np.where(same, rng.normal(2.0, 1.0, len(iu)), rng.normal(-2.0, 1.0, len(iu)))
    W[iu, ju] = vals
    W[ju, iu] = vals
    assert bb_py.search(W.copy(), 10**7) == _bb.search(W.copy(), 10**7)


def test_engine_env_override():
    # engine choice happens at import time, so probe it in a subprocess
    import os
    import subprocess
    import sys

    def probe(value):
        env = dict(os.environ, LINKFORGE_ENGINE=value)
        out = subprocess.run(
            [sys.executable, "-c",
             "import linkforge.editing as e; print(e.active_engine())"],
            env=env, capture_output=True, text=True,
        )
        return out

    assert editing.active_engine() in ("pure", "compiled")
    assert probe("pure").stdout.strip() == "pure"
    if _bb is not None:
        assert probe("compiled").stdout.strip() == "compiled"
    bad = probe("turbo")
    assert bad.returncode != 0


# --- kernelization ----------------------------------------------------------


def test_kernel_merge_rule_fires():
    # w(a,b)=10 dwarfs both attachments, so a and b merge; the contracted
    # weight to c is 1 + (−1) = 0 with nothing else attached, which lets
    # the rule fire again and collapse the whole triangle
    inst = _triangle(10.0, 1.0, -1.0)
    kern = kernelize(inst)
    assert kern.instance.n == 1
    assert kern.offset == 10.0
    assert kern.merges["a"] == ("a", "b", "c")
    lifted = kern.lift(ClusterPartition([list(kern.instance.entities)]))
    assert lifted == ClusterPartition([["a", "b", "c"]])


def test_kernel_merge_stops_at_real_conflict():
    # same shape but the conflict outweighs the attachment: only the
    # dominant pair merges
    inst = _triangle(10.0, 1.0, -8.0)
    kern = kernelize(inst)
    assert kern.instance.n == 2
    assert kern.offset == 10.0
    assert kern.instance.weights[0, 1] == -7.0  # 1 + (−8)


def test_kernel_forbid_rule_fires():
    # strongly negative pair with no shared positive neighbor
    W = np.array(
        [
            [0.0, -5.0, 2.0],
            [-5.0, 0.0, -1.0],
            [2.0, -1.0, 0.0],
        ]
    )
    kern = kernelize(EditingInstance(["a", "b", "c"], W))
    assert ("a", "b") in kern.forbidden


def test_kernel_forbid_blocked_by_common_positive_neighbor():
    W = np.array(
        [
            [0.0, -5.0, 2.0],
            [-5.0, 0.0, 3.0],
            [2.0, 3.0, 0.0],
        ]
    )
    kern = kernelize(EditingInstance(["a", "b", "c"], W))
    assert kern.forbidden == frozenset()


def test_kernel_preserves_optimum_on_random_instances():
    rng = np.random.default_rng(6)
    for _ in range(80):
        n = int(rng.integers(2, 9))
        inst = _instance(random_weights(rng, n))
        with_kernel = solve_exact(inst, use_kernel=True)
        without = solve_exact(inst, use_kernel=False)
        # the kernel may pick a different optimal partition on exact
        # ties, but never a different optimal value
        assert abs(with_kernel.objective - without.objective) <= 1e-9


def test_kernel_preserves_optimum_with_heavy_pairs():
    # force merges to actually fire by planting dominant weights
    rng = np.random.default_rng(7)
    for _ in range(40):
        n = int(rng.integers(3, 8))
        W = random_weights(rng, n)
        i, j = sorted(rng.choice(n, size=2, replace=False))
        W[i, j] = W[j, i] = 50.0
        inst = _instance(W)
        kern = kernelize(inst)
        assert kern.instance.n < n  # merge fired
        assert abs(
            solve_exact(inst, use_kernel=True).objective
            - solve_exact(inst, use_kernel=False).objective
        ) <= 1e-9


# --- budget and repair ------------------------------------------------------


def test_budget_exhaustion_raises_with_diagnostics():
    rng = np.random.default_rng(8)
    inst = _instance(random_weights(rng, 8))
    with pytest.raises(BudgetExceededError) as excinfo:
        solve_exact(inst, node_budget=3, use_kernel=False)
    assert excinfo.value.nodes >= 3
    assert isinstance(excinfo.value.best_objective, float)
    assert isinstance(excinfo.value, RuntimeError)


def test_oracle_refuses_large_instances():
    inst = _instance(np.zeros((11, 11)))
    with pytest.raises(ParameterError, match="refus"):
        brute_force_oracle(inst)


def _repair_fixture(small_bench, small_model, small_labels, theta=0.3):
    scored = classifier.score(
        small_model,
        sorted(
            all_pairs_of_candidates(small_bench)
        ),
        small_bench.embeddings,
    )
    overridden = classifier.apply_label_override(scored, small_labels)
    dups = {p for p, lab in small_labels.items() if lab}
    from linkforge.graphops import filter_components, tentative_linkset

    tentative = tentative_linkset(overridden, dups, theta)
    comps, _ = filter_components(connected_components(tentative), 50)
    return comps


def all_pairs_of_candidates(bench):
    from linkforge.candidates import candidate_pairs

    return candidate_pairs(bench.embeddings, 3).pairs


def test_repair_output_is_transitive(small_bench, small_model, small_labels):
    comps = _repair_fixture(small_bench, small_model, small_labels)
    result = repair(comps, small_model, small_bench.embeddings, small_labels, 0.3)
    # closed under transitivity: re-closing changes nothing
    reclosed = transitive_closure(connected_components(result.linkset))
    assert reclosed == result.linkset
    assert all(rep.status == "ok" for rep in result.reports)
    assert len(result.reports) == len(comps)


def test_repair_links_stay_within_components(small_bench, small_model, small_labels):
    comps = _repair_fixture(small_bench, small_model, small_labels)
    result = repair(comps, small_model, small_bench.embeddings, small_labels, 0.3)
    closure = transitive_closure(comps)
    assert result.linkset <= closure


def test_repair_skips_budget_exhausted_components(small_bench, small_model, small_labels, caplog):
    comps = _repair_fixture(small_bench, small_model, small_labels)
    assert comps
    with caplog.at_level(logging.WARNING):
        result = repair(
            comps, small_model, small_bench.embeddings, small_labels, 0.3, node_budget=0
        )
    assert all(rep.status == "budget-exceeded" for rep in result.reports)
    assert result.linkset == set()
    assert any("budget" in rec.getMessage() for rec in caplog.records)


def test_build_instance_weights_match_scores(small_bench, small_model, small_labels):
    comps = _repair_fixture(small_bench, small_model, small_labels)
    comp = max(comps, key=lambda c: c.size)
    theta = 0.3
    inst = build_instance(comp, small_model, small_bench.embeddings, small_labels, theta)
    assert list(inst.entities) == sorted(comp.entities)
    pairs = list(all_pairs(comp.entities))
    scored = classifier.apply_label_override(
        classifier.score(small_model, pairs, small_bench.embeddings), small_labels
    )
    for a, b in pairs:
        i, j = inst.index_of(a), inst.index_of(b)
        assert inst.weights[i, j] == pair_weight(scored[(a, b)], theta)


def test_solution_objective_recomputed_from_partition():
    rng = np.random.default_rng(9)
    inst = _instance(random_weights(rng, 6))
    sol = solve_exact(inst)
    assert sol.objective == partition_objective(inst, sol.partition)
