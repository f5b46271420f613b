import math

import numpy as np
import pytest

from linkforge.model import (
    ClusterPartition,
    EmbeddingTable,
    LookupError_,
    ParameterError,
    SelfLinkError,
    all_pairs,
    canonical_pair,
    gold_linkset,
    is_canonical,
    validate_theta,
)


def test_canonical_pair_orders_lexicographically():
    assert canonical_pair("b", "a") == ("a", "b")
    assert canonical_pair("a", "b") == ("a", "b")
    assert canonical_pair("e10", "e2") == ("e10", "e2")  # string order, not numeric


def test_canonical_pair_rejects_self_link():
    with pytest.raises(SelfLinkError):
        canonical_pair("a", "a")
    assert issubclass(SelfLinkError, ValueError)


def test_is_canonical():
    assert is_canonical(("a", "b"))
    assert not is_canonical(("b", "a"))
    assert not is_canonical(("a", "a"))


def test_all_pairs_sorted_and_complete():
    pairs = list(all_pairs(["c", "a", "b"]))
    assert pairs == [("a", "b"), ("a", "c"), ("b", "c")]
    assert len(list(all_pairs(["a", "b", "c", "d"]))) == 6
    assert list(all_pairs(["a", "a", "b"])) == [("a", "b")]


def test_validate_theta():
    assert validate_theta(0.5) == 0.5
    assert validate_theta(0.005) == 0.005
    assert validate_theta(0.99) == 0.99
    for bad in (0.0, 1.0, -0.1, 1.5, math.nan):
        with pytest.raises(ParameterError):
            validate_theta(bad)


class TestEmbeddingTable:
    def test_construction_order_preserved(self):
        t = EmbeddingTable.from_dict({"b": [1.0], "a": [2.0]})
        assert t.ids == ("b", "a")
        assert t.vector("a")[0] == 2.0
        assert t.vector("b")[0] == 1.0

    def test_basic_accessors(self, tiny_table):
        assert len(tiny_table) == 4
        assert tiny_table.dim == 2
        assert "a" in tiny_table
        assert "zzz" not in tiny_table
        assert tiny_table.row("a") == 0
        np.testing.assert_array_equal(
            tiny_table.matrix(["d", "a"]), [[-1.0, 0.0], [1.0, 0.0]]
        )

    def test_missing_id(self, tiny_table):
        with pytest.raises(LookupError_):
            tiny_table.row("nope")
        assert issubclass(LookupError_, KeyError)

    def test_vectors_read_only(self, tiny_table):
        with pytest.raises(ValueError):
            tiny_table.vectors[0, 0] = 9.0

    def test_rejects_bad_input(self):
        with pytest.raises(ParameterError):
            EmbeddingTable(["a", "a"], np.zeros((2, 2)))
        with pytest.raises(ParameterError):
            EmbeddingTable(["a"], np.zeros(3))  # not 2-d
        with pytest.raises(ParameterError):
            EmbeddingTable(["a", "b"], np.zeros((3, 2)))  # row count mismatch
        with pytest.raises(ParameterError):
            EmbeddingTable(["a"], np.array([[np.nan, 0.0]]))


class TestClusterPartition:
    def test_canonical_form(self):
        p = ClusterPartition([["c", "b"], ["a"]])
        assert p.clusters == (("a",), ("b", "c"))
        assert p.universe == {"a", "b", "c"}
        assert len(p) == 2
        assert p.sizes() == [1, 2]
        assert p.cluster_of()["c"] == 1

    def test_equality_ignores_input_order(self):
        assert ClusterPartition([["b", "a"], ["c"]]) == ClusterPartition([["c"], ["a", "b"]])

    def test_rejects_overlap_and_empty(self):
        with pytest.raises(ParameterError):
            ClusterPartition([["a", "b"], ["b", "c"]])
        with pytest.raises(ParameterError):
            ClusterPartition([["a"], []])

    def test_hashable(self):
        assert {ClusterPartition([["a"]]), ClusterPartition([["a"]])} == {
            ClusterPartition([["a"]])
        }


def test_gold_linkset():
    truth = ClusterPartition([["a", "b", "c"], ["d"], ["e", "f"]])
    assert gold_linkset(truth) == {("a", "b"), ("a", "c"), ("b", "c"), ("e", "f")}
