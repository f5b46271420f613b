import math
from collections import Counter

import numpy as np
import pytest

from linkforge import synth
from linkforge.model import ParameterError, all_pairs


def _cfg(**overrides):
    base = dict(
        n_base=50,
        n_subgraphs=4,
        sample_rate=0.5,
        dim=8,
        noise_sigma=0.1,
        cluster_sep=4.0,
        seed=1,
    )
    base.update(overrides)
    return synth.GeneratorConfig(**base)


def test_config_validation():
    with pytest.raises(ParameterError):
        _cfg(n_base=0)
    with pytest.raises(ParameterError):
        _cfg(n_subgraphs=1)
    with pytest.raises(ParameterError):
        _cfg(sample_rate=1.5)
    with pytest.raises(ParameterError):
        _cfg(noise_sigma=-0.1)
    with pytest.raises(ParameterError):
        _cfg(dim=0)


def test_rate_zero_gives_all_singletons():
    truth = synth.generate_clusters(_cfg(sample_rate=0.0))
    assert len(truth) == 50
    assert truth.sizes() == [1] * 50


def test_rate_one_gives_full_clusters():
    # every copy renamed: cluster = the n_subgraphs renamed copies, no base id
    truth = synth.generate_clusters(_cfg(sample_rate=1.0, n_subgraphs=3))
    assert truth.sizes() == [3] * 50
    assert all("/" in m for c in truth.clusters for m in c)


def test_cluster_size_law():
    # renamed ~ Binomial(4, 0.5); size = renamed + 1 unless all four renamed
    truth = synth.generate_clusters(_cfg(n_base=4000, sample_rate=0.5))
    freq = Counter(truth.sizes())
    expect = {1: 1 / 16, 2: 4 / 16, 3: 6 / 16, 4: 5 / 16}
    for size, p in expect.items():
        assert abs(freq[size] / 4000 - p) < 0.03


def test_member_naming():
    truth = synth.generate_clusters(_cfg(n_base=3, sample_rate=1.0, n_subgraphs=2))
    members = sorted(m for c in truth.clusters for m in c)
    assert members == [
        "e000000/1", "e000000/2",
        "e000001/1", "e000001/2",
        "e000002/1", "e000002/2",
    ]


def test_embeddings_cover_universe():
    cfg = _cfg()
    truth = synth.generate_clusters(cfg)
    table = synth.generate_embeddings(truth, cfg)
    assert set(table.ids) == truth.universe
    assert table.dim == cfg.dim


def test_zero_noise_duplicates_coincide():
    cfg = _cfg(noise_sigma=0.0)
    truth = synth.generate_clusters(cfg)
    table = synth.generate_embeddings(truth, cfg)
    for cluster in truth.clusters:
        rows = table.matrix(list(cluster))
        assert np.ptp(rows, axis=0).max() == 0.0


def test_noise_scale_matches_sigma():
    cfg = _cfg(n_base=500, noise_sigma=0.7, sample_rate=1.0)
    truth = synth.generate_clusters(cfg)
    table = synth.generate_embeddings(truth, cfg)
    spreads = []
    for cluster in truth.clusters:
        rows = table.matrix(list(cluster))
        spreads.append(rows.var(axis=0, ddof=1).mean())
    # sample variance is unbiased, unlike sample std at these tiny sizes
    assert abs(np.mean(spreads) - 0.7**2) < 0.05


def test_separation_scales_with_parameter():
    wide = synth.generate_embeddings(
        synth.generate_clusters(_cfg(cluster_sep=10.0)), _cfg(cluster_sep=10.0)
    )
    narrow = synth.generate_embeddings(
        synth.generate_clusters(_cfg(cluster_sep=1.0)), _cfg(cluster_sep=1.0)
    )
    assert np.abs(wide.vectors).mean() > 3 * np.abs(narrow.vectors).mean()


def test_generate_is_deterministic():
    a = synth.generate(_cfg())
    b = synth.generate(_cfg())
    assert a.truth == b.truth
    np.testing.assert_array_equal(a.embeddings.vectors, b.embeddings.vectors)
    c = synth.generate(_cfg(seed=2))
    assert c.truth != a.truth or not np.array_equal(
        c.embeddings.vectors, a.embeddings.vectors
    )


def test_benchmark_save_load_roundtrip(tmp_path):
    bench = synth.generate(_cfg())
    bench.save(tmp_path / "bench")
    back = synth.SynthBenchmark.load(tmp_path / "bench")
    assert back.truth == bench.truth
    assert back.config == bench.config
    np.testing.assert_array_equal(back.embeddings.vectors, bench.embeddings.vectors)


def test_benchmark_save_is_deterministic(tmp_path):
    bench = synth.generate(_cfg())
    bench.save(tmp_path / "one")
    bench.save(tmp_path / "two")
    for name in ("embeddings.tsv", "clusters.txt", "config.txt"):
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "two" / name).read_bytes()


def test_class_ratio():
    truth = synth.GroundTruth([["a", "b"], ["c"]])
    cands = {("a", "b"), ("a", "c")}
    overall, within = synth.class_ratio(truth, cands)
    assert overall == 1 / 3  # one gold pair out of C(3,2)
    assert within == 1 / 2
    with pytest.raises(synth.UndefinedRatioError):
        synth.class_ratio(truth, set())
    assert issubclass(synth.UndefinedRatioError, ZeroDivisionError)


def test_class_ratio_candidate_boost(small_bench):
    # the point of kNN blocking: duplicates are far denser among candidates
    from linkforge.candidates import candidate_pairs

    cands = candidate_pairs(small_bench.embeddings, 3)
    overall, within = synth.class_ratio(small_bench.truth, cands.pairs)
    assert within > 5 * overall
