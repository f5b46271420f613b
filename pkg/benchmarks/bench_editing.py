#!/usr/bin/env python3
"""Time the pure-Python branch-and-bound against the compiled extension.

Both engines get byte-identical weight matrices and must return exactly
the same clusters, objective repr and node count — the benchmark doubles
as an equivalence check. Two instance families:

* random: dense U(-2, 2) weights, the adversarial case where the search
  tree actually grows (node counts explode around n ≈ 20);
* pipeline: components taken from a synthetic entity-matching run, the
  shape the solver sees in production (mostly near-clique, few nodes).

Run from the repo root after an editable install:

    python3 benchmarks/bench_editing.py
"""

import argparse
import sys
import time

import numpy as np

from linkforge import classifier, synth
from linkforge.candidates import candidate_pairs
from linkforge.classifier import FeatureSpec
from linkforge.editing import bb_py
from linkforge.editing.instance import build_instance
from linkforge.graphops import connected_components, filter_components, tentative_linkset

try:
    from linkforge.editing import _bb
except ImportError:
    sys.exit("compiled extension not built; run pip install -e . first")


def random_instances(seed):
    rng = np.random.default_rng(seed)
    for n in (10, 10, 10, 14, 14, 14, 18, 18, 20):
        w = rng.uniform(-2.0, 2.0, size=(n, n))
        w = np.triu(w, 1)
        yield f"random n={n}", w + w.T


def pipeline_instances(seed):
    cfg = synth.GeneratorConfig(
        n_base=400, n_subgraphs=4, sample_rate=0.5,
        dim=50, noise_sigma=0.35, cluster_sep=4.0, seed=seed,
    )
    bench = synth.generate(cfg)
    cands = candidate_pairs(bench.embeddings, 3)
    labeled = classifier.sample_training_pairs(cands.pairs, bench.truth, 80, seed=seed)
    model = classifier.train(labeled, bench.embeddings, FeatureSpec("cosine"), seed=seed)
    scored = classifier.apply_label_override(
        classifier.score(model, cands.pairs, bench.embeddings), labeled
    )
    dups = {p for p, lab in labeled.items() if lab}
    comps = connected_components(tentative_linkset(scored, dups, 0.2))
    kept, _ = filter_components(comps, 50)
    for comp in kept:
        if comp.size < 5:
            continue
        inst = build_instance(comp, model, bench.embeddings, labeled, 0.2)
        yield f"pipeline n={inst.n}", np.array(inst.weights)


def time_engine(engine, w, budget):
    t0 = time.perf_counter()
    result = engine.search(w.copy(), budget)
    return result, time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=13)
    ap.add_argument("--budget", type=int, default=10_000_000)
    args = ap.parse_args()

    rows = []
    for family in (random_instances, pipeline_instances):
        for name, w in family(args.seed):
            (cp, op, np_), tp = time_engine(bb_py, w, args.budget)
            (cc, oc, nc), tc = time_engine(_bb, w, args.budget)
            if cp != cc or np_ != nc or repr(op) != repr(oc):
                sys.exit(f"engine mismatch on {name}: "
                         f"pure=({op!r}, {np_}) compiled=({oc!r}, {nc})")
            rows.append((name, np_, tp, tc))

    print(f"{'instance':<16} {'nodes':>9} {'pure':>10} {'compiled':>10} {'speedup':>8}")
    for name, nodes, tp, tc in rows:
        print(f"{name:<16} {nodes:>9,} {tp * 1e3:>8.1f}ms {tc * 1e3:>8.1f}ms "
              f"{tp / tc:>7.1f}x")
    total_p = sum(r[2] for r in rows)
    total_c = sum(r[3] for r in rows)
    print(f"{'total':<16} {'':>9} {total_p * 1e3:>8.1f}ms {total_c * 1e3:>8.1f}ms "
          f"{total_p / total_c:>7.1f}x")
    print(f"\nall {len(rows)} instances returned identical clusters, "
          f"objectives and node counts from both engines")


if __name__ == "__main__":
    main()
