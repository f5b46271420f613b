"""Command-line entry points for the matching pipeline.

Every subcommand reads/writes the documented file formats, so stages
can be chained by hand or run end-to-end via ``pipeline``. Options may
also come from a flat key=value config file (``--config``); explicit
command-line flags win over config values, which win over defaults.

Failures exit with a stage-specific code and a one-line diagnostic:

    2  input     (missing/unparseable input file or bad arguments)
    3  generate
    4  candidates
    5  train
    6  classify
    7  closure   (tentative linkset / components / baseline)
    8  repair
    9  evaluate  (sweep or metric computation)
    10 output    (failed to write an artifact)
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path
from types import SimpleNamespace

from . import classifier, editing, evaluation, graphops, io, synth
from .candidates import candidate_pairs
from .classifier import FeatureSpec, LrModel
from .model import validate_theta

EXIT_INPUT = 2
EXIT_GENERATE = 3
EXIT_CANDIDATES = 4
EXIT_TRAIN = 5
EXIT_CLASSIFY = 6
EXIT_CLOSURE = 7
EXIT_REPAIR = 8
EXIT_EVALUATE = 9
EXIT_OUTPUT = 10

_MAX_COMPONENT_DEFAULT = 50
_K_DEFAULT = 3


def _stage(name: str, code: int, fn, *args, **kwargs):
    """Run one stage; on failure print a single diagnostic naming the
    stage and exit with the stage's code."""
    try:
        return fn(*args, **kwargs)
    except Exception as exc:
        print(f"linkforge: {name}: {exc}", file=sys.stderr)
        raise SystemExit(code) from exc


def _default_jobs() -> int:
    raw = os.environ.get("LINKFORGE_JOBS", "").strip()
    return int(raw) if raw else 1


def _parse_bool(raw: str) -> bool:
    if raw.lower() in ("1", "true", "yes", "on"):
        return True
    if raw.lower() in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


class _Options:
    """Merge of CLI flags, config-file values and defaults.

    All argparse options use ``default=None`` so that an unset flag is
    distinguishable from an explicitly passed one.
    """

    def __init__(self, ns: argparse.Namespace):
        self._ns = ns
        path = getattr(ns, "config", None)
        self._config = (
            _stage("input", EXIT_INPUT, io.read_config_kv, path) if path else {}
        )

    def get(self, name: str, cast, default=None, required: bool = False):
        value = getattr(self._ns, name, None)
        if value is None and name in self._config:
            try:
                value = cast(self._config[name])
            except ValueError as exc:
                print(f"linkforge: input: config key {name}: {exc}", file=sys.stderr)
                raise SystemExit(EXIT_INPUT) from exc
        if value is None:
            value = default
        if value is None and required:
            print(f"linkforge: input: missing required option --{name.replace('_', '-')}", file=sys.stderr)
            raise SystemExit(EXIT_INPUT)
        return value


def _read_inputs(opts: _Options, *, embeddings=False, labels=False, scores=False,
                 pairs=False, model=False, truth=False):
    """Load the requested input files (stage: input)."""
    loaded = {}
    if embeddings:
        path = opts.get("embeddings", str, required=True)
        loaded["table"] = _stage("input", EXIT_INPUT, io.read_embeddings_tsv, path)
    if labels:
        path = opts.get("labels", str, required=True)
        loaded["labeled"] = _stage("input", EXIT_INPUT, io.read_labels_csv, path)
    if scores:
        path = opts.get("scores", str, required=True)
        loaded["scored"] = _stage("input", EXIT_INPUT, io.read_scores_csv, path)
    if pairs:
        path = opts.get("pairs", str, required=True)
        loaded["pairs"] = _stage("input", EXIT_INPUT, io.read_linkset_csv, path)
    if model:
        path = opts.get("model", str, required=True)
        loaded["model"] = _stage("input", EXIT_INPUT, LrModel.load, path)
    if truth:
        path = opts.get("truth", str)
        loaded["truth"] = (
            _stage("input", EXIT_INPUT, io.read_clusters, path) if path else None
        )
    return SimpleNamespace(**loaded)


def _tentative_components(scored, labeled, epsilon, theta, max_component):
    """Override → tentative linkset → components → size cap."""
    validate_theta(theta)
    overridden = classifier.apply_label_override(scored, labeled, epsilon)
    dups = {pair for pair, is_dup in labeled.items() if is_dup}
    tentative = graphops.tentative_linkset(overridden, dups, theta)
    comps = graphops.connected_components(tentative)
    return graphops.filter_components(comps, max_component)


def _report_rows(reports, with_seconds: bool = True):
    rows = []
    for rep in reports:
        row = dataclasses.asdict(rep)
        if not with_seconds:
            del row["seconds"]
        rows.append(row)
    return rows


# --- subcommands ----------------------------------------------------------


def _cmd_generate(ns) -> int:
    opts = _Options(ns)
    cfg = _stage(
        "input",
        EXIT_INPUT,
        synth.GeneratorConfig,
        n_base=opts.get("n_base", int, required=True),
        n_subgraphs=opts.get("subgraphs", int, 4),
        sample_rate=opts.get("rate", float, required=True),
        dim=opts.get("dim", int, 100),
        noise_sigma=opts.get("noise", float, 0.1),
        cluster_sep=opts.get("sep", float, 4.0),
        seed=opts.get("seed", int, 0),
    )
    bench = _stage("generate", EXIT_GENERATE, synth.generate, cfg)
    out_dir = opts.get("out_dir", str, required=True)
    _stage("output", EXIT_OUTPUT, bench.save, out_dir)
    return 0


def _cmd_candidates(ns) -> int:
    opts = _Options(ns)
    inp = _read_inputs(opts, embeddings=True)
    k = opts.get("k", int, _K_DEFAULT)
    cands = _stage("candidates", EXIT_CANDIDATES, candidate_pairs, inp.table, k)
    out = opts.get("out", str, required=True)
    _stage("output", EXIT_OUTPUT, io.write_linkset_csv, cands.pairs, out)
    return 0


def _cmd_train(ns) -> int:
    opts = _Options(ns)
    inp = _read_inputs(opts, embeddings=True, labels=True)
    spec = _stage("input", EXIT_INPUT, FeatureSpec, opts.get("feature", str, "cosine"))
    model = _stage(
        "train",
        EXIT_TRAIN,
        classifier.train,
        inp.labeled,
        inp.table,
        spec,
        seed=opts.get("seed", int, 0),
    )
    _stage("output", EXIT_OUTPUT, model.save, opts.get("model_out", str, required=True))
    return 0


def _cmd_classify(ns) -> int:
    opts = _Options(ns)
    inp = _read_inputs(opts, embeddings=True, pairs=True, model=True)
    scored = _stage(
        "classify", EXIT_CLASSIFY, classifier.score, inp.model, inp.pairs, inp.table
    )
    _stage(
        "output", EXIT_OUTPUT, io.write_scores_csv, scored,
        opts.get("out", str, required=True),
    )
    return 0


def _cmd_closure(ns) -> int:
    opts = _Options(ns)
    inp = _read_inputs(opts, scores=True, labels=True)
    kept, _ = _stage(
        "closure",
        EXIT_CLOSURE,
        _tentative_components,
        inp.scored,
        inp.labeled,
        opts.get("epsilon", float, classifier.EPSILON_DEFAULT),
        opts.get("theta", float, required=True),
        opts.get("max_component", int, _MAX_COMPONENT_DEFAULT),
    )
    links = _stage("closure", EXIT_CLOSURE, graphops.transitive_closure, kept)
    _stage(
        "output", EXIT_OUTPUT, io.write_linkset_csv, links,
        opts.get("out", str, required=True),
    )
    sameas = opts.get("sameas", str)
    if sameas:
        _stage("output", EXIT_OUTPUT, io.write_sameas_triples, links, sameas)
    return 0


def _cmd_repair(ns) -> int:
    opts = _Options(ns)
    inp = _read_inputs(opts, scores=True, labels=True, embeddings=True, model=True)
    theta = opts.get("theta", float, required=True)
    kept, _ = _stage(
        "closure",
        EXIT_CLOSURE,
        _tentative_components,
        inp.scored,
        inp.labeled,
        opts.get("epsilon", float, classifier.EPSILON_DEFAULT),
        theta,
        opts.get("max_component", int, _MAX_COMPONENT_DEFAULT),
    )
    result = _stage(
        "repair",
        EXIT_REPAIR,
        editing.repair,
        kept,
        inp.model,
        inp.table,
        inp.labeled,
        theta,
        node_budget=opts.get("node_budget", int, editing.DEFAULT_NODE_BUDGET),
    )
    _stage(
        "output", EXIT_OUTPUT, io.write_linkset_csv, result.linkset,
        opts.get("out", str, required=True),
    )
    report = opts.get("report", str)
    if report:
        _stage(
            "output", EXIT_OUTPUT, io.write_component_report,
            _report_rows(result.reports), report,
        )
    sameas = opts.get("sameas", str)
    if sameas:
        _stage("output", EXIT_OUTPUT, io.write_sameas_triples, result.linkset, sameas)
    return 0


def _cmd_sweep(ns) -> int:
    opts = _Options(ns)
    bench_dir = opts.get("benchmark_dir", str, required=True)
    bench = _stage("input", EXIT_INPUT, synth.SynthBenchmark.load, bench_dir)
    inp = _read_inputs(opts, labels=True, model=True)
    report = _stage(
        "evaluate",
        EXIT_EVALUATE,
        evaluation.sweep,
        bench,
        inp.model,
        inp.labeled,
        k=opts.get("k", int, _K_DEFAULT),
        max_component=opts.get("max_component", int, _MAX_COMPONENT_DEFAULT),
        node_budget=opts.get("node_budget", int, editing.DEFAULT_NODE_BUDGET),
        jobs=opts.get("jobs", int, _default_jobs()),
    )
    out_dir = opts.get("out_dir", str, required=True)
    _stage("output", EXIT_OUTPUT, evaluation.emit_report, report, out_dir)
    return 0


def _cmd_pipeline(ns) -> int:
    opts = _Options(ns)
    out_dir = Path(opts.get("out_dir", str, required=True))
    _stage("output", EXIT_OUTPUT, out_dir.mkdir, parents=True, exist_ok=True)

    inp = _read_inputs(opts, embeddings=True, truth=True)
    table, truth = inp.table, inp.truth
    feature = opts.get("feature", str, "cosine")
    spec = _stage("input", EXIT_INPUT, FeatureSpec, feature)
    k = opts.get("k", int, _K_DEFAULT)
    theta = opts.get("theta", float)
    do_sweep = bool(opts.get("sweep", _parse_bool, False)) or theta is None
    if theta is not None and opts.get("sweep", _parse_bool, False):
        print("linkforge: input: --theta and --sweep are mutually exclusive", file=sys.stderr)
        return EXIT_INPUT
    max_component = opts.get("max_component", int, _MAX_COMPONENT_DEFAULT)
    epsilon = opts.get("epsilon", float, classifier.EPSILON_DEFAULT)
    seed = opts.get("seed", int, 0)
    jobs = opts.get("jobs", int, _default_jobs())
    node_budget = opts.get("node_budget", int, editing.DEFAULT_NODE_BUDGET)

    # candidate pairs
    cands = _stage("candidates", EXIT_CANDIDATES, candidate_pairs, table, k)
    artifacts = {"candidates": out_dir / "candidates.csv"}
    _stage("output", EXIT_OUTPUT, io.write_linkset_csv, cands.pairs, artifacts["candidates"])

    # expert labels: given, or sampled against ground truth
    labels_path = opts.get("labels", str)
    if labels_path:
        labeled = _stage("input", EXIT_INPUT, io.read_labels_csv, labels_path)
    elif truth is not None:
        size = opts.get("train_size", int, classifier.TRAIN_SIZE_DEFAULT[feature])
        labeled = _stage(
            "train", EXIT_TRAIN,
            classifier.sample_training_pairs, cands.pairs, truth, size, seed,
        )
    else:
        print("linkforge: input: need --labels or --truth to obtain training labels", file=sys.stderr)
        return EXIT_INPUT
    artifacts["labels"] = out_dir / "labels.csv"
    _stage("output", EXIT_OUTPUT, io.write_labels_csv, labeled, artifacts["labels"])

    # model
    model = _stage("train", EXIT_TRAIN, classifier.train, labeled, table, spec, seed=seed)
    artifacts["model"] = out_dir / "model.txt"
    _stage("output", EXIT_OUTPUT, model.save, artifacts["model"])

    # raw candidate scores
    scored = _stage("classify", EXIT_CLASSIFY, classifier.score, model, cands.pairs, table)
    artifacts["scores"] = out_dir / "scores.csv"
    _stage("output", EXIT_OUTPUT, io.write_scores_csv, scored, artifacts["scores"])

    if do_sweep:
        if truth is None:
            print("linkforge: input: sweep mode needs --truth for gold metrics", file=sys.stderr)
            return EXIT_INPUT
        bench = SimpleNamespace(embeddings=table, truth=truth)
        report = _stage(
            "evaluate", EXIT_EVALUATE, evaluation.sweep,
            bench, model, labeled,
            k=k, max_component=max_component, node_budget=node_budget, jobs=jobs,
        )
        for name in ("metrics.csv", "fscore.svg", "precision.svg", "recall.svg",
                     "size.svg", "summary.txt"):
            artifacts[Path(name).stem] = out_dir / name
        _stage("output", EXIT_OUTPUT, evaluation.emit_report, report, out_dir)
    else:
        kept, _ = _stage(
            "closure", EXIT_CLOSURE, _tentative_components,
            scored, labeled, epsilon, theta, max_component,
        )
        closure_links = _stage("closure", EXIT_CLOSURE, graphops.transitive_closure, kept)
        artifacts["closure"] = out_dir / "closure.csv"
        _stage("output", EXIT_OUTPUT, io.write_linkset_csv, closure_links, artifacts["closure"])

        result = _stage(
            "repair", EXIT_REPAIR, editing.repair,
            kept, model, table, labeled, theta, node_budget=node_budget,
        )
        artifacts["repaired"] = out_dir / "repaired.csv"
        _stage("output", EXIT_OUTPUT, io.write_linkset_csv, result.linkset, artifacts["repaired"])
        artifacts["sameas"] = out_dir / "repaired.nt"
        _stage("output", EXIT_OUTPUT, io.write_sameas_triples, result.linkset, artifacts["sameas"])
        artifacts["report"] = out_dir / "report.jsonl"
        _stage(
            "output", EXIT_OUTPUT, io.write_component_report,
            _report_rows(result.reports), artifacts["report"],
        )

        if truth is not None:
            from .model import gold_linkset

            gold = _stage("evaluate", EXIT_EVALUATE, gold_linkset, truth)
            rows = [
                evaluation._score_linkset(closure_links, gold, theta, "closure"),
                evaluation._score_linkset(result.linkset, gold, theta, "edited"),
            ]
            metric_report = evaluation.SweepReport(tuple(rows))
            artifacts["metrics"] = out_dir / "metrics.csv"
            _stage(
                "output", EXIT_OUTPUT,
                evaluation.write_metrics_csv, metric_report, artifacts["metrics"],
            )

    # config echo, listing every artifact this run produced
    echo: dict[str, object] = {
        "feature": feature,
        "k": k,
        "theta": repr(theta) if theta is not None else "sweep",
        "max_component": max_component,
        "epsilon": repr(epsilon),
        "seed": seed,
        "node_budget": node_budget,
    }
    for name in sorted(artifacts):
        echo[f"artifact_{name}"] = artifacts[name].name  # relative to out_dir
    _stage("output", EXIT_OUTPUT, io.write_config_kv, echo, out_dir / "config.txt")
    return 0


# --- parser ---------------------------------------------------------------


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat key=value config file; flags override it")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linkforge",
        description="entity-matching pipeline: kNN candidates, pair classifier, "
        "cutoff linksets, and exact cluster-editing repair",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("generate", help="create a synthetic benchmark directory")
    p.add_argument("--n-base", type=int, dest="n_base")
    p.add_argument("--subgraphs", type=int)
    p.add_argument("--rate", type=float, help="per-copy renaming probability q")
    p.add_argument("--dim", type=int)
    p.add_argument("--noise", type=float, help="duplicate perturbation scale")
    p.add_argument("--sep", type=float, help="expected center separation")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    _add_common(p)
    p.set_defaults(func=_cmd_generate)

    p = subs.add_parser("candidates", help="exact kNN candidate pairs")
    p.add_argument("--embeddings")
    p.add_argument("--k", type=int)
    p.add_argument("--out")
    _add_common(p)
    p.set_defaults(func=_cmd_candidates)

    p = subs.add_parser("train", help="fit the elastic-net pair classifier")
    p.add_argument("--embeddings")
    p.add_argument("--labels")
    p.add_argument("--feature", choices=["cosine", "hadamard"])
    p.add_argument("--seed", type=int)
    p.add_argument("--model-out", dest="model_out")
    _add_common(p)
    p.set_defaults(func=_cmd_train)

    p = subs.add_parser("classify", help="score pairs with a trained model "
                        "(raw probabilities; expert overrides happen downstream)")
    p.add_argument("--model")
    p.add_argument("--pairs")
    p.add_argument("--embeddings")
    p.add_argument("--out")
    _add_common(p)
    p.set_defaults(func=_cmd_classify)

    p = subs.add_parser("closure", help="transitive-closure baseline linkset at θ")
    p.add_argument("--scores")
    p.add_argument("--labels")
    p.add_argument("--theta", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--max-component", type=int, dest="max_component")
    p.add_argument("--out")
    p.add_argument("--sameas", help="also write owl:sameAs triples here")
    _add_common(p)
    p.set_defaults(func=_cmd_closure)

    p = subs.add_parser("repair", help="cluster-editing repaired linkset at θ")
    p.add_argument("--scores")
    p.add_argument("--labels")
    p.add_argument("--model")
    p.add_argument("--embeddings")
    p.add_argument("--theta", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--max-component", type=int, dest="max_component")
    p.add_argument("--node-budget", type=int, dest="node_budget")
    p.add_argument("--out")
    p.add_argument("--report", help="per-component JSON-lines diagnostics")
    p.add_argument("--sameas", help="also write owl:sameAs triples here")
    _add_common(p)
    p.set_defaults(func=_cmd_repair)

    p = subs.add_parser("sweep", help="evaluate closure vs edited over the θ grid")
    p.add_argument("--benchmark-dir", dest="benchmark_dir")
    p.add_argument("--model")
    p.add_argument("--labels")
    p.add_argument("--k", type=int)
    p.add_argument("--max-component", type=int, dest="max_component")
    p.add_argument("--node-budget", type=int, dest="node_budget")
    p.add_argument("--jobs", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    _add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = subs.add_parser("pipeline", help="run the whole pipeline end to end")
    p.add_argument("--embeddings")
    p.add_argument("--truth", help="gold clusters file (enables label sampling "
                   "and evaluation)")
    p.add_argument("--labels", help="expert labels CSV; sampled from --truth if omitted")
    p.add_argument("--train-size", type=int, dest="train_size")
    p.add_argument("--feature", choices=["cosine", "hadamard"])
    p.add_argument("--k", type=int)
    p.add_argument("--theta", type=float, help="fixed cutoff; omit to sweep the grid")
    p.add_argument("--sweep", action="store_const", const=True, default=None,
                   help="sweep the θ grid (default when --theta is absent)")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--max-component", type=int, dest="max_component")
    p.add_argument("--node-budget", type=int, dest="node_budget")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int)
    p.add_argument("--out-dir", dest="out_dir")
    _add_common(p)
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return ns.func(ns)
    except SystemExit:
        raise
    except Exception as exc:  # uncategorized failure: report, don't traceback
        print(f"linkforge: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
