"""Precision/recall/F½ scoring, the θ sweep, and report emission.

The sweep evaluates the whole downstream pipeline (tentative linkset →
components → size cap → closure baseline vs. edited repair) at every
cutoff on the grid and scores both variants against the gold linkset.
Grid points are independent, so they may be evaluated in parallel; the
report is assembled in θ order, making output identical for any job
count.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from . import classifier, editing, graphops
from .candidates import candidate_pairs
from .model import Linkset, Pair, ParameterError, gold_linkset
from .synth import SynthBenchmark

VARIANTS = ("closure", "edited")

F_HALF_BETA = 0.5


def theta_grid() -> list[float]:
    """The 100-point cutoff grid: {0.01·i : i = 1..99} ∪ {0.005}.

    A 0.01-stepped grid over (0, 1) has only 99 interior points; the
    extra 0.005 point brings the count to the documented 100.
    """
    return sorted([0.005] + [i / 100.0 for i in range(1, 100)])


def precision_recall(pred: Linkset, gold: Linkset) -> tuple[float, float]:
    """Precision and recall of a predicted linkset.

    Conventions, stated because they matter at the extremes: an empty
    prediction has precision 1.0 (it asserts nothing false); an empty
    gold set has recall 1.0 (nothing was missed).
    """
    hits = len(pred & gold)
    precision = hits / len(pred) if pred else 1.0
    recall = hits / len(gold) if gold else 1.0
    return precision, recall


def f_beta(precision: float, recall: float, beta: float) -> float:
    """(1+β²)·p·r / (β²·p + r), and 0.0 when the denominator is 0."""
    if not 0.0 <= precision <= 1.0 or not 0.0 <= recall <= 1.0:
        raise ParameterError("precision and recall must lie in [0, 1]")
    if not beta > 0.0:
        raise ParameterError(f"beta must be positive, got {beta}")
    denom = beta * beta * precision + recall
    if denom == 0.0:
        return 0.0
    return (1.0 + beta * beta) * precision * recall / denom


@dataclass(frozen=True)
class MetricRow:
    theta: float
    variant: str
    precision: float
    recall: float
    f_half: float
    linkset_size: int
    relative_size: float  # linkset size / gold size (NaN when gold is empty)


@dataclass(frozen=True)
class SweepReport:
    """One MetricRow per (θ, variant), plus the θ values that failed
    outright (recorded, never silently dropped)."""

    rows: tuple[MetricRow, ...]
    failures: tuple[tuple[float, str], ...] = ()

    def variant_rows(self, variant: str) -> list[MetricRow]:
        return [r for r in self.rows if r.variant == variant]

    def mean_f_half(self, variant: str) -> float:
        rows = self.variant_rows(variant)
        return sum(r.f_half for r in rows) / len(rows)

    def max_f_half(self, variant: str) -> tuple[float, float]:
        """(argmax θ, max F½); the smallest argmax θ wins ties."""
        rows = self.variant_rows(variant)
        best = max(rows, key=lambda r: (r.f_half, -r.theta))
        return best.theta, best.f_half


def _score_linkset(links: Linkset, gold: Linkset, theta: float, variant: str) -> MetricRow:
    p, r = precision_recall(links, gold)
    return MetricRow(
        theta=theta,
        variant=variant,
        precision=p,
        recall=r,
        f_half=f_beta(p, r, F_HALF_BETA),
        linkset_size=len(links),
        relative_size=len(links) / len(gold) if gold else math.nan,
    )


# One immutable evaluation context per sweep; workers receive it once
# via the pool initializer instead of once per grid point.
_CTX = None


def _init_worker(ctx) -> None:
    global _CTX
    _CTX = ctx


def _eval_theta(theta: float):
    scored, labeled, model, table, gold, max_component, node_budget = _CTX
    try:
        dups = {pair for pair, is_dup in labeled.items() if is_dup}
        tentative = graphops.tentative_linkset(scored, dups, theta)
        comps = graphops.connected_components(tentative)
        kept, _ = graphops.filter_components(comps, max_component)
        closure = graphops.transitive_closure(kept)
        edited = editing.repair(
            kept, model, table, labeled, theta, node_budget=node_budget
        ).linkset
        return theta, (
            _score_linkset(closure, gold, theta, "closure"),
            _score_linkset(edited, gold, theta, "edited"),
        ), None
    except Exception as exc:  # recorded per θ, never silently skipped
        return theta, None, f"{type(exc).__name__}: {exc}"


def sweep(
    benchmark: SynthBenchmark,
    model: classifier.LrModel,
    labeled: Mapping[Pair, bool],
    *,
    grid: Sequence[float] | None = None,
    k: int = 3,
    max_component: int = 50,
    node_budget: int = editing.DEFAULT_NODE_BUDGET,
    jobs: int = 1,
) -> SweepReport:
    """Evaluate closure and edited linksets at every cutoff in the grid.

    Candidate generation, scoring and the expert override do not depend
    on θ and run once; each grid point then builds its tentative
    linkset, filters components at ``max_component``, and scores both
    variants against the benchmark's gold linkset.
    """
    table = benchmark.embeddings
    grid = theta_grid() if grid is None else sorted(grid)
    cands = candidate_pairs(table, k)
    scored = classifier.apply_label_override(
        classifier.score(model, cands.pairs, table), labeled
    )
    gold = gold_linkset(benchmark.truth)
    ctx = (scored, dict(labeled), model, table, gold, max_component, node_budget)

    if jobs <= 1:
        _init_worker(ctx)
        outcomes = [_eval_theta(theta) for theta in grid]
    else:
        with ProcessPoolExecutor(
            max_workers=jobs, initializer=_init_worker, initargs=(ctx,)
        ) as pool:
            outcomes = list(pool.map(_eval_theta, grid))

    rows: list[MetricRow] = []
    failures: list[tuple[float, str]] = []
    for theta, pair_of_rows, error in outcomes:  # already in grid order
        if error is not None:
            failures.append((theta, error))
        else:
            rows.extend(pair_of_rows)
    return SweepReport(tuple(rows), tuple(failures))


# --- report files ---------------------------------------------------------

_CSV_HEADER = [
    "theta",
    "variant",
    "precision",
    "recall",
    "f_half",
    "linkset_size",
    "relative_size",
]


def write_metrics_csv(report: SweepReport, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(_CSV_HEADER)
        for r in sorted(report.rows, key=lambda r: (r.theta, r.variant)):
            writer.writerow(
                [
                    repr(r.theta),
                    r.variant,
                    repr(r.precision),
                    repr(r.recall),
                    repr(r.f_half),
                    r.linkset_size,
                    repr(r.relative_size),
                ]
            )


def read_metrics_csv(path: str | Path) -> list[MetricRow]:
    rows: list[MetricRow] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _CSV_HEADER:
            raise ParameterError(f"unexpected metrics header {header!r}")
        for row in reader:
            rows.append(
                MetricRow(
                    theta=float(row[0]),
                    variant=row[1],
                    precision=float(row[2]),
                    recall=float(row[3]),
                    f_half=float(row[4]),
                    linkset_size=int(row[5]),
                    relative_size=float(row[6]),
                )
            )
    return rows


def _plot_metric(report: SweepReport, attr: str, ylabel: str, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # pin everything that could make two identical runs differ
    matplotlib.rcParams["svg.hashsalt"] = "linkforge"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for variant, style in (("closure", "--"), ("edited", "-")):
        rows = sorted(report.variant_rows(variant), key=lambda r: r.theta)
        ax.plot(
            [r.theta for r in rows],
            [getattr(r, attr) for r in rows],
            style,
            label=variant,
        )
    ax.set_xlabel("theta")
    ax.set_ylabel(ylabel)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def emit_report(report: SweepReport, out_dir: str | Path) -> list[Path]:
    """Write metrics.csv, the four SVG charts, and summary.txt.

    Deterministic: identical reports produce byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "metrics.csv"]
    write_metrics_csv(report, written[0])

    for attr, ylabel, name in (
        ("f_half", "F1/2", "fscore.svg"),
        ("precision", "precision", "precision.svg"),
        ("recall", "recall", "recall.svg"),
        ("relative_size", "linkset size / gold size", "size.svg"),
    ):
        path = out / name
        _plot_metric(report, attr, ylabel, path)
        written.append(path)

    summary = out / "summary.txt"
    with open(summary, "w", encoding="utf-8", newline="\n") as fh:
        for variant in VARIANTS:
            if not report.variant_rows(variant):
                fh.write(f"{variant} no rows\n")
                continue
            theta_star, f_max = report.max_f_half(variant)
            fh.write(f"{variant} mean_f_half={repr(report.mean_f_half(variant))}\n")
            fh.write(
                f"{variant} max_f_half={repr(f_max)} at theta={repr(theta_star)}\n"
            )
        fh.write(f"failures={len(report.failures)}\n")
        for theta, message in report.failures:
            fh.write(f"failed theta={repr(theta)}: {message}\n")
    written.append(summary)
    return written
