"""Symmetric pair features + elastic-net logistic regression.

Features are symmetric in the pair's endpoints (cosine similarity, or
the Hadamard product of the two vectors), so scores cannot depend on
pair orientation. The model is fit by full-batch proximal gradient
(FISTA with backtracking), which handles the L1 term exactly and is
deterministic; hyperparameters come from a fixed grid scored by
stratified 5-fold cross-validated log-loss.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.special import expit

from . import io
from .model import (
    EmbeddingTable,
    GroundTruth,
    LinkforgeError,
    Pair,
    ParameterError,
    gold_linkset,
)
from .rng import substream

#: Scores are clamped into this closed interval so that downstream
#: logit transforms are always finite.
PROB_FLOOR = 1e-12

#: Default expert-label override: duplicates 1−ε, distincts ε.
EPSILON_DEFAULT = 1e-6

#: Default labeled-pair budgets per feature kind.
TRAIN_SIZE_DEFAULT = {"cosine": 100, "hadamard": 300}

#: Fixed hyperparameter grid, strongest regularization first; the
#: cross-validation tie-break keeps the earliest grid entry, i.e.
#: prefers larger λ and smaller α on equal validation loss.
DEFAULT_GRID: tuple[tuple[float, float], ...] = tuple(
    (lam, alpha)
    for lam in (1.0, 0.1, 0.01, 0.001, 0.0001)
    for alpha in (0.0, 0.5, 1.0)
)

_CV_FOLDS = 5
_TOL = 1e-8
_MAX_ITER = 20000


class DegenerateFeatureError(LinkforgeError, ValueError):
    """Cosine similarity was requested against a zero-norm vector."""


class TrainingError(LinkforgeError, ValueError):
    """The labeled set cannot support a fit (e.g. one class only)."""


class ConvergenceError(LinkforgeError, RuntimeError):
    """Optimizer hit the iteration cap; carries the final mapping norm."""

    def __init__(self, mapping_norm: float, max_iter: int):
        super().__init__(
            f"no convergence after {max_iter} iterations "
            f"(proximal-gradient mapping norm {mapping_norm:.3e})"
        )
        self.mapping_norm = mapping_norm
        self.max_iter = max_iter


@dataclass(frozen=True)
class FeatureSpec:
    """Which symmetric pair feature to compute: cosine (1 value) or
    hadamard (dim values)."""

    kind: str

    def __post_init__(self) -> None:
        if self.kind not in ("cosine", "hadamard"):
            raise ParameterError(f"unknown feature kind {self.kind!r}")

    def n_features(self, dim: int) -> int:
        return 1 if self.kind == "cosine" else dim


def featurize_pairs(
    table: EmbeddingTable, pairs: Sequence[Pair], spec: FeatureSpec
) -> np.ndarray:
    """Feature matrix with one row per pair, in the given order."""
    u = table.matrix([p[0] for p in pairs])
    v = table.matrix([p[1] for p in pairs])
    if spec.kind == "hadamard":
        return u * v
    norms_u = np.linalg.norm(u, axis=1)
    norms_v = np.linalg.norm(v, axis=1)
    for norms, side in ((norms_u, 0), (norms_v, 1)):
        bad = np.flatnonzero(norms == 0.0)
        if bad.size:
            raise DegenerateFeatureError(
                f"zero-norm vector for {pairs[bad[0]][side]!r} under cosine"
            )
    dots = np.einsum("ij,ij->i", u, v)
    return (dots / (norms_u * norms_v))[:, np.newaxis]


def featurize(table: EmbeddingTable, pair: Pair, spec: FeatureSpec) -> np.ndarray:
    return featurize_pairs(table, [pair], spec)[0]


# --- penalized logistic loss ---------------------------------------------
#
# loss(w, b) = mean_i [ softplus(z_i) − y_i z_i ]          (z = Xw + b)
#            + λ ( (1−α)/2 ‖w‖₂² + α ‖w‖₁ )
#
# The intercept is never penalized. The optimizer splits the objective
# into the smooth part (log-loss + ridge) and the L1 part handled by
# soft-thresholding; loss_and_gradient below evaluates the *full*
# objective (sign(w) subgradient for the L1 term) for gradient checks.


def loss_and_gradient(
    w: np.ndarray,
    b: float,
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    alpha: float,
) -> tuple[float, np.ndarray, float]:
    """Full regularized loss with its (sub)gradient in (w, b)."""
    n = X.shape[0]
    z = X @ w + b
    # softplus(z) − y·z, computed stably for large |z|
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    loss += lam * ((1.0 - alpha) / 2.0 * float(w @ w) + alpha * float(np.abs(w).sum()))
    resid = expit(z) - y
    grad_w = X.T @ resid / n + lam * (1.0 - alpha) * w + lam * alpha * np.sign(w)
    grad_b = float(np.mean(resid))
    return loss, grad_w, grad_b


def _smooth_value_grad(
    w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, lam: float, alpha: float
) -> tuple[float, np.ndarray, float]:
    n = X.shape[0]
    z = X @ w + b
    value = float(np.mean(np.logaddexp(0.0, z) - y * z))
    value += lam * (1.0 - alpha) / 2.0 * float(w @ w)
    resid = expit(z) - y
    return value, X.T @ resid / n + lam * (1.0 - alpha) * w, float(np.mean(resid))


def _soft_threshold(w: np.ndarray, t: float) -> np.ndarray:
    return np.sign(w) * np.maximum(np.abs(w) - t, 0.0)


def _fit_fista(
    X: np.ndarray,
    y: np.ndarray,
    lam: float,
    alpha: float,
    tol: float = _TOL,
    max_iter: int = _MAX_ITER,
) -> tuple[np.ndarray, float]:
    """Minimize the penalized loss; returns (w, b).

    Convergence is declared when the proximal-gradient mapping at the
    current iterate has Euclidean norm ≤ tol (for α = 0 this is just
    the gradient norm).
    """
    d = X.shape[1]
    w = np.zeros(d)
    b = 0.0
    w_prev, b_prev = w, b
    t_momentum = 1.0
    L = 1.0  # local Lipschitz estimate, adapted by backtracking

    def prox_step(wv: np.ndarray, bv: float, step: float) -> tuple[np.ndarray, float]:
        return _soft_threshold(wv, lam * alpha * step), bv

    for _ in range(max_iter):
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t_momentum * t_momentum)) / 2.0
        beta = (t_momentum - 1.0) / t_next
        yw = w + beta * (w - w_prev)
        yb = b + beta * (b - b_prev)

        f_y, gw, gb = _smooth_value_grad(yw, yb, X, y, lam, alpha)
        while True:
            cand_w, cand_b = prox_step(yw - gw / L, yb - gb / L, 1.0 / L)
            dw, db = cand_w - yw, cand_b - yb
            f_cand = _smooth_value_grad(cand_w, cand_b, X, y, lam, alpha)[0]
            bound = f_y + float(gw @ dw) + gb * db + L / 2.0 * (float(dw @ dw) + db * db)
            if f_cand <= bound + 1e-15:
                break
            L *= 2.0

        w_prev, b_prev = w, b
        w, b = cand_w, cand_b
        t_momentum = t_next

        # mapping norm at the new iterate (fresh gradient, same L)
        _, gw, gb = _smooth_value_grad(w, b, X, y, lam, alpha)
        pw, pb = prox_step(w - gw / L, b - gb / L, 1.0 / L)
        gap = L * np.sqrt(float((w - pw) @ (w - pw)) + (b - pb) ** 2)
        if gap <= tol:
            return w, b

    raise ConvergenceError(gap, max_iter)


def _standardize(X: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)  # constant columns stay at zero weight
    return (X - mean) / std, mean, std


def _stratified_folds(y: np.ndarray, n_folds: int, seed: int) -> np.ndarray:
    """Fold index per example: each class shuffled once, dealt round-robin."""
    rng = substream(seed, "cv-folds")
    fold = np.empty(len(y), dtype=np.intp)
    for cls in (0, 1):
        members = np.flatnonzero(y == cls)
        rng.shuffle(members)
        fold[members] = np.arange(len(members)) % n_folds
    return fold


def _log_loss(y: np.ndarray, p: np.ndarray) -> float:
    p = np.clip(p, PROB_FLOOR, 1.0 - PROB_FLOOR)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


@dataclass(frozen=True, eq=False)
class LrModel:
    """Fitted logistic model over raw (unstandardized) features."""

    feature: FeatureSpec
    dim: int
    weights: np.ndarray
    intercept: float
    lam: float
    alpha: float

    def save(self, path: str | Path) -> None:
        io.write_config_kv(
            {
                "feature": self.feature.kind,
                "dim": self.dim,
                "lambda": repr(float(self.lam)),
                "alpha": repr(float(self.alpha)),
                "intercept": repr(float(self.intercept)),
                "weights": " ".join(repr(float(v)) for v in self.weights),
            },
            path,
        )

    @classmethod
    def load(cls, path: str | Path) -> "LrModel":
        raw = io.read_config_kv(path)
        try:
            spec = FeatureSpec(raw["feature"])
            dim = int(raw["dim"])
            model = cls(
                feature=spec,
                dim=dim,
                weights=np.array([float(v) for v in raw["weights"].split()]),
                intercept=float(raw["intercept"]),
                lam=float(raw["lambda"]),
                alpha=float(raw["alpha"]),
            )
        except (KeyError, ValueError) as exc:
            raise io.FormatError(f"bad model file {path}: {exc}") from None
        if len(model.weights) != spec.n_features(dim):
            raise io.FormatError(
                f"bad model file {path}: {len(model.weights)} weights for "
                f"{spec.kind} features at dim {dim}"
            )
        return model


def train(
    labeled: Mapping[Pair, bool],
    table: EmbeddingTable,
    spec: FeatureSpec,
    grid: Sequence[tuple[float, float]] = DEFAULT_GRID,
    seed: int = 0,
) -> LrModel:
    """Fit on labeled pairs, selecting (λ, α) by 5-fold CV log-loss.

    Features are standardized internally for the solve and the fitted
    parameters are mapped back to raw-feature space, so the stored
    model applies directly to :func:`featurize_pairs` output. On CV
    ties the earliest grid entry wins.
    """
    pairs = sorted(labeled)
    y = np.array([1.0 if labeled[p] else 0.0 for p in pairs])
    n_dup = int(y.sum())
    if n_dup < 2 or len(y) - n_dup < 2:
        raise TrainingError(
            f"need at least 2 labeled pairs per class, got {n_dup} dup / "
            f"{len(y) - n_dup} distinct"
        )
    X = featurize_pairs(table, pairs, spec)

    fold = _stratified_folds(y, _CV_FOLDS, seed)
    best: tuple[float, float] | None = None
    best_loss = np.inf
    for lam, alpha in grid:
        losses = []
        for f in range(_CV_FOLDS):
            tr, va = fold != f, fold == f
            if not va.any():
                continue
            Xs, mean, std = _standardize(X[tr])
            w, b = _fit_fista(Xs, y[tr], lam, alpha)
            p = expit(((X[va] - mean) / std) @ w + b)
            losses.append(_log_loss(y[va], p))
        cv_loss = float(np.mean(losses))
        if cv_loss < best_loss:
            best_loss = cv_loss
            best = (lam, alpha)
    assert best is not None
    lam, alpha = best

    Xs, mean, std = _standardize(X)
    w, b = _fit_fista(Xs, y, lam, alpha)
    # fold the standardization into raw-feature parameters:
    # z = ((x−m)/s)·w + b = x·(w/s) + (b − Σ w·m/s)
    w_raw = w / std
    b_raw = float(b - (w * mean / std).sum())
    return LrModel(
        feature=spec,
        dim=table.dim,
        weights=w_raw,
        intercept=b_raw,
        lam=lam,
        alpha=alpha,
    )


def score(
    model: LrModel, pairs: Iterable[Pair], table: EmbeddingTable
) -> dict[Pair, float]:
    """Duplicate probability per pair, clamped into (0, 1)."""
    ordered = sorted(pairs)
    if not ordered:
        return {}
    if table.dim != model.dim:
        raise ParameterError(
            f"model expects dim {model.dim}, embeddings have dim {table.dim}"
        )
    X = featurize_pairs(table, ordered, model.feature)
    p = expit(X @ model.weights + model.intercept)
    p = np.clip(p, PROB_FLOOR, 1.0 - PROB_FLOOR)
    return dict(zip(ordered, p.tolist()))


def apply_label_override(
    scored: Mapping[Pair, float],
    labeled: Mapping[Pair, bool],
    epsilon: float = EPSILON_DEFAULT,
) -> dict[Pair, float]:
    """Force expert-labeled pairs to probability 1−ε (dup) or ε (distinct).

    Labeled pairs missing from ``scored`` are added, so expert opinion
    always reaches the downstream stages; unlabeled pairs pass through.
    """
    if not 0.0 < epsilon < 0.5:
        raise ParameterError(f"epsilon must be in (0, 0.5), got {epsilon}")
    result = dict(scored)
    for pair, is_dup in labeled.items():
        result[pair] = 1.0 - epsilon if is_dup else epsilon
    return result


def sample_training_pairs(
    candidates: Iterable[Pair],
    truth: GroundTruth,
    size: int,
    seed: int,
) -> dict[Pair, bool]:
    """Uniform sample of candidate pairs, labeled against ground truth."""
    pool = sorted(candidates)
    if not 0 < size <= len(pool):
        raise ParameterError(
            f"sample size {size} outside 1..{len(pool)} candidate pairs"
        )
    rng = substream(seed, "labels")
    chosen = rng.choice(len(pool), size=size, replace=False)
    gold = gold_linkset(truth)
    return {pool[i]: pool[i] in gold for i in sorted(chosen)}
