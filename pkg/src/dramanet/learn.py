"""Linear SVM, leave-one-out evaluation and recursive feature elimination."""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .features import Dataset, zscore

log = logging.getLogger(__name__)

COMEDY, TRAGEDY = 1, -1
CLASS_NAMES = {COMEDY: "Comedy", TRAGEDY: "Tragedy"}
TAU = 1e-12

try:
    from numba import njit as _njit

    _jit = _njit(cache=True)
except ImportError:  # pragma: no cover - the pure-Python loop gives the same result, slowly
    def _jit(fn):
        return fn


class SvmError(ValueError):
    pass


class ConvergenceWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    regularization_C: float
    n_iter: int = 0

    def decision_function(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.weights + self.bias

    def predict(self, x) -> np.ndarray:
        # a decision value of exactly 0 goes to Comedy
        return np.where(self.decision_function(x) >= 0, COMEDY, TRAGEDY)


def train_svm(rows, labels, C: float = 1.0, tol: float = 1e-6, max_iter: int | None = None) -> LinearModel:
    """Soft-margin linear SVM (hinge loss, L2 penalty, free intercept).

    The dual is solved by two-coordinate descent: at each step the maximal
    violating pair is updated in closed form, with the second index chosen
    by the second-order gain, scanning examples in a fixed order. The loop
    stops when the KKT violation m(alpha) - M(alpha) drops below ``tol``.
    No randomness is involved, so the model is a deterministic function of
    the input order.
    """
    x = np.asarray(rows, dtype=float)
    y = np.asarray(labels, dtype=float)
    if x.ndim != 2 or len(x) != len(y):
        raise SvmError("rows must be a 2-D array aligned with labels")
    if not np.all(np.isfinite(x)):
        raise SvmError("non-finite features")
    if not set(np.unique(y)) <= {1.0, -1.0}:
        raise SvmError("labels must be +1/-1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise SvmError("training data must contain both classes")
    if C <= 0:
        raise SvmError("C must be positive")

    n = len(y)
    q = (y[:, None] * y[None, :]) * (x @ x.T)
    max_iter = max_iter or max(1_000_000, 100 * n)
    alpha, grad, it = _smo(q, y, float(C), float(tol), int(max_iter))
    if it >= max_iter:
        warnings.warn(f"SVM solver hit max_iter={max_iter}", ConvergenceWarning, stacklevel=2)

    yg = y * grad
    free = (alpha > 0) & (alpha < C)
    if np.any(free):
        rho = float(yg[free].mean())
    else:
        at_upper = alpha >= C
        ub_mask = (at_upper & (y < 0)) | (~at_upper & (y > 0))
        lb_mask = (at_upper & (y > 0)) | (~at_upper & (y < 0))
        ub = yg[ub_mask].min() if np.any(ub_mask) else np.inf
        lb = yg[lb_mask].max() if np.any(lb_mask) else -np.inf
        rho = float((ub + lb) / 2)
    w = (alpha * y) @ x
    return LinearModel(w, -rho, float(C), it)


@_jit
def _smo(q, y, C, tol, max_iter):
    n = y.shape[0]
    alpha = np.zeros(n)
    grad = -np.ones(n)
    it = 0
    while it < max_iter:
        # maximal violator i in I_up, smallest -y*G over I_low
        i = -1
        m_up = -np.inf
        m_low = np.inf
        for t in range(n):
            v = -y[t] * grad[t]
            if (y[t] > 0 and alpha[t] < C) or (y[t] < 0 and alpha[t] > 0):
                if v > m_up:
                    m_up = v
                    i = t
            if (y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C):
                if v < m_low:
                    m_low = v
        if i < 0 or m_up - m_low < tol:
            break
        # second-order choice of j
        j = -1
        best = np.inf
        for t in range(n):
            if not ((y[t] > 0 and alpha[t] > 0) or (y[t] < 0 and alpha[t] < C)):
                continue
            v = -y[t] * grad[t]
            if v >= m_up:
                continue
            b = m_up - v
            a = q[i, i] + q[t, t] - 2.0 * y[i] * y[t] * q[i, t]
            if a <= 0:
                a = TAU
            gain = -(b * b) / a
            if gain < best:
                best = gain
                j = t
        if j < 0:
            break
        it += 1

        ai_old = alpha[i]
        aj_old = alpha[j]
        if y[i] != y[j]:
            quad = q[i, i] + q[j, j] + 2.0 * q[i, j]
            if quad <= 0:
                quad = TAU
            delta = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai = ai_old + delta
            aj = aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj = 0.0
                    ai = diff
            elif ai < 0:
                ai = 0.0
                aj = -diff
            if diff > 0:
                if ai > C:
                    ai = C
                    aj = C - diff
            elif aj > C:
                aj = C
                ai = C + diff
        else:
            quad = q[i, i] + q[j, j] - 2.0 * q[i, j]
            if quad <= 0:
                quad = TAU
            delta = (grad[i] - grad[j]) / quad
            total = ai_old + aj_old
            ai = ai_old - delta
            aj = aj_old + delta
            if total > C:
                if ai > C:
                    ai = C
                    aj = total - C
            elif aj < 0:
                aj = 0.0
                ai = total
            if total > C:
                if aj > C:
                    aj = C
                    ai = total - C
            elif ai < 0:
                ai = 0.0
                aj = total
        alpha[i] = ai
        alpha[j] = aj
        dai = ai - ai_old
        daj = aj - aj_old
        for t in range(n):
            grad[t] += q[t, i] * dai + q[t, j] * daj
    return alpha, grad, it


# -- leave-one-out ----------------------------------------------------------

@dataclass
class ClassificationReport:
    confusion: dict[str, dict[str, int]]  # true class -> predicted class -> count
    per_class: dict[str, dict[str, float]]
    accuracy: float  # share of plays classified correctly
    mean_recall: float  # mean of per-class recall
    play_ids: list[str] = field(default_factory=list)
    true_labels: list[int] = field(default_factory=list)
    predicted: list[int] = field(default_factory=list)
    decision_values: list[float] = field(default_factory=list)
    degenerate_folds: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "confusion": self.confusion,
            "per_class": self.per_class,
            "accuracy": self.accuracy,
            "mean_recall": self.mean_recall,
            "degenerate_folds": self.degenerate_folds,
            "predictions": [
                {
                    "play_id": pid,
                    "true": CLASS_NAMES[t],
                    "predicted": CLASS_NAMES[p],
                    "decision_value": d,
                }
                for pid, t, p, d in zip(self.play_ids, self.true_labels, self.predicted, self.decision_values)
            ],
        }

    def summary(self) -> str:
        lines = []
        for cls in ("Comedy", "Tragedy"):
            m = self.per_class[cls]
            lines.append(
                f"{cls:8s} accuracy(recall)={m['recall']:.2f}  F1={m['f1']:.2f}  "
                f"precision={m['precision']:.2f}  recall={m['recall']:.2f}  n={m['support']}"
            )
        lines.append(f"overall accuracy={self.accuracy:.3f}  mean per-class recall={self.mean_recall:.3f}")
        return "\n".join(lines)


def classification_report(true, pred) -> ClassificationReport:
    true = [int(t) for t in true]
    pred = [int(p) for p in pred]
    conf = {
        CLASS_NAMES[t]: {CLASS_NAMES[p]: sum(1 for a, b in zip(true, pred) if a == t and b == p) for p in (COMEDY, TRAGEDY)}
        for t in (COMEDY, TRAGEDY)
    }
    per_class = {}
    for cls in ("Comedy", "Tragedy"):
        tp = conf[cls][cls]
        support = sum(conf[cls].values())
        predicted = sum(conf[t][cls] for t in conf)
        recall = tp / support if support else 0.0
        precision = tp / predicted if predicted else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
        per_class[cls] = {"precision": precision, "recall": recall, "f1": f1, "support": support}
    n = len(true)
    accuracy = sum(conf[c][c] for c in conf) / n if n else 0.0
    mean_recall = (per_class["Comedy"]["recall"] + per_class["Tragedy"]["recall"]) / 2
    return ClassificationReport(conf, per_class, accuracy, mean_recall, true_labels=true, predicted=pred)


def _loo_fold(args):
    x, y, i, C = args
    mask = np.arange(len(y)) != i
    y_train = y[mask]
    if np.all(y_train == y_train[0]):
        return int(y_train[0]), float("nan"), True
    model = train_svm(x[mask], y_train, C)
    d = float(model.decision_function(x[i : i + 1])[0])
    return (COMEDY if d >= 0 else TRAGEDY), d, False


def loo_evaluate(dataset: Dataset, C: float = 1.0, n_jobs: int = 1) -> ClassificationReport:
    """Leave-one-out: every play is predicted by a model trained on all the others."""
    x = np.asarray(dataset.matrix, dtype=float)
    y = np.asarray(dataset.labels, dtype=int)
    if len(y) < 2:
        raise SvmError("need at least 2 plays")
    jobs = [(x, y, i, C) for i in range(len(y))]
    if n_jobs and n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_loo_fold, jobs, chunksize=max(1, len(jobs) // (4 * n_jobs))))
    else:
        results = [_loo_fold(j) for j in jobs]
    pred = [r[0] for r in results]
    report = classification_report(y, pred)
    report.play_ids = list(dataset.play_ids)
    report.decision_values = [r[1] for r in results]
    report.degenerate_folds = [pid for pid, r in zip(dataset.play_ids, results) if r[2]]
    for pid in report.degenerate_folds:
        log.warning("fold %s had a single training class; predicted that class", pid)
    return report


# -- recursive feature elimination --------------------------------------------

@dataclass(frozen=True)
class RfeStep:
    eliminated: str | None  # None for the starting full set
    remaining: tuple[str, ...]
    accuracy: float
    mean_recall: float


def rfe(dataset: Dataset, C: float = 1.0, n_jobs: int = 1) -> list[RfeStep]:
    """Drop the feature with the smallest |weight| one at a time down to a single feature.

    The first step records the full feature set. Weights come from a model fit
    on the whole dataset; each step's accuracy is a leave-one-out run.
    Ties in |weight| remove the lexicographically last name.
    """
    names = list(dataset.feature_names)
    if len(names) < 2:
        raise SvmError("RFE needs at least 2 features")
    trace = []
    current = dataset
    rep = loo_evaluate(current, C, n_jobs)
    trace.append(RfeStep(None, tuple(names), rep.accuracy, rep.mean_recall))
    while len(names) > 1:
        model = train_svm(current.matrix, current.labels, C)
        mags = np.abs(model.weights)
        lowest = mags.min()
        victim = max(n for n, m in zip(names, mags) if m == lowest)
        names = [n for n in names if n != victim]
        current = dataset.select(names)
        rep = loo_evaluate(current, C, n_jobs)
        trace.append(RfeStep(victim, tuple(names), rep.accuracy, rep.mean_recall))
    return trace


def augment_with_size(dataset: Dataset) -> Dataset:
    """Append z-scored cast size as an extra column."""
    if "n_characters" not in dataset.extras:
        raise KeyError("dataset extras lack n_characters")
    size = np.asarray(dataset.extras["n_characters"], dtype=float)
    return Dataset(
        list(dataset.play_ids),
        list(dataset.feature_names) + ["n_characters"],
        np.column_stack([dataset.matrix, zscore(size)]),
        dataset.labels.copy(),
        np.column_stack([dataset.raw, size]),
        dict(dataset.extras),
    )
