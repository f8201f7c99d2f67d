"""Per-feature relevance statistics for the filter selectors.

All scores are computed on consistently standardized features, so they are
invariant to affine rescaling of the inputs. Constant features score 0.
"""

from __future__ import annotations

import numpy as np

from ..modeling_eval import ModelSpec, Standardizer
from ..modeling_eval.models import fit_lr
from ..roi_ops import derive_seed

RELIEF_NEIGHBORS = 10
MI_BINS = 10
GINI_TREES = 200
GINI_DEPTH = 4


def fisher_scores(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """(mu1 - mu0)^2 / (var0 + var1) with sample (ddof=1) variances."""
    x0 = x[y == 0]
    x1 = x[y == 1]
    num = (x1.mean(axis=0) - x0.mean(axis=0)) ** 2
    den = x0.var(axis=0, ddof=1) + x1.var(axis=0, ddof=1)
    out = np.where(num == 0, 0.0, num / np.maximum(den, 1e-24))
    return out


def ulr_scores(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Absolute coefficient of a univariate logistic fit per standardized feature."""
    spec = ModelSpec(kind="lr", lr_ridge=1e-4)
    out = np.empty(x.shape[1])
    yf = y.astype(np.float64)
    for j in range(x.shape[1]):
        model = fit_lr(x[:, j:j + 1], yf, spec)
        out[j] = abs(float(model.weights[0]))
    return out


def relief_scores(x: np.ndarray, y: np.ndarray, k: int = RELIEF_NEIGHBORS) -> np.ndarray:
    """ReliefF with k nearest hits/misses and range-normalized differences."""
    n, p = x.shape
    rng_span = x.max(axis=0) - x.min(axis=0)
    span = np.where(rng_span == 0, 1.0, rng_span)
    xn = x / span
    d2 = ((xn[:, None, :] - xn[None, :, :]) ** 2).sum(axis=2)
    np.fill_diagonal(d2, np.inf)
    weights = np.zeros(p)
    for i in range(n):
        same = np.nonzero(y == y[i])[0]
        same = same[same != i]
        diff = np.nonzero(y != y[i])[0]
        kh = min(k, len(same))
        km = min(k, len(diff))
        if kh == 0 or km == 0:
            continue
        hits = same[np.argsort(d2[i, same], kind="stable")[:kh]]
        misses = diff[np.argsort(d2[i, diff], kind="stable")[:km]]
        weights += np.abs(xn[misses] - xn[i]).sum(axis=0) / km
        weights -= np.abs(xn[hits] - xn[i]).sum(axis=0) / kh
    return weights / n


def mi_scores(x: np.ndarray, y: np.ndarray, bins: int = MI_BINS) -> np.ndarray:
    """Mutual information after equal-frequency discretization per feature."""
    n, p = x.shape
    out = np.empty(p)
    py = np.bincount(y.astype(int), minlength=2) / n
    for j in range(p):
        col = x[:, j]
        edges = np.unique(np.quantile(col, np.linspace(0, 1, bins + 1)[1:-1]))
        d = np.searchsorted(edges, col, side="right")
        mi = 0.0
        for b in np.unique(d):
            sel = d == b
            pb = sel.mean()
            for cls in (0, 1):
                pxy = float(np.mean(sel & (y == cls)))
                if pxy > 0 and py[cls] > 0:
                    mi += pxy * np.log(pxy / (pb * py[cls]))
        out[j] = max(mi, 0.0)
    return out


def gini_scores(x: np.ndarray, y: np.ndarray, seed: int) -> np.ndarray:
    """Gini importance from a fixed-seed random forest (200 trees, depth <= 4)."""
    from sklearn.ensemble import RandomForestClassifier

    forest = RandomForestClassifier(
        n_estimators=GINI_TREES, max_depth=GINI_DEPTH,
        random_state=derive_seed("gini", seed) % (2 ** 32), n_jobs=1)
    forest.fit(x, y)
    return forest.feature_importances_


def filter_scores(algorithm: str, x: np.ndarray, y: np.ndarray, seed: int) -> np.ndarray:
    """Raw relevance for one filter algorithm on standardized features."""
    std = Standardizer.fit(x)
    xs = std.apply(x)
    y = np.asarray(y, dtype=int)
    if algorithm == "fscore":
        return fisher_scores(xs, y)
    if algorithm == "ulr":
        return ulr_scores(xs, y)
    if algorithm == "relief":
        return relief_scores(xs, y)
    if algorithm == "mi":
        return mi_scores(xs, y)
    if algorithm == "gini":
        return gini_scores(xs, y, seed)
    raise ValueError(f"not a filter algorithm: {algorithm!r}")
