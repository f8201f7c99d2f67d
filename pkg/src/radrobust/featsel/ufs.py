"""Univariate feature selection pre-filter.

Within each CV training fold: drop one of every feature pair with
|Pearson r| > 0.9 (keeping the higher ANOVA F statistic), then drop features
with F-test p > 0.5. A feature survives overall if it survives in a majority
of folds.
"""

from __future__ import annotations

import numpy as np
from scipy.stats import f as f_dist

from .core import EmptyPoolError

CORRELATION_CUTOFF = 0.9
P_VALUE_CUTOFF = 0.5


def anova_f(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two-class one-way ANOVA F statistic and p-value per column."""
    y = np.asarray(y, dtype=int)
    n = len(y)
    x0 = x[y == 0]
    x1 = x[y == 1]
    n0, n1 = len(x0), len(x1)
    grand = x.mean(axis=0)
    ssb = n0 * (x0.mean(axis=0) - grand) ** 2 + n1 * (x1.mean(axis=0) - grand) ** 2
    ssw = ((x0 - x0.mean(axis=0)) ** 2).sum(axis=0) + ((x1 - x1.mean(axis=0)) ** 2).sum(axis=0)
    df1, df2 = 1, n - 2
    with np.errstate(divide="ignore", invalid="ignore"):
        f = (ssb / df1) / (ssw / df2)
    f = np.where(np.isfinite(f), f, np.where(ssb > 0, np.inf, 0.0))
    p = f_dist.sf(f, df1, df2)
    p = np.where(np.isfinite(f), p, 0.0)
    return f, p


def _fold_survivors(x: np.ndarray, y: np.ndarray, names: list[str]) -> set[str]:
    f, p = anova_f(x, y)
    order = sorted(range(len(names)), key=lambda j: (-f[j], names[j]))
    with np.errstate(invalid="ignore"):
        sd = x.std(axis=0)
        xc = (x - x.mean(axis=0)) / np.where(sd == 0, 1.0, sd)
        corr = (xc.T @ xc) / len(y)
    kept: list[int] = []
    for j in order:
        if all(abs(corr[j, k]) <= CORRELATION_CUTOFF for k in kept):
            kept.append(j)
    return {names[j] for j in kept if p[j] <= P_VALUE_CUTOFF}


def ufs_prefilter(x: np.ndarray, y: np.ndarray, names: list[str],
                  folds: list[np.ndarray] | None = None) -> list[str]:
    """Reduced feature list; original column order preserved.

    With fold contexts, a feature must survive in a strict majority of the
    training folds. Without folds, a single pass over all rows is used.
    """
    if folds:
        votes: dict[str, int] = {n: 0 for n in names}
        for val_idx in folds:
            mask = np.ones(len(y), dtype=bool)
            mask[val_idx] = False
            for name in _fold_survivors(x[mask], y[mask], names):
                votes[name] += 1
        need = len(folds) // 2 + 1
        survivors = [n for n in names if votes[n] >= need]
    else:
        kept = _fold_survivors(x, y, names)
        survivors = [n for n in names if n in kept]
    if not survivors:
        raise EmptyPoolError("UFS removed every feature")
    return survivors
