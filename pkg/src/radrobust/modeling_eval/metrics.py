"""Classifier metrics: rank AUC with tie correction, G-Mean operating points,
and deterministic stratified k-fold splitting."""

from __future__ import annotations

import numpy as np
from scipy.stats import rankdata


class MetricError(ValueError):
    pass


class UndefinedMetricError(MetricError):
    """Metric needs both classes present."""


class StratificationError(MetricError):
    """A fold would miss one class entirely."""


def auc(scores: np.ndarray, labels: np.ndarray) -> float:
    """Mann-Whitney AUC; tied score pairs contribute 1/2."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    n1 = int(np.sum(labels == 1))
    n0 = int(np.sum(labels == 0))
    if n0 == 0 or n1 == 0:
        raise UndefinedMetricError("AUC needs both classes present")
    ranks = rankdata(scores)
    r1 = float(ranks[labels == 1].sum())
    return (r1 - n1 * (n1 + 1) / 2.0) / (n0 * n1)


def se_sp_at(scores: np.ndarray, labels: np.ndarray, threshold: float) -> tuple[float, float]:
    pred = scores >= threshold
    pos = labels == 1
    neg = ~pos
    se = float(np.sum(pred & pos)) / max(int(pos.sum()), 1)
    sp = float(np.sum(~pred & neg)) / max(int(neg.sum()), 1)
    return se, sp


def choose_threshold_max_gmean(scores: np.ndarray, labels: np.ndarray) -> float:
    """Training-side operating threshold maximizing sqrt(SE * SP).

    Candidates are midpoints between consecutive distinct scores plus the two
    all-positive / all-negative extremes; ties go to the lowest threshold.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=int)
    if len(set(labels.tolist())) < 2:
        raise UndefinedMetricError("threshold choice needs both classes present")
    uniq = np.unique(scores)
    cands = [uniq[0] - 1.0]
    cands.extend(((uniq[:-1] + uniq[1:]) / 2.0).tolist())
    cands.append(uniq[-1] + 1.0)
    best_t = cands[0]
    best_g = -1.0
    for t in cands:
        se, sp = se_sp_at(scores, labels, t)
        g = np.sqrt(se * sp)
        if g > best_g + 1e-15:
            best_g = g
            best_t = t
    return float(best_t)


def gmean_se_sp(scores: np.ndarray, labels: np.ndarray,
                threshold: float) -> tuple[float, float, float]:
    """(GMean percent, SE, SP) at a frozen threshold."""
    labels = np.asarray(labels, dtype=int)
    if len(set(labels.tolist())) < 2:
        raise UndefinedMetricError("metrics need both classes present")
    se, sp = se_sp_at(np.asarray(scores, dtype=np.float64), labels, threshold)
    return 100.0 * float(np.sqrt(se * sp)), se, sp


def stratified_kfold(labels: np.ndarray, n_splits: int, seed: int) -> list[np.ndarray]:
    """Deterministic stratified folds: per-class shuffle, round-robin deal.

    Returns the list of validation-index arrays; raises if any fold would
    miss a class.
    """
    labels = np.asarray(labels, dtype=int)
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(n_splits)]
    for cls in sorted(set(labels.tolist())):
        idx = np.nonzero(labels == cls)[0]
        rng.shuffle(idx)
        for pos, i in enumerate(idx):
            folds[pos % n_splits].append(int(i))
    out = [np.array(sorted(f), dtype=int) for f in folds]
    for f in out:
        held = labels[f]
        rest = np.delete(labels, f)
        if len(set(held.tolist())) < 2 or len(set(rest.tolist())) < 2:
            raise StratificationError(
                f"fold misses a class (labels {np.bincount(labels).tolist()}, "
                f"{n_splits} splits)")
    return out
