"""Shared feature-selection machinery: configuration, robustness regimes,
inner-CV subset scoring, and the selection trace."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from ..modeling_eval import ModelSpec, Standardizer, auc, fit, predict_score
from ..robustness import ICC_SELECTION_THRESHOLD, RobustnessProfile

ALGORITHMS = ("fscore", "ulr", "relief", "mi", "gini", "lasso", "ga", "sbs", "sfs", "rfe")
REGIMES = ("predictive", "fully_robust", "semi_robust", "weighted")

SFS_IMPROVEMENT_EPS = 1e-4
MAX_SUBSET_SIZE = 30


class SelectionError(ValueError):
    pass


class EmptyPoolError(SelectionError):
    """No candidate features left after regime constraints."""


class EmptySelectionError(SelectionError):
    """Selector terminated with nothing selected."""


@dataclass(frozen=True)
class SelectionConfig:
    algorithm: str = "fscore"
    regime: str = "predictive"
    w: float = 0.5
    icc_threshold: float = ICC_SELECTION_THRESHOLD
    pool_fraction: float = 0.8
    target_k: int | None = None
    seed: int = 0
    n_folds: int = 5

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise SelectionError(f"unknown algorithm {self.algorithm!r}")
        if self.regime not in REGIMES:
            raise SelectionError(f"unknown regime {self.regime!r}")
        if not 0.0 <= self.w <= 1.0:
            raise SelectionError("w must lie in [0, 1]")
        if not 0.0 < self.pool_fraction <= 1.0:
            raise SelectionError("pool_fraction must lie in (0, 1]")


@dataclass
class TraceRow:
    """One logged selection iteration.

    Actions prefixed 'repair', 'lambda', or 'prune' are transitional
    (pool repair or regularization-path exploration); all other rows are
    candidate pools under consideration and are the ones the semi-robust
    80%-rule postcondition quantifies over.
    """

    iteration: int
    pool_hash: str
    s: float
    c_bar: float
    s_combined: float
    action: str
    pool_size: int
    robust_fraction: float

    @property
    def is_candidate_state(self) -> bool:
        return not self.action.startswith(("repair", "lambda", "prune"))


@dataclass
class SelectionResult:
    selected: list[str]
    score_trace: list[tuple[str, float]]  # per-feature or per-step final scores
    nf: int
    avg_icc: tuple[float, float]          # mean, sd over selected features' ICC
    trace: list[TraceRow] = field(default_factory=list)
    details: dict = field(default_factory=dict)


def pool_hash(names) -> str:
    return hashlib.sha1("|".join(sorted(names)).encode()).hexdigest()[:12]


def minmax(values: np.ndarray) -> np.ndarray:
    """Min-max to [0, 1]; a constant vector maps to all zeros."""
    values = np.asarray(values, dtype=np.float64)
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def combine(s, c_bar: float, w: float):
    """The weighted-robustness blend (1 - w) * s + w * c_bar."""
    return (1.0 - w) * s + w * c_bar


@dataclass
class SelectionContext:
    """Everything a selector run needs, with a subset-AUC cache."""

    x: np.ndarray                 # post-UFS, imputed, unstandardized train matrix
    y: np.ndarray
    names: list[str]
    profile: RobustnessProfile
    cfg: SelectionConfig
    model_spec: ModelSpec
    folds: list[np.ndarray]
    trace: list[TraceRow] = field(default_factory=list)
    _auc_cache: dict = field(default_factory=dict)

    def col_index(self, names) -> list[int]:
        return [self.names.index(n) for n in names]

    def effective_w(self) -> float:
        if self.cfg.regime == "weighted":
            return self.cfg.w
        return 0.0

    def c_bar(self, names) -> float:
        if not names:
            return 0.0
        return float(np.mean(self.profile.clamped_many(list(names))))

    def robust_fraction(self, names) -> float:
        if not names:
            return 1.0
        icc = np.array([self.profile.icc[n] for n in names])
        return float(np.mean(icc > self.cfg.icc_threshold))

    def pool_is_legal(self, names) -> bool:
        return self.robust_fraction(names) >= self.cfg.pool_fraction

    def cv_auc(self, names) -> float:
        """Mean stratified-CV AUC of a model on the named feature subset."""
        key = frozenset(names)
        cached = self._auc_cache.get(key)
        if cached is not None:
            return cached
        cols = self.col_index(names)
        xsub = self.x[:, cols]
        aucs = []
        for val_idx in self.folds:
            train_mask = np.ones(len(self.y), dtype=bool)
            train_mask[val_idx] = False
            std = Standardizer.fit(xsub[train_mask])
            model = fit(self.model_spec, std.apply(xsub[train_mask]), self.y[train_mask])
            scores = predict_score(model, std.apply(xsub[val_idx]))
            aucs.append(auc(scores, self.y[val_idx]))
        value = float(np.mean(aucs))
        self._auc_cache[key] = value
        return value

    def log(self, iteration: int, names, s: float, action: str) -> None:
        c = self.c_bar(names)
        self.trace.append(TraceRow(
            iteration=iteration,
            pool_hash=pool_hash(names),
            s=float(s),
            c_bar=c,
            s_combined=float(combine(s, c, self.effective_w())),
            action=action,
            pool_size=len(names),
            robust_fraction=self.robust_fraction(names)))


def prepare_pool(names: list[str], profile: RobustnessProfile,
                 cfg: SelectionConfig) -> list[str]:
    """Apply the fully-robust pre-filter; other regimes keep the pool."""
    if cfg.regime != "fully_robust":
        return list(names)
    kept = [n for n in names if profile.icc[n] > cfg.icc_threshold]
    if not kept:
        counts: dict[str, int] = {}
        for n in names:
            bucket = f"{np.floor(profile.icc[n] * 10) / 10:.1f}"
            counts[bucket] = counts.get(bucket, 0) + 1
        raise EmptyPoolError(
            f"no feature has ICC > {cfg.icc_threshold}; ICC histogram {sorted(counts.items())}")
    return kept


def choose_argmax(scores) -> int:
    """First strict maximum; ties go to the earliest entry, so callers order
    candidates by their tie-break rule (smaller subset, then name order)."""
    best = None
    best_idx = -1
    for idx, value in enumerate(scores):
        if best is None or value > best:
            best = value
            best_idx = idx
    return best_idx


def result_from(ctx: SelectionContext, selected: list[str],
                score_trace: list[tuple[str, float]],
                details: dict | None = None) -> SelectionResult:
    if not selected:
        raise EmptySelectionError("selector produced an empty feature set")
    ctx.log(len(ctx.trace), selected, s=ctx.cv_auc(selected), action="final")
    icc = np.array([ctx.profile.icc[n] for n in selected])
    return SelectionResult(
        selected=list(selected),
        score_trace=score_trace,
        nf=len(selected),
        avg_icc=(float(icc.mean()), float(icc.std())),
        trace=ctx.trace,
        details=details or {})
