"""Feature selection: UFS pre-filter plus ten selectors, each runnable under
the predictive, fully-robust, semi-robust, and weighted regimes."""

from __future__ import annotations

import numpy as np

from ..cohort_io import impute_columns, nanmedian_columns
from ..modeling_eval import ModelSpec, stratified_kfold
from ..robustness import RobustnessProfile
from ..roi_ops import derive_seed
from .core import (ALGORITHMS, REGIMES, EmptyPoolError, EmptySelectionError,
                   SelectionConfig, SelectionContext, SelectionError,
                   SelectionResult, TraceRow, combine, minmax, pool_hash,
                   prepare_pool)
from .filters import rank_filter
from .lasso import lasso_select
from .scores import filter_scores
from .ufs import ufs_prefilter
from .wrappers import ga_select, rfe_select, sbs_select, sfs_select

__all__ = [
    "ALGORITHMS", "REGIMES", "EmptyPoolError", "EmptySelectionError",
    "SelectionConfig", "SelectionContext", "SelectionError", "SelectionResult",
    "TraceRow", "combine", "minmax", "pool_hash", "prepare_pool",
    "filter_scores", "rank_filter", "lasso_select", "ufs_prefilter",
    "ga_select", "rfe_select", "sbs_select", "sfs_select",
    "select", "make_context", "write_trace",
]

FILTER_ALGORITHMS = ("fscore", "ulr", "relief", "mi", "gini")


def make_context(x: np.ndarray, y: np.ndarray, names: list[str],
                 profile: RobustnessProfile, cfg: SelectionConfig,
                 model_spec: ModelSpec) -> SelectionContext:
    """Build a selection context: imputes NaN with column medians and derives
    the seeded stratified folds shared by every regime."""
    x = np.asarray(x, dtype=np.float64)
    if np.isnan(x).any():
        x = impute_columns(x, nanmedian_columns(x))
    y = np.asarray(y, dtype=int)
    folds = stratified_kfold(y, cfg.n_folds, derive_seed("selection-folds", cfg.seed))
    return SelectionContext(x=x, y=y, names=list(names), profile=profile,
                            cfg=cfg, model_spec=model_spec, folds=folds)


def select(x: np.ndarray, y: np.ndarray, names: list[str],
           profile: RobustnessProfile, cfg: SelectionConfig,
           model_spec: ModelSpec) -> SelectionResult:
    """Run one selector under one regime on training data only."""
    ctx = make_context(x, y, names, profile, cfg, model_spec)
    if cfg.algorithm in FILTER_ALGORITHMS:
        return rank_filter(ctx)
    if cfg.algorithm == "lasso":
        return lasso_select(ctx)
    if cfg.algorithm == "sfs":
        return sfs_select(ctx)
    if cfg.algorithm == "sbs":
        return sbs_select(ctx)
    if cfg.algorithm == "rfe":
        return rfe_select(ctx)
    if cfg.algorithm == "ga":
        return ga_select(ctx)
    raise SelectionError(f"unknown algorithm {cfg.algorithm!r}")


def write_trace(result: SelectionResult, path) -> None:
    """Selection trace CSV: iteration, candidate-set hash, s, c_bar,
    s_combined, action."""
    import csv
    from pathlib import Path

    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "pool_hash", "s", "c_bar", "s_combined",
                         "action", "pool_size", "robust_fraction"])
        for row in result.trace:
            writer.writerow([row.iteration, row.pool_hash, repr(row.s),
                             repr(row.c_bar), repr(row.s_combined), row.action,
                             row.pool_size, repr(row.robust_fraction)])
