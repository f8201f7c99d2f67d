"""L1-regularized logistic regression by coordinate descent.

The penalty strength is chosen by inner-CV AUC over a 50-point log grid. In
the weighted regime each feature's penalty is scaled by (1 - w * clamp(icc)),
so robust features are penalized less.
"""

from __future__ import annotations

import numpy as np

from ..modeling_eval import Standardizer
from .core import (EmptySelectionError, SelectionContext, SelectionResult,
                   prepare_pool, result_from)

N_LAMBDA = 50
LAMBDA_DECADES = 3.0
CD_MAX_SWEEPS = 100
CD_TOL = 1e-5


def _soft(v: float, t: float) -> float:
    if v > t:
        return v - t
    if v < -t:
        return v + t
    return 0.0


def lasso_cd(x: np.ndarray, y: np.ndarray, lam: float, penalties: np.ndarray,
             w0: np.ndarray | None = None, b0: float = 0.0) -> tuple[np.ndarray, float]:
    """Coordinate descent on mean logistic loss + lam * sum(pen_j * |w_j|).

    Outer IRLS loop freezes the quadratic approximation; the inner loop is
    pathwise coordinate descent on it, alternating full and active-set sweeps
    with incrementally maintained residuals.
    """
    n, p = x.shape
    w = np.zeros(p) if w0 is None else w0.copy()
    b = b0
    thresholds = lam * penalties
    for _ in range(25):
        z = x @ w + b
        prob = 1.0 / (1.0 + np.exp(-z))
        wt = np.clip(prob * (1.0 - prob), 1e-6, None)
        res = y - prob                      # wt * (working_response - z)
        pj = (wt @ (x * x)) / n
        wx = wt[:, None] * x

        def sweep(cols) -> float:
            nonlocal b
            delta = abs_db = float(np.sum(res) / np.sum(wt))
            b += abs_db
            res[:] -= wt * abs_db
            delta = abs(delta)
            for j in cols:
                qj = float(x[:, j] @ res) / n + pj[j] * w[j]
                w_new = _soft(qj, thresholds[j]) / pj[j]
                step = w_new - w[j]
                if step != 0.0:
                    res[:] -= step * wx[:, j]
                    delta = max(delta, abs(step))
                    w[j] = w_new
            return delta

        outer_delta = 0.0
        for _ in range(CD_MAX_SWEEPS):
            d = sweep(range(p))
            outer_delta = max(outer_delta, d)
            if d < CD_TOL:
                break
            for _ in range(CD_MAX_SWEEPS):
                active = np.nonzero(w)[0]
                if len(active) == 0 or sweep(active) < CD_TOL:
                    break
        if outer_delta < CD_TOL:
            break
    return w, b


def _lambda_grid(x_std: np.ndarray, y: np.ndarray, penalties: np.ndarray) -> np.ndarray:
    grad0 = np.abs(x_std.T @ (y - y.mean())) / len(y)
    with np.errstate(divide="ignore"):
        ratios = np.where(penalties > 0, grad0 / np.maximum(penalties, 1e-12), 0.0)
    lam_max = float(ratios.max())
    if lam_max <= 0:
        lam_max = 1.0
    return lam_max * np.power(10.0, np.linspace(0.0, -LAMBDA_DECADES, N_LAMBDA))


def lasso_select(ctx: SelectionContext) -> SelectionResult:
    cfg = ctx.cfg
    pool = prepare_pool(ctx.names, ctx.profile, cfg)
    cols = ctx.col_index(pool)
    x = ctx.x[:, cols]
    y = ctx.y.astype(np.float64)
    w_eff = ctx.effective_w()
    penalties = 1.0 - w_eff * ctx.profile.clamped_many(pool)

    std_full = Standardizer.fit(x)
    xs_full = std_full.apply(x)
    grid = _lambda_grid(xs_full, y, penalties)

    # CV AUC per lambda, warm-starting down the path within each fold
    cv_aucs = np.zeros(len(grid))
    for val_idx in ctx.folds:
        mask = np.ones(len(y), dtype=bool)
        mask[val_idx] = False
        std = Standardizer.fit(x[mask])
        xtr = std.apply(x[mask])
        xva = std.apply(x[val_idx])
        ytr = y[mask]
        w = np.zeros(x.shape[1])
        b = 0.0
        from ..modeling_eval import auc
        for gi, lam in enumerate(grid):
            w, b = lasso_cd(xtr, ytr, lam, penalties, w, b)
            scores = xva @ w + b
            cv_aucs[gi] += auc(scores, ctx.y[val_idx].astype(int))
    cv_aucs /= len(ctx.folds)

    # full-train path over the whole grid, logging active sets
    w = np.zeros(x.shape[1])
    b = 0.0
    path: list[dict[str, float]] = []
    for gi in range(len(grid)):
        w, b = lasso_cd(xs_full, y, float(grid[gi]), penalties, w, b)
        coef = {pool[j]: float(w[j]) for j in range(len(pool)) if w[j] != 0.0}
        path.append(coef)
        ctx.log(gi, sorted(coef), s=float(cv_aucs[gi]), action=f"lambda {grid[gi]:.6g}")
    if not any(path):
        raise EmptySelectionError("no nonzero coefficients at any lambda")

    # candidate lambdas by CV AUC; descending-lambda order breaks ties sparser.
    # Take the first whose (regime-pruned) selection is nonempty.
    order = sorted(range(len(grid)), key=lambda gi: (-cv_aucs[gi], gi))
    chosen = None
    for gi in order:
        coef = path[gi]
        selected = sorted(coef)
        if cfg.regime == "semi_robust":
            it = len(ctx.trace)
            while selected and not ctx.pool_is_legal(selected):
                nonrobust = [f for f in selected
                             if ctx.profile.icc[f] <= cfg.icc_threshold]
                drop = min(nonrobust, key=lambda f: (abs(coef[f]), f))
                selected = [f for f in selected if f != drop]
                ctx.log(it, selected, s=float(cv_aucs[gi]), action=f"prune {drop}")
                it += 1
        if selected:
            chosen = (gi, selected, coef)
            break
    if chosen is None:
        raise EmptySelectionError("semi-robust pruning emptied every lasso candidate")
    best_gi, selected, coef = chosen

    score_trace = sorted(((f, abs(coef[f])) for f in selected),
                         key=lambda t: (-t[1], t[0]))
    details = {"lambda": float(grid[best_gi]), "cv_auc": float(cv_aucs[best_gi]),
               "coefficients": coef}
    return result_from(ctx, selected, score_trace, details)
