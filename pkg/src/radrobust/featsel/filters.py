"""Filter selectors: rank features by a relevance statistic, then pick the
prefix length by cross-validated AUC."""

from __future__ import annotations

from .core import (MAX_SUBSET_SIZE, SelectionContext, SelectionResult,
                   choose_argmax, combine, minmax, prepare_pool, result_from)
from .scores import filter_scores


def _constrained_order(ctx: SelectionContext, ranking: list[str]) -> list[str]:
    """Greedy construction for semi-robust: repeatedly take the highest-ranked
    remaining feature whose addition keeps the pool >= 80% robust."""
    order: list[str] = []
    remaining = list(ranking)
    while remaining:
        picked = None
        for f in remaining:
            if ctx.pool_is_legal(order + [f]):
                picked = f
                break
        if picked is None:
            break
        order.append(picked)
        remaining.remove(picked)
    return order


def rank_filter(ctx: SelectionContext) -> SelectionResult:
    cfg = ctx.cfg
    pool = prepare_pool(ctx.names, ctx.profile, cfg)
    cols = ctx.col_index(pool)
    raw = filter_scores(cfg.algorithm, ctx.x[:, cols], ctx.y, cfg.seed)
    s_norm = minmax(raw)
    w = ctx.effective_w()
    final = combine(s_norm, ctx.profile.clamped_many(pool), w)

    ranking = [pool[j] for j in sorted(range(len(pool)),
                                       key=lambda j: (-final[j], pool[j]))]
    score_trace = [(f, float(final[pool.index(f)])) for f in ranking]

    if cfg.regime == "semi_robust":
        order = _constrained_order(ctx, ranking)
    else:
        order = ranking
    if not order:
        return result_from(ctx, [], score_trace)  # raises EmptySelectionError

    for it, f in enumerate(order):
        ctx.log(it, order[:it + 1], s=float(final[pool.index(f)]), action=f"rank {f}")

    if cfg.target_k is not None:
        if cfg.target_k > len(order):
            raise ValueError(f"target_k {cfg.target_k} exceeds pool of {len(order)}")
        k_values = [cfg.target_k]
    else:
        k_values = list(range(1, min(MAX_SUBSET_SIZE, len(order)) + 1))
    aucs = [ctx.cv_auc(order[:k]) for k in k_values]
    best_k = k_values[choose_argmax(aucs)]  # ascending k: ties go to smaller
    selected = order[:best_k]
    details = {"chosen_k": best_k, "cv_auc": aucs[k_values.index(best_k)],
               "k_sweep": list(zip(k_values, aucs))}
    return result_from(ctx, selected, score_trace, details)
