"""Wrapper selectors: SFS, SBS, RFE, and a genetic algorithm.

Subset relevance is the mean inner-CV AUC, min-max normalized across the
candidates of each step before blending with the pool's mean clamped ICC.
Semi-robust runs repair the start pool first (logged as 'repair') and then
only take moves that keep >= 80% of the pool above the ICC threshold.
"""

from __future__ import annotations

import numpy as np

from ..modeling_eval import Standardizer, fit
from ..roi_ops import derive_seed
from .core import (MAX_SUBSET_SIZE, SFS_IMPROVEMENT_EPS, EmptyPoolError,
                   SelectionContext, SelectionResult, choose_argmax, combine,
                   minmax, prepare_pool, result_from)

GA_POPULATION = 40
GA_GENERATIONS = 60
GA_TOURNAMENT = 2
GA_CROSSOVER_RATE = 0.8
GA_MUTATION_RATE = 0.02
GA_ELITES = 2


def _step_choice(ctx: SelectionContext, candidates: list[list[str]]) -> tuple[int, float, float]:
    """Pick among candidate subsets by blended per-step score.

    Candidates must already be ordered by the tie-break rule. Returns
    (index, raw auc, blended score).
    """
    raw = np.array([ctx.cv_auc(c) for c in candidates])
    s_norm = minmax(raw)
    w = ctx.effective_w()
    blended = np.array([combine(s_norm[i], ctx.c_bar(candidates[i]), w)
                        for i in range(len(candidates))])
    pick = choose_argmax(blended)
    return pick, float(raw[pick]), float(blended[pick])


def _raw_objective(ctx: SelectionContext, names: list[str], r: float) -> float:
    return combine(r, ctx.c_bar(names), ctx.effective_w())


def _repair_start_pool(ctx: SelectionContext, pool: list[str]) -> list[str]:
    """Drop lowest-ICC non-robust features until the pool is rule-legal."""
    pool = list(pool)
    it = 0
    while not ctx.pool_is_legal(pool):
        nonrobust = [f for f in pool if ctx.profile.icc[f] <= ctx.cfg.icc_threshold]
        if not nonrobust:
            break
        drop = min(nonrobust, key=lambda f: (ctx.profile.icc[f], f))
        pool.remove(drop)
        ctx.log(it, pool, s=0.0, action=f"repair drop {drop}")
        it += 1
    if not pool:
        raise EmptyPoolError("semi-robust repair emptied the pool")
    return pool


def sfs_select(ctx: SelectionContext) -> SelectionResult:
    cfg = ctx.cfg
    pool = prepare_pool(ctx.names, ctx.profile, cfg)
    selected: list[str] = []
    r_cur = 0.5
    trace_scores: list[tuple[str, float]] = []
    max_size = cfg.target_k or MAX_SUBSET_SIZE
    for step in range(max_size):
        remaining = sorted(f for f in pool if f not in selected)
        if cfg.regime == "semi_robust":
            remaining = [f for f in remaining if ctx.pool_is_legal(selected + [f])]
        if not remaining:
            break
        candidates = [selected + [f] for f in remaining]
        pick, r_new, blended = _step_choice(ctx, candidates)
        feature = remaining[pick]
        if selected and cfg.target_k is None and r_new - r_cur <= SFS_IMPROVEMENT_EPS:
            ctx.log(step, selected, s=r_cur, action="stop (no improvement)")
            break
        selected.append(feature)
        r_cur = r_new
        trace_scores.append((feature, blended))
        ctx.log(step, selected, s=r_new, action=f"add {feature}")
    return result_from(ctx, selected, trace_scores, {"cv_auc": r_cur})


def sbs_select(ctx: SelectionContext) -> SelectionResult:
    cfg = ctx.cfg
    pool = prepare_pool(ctx.names, ctx.profile, cfg)
    if cfg.regime == "semi_robust":
        pool = _repair_start_pool(ctx, pool)
    current = sorted(pool)
    r0 = ctx.cv_auc(current)
    trajectory = [(list(current), r0)]
    ctx.log(0, current, s=r0, action="start")
    step = 1
    while len(current) > 1:
        removable = sorted(current)
        if cfg.regime == "semi_robust":
            removable = [f for f in removable
                         if ctx.pool_is_legal([g for g in current if g != f])]
            if not removable:
                break
        candidates = [[g for g in current if g != f] for f in removable]
        pick, r_new, _ = _step_choice(ctx, candidates)
        current = candidates[pick]
        trajectory.append((list(current), r_new))
        ctx.log(step, current, s=r_new, action=f"remove {removable[pick]}")
        step += 1
    # best subset along the trajectory; ties favor the smaller subset
    ordered = sorted(trajectory, key=lambda t: (len(t[0]), tuple(t[0])))
    objs = [_raw_objective(ctx, names, r) for names, r in ordered]
    best_names, best_r = ordered[choose_argmax(objs)]
    trace_scores = [(",".join(names), _raw_objective(ctx, names, r))
                    for names, r in trajectory]
    return result_from(ctx, best_names, trace_scores, {"cv_auc": best_r})


def _model_coefficients(ctx: SelectionContext, names: list[str]) -> dict[str, float]:
    cols = ctx.col_index(names)
    x = ctx.x[:, cols]
    std = Standardizer.fit(x)
    model = fit(ctx.model_spec, std.apply(x), ctx.y)
    return {n: abs(float(w)) for n, w in zip(names, model.weights)}


def rfe_select(ctx: SelectionContext) -> SelectionResult:
    cfg = ctx.cfg
    pool = prepare_pool(ctx.names, ctx.profile, cfg)
    if cfg.regime == "semi_robust":
        pool = _repair_start_pool(ctx, pool)
    current = sorted(pool)
    rounds = [(list(current), ctx.cv_auc(current))]
    ctx.log(0, current, s=rounds[0][1], action="start")
    it = 1
    while len(current) > 1:
        coef = _model_coefficients(ctx, current)
        n_drop = max(1, int(np.floor(0.1 * len(current))))
        for _ in range(n_drop):
            if len(current) <= 1:
                break
            order = sorted(current, key=lambda f: (coef[f], f))
            drop = None
            for f in order:
                rest = [g for g in current if g != f]
                if cfg.regime != "semi_robust" or ctx.pool_is_legal(rest):
                    drop = f
                    break
            if drop is None:
                break
            current = [g for g in current if g != drop]
        r = ctx.cv_auc(current)
        rounds.append((list(current), r))
        ctx.log(it, current, s=r, action=f"round -> {len(current)} features")
        it += 1
        if len(rounds[-1][0]) == len(rounds[-2][0]):
            break  # no legal drop was possible
    ordered = sorted(rounds, key=lambda t: (len(t[0]), tuple(t[0])))
    objs = [_raw_objective(ctx, names, r) for names, r in ordered]
    best_names, best_r = ordered[choose_argmax(objs)]
    trace_scores = [(f"round{k}", _raw_objective(ctx, names, r))
                    for k, (names, r) in enumerate(rounds)]
    return result_from(ctx, best_names, trace_scores, {"cv_auc": best_r})


def _ga_repair(ctx: SelectionContext, bits: np.ndarray, pool: list[str],
               rng: np.random.Generator) -> np.ndarray:
    bits = bits.copy()
    if not bits.any():
        bits[int(rng.integers(len(pool)))] = True
    if ctx.cfg.regime == "semi_robust":
        while True:
            names = [pool[j] for j in np.nonzero(bits)[0]]
            if ctx.pool_is_legal(names):
                break
            nonrobust = [f for f in names if ctx.profile.icc[f] <= ctx.cfg.icc_threshold]
            if not nonrobust:
                break
            drop = min(nonrobust, key=lambda f: (ctx.profile.icc[f], f))
            bits[pool.index(drop)] = False
        if not bits.any():
            robust = [f for f in pool if ctx.profile.icc[f] > ctx.cfg.icc_threshold]
            if not robust:
                raise EmptyPoolError("no robust feature available for semi-robust GA")
            best = max(robust, key=lambda f: (ctx.profile.icc[f], f))
            bits[pool.index(best)] = True
    return bits


def ga_select(ctx: SelectionContext) -> SelectionResult:
    cfg = ctx.cfg
    pool = prepare_pool(ctx.names, ctx.profile, cfg)
    p = len(pool)
    rng = np.random.default_rng(derive_seed("ga", cfg.seed))
    w = ctx.effective_w()

    def names_of(bits):
        return [pool[j] for j in np.nonzero(bits)[0]]

    def key(bits, obj):
        return (obj, -int(bits.sum()), tuple(names_of(bits)))

    population = [_ga_repair(ctx, rng.random(p) < 0.5, pool, rng)
                  for _ in range(GA_POPULATION)]
    best_bits = None
    best_obj = -np.inf
    trace_scores: list[tuple[str, float]] = []
    for gen in range(GA_GENERATIONS):
        raw = np.array([ctx.cv_auc(names_of(b)) for b in population])
        s_norm = minmax(raw)
        fitness = np.array([combine(s_norm[i], ctx.c_bar(names_of(population[i])), w)
                            for i in range(len(population))])
        objs = [combine(raw[i], ctx.c_bar(names_of(population[i])), w)
                for i in range(len(population))]
        gen_order = sorted(range(len(population)),
                           key=lambda i: (-fitness[i], int(population[i].sum()),
                                          tuple(names_of(population[i]))))
        gen_best = gen_order[0]
        if (objs[gen_best], -int(population[gen_best].sum())) > (
                best_obj, -(int(best_bits.sum()) if best_bits is not None else 1 << 30)):
            best_obj = objs[gen_best]
            best_bits = population[gen_best].copy()
        ctx.log(gen, names_of(population[gen_best]), s=float(raw[gen_best]),
                action=f"generation {gen} best")
        trace_scores.append((f"gen{gen}", float(objs[gen_best])))

        elites = [population[i].copy() for i in gen_order[:GA_ELITES]]

        def tournament():
            i, j = rng.integers(len(population)), rng.integers(len(population))
            ki = (fitness[i], -int(population[i].sum()), tuple(names_of(population[i])))
            kj = (fitness[j], -int(population[j].sum()), tuple(names_of(population[j])))
            return population[i] if ki >= kj else population[j]

        children = []
        while len(children) < GA_POPULATION - GA_ELITES:
            pa = tournament()
            pb = tournament()
            do_cross = rng.random() < GA_CROSSOVER_RATE
            mask = rng.random(p) < 0.5
            if do_cross:
                c1 = np.where(mask, pa, pb)
                c2 = np.where(mask, pb, pa)
            else:
                c1 = pa.copy()
                c2 = pb.copy()
            for child in (c1, c2):
                flips = rng.random(p) < GA_MUTATION_RATE
                child = child ^ flips
                children.append(_ga_repair(ctx, child, pool, rng))
        population = elites + children[:GA_POPULATION - GA_ELITES]

    selected = names_of(best_bits)
    return result_from(ctx, selected, trace_scores,
                       {"cv_auc": ctx.cv_auc(selected), "objective": best_obj})
