"""Held-out evaluation of one configuration: UFS + selection + model on the
training cohort, a single scoring pass on the test cohort, and the
change-vs-no-selection deltas."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..cohort_io import CohortManifest, FeatureMatrix, impute_columns, nanmedian_columns
from ..featsel import SelectionConfig, SelectionResult, select, ufs_prefilter
from ..robustness import RobustnessProfile
from ..roi_ops import derive_seed
from .labels import (LabelError, derive_crs, derive_diar, derive_recist,
                     derive_volr)
from .metrics import auc, choose_threshold_max_gmean, gmean_se_sp, stratified_kfold
from .models import ModelSpec, Standardizer, fit, predict_score

log = logging.getLogger(__name__)


def cohort_labels(manifest: CohortManifest, metric: str,
                  volumes: dict[tuple[str, str], float] | None = None) -> dict[str, int]:
    """patient -> binary label (1 = response); unlabeled patients are skipped."""
    out: dict[str, int] = {}
    for pid in manifest.patient_ids():
        pre = manifest.row(pid, "pre")
        post = manifest.row(pid, "post")
        try:
            if metric == "CRS":
                label = derive_crs(pre.crs if pre and pre.crs is not None
                                   else (post.crs if post else None))
            elif metric == "RECIST":
                label = derive_recist(pre.recist if pre and pre.recist is not None
                                      else (post.recist if post else None))
            elif metric == "DiaR":
                label = derive_diar(pre.sld_mm if pre else None,
                                    post.sld_mm if post else None)
            elif metric == "VolR":
                if volumes is None:
                    raise LabelError("VolR needs lesion volumes")
                if (pid, "pre") not in volumes or (pid, "post") not in volumes:
                    raise LabelError("missing scan volume")
                label = derive_volr(volumes[(pid, "pre")], volumes[(pid, "post")])
            else:
                raise LabelError(f"unknown metric {metric!r}")
        except LabelError as exc:
            log.info("patient %s: no %s label (%s), excluded", pid, metric, exc)
            continue
        out[pid] = 1 if label.is_response else 0
    return out


@dataclass
class EvalRow:
    """One report row in the results-table schema."""

    metric: str
    site_scope: str
    aggregation: str
    region: str
    model: str
    algorithm: str          # "none" for the no-selection baseline
    regime: str
    train_auc: float
    train_gmean: float
    train_se: float
    train_sp: float
    test_auc: float
    test_gmean: float
    test_se: float
    test_sp: float
    change_auc: float | None
    change_gmean: float | None
    change_se: float | None
    change_sp: float | None
    nf: int
    avg_icc_mean: float
    avg_icc_sd: float
    selected: list[str] = field(default_factory=list)

    def key(self) -> tuple:
        return (self.metric, self.site_scope, self.aggregation, self.region,
                self.model, self.algorithm, self.regime)


@dataclass
class FittedPipeline:
    """Frozen training artifacts, for the leakage canary and reuse on test."""

    features: list[str]
    standardizer: Standardizer
    model_weights: np.ndarray
    model_intercept: float
    threshold: float


def _metrics_at(scores: np.ndarray, y: np.ndarray, threshold: float):
    g, se, sp = gmean_se_sp(scores, y, threshold)
    return auc(scores, y), g, se, sp


def _fit_and_score(x_train: np.ndarray, y_train: np.ndarray, x_test: np.ndarray,
                   y_test: np.ndarray, names: list[str], model_spec: ModelSpec):
    std = Standardizer.fit(x_train)
    model = fit(model_spec, std.apply(x_train), y_train)
    train_scores = predict_score(model, std.apply(x_train))
    threshold = choose_threshold_max_gmean(train_scores, y_train)
    test_scores = predict_score(model, std.apply(x_test))
    pipe = FittedPipeline(features=list(names), standardizer=std,
                          model_weights=model.weights,
                          model_intercept=model.intercept, threshold=threshold)
    return (_metrics_at(train_scores, y_train, threshold),
            _metrics_at(test_scores, y_test, threshold), pipe)


def _change(with_v: float, without_v: float) -> float | None:
    if without_v == 0:
        return None
    return 100.0 * (with_v - without_v) / without_v


def evaluate_configuration(train: FeatureMatrix, train_labels: dict[str, int],
                           test: FeatureMatrix, test_labels: dict[str, int],
                           profile: RobustnessProfile, sel_cfg: SelectionConfig,
                           model_spec: ModelSpec, metric: str, site_scope: str,
                           aggregation: str, region: str
                           ) -> tuple[EvalRow, EvalRow, SelectionResult, FittedPipeline]:
    """(selection row, no-selection baseline row, selection result, pipeline).

    Test rows never influence imputation, UFS, selection, model parameters,
    or the operating threshold: everything is frozen from training data before
    the single test pass.
    """
    train_pids = [p for p in train.patient_ids if p in train_labels]
    test_pids = [p for p in test.patient_ids if p in test_labels]
    tr = train.rows(train_pids)
    te = test.rows(test_pids)
    y_train = np.array([train_labels[p] for p in train_pids], dtype=int)
    y_test = np.array([test_labels[p] for p in test_pids], dtype=int)

    medians = nanmedian_columns(tr.values)
    x_train = impute_columns(tr.values, medians)
    x_test = impute_columns(te.values, medians)
    names = list(tr.feature_names)

    folds = stratified_kfold(y_train, sel_cfg.n_folds,
                             derive_seed("selection-folds", sel_cfg.seed))

    # no-selection baseline over the full catalog group
    (b_train, b_test, _) = _fit_and_score(x_train, y_train, x_test, y_test,
                                          names, model_spec)
    all_icc = np.array([profile.icc[n] for n in names])
    base_row = EvalRow(
        metric=metric, site_scope=site_scope, aggregation=aggregation,
        region=region, model=model_spec.kind, algorithm="none", regime="none",
        train_auc=b_train[0], train_gmean=b_train[1], train_se=b_train[2],
        train_sp=b_train[3], test_auc=b_test[0], test_gmean=b_test[1],
        test_se=b_test[2], test_sp=b_test[3],
        change_auc=None, change_gmean=None, change_se=None, change_sp=None,
        nf=len(names), avg_icc_mean=float(all_icc.mean()),
        avg_icc_sd=float(all_icc.std()), selected=[])

    pool = ufs_prefilter(x_train, y_train, names, folds)
    pool_idx = [names.index(n) for n in pool]
    result = select(x_train[:, pool_idx], y_train, pool, profile, sel_cfg, model_spec)

    sel_idx = [names.index(n) for n in result.selected]
    (s_train, s_test, pipe) = _fit_and_score(
        x_train[:, sel_idx], y_train, x_test[:, sel_idx], y_test,
        result.selected, model_spec)
    sel_row = EvalRow(
        metric=metric, site_scope=site_scope, aggregation=aggregation,
        region=region, model=model_spec.kind, algorithm=sel_cfg.algorithm,
        regime=sel_cfg.regime,
        train_auc=s_train[0], train_gmean=s_train[1], train_se=s_train[2],
        train_sp=s_train[3], test_auc=s_test[0], test_gmean=s_test[1],
        test_se=s_test[2], test_sp=s_test[3],
        change_auc=_change(s_test[0], b_test[0]),
        change_gmean=_change(s_test[1], b_test[1]),
        change_se=_change(s_test[2], b_test[2]),
        change_sp=_change(s_test[3], b_test[3]),
        nf=result.nf, avg_icc_mean=result.avg_icc[0],
        avg_icc_sd=result.avg_icc[1], selected=list(result.selected))
    return sel_row, base_row, result, pipe
