"""Classifiers, metrics, response labels, and held-out evaluation."""

from .labels import (DIAR_DECREASE_THRESHOLD, METRICS, NON_RESPONSE, RESPONSE,
                     VOLR_REDUCTION_THRESHOLD, LabelError, LabelUnavailableError,
                     ResponseLabel, UndefinedLabelError, derive_crs, derive_diar,
                     derive_recist, derive_volr)
from .metrics import (MetricError, StratificationError, UndefinedMetricError,
                      auc, choose_threshold_max_gmean, gmean_se_sp, se_sp_at,
                      stratified_kfold)
from .models import (FittedModel, ModelError, ModelSpec, SingularityError,
                     Standardizer, fit, fit_lda, fit_lr, predict_score)


def __getattr__(name):
    # evaluate imports featsel, which imports this package; load lazily
    if name in ("EvalRow", "FittedPipeline", "cohort_labels", "evaluate_configuration"):
        from . import evaluate
        return getattr(evaluate, name)
    raise AttributeError(name)

__all__ = [
    "DIAR_DECREASE_THRESHOLD", "METRICS", "NON_RESPONSE", "RESPONSE",
    "VOLR_REDUCTION_THRESHOLD", "LabelError", "LabelUnavailableError",
    "ResponseLabel", "UndefinedLabelError", "derive_crs", "derive_diar",
    "derive_recist", "derive_volr",
    "MetricError", "StratificationError", "UndefinedMetricError", "auc",
    "choose_threshold_max_gmean", "gmean_se_sp", "se_sp_at", "stratified_kfold",
    "FittedModel", "ModelError", "ModelSpec", "SingularityError", "Standardizer",
    "fit", "fit_lda", "fit_lr", "predict_score",
]
