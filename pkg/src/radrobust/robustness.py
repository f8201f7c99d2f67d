"""Per-feature robustness: ICC between original and perturbed segmentations.

ICC(2,1) — two-way random effects, absolute agreement, single measurement —
is the default, with ICC(3,1) available by config. Negative estimates are
reported as-is and clamped to [0, 1] only where selection scoring needs them.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import f as f_dist

from .cohort_io import FeatureMatrix

# thresholds from the selection rules and the reporting categories
ICC_SELECTION_THRESHOLD = 0.8
ICC_EXCELLENT = 0.9
ICC_MEDIUM = 0.7

CATEGORIES = ("excellent", "medium", "poor")


class RobustnessError(ValueError):
    pass


class AlignmentError(RobustnessError):
    """Feature catalogs or patient orderings disagree across matrices."""


@dataclass(frozen=True)
class IccConfig:
    form: str = "icc2_1"  # or "icc3_1"
    confidence: float = 0.95

    def __post_init__(self):
        if self.form not in ("icc2_1", "icc3_1"):
            raise RobustnessError(f"unknown ICC form {self.form!r}")


def categorize(icc: float) -> str:
    if icc >= ICC_EXCELLENT:
        return "excellent"
    if icc >= ICC_MEDIUM:
        return "medium"
    return "poor"


def compute_icc(measurements: np.ndarray,
                cfg: IccConfig = IccConfig()) -> tuple[float, tuple[float, float]]:
    """ICC and 95% CI for an n-subjects x k-raters matrix (no NaN allowed).

    Zero total variance returns (1.0, (1.0, 1.0)); noiseless data with
    subject spread collapses the CI onto the point estimate.
    """
    m = np.asarray(measurements, dtype=np.float64)
    if m.ndim != 2:
        raise RobustnessError("measurements must be 2-D (subjects x raters)")
    n, k = m.shape
    if n < 2 or k < 2:
        raise RobustnessError(f"need >= 2 subjects and >= 2 raters, got {m.shape}")
    if np.isnan(m).any():
        raise RobustnessError("NaN in measurement matrix")

    if np.ptp(m) == 0:
        return 1.0, (1.0, 1.0)

    grand = m.mean()
    row_means = m.mean(axis=1)
    col_means = m.mean(axis=0)
    ss_total = ((m - grand) ** 2).sum()
    ss_rows = k * ((row_means - grand) ** 2).sum()
    ss_cols = n * ((col_means - grand) ** 2).sum()
    ss_err = ss_total - ss_rows - ss_cols

    ms_r = ss_rows / (n - 1)
    ms_c = ss_cols / (k - 1)
    ms_e = ss_err / ((n - 1) * (k - 1))
    ms_e = max(ms_e, 0.0)  # guard tiny negative rounding

    alpha = 1.0 - cfg.confidence

    if cfg.form == "icc3_1":
        denom = ms_r + (k - 1) * ms_e
        icc = (ms_r - ms_e) / denom if denom != 0 else 1.0
        if ms_e == 0:
            return float(icc), (float(icc), float(icc))
        fv = ms_r / ms_e
        df1, df2 = n - 1, (n - 1) * (k - 1)
        fl = fv / f_dist.ppf(1 - alpha / 2, df1, df2)
        fu = fv * f_dist.ppf(1 - alpha / 2, df2, df1)
        lo = (fl - 1) / (fl + (k - 1))
        hi = (fu - 1) / (fu + (k - 1))
        return float(icc), (float(lo), float(hi))

    denom = ms_r + (k - 1) * ms_e + (k / n) * (ms_c - ms_e)
    icc = (ms_r - ms_e) / denom if denom != 0 else 1.0
    if ms_e == 0:
        return float(icc), (float(icc), float(icc))

    # Shrout-Fleiss / McGraw-Wong interval for the absolute-agreement form
    fj = ms_c / ms_e
    vn = (k - 1) * (n - 1) * (k * icc * fj + n * (1 + (k - 1) * icc) - k * icc) ** 2
    vd = (n - 1) * k ** 2 * icc ** 2 * fj ** 2 + (
        n * (1 + (k - 1) * icc) - k * icc) ** 2
    if vd == 0 or not np.isfinite(vn / max(vd, np.finfo(float).tiny)):
        # Satterthwaite df degenerate; fall back to the widest interval
        return float(icc), (-1.0, 1.0)
    v = vn / vd
    fl = f_dist.ppf(1 - alpha / 2, n - 1, v)
    fu = f_dist.ppf(1 - alpha / 2, v, n - 1)
    tmp = k * ms_c + (k * n - k - n) * ms_e
    lo = n * (ms_r - fl * ms_e) / (fl * tmp + n * ms_r)
    hi = n * (fu * ms_r - ms_e) / (tmp + n * fu * ms_r)
    return float(icc), (float(lo), float(hi))


@dataclass
class RobustnessProfile:
    """Per-feature ICC with CI and category, over a fixed feature list."""

    feature_names: list[str]
    icc: dict[str, float]
    ci: dict[str, tuple[float, float]]

    def __post_init__(self):
        missing = [n for n in self.feature_names if n not in self.icc]
        if missing:
            raise RobustnessError(f"profile missing features: {missing[:5]}")

    def category(self, name: str) -> str:
        return categorize(self.icc[name])

    def clamped(self, name: str) -> float:
        """ICC clamped to [0, 1] for use inside selection scoring."""
        return float(min(max(self.icc[name], 0.0), 1.0))

    def clamped_many(self, names) -> np.ndarray:
        return np.array([self.clamped(n) for n in names])

    def category_counts(self) -> dict[str, int]:
        counts = {c: 0 for c in CATEGORIES}
        for name in self.feature_names:
            counts[self.category(name)] += 1
        return counts


def profile_features(orig: FeatureMatrix, perturbed: list[FeatureMatrix],
                     cfg: IccConfig = IccConfig()) -> RobustnessProfile:
    """Feature-wise ICC over subjects x (1 + n_replicates) measurements.

    Rater 0 is the original segmentation; raters 1..R are the perturbation
    replicates. NaN cells (degenerate extractions) are median-filled per
    column before the ANOVA, mirroring the downstream imputation policy.
    """
    if not perturbed:
        raise RobustnessError("need at least one perturbed replicate matrix")
    for rep in perturbed:
        if rep.feature_names != orig.feature_names:
            raise AlignmentError("replicate feature catalog differs from original")
        if rep.patient_ids != orig.patient_ids:
            raise AlignmentError("replicate patient ordering differs from original")

    icc: dict[str, float] = {}
    ci: dict[str, tuple[float, float]] = {}
    stack = np.stack([orig.values] + [r.values for r in perturbed], axis=2)
    for j, name in enumerate(orig.feature_names):
        m = stack[:, j, :]
        if np.isnan(m).any():
            med = np.nanmedian(m)
            med = 0.0 if np.isnan(med) else med
            m = np.where(np.isnan(m), med, m)
        icc[name], ci[name] = compute_icc(m, cfg)
    return RobustnessProfile(list(orig.feature_names), icc, ci)


def write_robustness_report(profile: RobustnessProfile, path) -> None:
    """feature,icc,ci_lo,ci_hi,category CSV (the per-feature robustness table)."""
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["feature", "icc", "ci_lo", "ci_hi", "category"])
        for name in profile.feature_names:
            lo, hi = profile.ci[name]
            writer.writerow([name, repr(profile.icc[name]), repr(lo), repr(hi),
                             profile.category(name)])


def read_robustness_report(path) -> RobustnessProfile:
    names: list[str] = []
    icc: dict[str, float] = {}
    ci: dict[str, tuple[float, float]] = {}
    with open(Path(path), newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["feature", "icc", "ci_lo", "ci_hi", "category"]:
            raise RobustnessError(f"{path}: bad robustness report header {header!r}")
        for rec in reader:
            if not rec:
                continue
            names.append(rec[0])
            icc[rec[0]] = float(rec[1])
            ci[rec[0]] = (float(rec[2]), float(rec[3]))
    return RobustnessProfile(names, icc, ci)
