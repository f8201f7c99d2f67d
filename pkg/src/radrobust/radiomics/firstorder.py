"""First-order intensity statistics (18 features).

Entropy and Uniformity work on the discretized histogram; everything else on
raw Hounsfield values. Moment ratios (Skewness, Kurtosis) return 0 on
zero-variance VOIs.
"""

from __future__ import annotations

import numpy as np

from .discretize import DiscretizationConfig, discretize

EPS = np.spacing(1.0)


def extract_first_order(intensities: np.ndarray, mask: np.ndarray,
                        spacing, cfg: DiscretizationConfig) -> dict[str, float]:
    x = intensities[mask].astype(np.float64)
    n = x.size
    voxvol = float(np.prod(spacing))

    mean = x.mean()
    centered = x - mean
    m2 = np.mean(centered ** 2)
    m3 = np.mean(centered ** 3)
    m4 = np.mean(centered ** 4)

    p10, p25, p50, p75, p90 = np.percentile(x, [10, 25, 50, 75, 90])
    robust = x[(x >= p10) & (x <= p90)]
    rmad = np.abs(robust - robust.mean()).mean() if robust.size else 0.0

    levels, _ = discretize(intensities, mask, cfg)
    counts = np.bincount(levels[mask])[1:]
    p = counts[counts > 0] / n

    energy = float(np.sum(x ** 2))
    out = {
        "Energy": energy,
        "TotalEnergy": voxvol * energy,
        "Entropy": float(-np.sum(p * np.log2(p + EPS))),
        "Minimum": float(x.min()),
        "10Percentile": float(p10),
        "90Percentile": float(p90),
        "Maximum": float(x.max()),
        "Mean": float(mean),
        "Median": float(p50),
        "InterquartileRange": float(p75 - p25),
        "Range": float(x.max() - x.min()),
        "MeanAbsoluteDeviation": float(np.abs(centered).mean()),
        "RobustMeanAbsoluteDeviation": float(rmad),
        "RootMeanSquared": float(np.sqrt(np.mean(x ** 2))),
        "Skewness": float(m3 / m2 ** 1.5) if m2 > 0 else 0.0,
        "Kurtosis": float(m4 / m2 ** 2) if m2 > 0 else 0.0,
        "Variance": float(m2),
        "Uniformity": float(np.sum(p ** 2)),
    }
    return out
