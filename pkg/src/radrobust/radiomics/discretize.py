"""Fixed bin-width gray-level discretization.

Bins are anchored at floor(min_intensity / bin_width) * bin_width, so shifting
the whole image by a multiple of the bin width leaves all levels unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DiscretizationConfig:
    bin_width: float = 4.0

    def __post_init__(self):
        if self.bin_width <= 0:
            raise ValueError("bin_width must be positive")


def discretize(intensities: np.ndarray, mask: np.ndarray,
               cfg: DiscretizationConfig) -> tuple[np.ndarray, int]:
    """Map in-mask voxels to gray levels 1..N_g; out-of-mask voxels get 0.

    Returns (level volume, N_g). N_g is the highest assigned level; a single
    intensity VOI yields N_g = 1.
    """
    if not mask.any():
        raise ValueError("empty VOI")
    vals = intensities[mask].astype(np.float64)
    anchor = np.floor(vals.min() / cfg.bin_width) * cfg.bin_width
    lv = np.floor((vals - anchor) / cfg.bin_width).astype(np.int64) + 1
    levels = np.zeros(mask.shape, dtype=np.int64)
    levels[mask] = lv
    return levels, int(lv.max())
