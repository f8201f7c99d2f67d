"""102-feature radiomics extraction from a (VoxelVolume, Voi) pair."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..cohort_io import VoxelVolume
from ..roi_ops import Voi
from .catalog import (CATALOG, CATALOG_NAMES, CATALOG_VERSION, FAMILIES,
                      load_shipped_catalog)
from .discretize import DiscretizationConfig, discretize
from .firstorder import extract_first_order
from .shape import extract_shape
from .texture import glcm_features, gldm_features, glrlm_features, glszm_features

__all__ = [
    "CATALOG", "CATALOG_NAMES", "CATALOG_VERSION", "FAMILIES",
    "DiscretizationConfig", "FeatureVector", "discretize",
    "extract_all", "extract_first_order", "extract_shape", "extract_texture",
    "load_shipped_catalog",
]


@dataclass
class FeatureVector:
    """Ordered (name, value) pairs over the fixed catalog.

    NaN values carry a reason in ``nan_reasons`` and are resolved downstream
    by training-fold median imputation.
    """

    names: list[str]
    values: np.ndarray
    nan_reasons: dict[str, str] = field(default_factory=dict)

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, self.values.tolist()))


def _bbox_crop(volume: VoxelVolume, voi: Voi) -> tuple[np.ndarray, np.ndarray]:
    idx = np.nonzero(voi.mask)
    sl = tuple(slice(int(idx[a].min()), int(idx[a].max()) + 1) for a in range(3))
    return volume.data[sl], voi.mask[sl]


def extract_texture(volume: VoxelVolume, voi: Voi, cfg: DiscretizationConfig,
                    family: str) -> dict[str, float]:
    """Texture features of one family: glcm (24), glrlm (16), glszm (16), gldm (14)."""
    intens, mask = _bbox_crop(volume, voi)
    levels, n_levels = discretize(intens, mask, cfg)
    n_voxels = int(mask.sum())
    if family == "glcm":
        return glcm_features(levels, n_levels)
    if family == "glrlm":
        return glrlm_features(levels, n_levels, n_voxels)
    if family == "glszm":
        return glszm_features(levels, n_levels, n_voxels)
    if family == "gldm":
        return gldm_features(levels, n_levels, n_voxels)
    raise ValueError(f"unknown texture family {family!r}")


def extract_all(volume: VoxelVolume, voi: Voi,
                cfg: DiscretizationConfig | None = None) -> FeatureVector:
    """All 102 features in canonical catalog order (shape, first-order,
    glcm, glrlm, glszm, gldm)."""
    if cfg is None:
        cfg = DiscretizationConfig()
    intens, mask = _bbox_crop(volume, voi)
    levels, n_levels = discretize(intens, mask, cfg)
    n_voxels = int(mask.sum())

    per_family = {
        "shape": extract_shape(voi.mask, voi.spacing),
        "firstorder": extract_first_order(intens, mask, voi.spacing, cfg),
        "glcm": glcm_features(levels, n_levels),
        "glrlm": glrlm_features(levels, n_levels, n_voxels),
        "glszm": glszm_features(levels, n_levels, n_voxels),
        "gldm": gldm_features(levels, n_levels, n_voxels),
    }

    values = np.empty(len(CATALOG), dtype=np.float64)
    nan_reasons: dict[str, str] = {}
    for k, (family, feat) in enumerate(CATALOG):
        v = per_family[family][feat]
        values[k] = v
        if not np.isfinite(v):
            nan_reasons[f"{family}.{feat}"] = (
                "no voxel pairs in any direction" if family == "glcm"
                else "degenerate statistic")
    return FeatureVector(names=list(CATALOG_NAMES), values=values, nan_reasons=nan_reasons)
