"""Volume-of-interest operations: largest-lesion selection, merging, rim
construction, and randomized segmentation perturbation.

The perturbation draws a smooth Gaussian random field (white noise on a coarse
lattice, tricubic-upsampled, unit standard deviation) and moves the VOI
boundary along the signed distance: perturbed = {x : sdf(x) <= field(x) * d}.
This produces spatially coherent, reader-like contour shifts instead of voxel
salt-and-pepper.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .cohort_io import LesionSet


class RoiError(ValueError):
    """Base error for VOI operations."""


class NoLesionError(RoiError):
    """Site filter matched no lesion."""


class DegenerateRimError(RoiError):
    """Requested rim is empty on this grid."""


class PerturbationError(RoiError):
    """Dice floor unreachable within the retry budget (lesion too small)."""


@dataclass(frozen=True)
class Voi:
    """A binary volume of interest on a fixed grid."""

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float]
    mask: np.ndarray  # bool
    provenance: str = "original"

    def __post_init__(self):
        if self.mask.shape != tuple(self.dims):
            raise RoiError(f"mask shape {self.mask.shape} != dims {self.dims}")
        if not self.mask.any():
            raise RoiError("empty VOI")

    @property
    def voxel_count(self) -> int:
        return int(self.mask.sum())

    @property
    def volume_mm3(self) -> float:
        sx, sy, sz = self.spacing
        return self.voxel_count * sx * sy * sz


@dataclass(frozen=True)
class PerturbConfig:
    n_replicates: int = 10
    max_displacement_mm: float = 2.0
    correlation_length_mm: float = 10.0
    seed: int = 0
    dice_floor: float = 0.85

    def __post_init__(self):
        if self.n_replicates < 1:
            raise RoiError("n_replicates must be positive")
        if not 0 <= self.max_displacement_mm < self.correlation_length_mm:
            raise RoiError("max_displacement_mm must be < correlation_length_mm")
        if not 0 < self.dice_floor < 1:
            raise RoiError("dice_floor must lie in (0, 1)")


def derive_seed(*parts) -> int:
    """Stable 63-bit seed derived from arbitrary hashable parts."""
    digest = hashlib.sha256(repr(parts).encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def signed_distance_mm(mask: np.ndarray, spacing) -> np.ndarray:
    """Exact Euclidean signed distance in mm, negative inside the mask.

    Distances are measured between voxel centers, so |sdf| >= min(spacing)
    everywhere (the boundary lies between centers).
    """
    inside = ndimage.distance_transform_edt(mask, sampling=spacing)
    outside = ndimage.distance_transform_edt(~mask, sampling=spacing)
    return outside - inside


def select_largest(lesions: LesionSet, scope: str = "all") -> Voi:
    """Lesion with maximal physical volume; ties go to the smallest lesion_id."""
    in_scope = lesions.in_scope(scope)
    if not in_scope:
        raise NoLesionError(f"no lesion in scope {scope!r}")
    voxvol = float(np.prod(lesions.spacing))
    best = min(in_scope, key=lambda l: (-int(l.mask.sum()) * voxvol, l.lesion_id))
    return Voi(lesions.dims, lesions.spacing, lesions.origin,
               best.mask.copy(), provenance="largest")


def merge_lesions(lesions: LesionSet, scope: str = "all") -> Voi:
    """Voxelwise union of all in-scope masks."""
    in_scope = lesions.in_scope(scope)
    if not in_scope:
        raise NoLesionError(f"no lesion in scope {scope!r}")
    mask = np.zeros(lesions.dims, dtype=bool)
    for les in in_scope:
        mask |= les.mask
    return Voi(lesions.dims, lesions.spacing, lesions.origin, mask, provenance="merged")


def make_rim(voi: Voi, total_width_mm: float = 6.0,
             inner_mm: float | None = None, outer_mm: float | None = None) -> Voi:
    """Band straddling the VOI surface: {x : -inner <= sdf(x) <= outer}.

    Defaults split the total width symmetrically (half lesion periphery, half
    perilesional area). The band is clipped to the image bounds.
    """
    if total_width_mm <= 0:
        raise RoiError("total_width_mm must be positive")
    if inner_mm is None:
        inner_mm = total_width_mm / 2.0
    if outer_mm is None:
        outer_mm = total_width_mm / 2.0
    sdf = signed_distance_mm(voi.mask, voi.spacing)
    rim = (sdf >= -inner_mm) & (sdf <= outer_mm)
    if not rim.any():
        raise DegenerateRimError("rim is empty on this grid")
    return Voi(voi.dims, voi.spacing, voi.origin, rim, provenance="rim")


def dice(a: np.ndarray, b: np.ndarray) -> float:
    inter = int(np.logical_and(a, b).sum())
    denom = int(a.sum()) + int(b.sum())
    if denom == 0:
        return 1.0
    return 2.0 * inter / denom


def _smooth_field(shape, spacing, pitch_mm: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-std Gaussian random field: coarse white noise, tricubic upsample."""
    # coarse lattice covering the block, padded for cubic support
    n_coarse = [max(2, int(np.ceil(shape[a] * spacing[a] / pitch_mm)) + 1) + 4
                for a in range(3)]
    noise = rng.standard_normal(size=n_coarse)
    coords = np.meshgrid(
        *(np.arange(shape[a]) * spacing[a] / pitch_mm + 2.0 for a in range(3)),
        indexing="ij")
    field = ndimage.map_coordinates(noise, np.stack(coords), order=3, mode="nearest")
    sd = field.std()
    if sd == 0:
        return np.zeros(shape)
    return (field - field.mean()) / sd


def perturb(voi: Voi, cfg: PerturbConfig, replicate_index: int) -> Voi:
    """Deterministic contour perturbation keyed by (seed, replicate_index).

    Retries with halved field amplitude (fresh draw) until
    Dice(original, perturbed) >= cfg.dice_floor, at most 5 retries.
    """
    if not 0 <= replicate_index < cfg.n_replicates:
        raise RoiError(f"replicate_index {replicate_index} outside [0, {cfg.n_replicates})")
    if cfg.max_displacement_mm == 0:
        return Voi(voi.dims, voi.spacing, voi.origin, voi.mask.copy(),
                   provenance=f"perturbed(seed={cfg.seed}, index={replicate_index})")

    # work inside the padded bounding box; outside stays background
    pad_mm = cfg.max_displacement_mm + 2.0 * max(voi.spacing)
    pad = [int(np.ceil(pad_mm / s)) + 1 for s in voi.spacing]
    idx = np.nonzero(voi.mask)
    lo = [max(0, int(idx[a].min()) - pad[a]) for a in range(3)]
    hi = [min(voi.dims[a], int(idx[a].max()) + 1 + pad[a]) for a in range(3)]
    box = tuple(slice(lo[a], hi[a]) for a in range(3))
    sub = voi.mask[box]
    sdf = signed_distance_mm(sub, voi.spacing)

    amplitude = cfg.max_displacement_mm
    for attempt in range(6):
        rng = np.random.default_rng(
            derive_seed("perturb", cfg.seed, replicate_index, attempt))
        field = _smooth_field(sub.shape, voi.spacing, cfg.correlation_length_mm, rng)
        new_sub = sdf <= field * amplitude
        if new_sub.any() and dice(sub, new_sub) >= cfg.dice_floor:
            mask = np.zeros(voi.dims, dtype=bool)
            mask[box] = new_sub
            return Voi(voi.dims, voi.spacing, voi.origin, mask,
                       provenance=f"perturbed(seed={cfg.seed}, index={replicate_index})")
        amplitude /= 2.0
    raise PerturbationError(
        f"Dice floor {cfg.dice_floor} unreachable after 5 retries "
        f"(lesion of {voi.voxel_count} voxels too small for this config)")


def perturb_lesion_set(lesions: LesionSet, cfg: PerturbConfig,
                       replicate_index: int, patient_key: str = "") -> LesionSet:
    """Perturb each lesion independently with lesion-keyed sub-seeds."""
    from .cohort_io import Lesion

    out = []
    for les in lesions.lesions:
        sub_cfg = PerturbConfig(
            n_replicates=cfg.n_replicates,
            max_displacement_mm=cfg.max_displacement_mm,
            correlation_length_mm=cfg.correlation_length_mm,
            seed=derive_seed("lesion", cfg.seed, patient_key, les.lesion_id),
            dice_floor=cfg.dice_floor)
        voi = Voi(lesions.dims, lesions.spacing, lesions.origin, les.mask)
        new = perturb(voi, sub_cfg, replicate_index)
        out.append(Lesion(les.lesion_id, les.site, new.mask))
    return LesionSet(lesions.dims, lesions.spacing, lesions.origin, tuple(out))
