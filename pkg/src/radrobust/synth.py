"""Synthetic cohorts with planted structure.

Each patient gets a small CT-like volume with 1..k ball lesions. The two
response classes differ in a checkerboard texture component whose amplitude
class 1 carries; gray-level difference statistics read it directly, and the
designated robust-informative readout is glcm.InverseVariance. The texture is
painted over the whole volume, so contour perturbations see the same grain
and the readout profiles as robust. A per-patient noise-smoothing nuisance
(class-independent) keeps any single small-difference statistic from
dominating by accident.

The fragile signal is a bright inner boundary shell whose thickness differs
by class: it holds ~44% of lesion voxels for class 0 and ~56% for class 1, so
firstorder.Median reads core vs shell intensity (a large, clean gap) on the
original masks, while contour perturbations push the shell fraction across
50% and flip it, making the median profile as non-robust.

All four response labels (CRS, RECIST, post-treatment volumes for VolR, SLD
for DiaR) encode the same class split.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .cohort_io import (CohortManifest, Lesion, LesionSet, ManifestRow,
                        VoxelVolume, write_manifest, write_mask, write_volume)
from .roi_ops import derive_seed

SITES3 = ("omentum", "pelvis", "other")


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    n_patients: int = 40
    class1_fraction: float = 0.5
    lesion_count_range: tuple[int, int] = (1, 2)
    radius_range_mm: tuple[float, float] = (4.0, 5.5)
    site_probs: tuple[float, float, float] = (0.5, 0.4, 0.1)
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0)
    margin_mm: float = 7.0
    base_hu: float = 30.0
    noise_amplitude: float = 10.0
    # per-patient smoothing of the background noise (class-independent). This
    # nuisance channel jitters the small-difference statistics (Id, Idm,
    # InverseVariance, run lengths) so they cannot shadow the checkerboard
    # readout of the planted class texture.
    noise_sigma_range: tuple[float, float] = (1.0, 1.6)
    # per-class ranges for the per-patient checkerboard amplitude: an
    # alternating-sign lag-1 component that squared-difference statistics
    # (co-occurrence contrast) read directly
    checker_amp_range: tuple[tuple[float, float], tuple[float, float]] = (
        (0.0, 7.0), (5.0, 13.0))
    # bright inner boundary shell with class-independent brightness; the CLASS
    # sets the shell thickness so that the shell holds ~44% (class 0) vs ~56%
    # (class 1) of the voxels. The median then reads the core value for class
    # 0 and the shell value for class 1 (a large, clean gap), while contour
    # perturbations push the shell fraction across 50% and flip it, so the
    # median profiles as fragile. The symmetric fractions keep variance- and
    # percentile-type features class-blind.
    rim_boost_range: tuple[float, float] = (80.0, 90.0)
    rim_fraction_range: tuple[tuple[float, float], tuple[float, float]] = (
        (0.14, 0.22), (0.20, 0.28))
    responder_shrink: float = 0.55     # post-NACT radius factor, class 1
    nonresponder_shrink: float = 0.97  # class 0
    seed: int = 0

    def __post_init__(self):
        if self.n_patients < 10:
            raise SynthError("need >= 5 patients per class")
        r_lo = self.radius_range_mm[0]
        if r_lo / min(self.spacing) < 3:
            raise SynthError("minimum lesion radius must span >= 3 voxels")
        if abs(sum(self.site_probs) - 1.0) > 1e-9:
            raise SynthError("site_probs must sum to 1")


# the planted signals, by catalog name (scope/aggregation/region prefixes vary)
ROBUST_INFORMATIVE_FEATURE = "glcm.InverseVariance"
FRAGILE_INFORMATIVE_FEATURE = "firstorder.Median"


@dataclass
class SynthPatient:
    patient_id: str
    cls: int
    radii_mm: list[float]
    sites: list[str]
    sld_pre: float
    sld_post: float
    crs: int
    recist: str


@dataclass
class SynthCohort:
    manifest: CohortManifest
    patients: list[SynthPatient] = field(default_factory=list)

    def classes(self) -> dict[str, int]:
        return {p.patient_id: p.cls for p in self.patients}


def _grid_for(radii_mm, cfg: SynthConfig) -> tuple[int, int, int]:
    # lesions sit side by side along x with margins everywhere
    sp = cfg.spacing
    width = sum(2 * (r + cfg.margin_mm) for r in radii_mm)
    height = 2 * (max(radii_mm) + cfg.margin_mm)
    return (int(np.ceil(width / sp[0])) + 1,
            int(np.ceil(height / sp[1])) + 1,
            int(np.ceil(height / sp[2])) + 1)


def _paint_patient(rng: np.random.Generator, cfg: SynthConfig,
                   radii_mm: list[float], checker_amp: float, noise_sigma: float,
                   rim_boost: float, rim_fraction: float, shrink: float = 1.0
                   ) -> tuple[np.ndarray, list[np.ndarray], tuple[int, int, int]]:
    dims = _grid_for(radii_mm, cfg)
    sp = np.asarray(cfg.spacing)
    # texture over the whole volume, so perturbed contours see the same grain
    noise = rng.normal(scale=cfg.noise_amplitude, size=dims)
    smoothed = ndimage.gaussian_filter(noise, sigma=noise_sigma)
    sd = smoothed.std()
    noise = smoothed * (cfg.noise_amplitude / sd) if sd > 0 else smoothed
    ix = np.arange(dims[0])[:, None, None]
    iy = np.arange(dims[1])[None, :, None]
    iz = np.arange(dims[2])[None, None, :]
    checker = np.where((ix + iy + iz) % 2 == 0, 1.0, -1.0)
    data = cfg.base_hu + noise + checker_amp * checker

    coords = [np.arange(d) * s for d, s in zip(dims, sp)]
    xx, yy, zz = np.meshgrid(*coords, indexing="ij")
    masks = []
    cx = 0.0
    cy = coords[1][-1] / 2.0
    cz = coords[2][-1] / 2.0
    for r in radii_mm:
        cx += r + cfg.margin_mm
        dist = np.sqrt((xx - cx) ** 2 + (yy - cy) ** 2 + (zz - cz) ** 2)
        r_eff = r * shrink
        mask = dist <= r_eff
        if not mask.any():
            mask = dist <= dist.min() + 1e-9
        masks.append(mask)
        if rim_boost != 0.0:
            shell = (dist <= r_eff) & (dist >= r_eff * (1.0 - rim_fraction))
            data = np.where(shell, data + rim_boost, data)
        cx += r + cfg.margin_mm
    return data.astype(np.float32), masks, dims


def generate_patient(cfg: SynthConfig, index: int, cls: int) -> dict:
    rng = np.random.default_rng(derive_seed("synth-patient", cfg.seed, index))
    n_lesions = int(rng.integers(cfg.lesion_count_range[0], cfg.lesion_count_range[1] + 1))
    radii = [float(rng.uniform(*cfg.radius_range_mm)) for _ in range(n_lesions)]
    sites = [SITES3[rng.choice(3, p=cfg.site_probs)] for _ in range(n_lesions)]
    checker_amp = float(rng.uniform(*cfg.checker_amp_range[cls]))
    noise_sigma = float(rng.uniform(*cfg.noise_sigma_range))
    rim_boost = float(rng.uniform(*cfg.rim_boost_range))
    shrink = cfg.responder_shrink if cls == 1 else cfg.nonresponder_shrink

    rim_fraction = float(rng.uniform(*cfg.rim_fraction_range[cls]))
    pre_data, pre_masks, dims = _paint_patient(
        rng, cfg, radii, checker_amp, noise_sigma, rim_boost, rim_fraction,
        shrink=1.0)
    post_data, post_masks, post_dims = _paint_patient(
        rng, cfg, radii, checker_amp, noise_sigma, rim_boost, rim_fraction,
        shrink=shrink)

    sld_pre = sum(2.0 * r for r in radii)
    sld_post = sld_pre * shrink
    crs = 3 if cls == 1 else int(rng.integers(1, 3))
    recist = str(rng.choice(["CR", "PR"])) if cls == 1 else str(rng.choice(["SD", "PD"]))
    return {
        "dims": dims, "post_dims": post_dims,
        "pre_data": pre_data, "post_data": post_data,
        "pre_masks": pre_masks, "post_masks": post_masks,
        "radii": radii, "sites": sites,
        "sld_pre": sld_pre, "sld_post": sld_post, "crs": crs, "recist": recist,
    }


def generate_cohort(cfg: SynthConfig, out_dir) -> SynthCohort:
    """Write a complete cohort directory (MVOL/MMASK files + manifest.csv)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    n1 = int(round(cfg.n_patients * cfg.class1_fraction))
    classes = [1] * n1 + [0] * (cfg.n_patients - n1)

    rows = []
    patients = []
    for i, cls in enumerate(classes):
        pid = f"SYN{i:03d}"
        patient = generate_patient(cfg, i, cls)
        for tp, data_key, mask_key, dims_key, sld in (
                ("pre", "pre_data", "pre_masks", "dims", patient["sld_pre"]),
                ("post", "post_data", "post_masks", "post_dims", patient["sld_post"])):
            dims = patient[dims_key]
            vol = VoxelVolume(dims, cfg.spacing, (0.0, 0.0, 0.0), patient[data_key])
            lesions = tuple(
                Lesion(f"{pid}-L{k}", site, mask)
                for k, (site, mask) in enumerate(zip(patient["sites"], patient[mask_key])))
            lset = LesionSet(dims, cfg.spacing, (0.0, 0.0, 0.0), lesions)
            vpath = f"{pid}_{tp}.mvol"
            mpath = f"{pid}_{tp}.mmask"
            write_volume(vol, out_dir / vpath)
            write_mask(lset, out_dir / mpath)
            rows.append(ManifestRow(pid, tp, vpath, mpath, patient["crs"],
                                    patient["recist"], sld))
        patients.append(SynthPatient(
            patient_id=pid, cls=cls, radii_mm=patient["radii"],
            sites=patient["sites"], sld_pre=patient["sld_pre"],
            sld_post=patient["sld_post"], crs=patient["crs"],
            recist=patient["recist"]))

    manifest = CohortManifest(rows=tuple(rows), root=out_dir)
    write_manifest(manifest, out_dir / "manifest.csv")
    return SynthCohort(manifest=manifest, patients=patients)
