"""Cohort-level feature extraction: original and perturbed replicates."""

from __future__ import annotations

import logging

import numpy as np

from ..cohort_io import (CohortManifest, FeatureMatrix, LesionSet, VoxelVolume,
                         load_pair, make_feature_name)
from ..radiomics import CATALOG_NAMES, DiscretizationConfig, extract_all
from ..roi_ops import (PerturbConfig, Voi, make_rim, merge_lesions,
                       perturb_lesion_set, select_largest)

log = logging.getLogger(__name__)

RIM_WIDTH_MM = 6.0


def build_voi(lesions: LesionSet, scope: str, aggregation: str, region: str) -> Voi:
    """The VOI for one (scope, aggregation, region) cell.

    Rims are only built around the single largest lesion per scope, so
    neighbouring-lesion rims cannot overlap.
    """
    if region == "rim":
        if aggregation != "largest":
            raise ValueError("rim region requires aggregation=largest")
        return make_rim(select_largest(lesions, scope), total_width_mm=RIM_WIDTH_MM)
    if aggregation == "largest":
        return select_largest(lesions, scope)
    return merge_lesions(lesions, scope)


def eligible_patients(manifest: CohortManifest, scope: str,
                      timepoint: str = "pre") -> list[str]:
    """Patients with a scan at the timepoint and >= 1 lesion in scope."""
    out = []
    for pid in manifest.patient_ids():
        row = manifest.row(pid, timepoint)
        if row is None:
            log.info("patient %s: missing %s scan, excluded", pid, timepoint)
            continue
        _, lesions = load_pair(manifest.resolve(row.volume_path),
                               manifest.resolve(row.mask_path))
        if not lesions.in_scope(scope):
            log.info("patient %s: no lesion in scope %s, excluded", pid, scope)
            continue
        out.append(pid)
    return out


def _extract_rows(pairs: list[tuple[str, VoxelVolume, LesionSet]],
                  scope: str, aggregation: str, region: str,
                  disc: DiscretizationConfig) -> FeatureMatrix:
    names = [make_feature_name(scope, aggregation, region, *cn.split("."))
             for cn in CATALOG_NAMES]
    values = np.empty((len(pairs), len(names)))
    pids = []
    for i, (pid, volume, lesions) in enumerate(pairs):
        voi = build_voi(lesions, scope, aggregation, region)
        fv = extract_all(volume, voi, disc)
        values[i] = fv.values
        pids.append(pid)
    return FeatureMatrix(names, pids, values)


def extract_cohort(manifest: CohortManifest, patients: list[str], scope: str,
                   aggregation: str, region: str, disc: DiscretizationConfig,
                   timepoint: str = "pre") -> FeatureMatrix:
    pairs = []
    for pid in patients:
        row = manifest.row(pid, timepoint)
        volume, lesions = load_pair(manifest.resolve(row.volume_path),
                                    manifest.resolve(row.mask_path))
        pairs.append((pid, volume, lesions))
    return _extract_rows(pairs, scope, aggregation, region, disc)


def extract_perturbed_replicate(manifest: CohortManifest, patients: list[str],
                                scope: str, aggregation: str, region: str,
                                disc: DiscretizationConfig, perturb_cfg: PerturbConfig,
                                replicate_index: int,
                                timepoint: str = "pre") -> FeatureMatrix:
    """Features after perturbing every lesion independently (keyed sub-seeds)."""
    pairs = []
    for pid in patients:
        row = manifest.row(pid, timepoint)
        volume, lesions = load_pair(manifest.resolve(row.volume_path),
                                    manifest.resolve(row.mask_path))
        perturbed = perturb_lesion_set(lesions, perturb_cfg, replicate_index,
                                       patient_key=pid)
        pairs.append((pid, volume, perturbed))
    return _extract_rows(pairs, scope, aggregation, region, disc)


def total_lesion_volumes(manifest: CohortManifest) -> dict[tuple[str, str], float]:
    """(patient, timepoint) -> summed lesion volume in mm^3 over all lesions."""
    out = {}
    for row in manifest.rows:
        _, lesions = load_pair(manifest.resolve(row.volume_path),
                               manifest.resolve(row.mask_path))
        voxvol = float(np.prod(lesions.spacing))
        total = sum(int(l.mask.sum()) for l in lesions.lesions) * voxvol
        out[(row.patient_id, row.timepoint)] = total
    return out
