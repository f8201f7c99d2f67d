"""Cohort file formats and in-memory data model.

Centralizes every on-disk format (MVOL volumes, MMASK lesion masks, manifest
CSV, feature-matrix CSV) so the rest of the pipeline never touches raw bytes.
All loaders are pure functions over file contents; loaded objects are treated
as immutable.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

SITES = ("omentum", "pelvis", "other")
TIMEPOINTS = ("pre", "post")
RECIST_CATEGORIES = ("CR", "PR", "SD", "PD")
SITE_SCOPES = ("all", "omentum", "pelvis")
AGGREGATIONS = ("largest", "merged")
REGIONS = ("full", "rim")

MANIFEST_HEADER = ["patient_id", "timepoint", "volume_path", "mask_path", "crs", "recist", "sld_mm"]


class CohortIOError(ValueError):
    """Base error for cohort file parsing and validation."""


class FormatError(CohortIOError):
    """Malformed header or field; message names the offending line."""


class TruncationError(CohortIOError):
    """Payload shorter or longer than the header promises."""


class SchemaError(CohortIOError):
    """CSV schema violation (bad header, duplicate columns)."""


class DuplicateKeyError(CohortIOError):
    """Duplicate (patient_id, timepoint) manifest key."""


class GeometryError(CohortIOError):
    """Volume/mask grid geometry mismatch; never silently resampled."""


def _fmt_float(x: float) -> str:
    # repr gives the shortest string that round-trips exactly
    return repr(float(x))


@dataclass(frozen=True)
class VoxelVolume:
    """3D scalar grid in Hounsfield units with physical spacing (mm/voxel).

    ``data`` has shape ``dims`` = (nx, ny, nz); flattening with order='F'
    yields the on-disk x-fastest ordering.
    """

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float]
    data: np.ndarray

    def __post_init__(self):
        if len(self.dims) != 3 or any(int(d) < 1 for d in self.dims):
            raise FormatError(f"all dims must be >= 1, got {self.dims}")
        if any(s <= 0 for s in self.spacing):
            raise FormatError(f"nonpositive spacing {self.spacing}")
        if self.data.shape != tuple(self.dims):
            raise TruncationError(
                f"data shape {self.data.shape} does not match dims {self.dims}")

    @property
    def voxel_volume_mm3(self) -> float:
        sx, sy, sz = self.spacing
        return sx * sy * sz


@dataclass(frozen=True)
class Lesion:
    lesion_id: str
    site: str
    mask: np.ndarray  # bool, shape = grid dims

    def __post_init__(self):
        if self.site not in SITES:
            raise FormatError(f"unknown site {self.site!r} for lesion {self.lesion_id!r}")
        if not self.mask.any():
            raise FormatError(f"lesion {self.lesion_id!r} has an empty mask")


@dataclass(frozen=True)
class LesionSet:
    """Labeled lesion masks sharing one grid geometry."""

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    origin: tuple[float, float, float]
    lesions: tuple[Lesion, ...]

    def __post_init__(self):
        for les in self.lesions:
            if les.mask.shape != tuple(self.dims):
                raise GeometryError(
                    f"lesion {les.lesion_id!r} mask shape {les.mask.shape} != grid {self.dims}")
        if len(self.lesions) > 1:
            stacked = np.zeros(self.dims, dtype=np.int32)
            for les in self.lesions:
                stacked += les.mask.astype(np.int32)
            if (stacked > 1).any():
                warnings.warn("lesion masks overlap; downstream merges use union semantics",
                              stacklevel=2)

    def in_scope(self, scope: str) -> list[Lesion]:
        if scope == "all":
            return list(self.lesions)
        return [les for les in self.lesions if les.site == scope]


def check_geometry(volume: VoxelVolume, lesions: LesionSet) -> None:
    """Raise GeometryError unless volume and lesion set share the exact grid."""
    if tuple(volume.dims) != tuple(lesions.dims):
        raise GeometryError(f"dims mismatch: volume {volume.dims} vs mask {lesions.dims}")
    if not np.allclose(volume.spacing, lesions.spacing, rtol=0, atol=0):
        raise GeometryError(f"spacing mismatch: {volume.spacing} vs {lesions.spacing}")
    if not np.allclose(volume.origin, lesions.origin, rtol=0, atol=0):
        raise GeometryError(f"origin mismatch: {volume.origin} vs {lesions.origin}")


# ---------------------------------------------------------------------------
# MVOL / MMASK
#
# MVOL:  "MVOL 1" / "dims nx ny nz" / "spacing sx sy sz" / "origin ox oy oz"
#        / "data float32 le" / raw little-endian float32, x-fastest.
# MMASK: magic "MMASK 1", plus one "lesion <id> <site>" line per label before
#        the data line; payload uint8 with 0 = background, k = k-th lesion.
# ---------------------------------------------------------------------------

def _split_header(blob: bytes, path) -> tuple[list[str], bytes]:
    """Split text header lines (through the 'data …' line) from the payload."""
    lines = []
    pos = 0
    while True:
        nl = blob.find(b"\n", pos)
        if nl < 0:
            raise FormatError(f"{path}: header not terminated before end of file")
        try:
            line = blob[pos:nl].decode("ascii")
        except UnicodeDecodeError:
            raise FormatError(f"{path}: non-ascii header line at byte {pos}") from None
        lines.append(line)
        pos = nl + 1
        if line.startswith("data "):
            return lines, blob[pos:]
        if len(lines) > 4096:
            raise FormatError(f"{path}: no 'data' line found in header")


def _parse_triple(line: str, key: str, cast, path) -> tuple:
    parts = line.split()
    if len(parts) != 4 or parts[0] != key:
        raise FormatError(f"{path}: malformed header line {line!r} (expected '{key} a b c')")
    try:
        return tuple(cast(p) for p in parts[1:])
    except ValueError:
        raise FormatError(f"{path}: malformed header line {line!r}") from None


def load_volume(path) -> VoxelVolume:
    path = Path(path)
    blob = path.read_bytes()
    lines, payload = _split_header(blob, path)
    if lines[0] != "MVOL 1":
        raise FormatError(f"{path}: bad magic line {lines[0]!r} (expected 'MVOL 1')")
    if len(lines) != 5:
        raise FormatError(f"{path}: expected 5 header lines, got {len(lines)}")
    dims = _parse_triple(lines[1], "dims", int, path)
    spacing = _parse_triple(lines[2], "spacing", float, path)
    origin = _parse_triple(lines[3], "origin", float, path)
    if lines[4] != "data float32 le":
        raise FormatError(f"{path}: bad data line {lines[4]!r}")
    if any(s <= 0 for s in spacing):
        raise FormatError(f"{path}: nonpositive spacing in line {lines[2]!r}")
    n = dims[0] * dims[1] * dims[2]
    if len(payload) != 4 * n:
        raise TruncationError(f"{path}: payload is {len(payload)} bytes, expected {4 * n}")
    flat = np.frombuffer(payload, dtype="<f4")
    data = flat.reshape(dims, order="F").copy()
    return VoxelVolume(dims=dims, spacing=spacing, origin=origin, data=data)


def write_volume(volume: VoxelVolume, path) -> None:
    path = Path(path)
    header = (
        "MVOL 1\n"
        f"dims {volume.dims[0]} {volume.dims[1]} {volume.dims[2]}\n"
        f"spacing {' '.join(_fmt_float(s) for s in volume.spacing)}\n"
        f"origin {' '.join(_fmt_float(o) for o in volume.origin)}\n"
        "data float32 le\n"
    )
    payload = np.asarray(volume.data, dtype="<f4").flatten(order="F").tobytes()
    path.write_bytes(header.encode("ascii") + payload)


def load_mask(path) -> LesionSet:
    path = Path(path)
    blob = path.read_bytes()
    lines, payload = _split_header(blob, path)
    if lines[0] != "MMASK 1":
        raise FormatError(f"{path}: bad magic line {lines[0]!r} (expected 'MMASK 1')")
    dims = _parse_triple(lines[1], "dims", int, path)
    spacing = _parse_triple(lines[2], "spacing", float, path)
    origin = _parse_triple(lines[3], "origin", float, path)
    lesion_lines = lines[4:-1]
    if lines[-1] != "data uint8":
        raise FormatError(f"{path}: bad data line {lines[-1]!r}")
    if any(s <= 0 for s in spacing):
        raise FormatError(f"{path}: nonpositive spacing in line {lines[2]!r}")
    ids_sites = []
    for line in lesion_lines:
        parts = line.split()
        if len(parts) != 3 or parts[0] != "lesion":
            raise FormatError(f"{path}: malformed lesion line {line!r}")
        ids_sites.append((parts[1], parts[2]))
    if len({i for i, _ in ids_sites}) != len(ids_sites):
        raise FormatError(f"{path}: duplicate lesion ids")
    n = dims[0] * dims[1] * dims[2]
    if len(payload) != n:
        raise TruncationError(f"{path}: payload is {len(payload)} bytes, expected {n}")
    labels = np.frombuffer(payload, dtype=np.uint8).reshape(dims, order="F")
    if labels.max(initial=0) > len(ids_sites):
        raise FormatError(
            f"{path}: payload labels up to {labels.max()} but only {len(ids_sites)} lesion lines")
    lesions = []
    for k, (lesion_id, site) in enumerate(ids_sites, start=1):
        mask = labels == k
        if not mask.any():
            raise FormatError(f"{path}: lesion {lesion_id!r} (label {k}) has no voxels")
        lesions.append(Lesion(lesion_id=lesion_id, site=site, mask=mask))
    return LesionSet(dims=dims, spacing=spacing, origin=origin, lesions=tuple(lesions))


def write_mask(lesions: LesionSet, path) -> None:
    """Serialize a LesionSet; overlapping masks are resolved last-lesion-wins."""
    path = Path(path)
    header = [
        "MMASK 1",
        f"dims {lesions.dims[0]} {lesions.dims[1]} {lesions.dims[2]}",
        f"spacing {' '.join(_fmt_float(s) for s in lesions.spacing)}",
        f"origin {' '.join(_fmt_float(o) for o in lesions.origin)}",
    ]
    labels = np.zeros(lesions.dims, dtype=np.uint8)
    for k, les in enumerate(lesions.lesions, start=1):
        header.append(f"lesion {les.lesion_id} {les.site}")
        labels[les.mask] = k
    header.append("data uint8")
    payload = labels.flatten(order="F").tobytes()
    path.write_bytes(("\n".join(header) + "\n").encode("ascii") + payload)


def load_pair(volume_path, mask_path) -> tuple[VoxelVolume, LesionSet]:
    volume = load_volume(volume_path)
    lesions = load_mask(mask_path)
    check_geometry(volume, lesions)
    return volume, lesions


# ---------------------------------------------------------------------------
# Cohort manifest CSV
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ManifestRow:
    patient_id: str
    timepoint: str
    volume_path: str
    mask_path: str
    crs: int | None = None
    recist: str | None = None
    sld_mm: float | None = None


@dataclass(frozen=True)
class CohortManifest:
    rows: tuple[ManifestRow, ...]
    root: Path = field(default_factory=Path)

    def patient_ids(self) -> list[str]:
        seen: dict[str, None] = {}
        for row in self.rows:
            seen.setdefault(row.patient_id, None)
        return list(seen)

    def row(self, patient_id: str, timepoint: str) -> ManifestRow | None:
        for r in self.rows:
            if r.patient_id == patient_id and r.timepoint == timepoint:
                return r
        return None

    def resolve(self, rel_path: str) -> Path:
        return self.root / rel_path


def load_manifest(path, check_paths: bool = True) -> CohortManifest:
    path = Path(path)
    rows = []
    seen_keys = set()
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != MANIFEST_HEADER:
            raise SchemaError(f"{path}: bad manifest header {header!r}")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != len(MANIFEST_HEADER):
                raise SchemaError(f"{path}:{lineno}: expected {len(MANIFEST_HEADER)} cells")
            pid, tp, vp, mp, crs_s, recist_s, sld_s = rec
            if tp not in TIMEPOINTS:
                raise FormatError(f"{path}:{lineno}: bad timepoint {tp!r}")
            key = (pid, tp)
            if key in seen_keys:
                raise DuplicateKeyError(f"{path}:{lineno}: duplicate key {key}")
            seen_keys.add(key)
            crs = None
            if crs_s != "":
                crs = int(crs_s)
                if not 1 <= crs <= 3:
                    raise FormatError(f"{path}:{lineno}: crs {crs} outside 1..3")
            recist = None
            if recist_s != "":
                if recist_s not in RECIST_CATEGORIES:
                    raise FormatError(f"{path}:{lineno}: bad recist {recist_s!r}")
                recist = recist_s
            sld = None
            if sld_s != "":
                sld = float(sld_s)
                if not sld > 0:
                    raise FormatError(f"{path}:{lineno}: sld_mm must be positive, got {sld}")
            rows.append(ManifestRow(pid, tp, vp, mp, crs, recist, sld))
    manifest = CohortManifest(rows=tuple(rows), root=path.parent)
    if check_paths:
        for row in manifest.rows:
            for rel in (row.volume_path, row.mask_path):
                if not manifest.resolve(rel).exists():
                    raise FormatError(f"{path}: referenced path {rel!r} does not exist")
    return manifest


def write_manifest(manifest: CohortManifest, path) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_HEADER)
        for r in manifest.rows:
            writer.writerow([
                r.patient_id, r.timepoint, r.volume_path, r.mask_path,
                "" if r.crs is None else str(r.crs),
                "" if r.recist is None else r.recist,
                "" if r.sld_mm is None else _fmt_float(r.sld_mm),
            ])


# ---------------------------------------------------------------------------
# Feature matrix CSV
#
# First column patient_id; feature columns are named
# <site_scope>.<aggregation>.<region>.<family>.<feature>.
# ---------------------------------------------------------------------------

def parse_feature_name(name: str) -> tuple[str, str, str, str, str]:
    parts = name.split(".")
    if len(parts) != 5:
        raise SchemaError(f"feature name {name!r} is not scope.agg.region.family.feature")
    scope, agg, region, family, feat = parts
    if scope not in SITE_SCOPES:
        raise SchemaError(f"feature {name!r}: unknown site_scope {scope!r}")
    if agg not in AGGREGATIONS:
        raise SchemaError(f"feature {name!r}: unknown aggregation {agg!r}")
    if region not in REGIONS:
        raise SchemaError(f"feature {name!r}: unknown region {region!r}")
    return scope, agg, region, family, feat


def make_feature_name(scope: str, agg: str, region: str, family: str, feat: str) -> str:
    return f"{scope}.{agg}.{region}.{family}.{feat}"


@dataclass
class FeatureMatrix:
    """patients x named features, with provenance encoded in column names."""

    feature_names: list[str]
    patient_ids: list[str]
    values: np.ndarray  # float64, shape (n_patients, n_features)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.patient_ids), len(self.feature_names)):
            raise SchemaError(
                f"values shape {self.values.shape} != "
                f"({len(self.patient_ids)}, {len(self.feature_names)})")
        if len(set(self.feature_names)) != len(self.feature_names):
            raise SchemaError("duplicate feature names")
        groups: dict[tuple[str, str, str], int] = {}
        for name in self.feature_names:
            scope, agg, region, _, _ = parse_feature_name(name)
            groups[(scope, agg, region)] = groups.get((scope, agg, region), 0) + 1
        for key, count in groups.items():
            if count > 102:
                raise SchemaError(f"group {key} has {count} columns (max 102)")

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.feature_names.index(name)]

    def subset(self, names: list[str]) -> "FeatureMatrix":
        idx = [self.feature_names.index(n) for n in names]
        return FeatureMatrix(list(names), list(self.patient_ids), self.values[:, idx].copy())

    def rows(self, patient_ids: list[str]) -> "FeatureMatrix":
        idx = [self.patient_ids.index(p) for p in patient_ids]
        return FeatureMatrix(list(self.feature_names), list(patient_ids),
                             self.values[idx, :].copy())


def write_feature_matrix(matrix: FeatureMatrix, path) -> None:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["patient_id"] + list(matrix.feature_names))
        for pid, row in zip(matrix.patient_ids, matrix.values):
            writer.writerow([pid] + [_fmt_float(v) for v in row])


def read_feature_matrix(path) -> FeatureMatrix:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or header[0] != "patient_id":
            raise SchemaError(f"{path}: first column must be patient_id")
        names = header[1:]
        if len(set(names)) != len(names):
            raise SchemaError(f"{path}: duplicate column names on read")
        patient_ids = []
        values = []
        for rec in reader:
            if not rec:
                continue
            if len(rec) != len(header):
                raise SchemaError(f"{path}: row width mismatch for {rec[0]!r}")
            patient_ids.append(rec[0])
            values.append([float(c) for c in rec[1:]])
    arr = np.array(values, dtype=np.float64) if values else np.zeros((0, len(names)))
    return FeatureMatrix(feature_names=names, patient_ids=patient_ids, values=arr)


def nanmedian_columns(values: np.ndarray) -> np.ndarray:
    """Column medians ignoring NaN; all-NaN columns get median 0.0."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        med = np.nanmedian(values, axis=0)
    return np.where(np.isnan(med), 0.0, med)


def impute_columns(values: np.ndarray, medians: np.ndarray) -> np.ndarray:
    """Replace NaN cells with the provided per-column medians (training-fold)."""
    out = np.array(values, dtype=np.float64, copy=True)
    nan_r, nan_c = np.nonzero(np.isnan(out))
    out[nan_r, nan_c] = medians[nan_c]
    return out
