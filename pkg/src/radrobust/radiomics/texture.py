"""Gray-level texture matrices and their feature sets.

All four families share the fixed bin-width discretization. GLCM and GLRLM
are computed per direction over the 13 unique 3D offsets at Chebyshev
distance 1 and feature values are averaged over directions; GLSZM zones are
26-connected; GLDM uses the 26-neighborhood with dependence tolerance 0 and
dependence size j = 1 + number of equal-level neighbors.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .catalog import GLCM_FEATURES, GLRLM_FEATURES

EPS = np.spacing(1.0)

# one representative per +/- pair of the 26 neighbors
DIRECTIONS_13 = [
    (dx, dy, dz)
    for dz in (0, 1) for dy in (-1, 0, 1) for dx in (-1, 0, 1)
    if (dz > 0) or (dz == 0 and dy > 0) or (dz == 0 and dy == 0 and dx > 0)
]

OFFSETS_26 = [(dx, dy, dz)
              for dx in (-1, 0, 1) for dy in (-1, 0, 1) for dz in (-1, 0, 1)
              if (dx, dy, dz) != (0, 0, 0)]


def _pair_slices(shape, d):
    """Source/destination slice tuples so that dst voxel = src voxel + d."""
    src, dst = [], []
    for axis in range(3):
        step = d[axis]
        n = shape[axis]
        if step == 0:
            src.append(slice(0, n))
            dst.append(slice(0, n))
        elif step > 0:
            src.append(slice(0, n - step))
            dst.append(slice(step, n))
        else:
            src.append(slice(-step, n))
            dst.append(slice(0, n + step))
    return tuple(src), tuple(dst)


def glcm_matrices(levels: np.ndarray, n_levels: int) -> np.ndarray:
    """Symmetric raw co-occurrence counts, shape (13, Ng, Ng)."""
    mats = np.zeros((len(DIRECTIONS_13), n_levels, n_levels), dtype=np.float64)
    for k, d in enumerate(DIRECTIONS_13):
        src, dst = _pair_slices(levels.shape, d)
        a = levels[src].ravel()
        b = levels[dst].ravel()
        ok = (a > 0) & (b > 0)
        np.add.at(mats[k], (a[ok] - 1, b[ok] - 1), 1.0)
        mats[k] += mats[k].T.copy()
    return mats


def _glcm_features_multi(p: np.ndarray, n_levels: int) -> dict[str, float]:
    """Feature means over the direction axis of p (n_dirs, Ng, Ng)."""
    nd, ng, _ = p.shape
    iv = np.arange(1, ng + 1, dtype=np.float64)
    i = iv[:, None]
    j = iv[None, :]
    px = p.sum(axis=2)                       # (nd, ng)
    py = p.sum(axis=1)
    ux = (p * i[None]).sum(axis=(1, 2))      # (nd,)
    uy = (p * j[None]).sum(axis=(1, 2))
    dev_i = i[None] - ux[:, None, None]
    dev_j = j[None] - uy[:, None, None]
    sigx = np.sqrt((p * dev_i ** 2).sum(axis=(1, 2)))
    sigy = np.sqrt((p * dev_j ** 2).sum(axis=(1, 2)))

    ksum = np.arange(2, 2 * ng + 1, dtype=np.float64)
    kdiff = np.arange(0, ng, dtype=np.float64)
    sum_idx = (i + j).astype(int).ravel()
    diff_idx = np.abs(i - j).astype(int).ravel()
    pxy_sum = np.stack([np.bincount(sum_idx, weights=p[d].ravel(),
                                    minlength=2 * ng + 1)[2:] for d in range(nd)])
    pxy_diff = np.stack([np.bincount(diff_idx, weights=p[d].ravel(),
                                     minlength=ng) for d in range(nd)])

    hx = -(px * np.log2(px + EPS)).sum(axis=1)
    hy = -(py * np.log2(py + EPS)).sum(axis=1)
    hxy = -(p * np.log2(p + EPS)).sum(axis=(1, 2))
    pxpy = px[:, :, None] * py[:, None, :]
    hxy1 = -(p * np.log2(pxpy + EPS)).sum(axis=(1, 2))
    hxy2 = -(pxpy * np.log2(pxpy + EPS)).sum(axis=(1, 2))

    da = (pxy_diff * kdiff[None]).sum(axis=1)
    corm = (p * dev_i * dev_j).sum(axis=(1, 2))
    sig_prod = sigx * sigy
    correlation = np.where(sig_prod == 0, 1.0,
                           corm / np.where(sig_prod == 0, 1.0, sig_prod))
    div_imc1 = np.maximum(hx, hy)
    imc1 = np.where(div_imc1 == 0, 0.0,
                    (hxy - hxy1) / np.where(div_imc1 == 0, 1.0, div_imc1))
    imc2 = np.sqrt(np.clip(1.0 - np.exp(-2.0 * (hxy2 - hxy)), 0.0, None))

    mcc = np.empty(nd)
    for d in range(nd):
        occ = px[d] > 0
        if occ.sum() < 2:
            mcc[d] = 1.0
            continue
        sub = p[d][np.ix_(occ, occ)]
        d1 = sub / px[d][occ][:, None]
        d2 = sub / py[d][occ][None, :]
        eig = np.sort(np.real(np.linalg.eigvals(d1 @ d2.T)))[::-1]
        mcc[d] = np.sqrt(max(0.0, float(eig[1])))

    off = np.abs(i - j)
    off_pos = off > 0
    inv_w = np.zeros_like(off)
    inv_w[off_pos] = 1.0 / off[off_pos] ** 2
    csum = i[None] + j[None] - ux[:, None, None] - uy[:, None, None]

    def mean(v):
        return float(np.mean(v))

    return {
        "Autocorrelation": mean((p * (i * j)[None]).sum(axis=(1, 2))),
        "ClusterProminence": mean((p * csum ** 4).sum(axis=(1, 2))),
        "ClusterShade": mean((p * csum ** 3).sum(axis=(1, 2))),
        "ClusterTendency": mean((p * csum ** 2).sum(axis=(1, 2))),
        "Contrast": mean((p * ((i - j) ** 2)[None]).sum(axis=(1, 2))),
        "Correlation": mean(correlation),
        "DifferenceAverage": mean(da),
        "DifferenceEntropy": mean(-(pxy_diff * np.log2(pxy_diff + EPS)).sum(axis=1)),
        "DifferenceVariance": mean(
            (pxy_diff * (kdiff[None] - da[:, None]) ** 2).sum(axis=1)),
        "Id": mean((p / (1.0 + off)[None]).sum(axis=(1, 2))),
        "Idm": mean((p / (1.0 + off ** 2)[None]).sum(axis=(1, 2))),
        "Idmn": mean((p / (1.0 + off ** 2 / n_levels ** 2)[None]).sum(axis=(1, 2))),
        "Idn": mean((p / (1.0 + off / n_levels)[None]).sum(axis=(1, 2))),
        "Imc1": mean(imc1),
        "Imc2": mean(imc2),
        "InverseVariance": mean((p * inv_w[None]).sum(axis=(1, 2))),
        "JointAverage": mean(ux),
        "JointEnergy": mean((p ** 2).sum(axis=(1, 2))),
        "JointEntropy": mean(hxy),
        "MCC": mean(mcc),
        "MaximumProbability": mean(p.max(axis=(1, 2))),
        "SumAverage": mean((pxy_sum * ksum[None]).sum(axis=1)),
        "SumEntropy": mean(-(pxy_sum * np.log2(pxy_sum + EPS)).sum(axis=1)),
        "SumSquares": mean((p * dev_i ** 2).sum(axis=(1, 2))),
    }


def glcm_features(levels: np.ndarray, n_levels: int) -> dict[str, float]:
    mats = glcm_matrices(levels, n_levels)
    sums = mats.sum(axis=(1, 2))
    keep = sums > 0
    if not keep.any():
        return {name: float("nan") for name in GLCM_FEATURES}
    p = mats[keep] / sums[keep][:, None, None]
    return _glcm_features_multi(p, n_levels)


# ---------------------------------------------------------------------------
# GLRLM
# ---------------------------------------------------------------------------

def _runs_for_direction(levels: np.ndarray, d) -> tuple[np.ndarray, np.ndarray]:
    """(level, run_length) arrays of all maximal runs along direction d."""
    shape = levels.shape
    src, dst = _pair_slices(shape, d)
    prev = np.zeros(shape, dtype=levels.dtype)
    prev[dst] = levels[src]  # prev[v] = levels[v - d]
    starts = (levels > 0) & (prev != levels)
    xs, ys, zs = np.nonzero(starts)
    lev = levels[xs, ys, zs]
    runlen = np.ones(len(lev), dtype=np.int64)
    alive_idx = np.arange(len(lev))
    k = 1
    while len(alive_idx):
        nx = xs[alive_idx] + k * d[0]
        ny = ys[alive_idx] + k * d[1]
        nz = zs[alive_idx] + k * d[2]
        inb = ((nx >= 0) & (nx < shape[0]) & (ny >= 0) & (ny < shape[1])
               & (nz >= 0) & (nz < shape[2]))
        cont = np.zeros(len(alive_idx), dtype=bool)
        cont[inb] = levels[nx[inb], ny[inb], nz[inb]] == lev[alive_idx][inb]
        alive_idx = alive_idx[cont]
        runlen[alive_idx] += 1
        k += 1
    return lev, runlen


def glrlm_features(levels: np.ndarray, n_levels: int, n_voxels: int) -> dict[str, float]:
    acc = {name: 0.0 for name in GLRLM_FEATURES}
    for d in DIRECTIONS_13:
        lev, runlen = _runs_for_direction(levels, d)
        s = np.zeros((n_levels, int(runlen.max())), dtype=np.float64)
        np.add.at(s, (lev - 1, runlen - 1), 1.0)
        n = s.sum()
        iv = np.arange(1, s.shape[0] + 1, dtype=np.float64)
        lv = np.arange(1, s.shape[1] + 1, dtype=np.float64)
        pg = s.sum(axis=1)
        pr = s.sum(axis=0)
        p = s / n
        mu_i = float((p.sum(axis=1) * iv).sum())
        mu_l = float((p.sum(axis=0) * lv).sum())
        single = {
            "ShortRunEmphasis": float((pr / lv ** 2).sum() / n),
            "LongRunEmphasis": float((pr * lv ** 2).sum() / n),
            "GrayLevelNonUniformity": float((pg ** 2).sum() / n),
            "GrayLevelNonUniformityNormalized": float((pg ** 2).sum() / n ** 2),
            "RunLengthNonUniformity": float((pr ** 2).sum() / n),
            "RunLengthNonUniformityNormalized": float((pr ** 2).sum() / n ** 2),
            "RunPercentage": float(n / n_voxels),
            "GrayLevelVariance": float((p.sum(axis=1) * (iv - mu_i) ** 2).sum()),
            "RunVariance": float((p.sum(axis=0) * (lv - mu_l) ** 2).sum()),
            "RunEntropy": float(-(p * np.log2(p + EPS)).sum()),
            "LowGrayLevelRunEmphasis": float((pg / iv ** 2).sum() / n),
            "HighGrayLevelRunEmphasis": float((pg * iv ** 2).sum() / n),
            "ShortRunLowGrayLevelEmphasis": float(
                (s / (iv[:, None] ** 2 * lv[None, :] ** 2)).sum() / n),
            "ShortRunHighGrayLevelEmphasis": float(
                (s * iv[:, None] ** 2 / lv[None, :] ** 2).sum() / n),
            "LongRunLowGrayLevelEmphasis": float(
                (s * lv[None, :] ** 2 / iv[:, None] ** 2).sum() / n),
            "LongRunHighGrayLevelEmphasis": float(
                (s * iv[:, None] ** 2 * lv[None, :] ** 2).sum() / n),
        }
        for name in GLRLM_FEATURES:
            acc[name] += single[name]
    return {name: acc[name] / len(DIRECTIONS_13) for name in GLRLM_FEATURES}


# ---------------------------------------------------------------------------
# GLSZM
# ---------------------------------------------------------------------------

def glszm_zones(levels: np.ndarray, n_levels: int) -> tuple[np.ndarray, np.ndarray]:
    """(level, zone_size) arrays of 26-connected constant-level zones."""
    structure = np.ones((3, 3, 3), dtype=int)
    xs, ys, zs = np.nonzero(levels > 0)
    lv_flat = levels[xs, ys, zs]
    levs, sizes = [], []
    for lv in np.unique(lv_flat):
        pick = lv_flat == lv
        if pick.sum() == 1:
            levs.append(int(lv))
            sizes.append(1)
            continue
        px, py, pz = xs[pick], ys[pick], zs[pick]
        lo = (px.min(), py.min(), pz.min())
        sub = np.zeros((px.max() - lo[0] + 1, py.max() - lo[1] + 1,
                        pz.max() - lo[2] + 1), dtype=bool)
        sub[px - lo[0], py - lo[1], pz - lo[2]] = True
        lab, n_zones = ndimage.label(sub, structure=structure)
        counts = np.bincount(lab.ravel())[1:]
        levs.extend([int(lv)] * n_zones)
        sizes.extend(counts.tolist())
    return np.asarray(levs, dtype=np.int64), np.asarray(sizes, dtype=np.int64)


def glszm_features(levels: np.ndarray, n_levels: int, n_voxels: int) -> dict[str, float]:
    lev, size = glszm_zones(levels, n_levels)
    s = np.zeros((n_levels, int(size.max())), dtype=np.float64)
    np.add.at(s, (lev - 1, size - 1), 1.0)
    n = s.sum()
    iv = np.arange(1, s.shape[0] + 1, dtype=np.float64)
    sv = np.arange(1, s.shape[1] + 1, dtype=np.float64)
    pg = s.sum(axis=1)
    pz = s.sum(axis=0)
    p = s / n
    mu_i = float((p.sum(axis=1) * iv).sum())
    mu_s = float((p.sum(axis=0) * sv).sum())
    return {
        "SmallAreaEmphasis": float((pz / sv ** 2).sum() / n),
        "LargeAreaEmphasis": float((pz * sv ** 2).sum() / n),
        "GrayLevelNonUniformity": float((pg ** 2).sum() / n),
        "GrayLevelNonUniformityNormalized": float((pg ** 2).sum() / n ** 2),
        "SizeZoneNonUniformity": float((pz ** 2).sum() / n),
        "SizeZoneNonUniformityNormalized": float((pz ** 2).sum() / n ** 2),
        "ZonePercentage": float(n / n_voxels),
        "GrayLevelVariance": float((p.sum(axis=1) * (iv - mu_i) ** 2).sum()),
        "ZoneVariance": float((p.sum(axis=0) * (sv - mu_s) ** 2).sum()),
        "ZoneEntropy": float(-(p * np.log2(p + EPS)).sum()),
        "LowGrayLevelZoneEmphasis": float((pg / iv ** 2).sum() / n),
        "HighGrayLevelZoneEmphasis": float((pg * iv ** 2).sum() / n),
        "SmallAreaLowGrayLevelEmphasis": float(
            (s / (iv[:, None] ** 2 * sv[None, :] ** 2)).sum() / n),
        "SmallAreaHighGrayLevelEmphasis": float(
            (s * iv[:, None] ** 2 / sv[None, :] ** 2).sum() / n),
        "LargeAreaLowGrayLevelEmphasis": float(
            (s * sv[None, :] ** 2 / iv[:, None] ** 2).sum() / n),
        "LargeAreaHighGrayLevelEmphasis": float(
            (s * iv[:, None] ** 2 * sv[None, :] ** 2).sum() / n),
    }


# ---------------------------------------------------------------------------
# GLDM
# ---------------------------------------------------------------------------

def gldm_dependences(levels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(level, dependence_size) per in-mask voxel; size = 1 + equal neighbors."""
    mask = levels > 0
    dep = np.zeros(levels.shape, dtype=np.int64)
    for d in OFFSETS_26:
        src, dst = _pair_slices(levels.shape, d)
        same = (levels[src] == levels[dst]) & (levels[src] > 0)
        dep[src] += same
    return levels[mask], dep[mask] + 1


def gldm_features(levels: np.ndarray, n_levels: int, n_voxels: int) -> dict[str, float]:
    lev, dep = gldm_dependences(levels)
    s = np.zeros((n_levels, int(dep.max())), dtype=np.float64)
    np.add.at(s, (lev - 1, dep - 1), 1.0)
    n = s.sum()
    iv = np.arange(1, s.shape[0] + 1, dtype=np.float64)
    jv = np.arange(1, s.shape[1] + 1, dtype=np.float64)
    pg = s.sum(axis=1)
    pd = s.sum(axis=0)
    p = s / n
    mu_i = float((p.sum(axis=1) * iv).sum())
    mu_j = float((p.sum(axis=0) * jv).sum())
    return {
        "SmallDependenceEmphasis": float((pd / jv ** 2).sum() / n),
        "LargeDependenceEmphasis": float((pd * jv ** 2).sum() / n),
        "GrayLevelNonUniformity": float((pg ** 2).sum() / n),
        "DependenceNonUniformity": float((pd ** 2).sum() / n),
        "DependenceNonUniformityNormalized": float((pd ** 2).sum() / n ** 2),
        "GrayLevelVariance": float((p.sum(axis=1) * (iv - mu_i) ** 2).sum()),
        "DependenceVariance": float((p.sum(axis=0) * (jv - mu_j) ** 2).sum()),
        "DependenceEntropy": float(-(p * np.log2(p + EPS)).sum()),
        "LowGrayLevelEmphasis": float((pg / iv ** 2).sum() / n),
        "HighGrayLevelEmphasis": float((pg * iv ** 2).sum() / n),
        "SmallDependenceLowGrayLevelEmphasis": float(
            (s / (iv[:, None] ** 2 * jv[None, :] ** 2)).sum() / n),
        "SmallDependenceHighGrayLevelEmphasis": float(
            (s * iv[:, None] ** 2 / jv[None, :] ** 2).sum() / n),
        "LargeDependenceLowGrayLevelEmphasis": float(
            (s * jv[None, :] ** 2 / iv[:, None] ** 2).sum() / n),
        "LargeDependenceHighGrayLevelEmphasis": float(
            (s * iv[:, None] ** 2 * jv[None, :] ** 2).sum() / n),
    }
