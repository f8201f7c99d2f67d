"""Independent brute-force reference implementations of all 102 features.

Everything here is written as plain loops and direct formula transcriptions,
deliberately avoiding the package's vectorized code paths. Shape meshing uses
the classic (lorensen) marching-cubes variant instead of the package default,
with its own triangle integration.
"""

import math

import numpy as np
from scipy import ndimage
from skimage import measure

from radrobust.radiomics.shape import MESH_PAD, MESH_SIGMA_VOX

EPS = np.spacing(1.0)

DIRECTIONS_13 = [
    (dx, dy, dz)
    for dz in (0, 1) for dy in (-1, 0, 1) for dx in (-1, 0, 1)
    if (dz > 0) or (dz == 0 and dy > 0) or (dz == 0 and dy == 0 and dx > 0)
]
OFFSETS_26 = [(dx, dy, dz)
              for dx in (-1, 0, 1) for dy in (-1, 0, 1) for dz in (-1, 0, 1)
              if (dx, dy, dz) != (0, 0, 0)]


def oracle_levels(intens, mask, bin_width):
    vals = [float(intens[p]) for p in zip(*np.nonzero(mask))]
    anchor = math.floor(min(vals) / bin_width) * bin_width
    levels = np.zeros(mask.shape, dtype=np.int64)
    for p in zip(*np.nonzero(mask)):
        levels[p] = int(math.floor((float(intens[p]) - anchor) / bin_width)) + 1
    return levels, int(levels.max())


# ---------------------------------------------------------------------------
# first order
# ---------------------------------------------------------------------------

def oracle_firstorder(intens, mask, spacing, bin_width):
    x = sorted(float(intens[p]) for p in zip(*np.nonzero(mask)))
    n = len(x)
    mean = sum(x) / n
    m2 = sum((v - mean) ** 2 for v in x) / n
    m3 = sum((v - mean) ** 3 for v in x) / n
    m4 = sum((v - mean) ** 4 for v in x) / n

    def pct(q):
        # numpy 'linear' percentile
        h = (n - 1) * q / 100.0
        lo = int(math.floor(h))
        hi = min(lo + 1, n - 1)
        return x[lo] + (h - lo) * (x[hi] - x[lo])

    p10, p25, p50, p75, p90 = (pct(q) for q in (10, 25, 50, 75, 90))
    robust = [v for v in x if p10 <= v <= p90]
    rmean = sum(robust) / len(robust)
    rmad = sum(abs(v - rmean) for v in robust) / len(robust)

    levels, _ = oracle_levels(intens, mask, bin_width)
    counts = {}
    for p in zip(*np.nonzero(mask)):
        counts[levels[p]] = counts.get(levels[p], 0) + 1
    probs = [c / n for c in counts.values()]

    energy = sum(v * v for v in x)
    return {
        "Energy": energy,
        "TotalEnergy": float(np.prod(spacing)) * energy,
        "Entropy": -sum(p * math.log2(p + EPS) for p in probs),
        "Minimum": x[0],
        "10Percentile": p10,
        "90Percentile": p90,
        "Maximum": x[-1],
        "Mean": mean,
        "Median": p50,
        "InterquartileRange": p75 - p25,
        "Range": x[-1] - x[0],
        "MeanAbsoluteDeviation": sum(abs(v - mean) for v in x) / n,
        "RobustMeanAbsoluteDeviation": rmad,
        "RootMeanSquared": math.sqrt(sum(v * v for v in x) / n),
        "Skewness": m3 / m2 ** 1.5 if m2 > 0 else 0.0,
        "Kurtosis": m4 / m2 ** 2 if m2 > 0 else 0.0,
        "Variance": m2,
        "Uniformity": sum(p * p for p in probs),
    }


# ---------------------------------------------------------------------------
# shape
# ---------------------------------------------------------------------------

def oracle_shape(mask, spacing):
    spacing = tuple(float(s) for s in spacing)
    voxels = list(zip(*np.nonzero(mask)))
    n = len(voxels)
    voxvol = spacing[0] * spacing[1] * spacing[2]

    nz = np.nonzero(mask)
    sub = mask[tuple(slice(int(a.min()), int(a.max()) + 1) for a in nz)]

    if n == 1:
        sx, sy, sz = spacing
        area = 2.0 * (sx * sy + sy * sz + sx * sz)
        mesh_vol = voxvol
    else:
        padded = np.pad(sub, MESH_PAD).astype(np.float64)
        field = ndimage.gaussian_filter(padded, sigma=MESH_SIGMA_VOX)
        if field.max() <= 0.5:
            field = padded
        verts, faces, _, _ = measure.marching_cubes(field, level=0.5, method="lorensen")
        verts = verts.astype(np.float64) * np.asarray(spacing)
        area = 0.0
        vol6 = 0.0
        for f in faces:
            a, b, c = verts[f[0]], verts[f[1]], verts[f[2]]
            ab = b - a
            ac = c - a
            cross = (ab[1] * ac[2] - ab[2] * ac[1],
                     ab[2] * ac[0] - ab[0] * ac[2],
                     ab[0] * ac[1] - ab[1] * ac[0])
            area += 0.5 * math.sqrt(cross[0] ** 2 + cross[1] ** 2 + cross[2] ** 2)
            bxc = (b[1] * c[2] - b[2] * c[1],
                   b[2] * c[0] - b[0] * c[2],
                   b[0] * c[1] - b[1] * c[0])
            vol6 += a[0] * bxc[0] + a[1] * bxc[1] + a[2] * bxc[2]
        mesh_vol = abs(vol6) / 6.0

    coords = [(vx * spacing[0], vy * spacing[1], vz * spacing[2]) for vx, vy, vz in voxels]
    if n >= 2:
        mx = sum(c[0] for c in coords) / n
        my = sum(c[1] for c in coords) / n
        mz = sum(c[2] for c in coords) / n
        cov = np.zeros((3, 3))
        for c in coords:
            d = np.array([c[0] - mx, c[1] - my, c[2] - mz])
            cov += np.outer(d, d)
        cov /= n - 1
        eig = sorted(np.linalg.eigvalsh(cov).tolist(), reverse=True)
        eig = [max(e, 0.0) for e in eig]
    else:
        eig = [0.0, 0.0, 0.0]

    max3d = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d = math.dist(coords[i], coords[j])
            max3d = max(max3d, d)

    max2d = 0.0
    for z in {v[2] for v in voxels}:
        pts = [c for v, c in zip(voxels, coords) if v[2] == z]
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                d = math.dist(pts[i][:2], pts[j][:2])
                max2d = max(max2d, d)

    return {
        "VoxelVolume": n * voxvol,
        "SurfaceArea": area,
        "SurfaceVolumeRatio": area / mesh_vol,
        "Sphericity": (36 * math.pi * mesh_vol ** 2) ** (1 / 3) / area,
        "Compactness1": mesh_vol / (math.sqrt(math.pi) * area ** 1.5),
        "Compactness2": 36 * math.pi * mesh_vol ** 2 / area ** 3,
        "SphericalDisproportion": area / (36 * math.pi * mesh_vol ** 2) ** (1 / 3),
        "Maximum3DDiameter": max3d,
        "MajorAxisLength": 4 * math.sqrt(eig[0]),
        "MinorAxisLength": 4 * math.sqrt(eig[1]),
        "LeastAxisLength": 4 * math.sqrt(eig[2]),
        "Elongation": math.sqrt(eig[1] / eig[0]) if eig[0] > 0 else 1.0,
        "Flatness": math.sqrt(eig[2] / eig[0]) if eig[0] > 0 else 1.0,
        "Maximum2DDiameterSlice": max2d,
    }


# ---------------------------------------------------------------------------
# GLCM
# ---------------------------------------------------------------------------

def oracle_glcm_matrix(levels, direction):
    """Symmetric raw co-occurrence counts for one direction, as a dict."""
    counts = {}
    shape = levels.shape
    for p in zip(*np.nonzero(levels > 0)):
        q = (p[0] + direction[0], p[1] + direction[1], p[2] + direction[2])
        if all(0 <= q[a] < shape[a] for a in range(3)) and levels[q] > 0:
            i, j = int(levels[p]), int(levels[q])
            counts[(i, j)] = counts.get((i, j), 0) + 1
            counts[(j, i)] = counts.get((j, i), 0) + 1
    return counts


def _glcm_single(counts, n_levels):
    total = sum(counts.values())
    p = {k: v / total for k, v in counts.items()}
    ng = n_levels

    def psum(pred):
        return sum(v for (i, j), v in p.items() if pred(i, j))

    px = {i: psum(lambda a, b, i=i: a == i) for i in range(1, ng + 1)}
    py = {j: psum(lambda a, b, j=j: b == j) for j in range(1, ng + 1)}
    ux = sum(i * v for (i, j), v in p.items())
    uy = sum(j * v for (i, j), v in p.items())
    sigx = math.sqrt(sum(v * (i - ux) ** 2 for (i, j), v in p.items()))
    sigy = math.sqrt(sum(v * (j - uy) ** 2 for (i, j), v in p.items()))
    pxy_sum = {k: psum(lambda a, b, k=k: a + b == k) for k in range(2, 2 * ng + 1)}
    pxy_diff = {k: psum(lambda a, b, k=k: abs(a - b) == k) for k in range(ng)}

    hx = -sum(v * math.log2(v + EPS) for v in px.values())
    hy = -sum(v * math.log2(v + EPS) for v in py.values())
    hxy = -sum(v * math.log2(v + EPS) for v in p.values())
    hxy1 = -sum(v * math.log2(px[i] * py[j] + EPS) for (i, j), v in p.items())
    hxy2 = -sum(px[i] * py[j] * math.log2(px[i] * py[j] + EPS)
                for i in px for j in py)

    da = sum(k * v for k, v in pxy_diff.items())
    corm = sum(v * (i - ux) * (j - uy) for (i, j), v in p.items())
    correlation = 1.0 if sigx * sigy == 0 else corm / (sigx * sigy)
    div = max(hx, hy)
    imc1 = 0.0 if div == 0 else (hxy - hxy1) / div
    imc2 = math.sqrt(max(0.0, 1.0 - math.exp(-2.0 * (hxy2 - hxy))))

    occ = [i for i in range(1, ng + 1) if px[i] > 0]
    if len(occ) < 2:
        mcc = 1.0
    else:
        q = np.zeros((len(occ), len(occ)))
        for a, i in enumerate(occ):
            for b, j in enumerate(occ):
                q[a, b] = sum(p.get((i, k), 0.0) * p.get((j, k), 0.0) / (px[i] * py[k])
                              for k in occ)
        eig = sorted(np.real(np.linalg.eigvals(q)).tolist(), reverse=True)
        mcc = math.sqrt(max(0.0, eig[1]))

    return {
        "Autocorrelation": sum(v * i * j for (i, j), v in p.items()),
        "ClusterProminence": sum(v * (i + j - ux - uy) ** 4 for (i, j), v in p.items()),
        "ClusterShade": sum(v * (i + j - ux - uy) ** 3 for (i, j), v in p.items()),
        "ClusterTendency": sum(v * (i + j - ux - uy) ** 2 for (i, j), v in p.items()),
        "Contrast": sum(v * (i - j) ** 2 for (i, j), v in p.items()),
        "Correlation": correlation,
        "DifferenceAverage": da,
        "DifferenceEntropy": -sum(v * math.log2(v + EPS) for v in pxy_diff.values()),
        "DifferenceVariance": sum(v * (k - da) ** 2 for k, v in pxy_diff.items()),
        "Id": sum(v / (1 + abs(i - j)) for (i, j), v in p.items()),
        "Idm": sum(v / (1 + (i - j) ** 2) for (i, j), v in p.items()),
        "Idmn": sum(v / (1 + (i - j) ** 2 / ng ** 2) for (i, j), v in p.items()),
        "Idn": sum(v / (1 + abs(i - j) / ng) for (i, j), v in p.items()),
        "Imc1": imc1,
        "Imc2": imc2,
        "InverseVariance": sum(v / (i - j) ** 2 for (i, j), v in p.items() if i != j),
        "JointAverage": ux,
        "JointEnergy": sum(v * v for v in p.values()),
        "JointEntropy": hxy,
        "MCC": mcc,
        "MaximumProbability": max(p.values()),
        "SumAverage": sum(k * v for k, v in pxy_sum.items()),
        "SumEntropy": -sum(v * math.log2(v + EPS) for v in pxy_sum.values()),
        "SumSquares": sum(v * (i - ux) ** 2 for (i, j), v in p.items()),
    }


def oracle_glcm(levels, n_levels):
    singles = []
    for d in DIRECTIONS_13:
        counts = oracle_glcm_matrix(levels, d)
        if counts:
            singles.append(_glcm_single(counts, n_levels))
    if not singles:
        return {k: float("nan") for k in _glcm_single({(1, 1): 1}, 1)}
    return {k: sum(s[k] for s in singles) / len(singles) for k in singles[0]}


# ---------------------------------------------------------------------------
# GLRLM
# ---------------------------------------------------------------------------

def oracle_runs(levels, direction):
    shape = levels.shape
    runs = []
    for p in zip(*np.nonzero(levels > 0)):
        prev = (p[0] - direction[0], p[1] - direction[1], p[2] - direction[2])
        if (all(0 <= prev[a] < shape[a] for a in range(3))
                and levels[prev] == levels[p]):
            continue  # not a run start
        length = 1
        cur = p
        while True:
            nxt = (cur[0] + direction[0], cur[1] + direction[1], cur[2] + direction[2])
            if all(0 <= nxt[a] < shape[a] for a in range(3)) and levels[nxt] == levels[p]:
                length += 1
                cur = nxt
            else:
                break
        runs.append((int(levels[p]), length))
    return runs


def _sl_matrix_features(entries, n_levels, n_voxels, names):
    """Shared level x length/size/dependence feature formulas."""
    n = len(entries)
    s = {}
    for i, l in entries:
        s[(i, l)] = s.get((i, l), 0) + 1
    pg = {}
    pl = {}
    for (i, l), c in s.items():
        pg[i] = pg.get(i, 0) + c
        pl[l] = pl.get(l, 0) + c
    mu_i = sum(i * c for i, c in pg.items()) / n
    mu_l = sum(l * c for l, c in pl.items()) / n
    vals = {
        "short": sum(c / l ** 2 for l, c in pl.items()) / n,
        "long": sum(c * l ** 2 for l, c in pl.items()) / n,
        "gln": sum(c ** 2 for c in pg.values()) / n,
        "glnn": sum(c ** 2 for c in pg.values()) / n ** 2,
        "lnu": sum(c ** 2 for c in pl.values()) / n,
        "lnun": sum(c ** 2 for c in pl.values()) / n ** 2,
        "pct": n / n_voxels,
        "glv": sum(c / n * (i - mu_i) ** 2 for i, c in pg.items()),
        "lv": sum(c / n * (l - mu_l) ** 2 for l, c in pl.items()),
        "ent": -sum((c / n) * math.log2(c / n + EPS) for c in s.values()),
        "lgl": sum(c / i ** 2 for i, c in pg.items()) / n,
        "hgl": sum(c * i ** 2 for i, c in pg.items()) / n,
        "slgl": sum(c / (i ** 2 * l ** 2) for (i, l), c in s.items()) / n,
        "shgl": sum(c * i ** 2 / l ** 2 for (i, l), c in s.items()) / n,
        "llgl": sum(c * l ** 2 / i ** 2 for (i, l), c in s.items()) / n,
        "lhgl": sum(c * i ** 2 * l ** 2 for (i, l), c in s.items()) / n,
    }
    return {name: vals[key] for name, key in names.items()}


def oracle_glrlm(levels, n_levels, n_voxels):
    names = {
        "ShortRunEmphasis": "short", "LongRunEmphasis": "long",
        "GrayLevelNonUniformity": "gln", "GrayLevelNonUniformityNormalized": "glnn",
        "RunLengthNonUniformity": "lnu", "RunLengthNonUniformityNormalized": "lnun",
        "RunPercentage": "pct", "GrayLevelVariance": "glv", "RunVariance": "lv",
        "RunEntropy": "ent", "LowGrayLevelRunEmphasis": "lgl",
        "HighGrayLevelRunEmphasis": "hgl",
        "ShortRunLowGrayLevelEmphasis": "slgl", "ShortRunHighGrayLevelEmphasis": "shgl",
        "LongRunLowGrayLevelEmphasis": "llgl", "LongRunHighGrayLevelEmphasis": "lhgl",
    }
    acc = None
    for d in DIRECTIONS_13:
        runs = oracle_runs(levels, d)
        single = _sl_matrix_features(runs, n_levels, n_voxels, names)
        if acc is None:
            acc = {k: 0.0 for k in single}
        for k, v in single.items():
            acc[k] += v
    return {k: v / len(DIRECTIONS_13) for k, v in acc.items()}


# ---------------------------------------------------------------------------
# GLSZM (BFS flood fill)
# ---------------------------------------------------------------------------

def oracle_zones(levels):
    shape = levels.shape
    seen = np.zeros(shape, dtype=bool)
    zones = []
    for start in zip(*np.nonzero(levels > 0)):
        if seen[start]:
            continue
        lv = levels[start]
        stack = [start]
        seen[start] = True
        size = 0
        while stack:
            cur = stack.pop()
            size += 1
            for d in OFFSETS_26:
                q = (cur[0] + d[0], cur[1] + d[1], cur[2] + d[2])
                if (all(0 <= q[a] < shape[a] for a in range(3))
                        and not seen[q] and levels[q] == lv):
                    seen[q] = True
                    stack.append(q)
        zones.append((int(lv), size))
    return zones


def oracle_glszm(levels, n_levels, n_voxels):
    names = {
        "SmallAreaEmphasis": "short", "LargeAreaEmphasis": "long",
        "GrayLevelNonUniformity": "gln", "GrayLevelNonUniformityNormalized": "glnn",
        "SizeZoneNonUniformity": "lnu", "SizeZoneNonUniformityNormalized": "lnun",
        "ZonePercentage": "pct", "GrayLevelVariance": "glv", "ZoneVariance": "lv",
        "ZoneEntropy": "ent", "LowGrayLevelZoneEmphasis": "lgl",
        "HighGrayLevelZoneEmphasis": "hgl",
        "SmallAreaLowGrayLevelEmphasis": "slgl", "SmallAreaHighGrayLevelEmphasis": "shgl",
        "LargeAreaLowGrayLevelEmphasis": "llgl", "LargeAreaHighGrayLevelEmphasis": "lhgl",
    }
    return _sl_matrix_features(oracle_zones(levels), n_levels, n_voxels, names)


# ---------------------------------------------------------------------------
# GLDM
# ---------------------------------------------------------------------------

def oracle_dependences(levels):
    shape = levels.shape
    entries = []
    for p in zip(*np.nonzero(levels > 0)):
        dep = 0
        for d in OFFSETS_26:
            q = (p[0] + d[0], p[1] + d[1], p[2] + d[2])
            if all(0 <= q[a] < shape[a] for a in range(3)) and levels[q] == levels[p]:
                dep += 1
        entries.append((int(levels[p]), dep + 1))
    return entries


def oracle_gldm(levels, n_levels, n_voxels):
    names = {
        "SmallDependenceEmphasis": "short", "LargeDependenceEmphasis": "long",
        "GrayLevelNonUniformity": "gln",
        "DependenceNonUniformity": "lnu", "DependenceNonUniformityNormalized": "lnun",
        "GrayLevelVariance": "glv", "DependenceVariance": "lv",
        "DependenceEntropy": "ent",
        "LowGrayLevelEmphasis": "lgl", "HighGrayLevelEmphasis": "hgl",
        "SmallDependenceLowGrayLevelEmphasis": "slgl",
        "SmallDependenceHighGrayLevelEmphasis": "shgl",
        "LargeDependenceLowGrayLevelEmphasis": "llgl",
        "LargeDependenceHighGrayLevelEmphasis": "lhgl",
    }
    return _sl_matrix_features(oracle_dependences(levels), n_levels, n_voxels, names)


def oracle_all(intens, mask, spacing, bin_width):
    """All 102 features keyed 'family.Feature', brute force throughout."""
    levels, n_levels = oracle_levels(intens, mask, bin_width)
    n_voxels = int(mask.sum())
    out = {}
    for k, v in oracle_shape(mask, spacing).items():
        out[f"shape.{k}"] = v
    for k, v in oracle_firstorder(intens, mask, spacing, bin_width).items():
        out[f"firstorder.{k}"] = v
    for k, v in oracle_glcm(levels, n_levels).items():
        out[f"glcm.{k}"] = v
    for k, v in oracle_glrlm(levels, n_levels, n_voxels).items():
        out[f"glrlm.{k}"] = v
    for k, v in oracle_glszm(levels, n_levels, n_voxels).items():
        out[f"glszm.{k}"] = v
    for k, v in oracle_gldm(levels, n_levels, n_voxels).items():
        out[f"gldm.{k}"] = v
    return out
