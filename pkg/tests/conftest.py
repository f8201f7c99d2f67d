import numpy as np

from radrobust.cohort_io import Lesion, LesionSet
from radrobust.roi_ops import Voi


def ball_mask(radius_mm, spacing=(1.0, 1.0, 1.0), margin_mm=4.0):
    """Digital ball: voxel centers within radius_mm of the grid center."""
    spacing = np.asarray(spacing, dtype=float)
    half = int(np.ceil((radius_mm + margin_mm) / spacing.min()))
    dims = tuple(int(2 * np.ceil((radius_mm + margin_mm) / s)) + 1 for s in spacing)
    centers = [(np.arange(d) - (d - 1) / 2.0) * s for d, s in zip(dims, spacing)]
    xx, yy, zz = np.meshgrid(*centers, indexing="ij")
    dist = np.sqrt(xx**2 + yy**2 + zz**2)
    return dist <= radius_mm, dist, dims


def ball_voi(radius_mm, spacing=(1.0, 1.0, 1.0), margin_mm=4.0):
    mask, _, dims = ball_mask(radius_mm, spacing, margin_mm)
    return Voi(dims, tuple(float(s) for s in spacing), (0.0, 0.0, 0.0), mask)


def lesion_set_from_masks(masks_sites_ids, dims, spacing=(1.0, 1.0, 1.0)):
    lesions = tuple(Lesion(lesion_id=i, site=s, mask=m) for m, s, i in masks_sites_ids)
    return LesionSet(dims=dims, spacing=tuple(float(s) for s in spacing),
                     origin=(0.0, 0.0, 0.0), lesions=lesions)


def random_blob(rng, dims, n_seeds=3, grow=6):
    """Connected-ish random mask grown from seed voxels by dilation steps."""
    from scipy import ndimage
    mask = np.zeros(dims, dtype=bool)
    for _ in range(n_seeds):
        pos = tuple(rng.integers(2, d - 2) for d in dims)
        mask[pos] = True
    for _ in range(grow):
        mask = ndimage.binary_dilation(mask) & ~boundary_shell(dims)
        keep = rng.random(size=dims) < 0.8
        core = ndimage.binary_erosion(mask)
        mask = core | (mask & keep)
        if not mask.any():
            mask[tuple(d // 2 for d in dims)] = True
    return mask


def boundary_shell(dims):
    shell = np.ones(dims, dtype=bool)
    shell[1:-1, 1:-1, 1:-1] = False
    return shell
