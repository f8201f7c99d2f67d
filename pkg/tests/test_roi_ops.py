import numpy as np
import pytest

from radrobust import roi_ops
from radrobust.roi_ops import PerturbConfig, Voi, dice

from conftest import ball_mask, ball_voi, lesion_set_from_masks


def box_mask(dims, lo, hi):
    m = np.zeros(dims, dtype=bool)
    m[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]] = True
    return m


class TestSelectLargest:
    def test_larger_wins(self):
        dims = (10, 10, 4)
        a = box_mask(dims, (0, 0, 0), (5, 2, 1))   # 10 voxels
        b = box_mask(dims, (0, 5, 0), (5, 7, 2))   # 20 voxels
        ls = lesion_set_from_masks([(a, "omentum", "a"), (b, "pelvis", "b")], dims)
        voi = roi_ops.select_largest(ls, "all")
        assert np.array_equal(voi.mask, b)
        assert voi.provenance == "largest"

    def test_tie_breaks_to_smallest_id(self):
        dims = (8, 8, 2)
        a = box_mask(dims, (0, 0, 0), (2, 2, 1))
        b = box_mask(dims, (4, 4, 0), (6, 6, 1))
        ls = lesion_set_from_masks([(b, "other", "b"), (a, "other", "a")], dims)
        voi = roi_ops.select_largest(ls, "all")
        assert np.array_equal(voi.mask, a)

    def test_empty_scope_errors(self):
        dims = (4, 4, 2)
        a = box_mask(dims, (0, 0, 0), (2, 2, 1))
        ls = lesion_set_from_masks([(a, "omentum", "a")], dims)
        with pytest.raises(roi_ops.NoLesionError):
            roi_ops.select_largest(ls, "pelvis")

    def test_matches_brute_force_on_random_sets(self):
        rng = np.random.default_rng(42)
        dims = (12, 12, 6)
        spacing = (0.7, 0.7, 2.5)
        for _ in range(10):
            masks = []
            for k in range(5):
                lo = [int(rng.integers(0, d - 2)) for d in dims]
                hi = [int(rng.integers(l + 1, d)) + 0 for l, d in zip(lo, dims)]
                masks.append((box_mask(dims, lo, hi), "other", f"l{k}"))
            ls = lesion_set_from_masks(masks, dims, spacing)
            voi = roi_ops.select_largest(ls, "all")
            voxvol = spacing[0] * spacing[1] * spacing[2]
            best = None
            for m, _, lid in masks:
                vol = m.sum() * voxvol
                if best is None or vol > best[0] or (vol == best[0] and lid < best[1]):
                    best = (vol, lid, m)
            assert np.array_equal(voi.mask, best[2])

    def test_order_invariance(self):
        dims = (8, 8, 2)
        a = box_mask(dims, (0, 0, 0), (3, 3, 1))
        b = box_mask(dims, (4, 4, 0), (7, 7, 2))
        fwd = roi_ops.select_largest(
            lesion_set_from_masks([(a, "other", "a"), (b, "other", "b")], dims))
        rev = roi_ops.select_largest(
            lesion_set_from_masks([(b, "other", "b"), (a, "other", "a")], dims))
        assert np.array_equal(fwd.mask, rev.mask)


class TestMergeLesions:
    def test_disjoint_union(self):
        dims = (8, 8, 2)
        a = box_mask(dims, (0, 0, 0), (2, 2, 2))   # 8 voxels
        b = box_mask(dims, (4, 4, 0), (6, 6, 2))   # 8 voxels
        ls = lesion_set_from_masks([(a, "omentum", "a"), (b, "pelvis", "b")], dims)
        voi = roi_ops.merge_lesions(ls, "all")
        assert voi.voxel_count == 16
        assert voi.provenance == "merged"

    def test_overlap_set_identity(self):
        dims = (8, 8, 2)
        a = box_mask(dims, (0, 0, 0), (4, 4, 1))
        b = box_mask(dims, (2, 2, 0), (6, 6, 1))
        with pytest.warns(UserWarning):
            ls = lesion_set_from_masks([(a, "other", "a"), (b, "other", "b")], dims)
        voi = roi_ops.merge_lesions(ls, "all")
        assert voi.voxel_count == a.sum() + b.sum() - np.logical_and(a, b).sum()

    def test_union_matches_voxelwise_or(self):
        rng = np.random.default_rng(7)
        dims = (10, 10, 4)
        for _ in range(5):
            masks = []
            expected = np.zeros(dims, dtype=bool)
            for k in range(4):
                m = rng.random(size=dims) < 0.2
                m[0, 0, 0] = True  # nonempty
                masks.append((m, "other", f"l{k}"))
                expected |= m
            import warnings
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                ls = lesion_set_from_masks(masks, dims)
            voi = roi_ops.merge_lesions(ls, "all")
            assert np.array_equal(voi.mask, expected)

    def test_scope_filter(self):
        dims = (8, 8, 2)
        a = box_mask(dims, (0, 0, 0), (2, 2, 1))
        b = box_mask(dims, (4, 4, 0), (6, 6, 1))
        ls = lesion_set_from_masks([(a, "omentum", "a"), (b, "pelvis", "b")], dims)
        voi = roi_ops.merge_lesions(ls, "omentum")
        assert np.array_equal(voi.mask, a)


class TestMakeRim:
    def test_ball_shell_within_one_voxel(self):
        # 6 mm band on a 10 mm ball: shell 7..13 mm up to discretization
        mask, dist, dims = ball_mask(10.0, margin_mm=6.0)
        voi = Voi(dims, (1.0, 1.0, 1.0), (0.0, 0.0, 0.0), mask)
        rim = roi_ops.make_rim(voi, total_width_mm=6.0)
        # every rim voxel inside the widened shell
        assert dist[rim.mask].min() >= 7.0 - 1.0 - 1e-9
        assert dist[rim.mask].max() <= 13.0 + 1.0 + 1e-9
        # every voxel of the narrowed shell is in the rim
        core_shell = (dist >= 8.0) & (dist <= 12.0)
        assert np.all(rim.mask[core_shell])

    def test_interior_excluded(self):
        mask, _, dims = ball_mask(10.0)
        voi = Voi(dims, (1.0, 1.0, 1.0), (0.0, 0.0, 0.0), mask)
        rim = roi_ops.make_rim(voi, total_width_mm=6.0)
        sdf = roi_ops.signed_distance_mm(voi.mask, voi.spacing)
        assert not np.any(rim.mask & (sdf < -3.0))
        assert not np.any(rim.mask & (sdf > 3.0))

    def test_rim_of_rim_contains_first_rim_surface(self):
        mask, _, dims = ball_mask(8.0, margin_mm=8.0)
        voi = Voi(dims, (1.0, 1.0, 1.0), (0.0, 0.0, 0.0), mask)
        rim1 = roi_ops.make_rim(voi, total_width_mm=6.0)
        rim2 = roi_ops.make_rim(rim1, total_width_mm=6.0)
        from scipy import ndimage
        surface = rim1.mask & ~ndimage.binary_erosion(rim1.mask)
        assert np.all(rim2.mask[surface])

    def test_covers_all_surface_voxels(self):
        mask, _, dims = ball_mask(6.0)
        voi = Voi(dims, (1.0, 1.0, 1.0), (0.0, 0.0, 0.0), mask)
        rim = roi_ops.make_rim(voi, total_width_mm=6.0)
        from scipy import ndimage
        surface = mask & ~ndimage.binary_erosion(mask)
        assert np.all(rim.mask[surface])


class TestPerturb:
    def test_zero_amplitude_identity(self):
        voi = ball_voi(6.0)
        cfg = PerturbConfig(max_displacement_mm=0.0, correlation_length_mm=10.0, seed=5)
        out = roi_ops.perturb(voi, cfg, 0)
        assert np.array_equal(out.mask, voi.mask)

    def test_seed_determinism(self):
        voi = ball_voi(8.0)
        cfg = PerturbConfig(seed=123)
        a = roi_ops.perturb(voi, cfg, 3)
        b = roi_ops.perturb(voi, cfg, 3)
        assert np.array_equal(a.mask, b.mask)
        c = roi_ops.perturb(voi, cfg, 4)
        assert not np.array_equal(a.mask, c.mask)

    def test_replicate_index_range(self):
        voi = ball_voi(6.0)
        cfg = PerturbConfig(n_replicates=2, seed=1)
        with pytest.raises(roi_ops.RoiError):
            roi_ops.perturb(voi, cfg, 2)

    def test_dice_window_on_ball(self):
        voi = ball_voi(15.0, margin_mm=6.0)
        cfg = PerturbConfig(n_replicates=25, seed=77)
        dices = []
        for r in range(25):
            out = roi_ops.perturb(voi, cfg, r)
            dices.append(dice(voi.mask, out.mask))
        dices = np.array(dices)
        assert np.all(dices >= cfg.dice_floor)
        assert np.all(dices < 1.0) or np.any(dices < 0.995)
        assert dices.min() >= 0.85 and dices.max() <= 0.995

    def test_mean_boundary_displacement_below_max(self):
        voi = ball_voi(15.0, margin_mm=6.0)
        cfg = PerturbConfig(n_replicates=10, seed=31)
        sdf = roi_ops.signed_distance_mm(voi.mask, voi.spacing)
        shifts = []
        for r in range(10):
            out = roi_ops.perturb(voi, cfg, r)
            changed = voi.mask ^ out.mask
            if changed.any():
                shifts.append(np.abs(sdf[changed]).mean())
        assert np.mean(shifts) <= cfg.max_displacement_mm

    def test_volume_stability_on_spheres(self):
        for radius in (10.0, 15.0):
            voi = ball_voi(radius, margin_mm=6.0)
            cfg = PerturbConfig(n_replicates=10, seed=9)
            bound = 3.0 * cfg.max_displacement_mm * (3.0 / radius)  # 3*d*SA/V for a ball
            for r in range(10):
                out = roi_ops.perturb(voi, cfg, r)
                rel = abs(out.volume_mm3 - voi.volume_mm3) / voi.volume_mm3
                assert rel <= bound

    def test_retries_exhausted_raises(self, monkeypatch):
        # force every attempt to overshoot the Dice floor
        monkeypatch.setattr(roi_ops, "_smooth_field",
                            lambda shape, spacing, pitch, rng: np.full(shape, 40.0))
        voi = ball_voi(5.0)
        cfg = PerturbConfig(max_displacement_mm=4.0, correlation_length_mm=10.0,
                            seed=2, dice_floor=0.95)
        with pytest.raises(roi_ops.PerturbationError, match="5 retries"):
            roi_ops.perturb(voi, cfg, 0)

    def test_output_valid_mask_same_grid(self):
        voi = ball_voi(8.0)
        cfg = PerturbConfig(seed=11)
        out = roi_ops.perturb(voi, cfg, 1)
        assert out.dims == voi.dims
        assert out.mask.any()
        assert out.provenance.startswith("perturbed")
