import numpy as np
import pytest

from xmrc.errors import RateBelowCenterBlock, ShapeMismatch, UnreachableRate
from xmrc.sampling import (
    MaskParams,
    apply_mask,
    cartesian_mask,
    full_mask,
    generate_mask,
    pseudo_radial_mask,
    radial_line_count,
)
from xmrc.types import KSpaceGrid, MultiCoilKSpace, SamplingMask

from conftest import random_complex


def test_params_validation():
    with pytest.raises(ValueError):
        MaskParams("pseudo-radial", 0.0)
    with pytest.raises(ValueError):
        MaskParams("pseudo-radial", 1.2)
    with pytest.raises(ValueError):
        MaskParams("cartesian-lines", 0.1, center_fraction=0.2)
    with pytest.raises(ValueError):
        MaskParams("spiral", 0.5)


# ---------------------------------------------------------------------------
# pseudo-radial
# ---------------------------------------------------------------------------

def test_radial_full_rate_is_all_ones():
    mask = pseudo_radial_mask(32, 32, MaskParams("pseudo-radial", 1.0))
    assert mask.rate == 1.0


def test_radial_rate_band_256():
    mask = pseudo_radial_mask(256, 256, MaskParams("pseudo-radial", 0.30))
    assert 0.30 <= mask.rate <= 0.32


def test_radial_deterministic():
    params = MaskParams("pseudo-radial", 0.30)
    a = pseudo_radial_mask(256, 256, params)
    b = pseudo_radial_mask(256, 256, params)
    assert np.array_equal(a.cells, b.cells)


def test_radial_center_always_sampled():
    for shape in [(64, 64), (63, 49), (32, 48)]:
        mask = pseudo_radial_mask(*shape, MaskParams("pseudo-radial", 0.2))
        assert mask.cells[shape[0] // 2, shape[1] // 2] == 1


def test_radial_point_symmetry_interior():
    ny = nx = 65  # odd dims: every offset has its mirror on the grid
    mask = pseudo_radial_mask(ny, nx, MaskParams("pseudo-radial", 0.25))
    assert np.array_equal(mask.cells, np.rot90(mask.cells, 2))


def test_radial_digitization_bound():
    ny = nx = 64
    params = MaskParams("pseudo-radial", 0.25)
    mask = pseudo_radial_mask(ny, nx, params)
    count = radial_line_count(ny, nx, params)
    thetas = np.array([i * np.pi / count for i in range(count)])
    ys, xs = np.nonzero(mask.cells)
    dy = ys - ny // 2
    dx = xs - nx // 2
    # perpendicular distance to each ideal line; the nearest must be <= 1/2
    dist = np.abs(np.sin(thetas)[None, :] * dx[:, None] - np.cos(thetas)[None, :] * dy[:, None])
    assert np.max(dist.min(axis=1)) <= 0.5 + 1e-9


def test_radial_unreachable_band():
    with pytest.raises(UnreachableRate):
        pseudo_radial_mask(4, 4, MaskParams("pseudo-radial", 0.5))


# ---------------------------------------------------------------------------
# cartesian
# ---------------------------------------------------------------------------

def test_cartesian_row_counts_256():
    params = MaskParams("cartesian-lines", 0.25, center_fraction=0.08, seed=7)
    mask = cartesian_mask(256, 256, params)
    full_rows = mask.cells.all(axis=1)
    partial = mask.cells.any(axis=1) & ~full_rows
    assert not partial.any()  # rows are all-or-nothing
    assert full_rows.sum() == 64
    center_block = full_rows[118:139]  # ceil(0.08 * 256) = 21 rows around row 128
    assert center_block.all() and center_block.size == 21


def test_cartesian_center_fraction_equals_rate_is_deterministic():
    masks = [
        cartesian_mask(64, 64, MaskParams("cartesian-lines", 0.25, center_fraction=0.25, seed=s))
        for s in (1, 999)
    ]
    assert np.array_equal(masks[0].cells, masks[1].cells)
    assert masks[0].rate == 0.25


def test_cartesian_seeds_same_rate_different_rows():
    rates = set()
    row_sets = set()
    for seed in range(20):
        params = MaskParams("cartesian-lines", 0.25, center_fraction=0.08, seed=seed)
        mask = cartesian_mask(256, 256, params)
        rates.add(mask.rate)
        row_sets.add(tuple(np.flatnonzero(mask.cells.all(axis=1))))
    assert rates == {0.25}
    assert len(row_sets) >= 15  # overwhelmingly distinct draws


def test_cartesian_deterministic_per_seed():
    params = MaskParams("cartesian-lines", 0.3, center_fraction=0.05, seed=42)
    a = cartesian_mask(128, 96, params)
    b = cartesian_mask(128, 96, params)
    assert np.array_equal(a.cells, b.cells)


def test_cartesian_rate_within_band():
    for ny in (64, 100, 256):
        params = MaskParams("cartesian-lines", 0.25, center_fraction=0.08, seed=3)
        mask = cartesian_mask(ny, 32, params)
        assert 0.25 - 1.0 / ny <= mask.rate <= 0.25 + 1.0 / ny


def test_cartesian_center_block_guard():
    # the invariant target_rate >= center_fraction normally pre-blocks this,
    # so corrupt a params object to exercise the generator's own check
    params = MaskParams("cartesian-lines", 0.5, center_fraction=0.4, seed=0)
    object.__setattr__(params, "target_rate", 0.05)
    with pytest.raises(RateBelowCenterBlock):
        cartesian_mask(64, 64, params)


# ---------------------------------------------------------------------------
# apply_mask
# ---------------------------------------------------------------------------

def test_apply_full_mask_is_identity(rng):
    y = KSpaceGrid(random_complex(rng, 16, 16))
    out = apply_mask(y, full_mask(16, 16))
    assert np.array_equal(out.data, y.data)


def test_apply_mask_zero_count(rng):
    data = random_complex(rng, 64, 64)
    data[data == 0] = 1.0  # zero-free
    y = KSpaceGrid(data)
    mask = pseudo_radial_mask(64, 64, MaskParams("pseudo-radial", 0.30))
    out = apply_mask(y, mask)
    assert np.count_nonzero(out.data) == int(mask.cells.sum())


def test_apply_mask_idempotent(rng):
    y = KSpaceGrid(random_complex(rng, 32, 32))
    mask = pseudo_radial_mask(32, 32, MaskParams("pseudo-radial", 0.4))
    once = apply_mask(y, mask)
    twice = apply_mask(once, mask)
    assert np.array_equal(once.data, twice.data)


def test_apply_mask_multicoil_broadcast(rng):
    stack = MultiCoilKSpace(np.stack([random_complex(rng, 8, 8) for _ in range(3)]))
    mask = SamplingMask(np.eye(8, dtype=np.uint8))
    out = apply_mask(stack, mask)
    for j in range(3):
        assert np.array_equal(out.data[j], stack.data[j] * mask.cells)


def test_apply_mask_shape_mismatch(rng):
    y = KSpaceGrid(random_complex(rng, 8, 8))
    with pytest.raises(ShapeMismatch):
        apply_mask(y, full_mask(8, 10))


def test_generate_mask_dispatch():
    assert generate_mask(32, 32, MaskParams("full", 1.0)).rate == 1.0
    assert generate_mask(64, 64, MaskParams("pseudo-radial", 0.3)).rate >= 0.3
    m = generate_mask(64, 64, MaskParams("cartesian-lines", 0.5, center_fraction=0.1))
    assert abs(m.rate - 0.5) <= 1 / 64
