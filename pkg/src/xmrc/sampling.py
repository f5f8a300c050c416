"""Deterministic, seeded undersampling-mask generators.

Two patterns: a pseudo-radial union of digitized straight lines through
the grid center, and a variable-density Cartesian row pattern with a fully
sampled center block. Both are pure functions of (ny, nx, params): the only
randomness comes from the SplitMix64 stream seeded by params.seed, so masks
are bit-identical across runs and platforms.
"""

from dataclasses import dataclass

import numpy as np

from .errors import RateBelowCenterBlock, ShapeMismatch, UnreachableRate
from .rng import SplitMix64
from .types import KSpaceGrid, MultiCoilKSpace, SamplingMask

MASK_KINDS = ("pseudo-radial", "cartesian-lines", "full")

RADIAL_RATE_SLACK = 0.02  # acceptable overshoot above target_rate

# density falloff exponent for cartesian row selection
_DENSITY_POWER = 4


@dataclass(frozen=True)
class MaskParams:
    kind: str
    target_rate: float
    center_fraction: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in MASK_KINDS:
            raise ValueError(f"unknown mask kind {self.kind!r}; expected one of {MASK_KINDS}")
        if not 0.0 < self.target_rate <= 1.0:
            raise ValueError(f"target_rate must be in (0, 1], got {self.target_rate}")
        if not 0.0 <= self.center_fraction < 1.0:
            raise ValueError(f"center_fraction must be in [0, 1), got {self.center_fraction}")
        if self.kind == "cartesian-lines" and self.target_rate < self.center_fraction:
            raise ValueError("target_rate must be >= center_fraction for cartesian-lines")


def _center_line(ny: int, nx: int, theta: float) -> np.ndarray:
    """Digitize the line through pixel (ny//2, nx//2) at angle theta.

    The minor coordinate is rounded half-to-even, which is symmetric under
    negation, so each line is invariant under 180-degree rotation about the
    center pixel and every chosen pixel sits within half a pixel of the
    ideal line.
    """
    cy, cx = ny // 2, nx // 2
    hit = np.zeros((ny, nx), dtype=bool)
    dy, dx = np.sin(theta), np.cos(theta)
    if abs(dx) >= abs(dy):
        xs = np.arange(nx)
        ys = cy + np.rint((xs - cx) * (dy / dx)).astype(np.int64)
        ok = (ys >= 0) & (ys < ny)
        hit[ys[ok], xs[ok]] = True
    else:
        ys = np.arange(ny)
        xs = cx + np.rint((ys - cy) * (dx / dy)).astype(np.int64)
        ok = (xs >= 0) & (xs < nx)
        hit[ys[ok], xs[ok]] = True
    return hit


def _radial_union(ny: int, nx: int, count: int) -> np.ndarray:
    union = np.zeros((ny, nx), dtype=bool)
    for i in range(count):
        union |= _center_line(ny, nx, i * np.pi / count)
    return union


def radial_line_count(ny: int, nx: int, params: MaskParams) -> int:
    """Smallest number of center lines whose union reaches the target rate."""
    n = ny * nx
    max_lines = 4 * (ny + nx)
    for count in range(1, max_lines + 1):
        if _radial_union(ny, nx, count).sum() / n >= params.target_rate:
            return count
    raise UnreachableRate(
        f"rate {params.target_rate} not reached with up to {max_lines} lines"
    )


def pseudo_radial_mask(ny: int, nx: int, params: MaskParams) -> SamplingMask:
    """Union of center lines at angles i*pi/R, smallest R reaching the rate.

    The achieved rate lands in [target_rate, target_rate + 0.02]; on grids
    too coarse for that band the generator refuses rather than overshoot.
    """
    if params.kind != "pseudo-radial":
        raise ValueError(f"pseudo_radial_mask needs kind 'pseudo-radial', got {params.kind!r}")
    if params.target_rate == 1.0:
        return SamplingMask(np.ones((ny, nx), dtype=np.uint8))
    union = _radial_union(ny, nx, radial_line_count(ny, nx, params))
    achieved = union.sum() / (ny * nx)
    if achieved > params.target_rate + RADIAL_RATE_SLACK:
        raise UnreachableRate(
            f"grid {ny}x{nx} cannot hit rate {params.target_rate} within "
            f"+{RADIAL_RATE_SLACK}: smallest union gives {achieved:.4f}"
        )
    union[ny // 2, nx // 2] = True
    return SamplingMask(union.astype(np.uint8))


def cartesian_mask(ny: int, nx: int, params: MaskParams) -> SamplingMask:
    """Full phase-encode rows: a guaranteed center block plus seeded
    variable-density draws.

    The central ceil(center_fraction * ny) rows are always on. Remaining
    rows are drawn without replacement with probability proportional to
    (1 - |d| / (ny/2))**4, d the distance from the center row, until the
    achieved rate first reaches target_rate; that always lands within
    1/ny of the target.
    """
    if params.kind != "cartesian-lines":
        raise ValueError(f"cartesian_mask needs kind 'cartesian-lines', got {params.kind!r}")
    cy = ny // 2
    n_center = int(np.ceil(params.center_fraction * ny))
    rows = np.zeros(ny, dtype=bool)
    if n_center > 0:
        start = cy - n_center // 2
        rows[start:start + n_center] = True
    if rows.sum() / ny > params.target_rate + 1.0 / ny:
        raise RateBelowCenterBlock(
            f"center block of {n_center} rows already exceeds rate "
            f"{params.target_rate} + 1/{ny}"
        )
    d = np.arange(ny) - cy
    weights = np.maximum(1.0 - np.abs(d) / (ny / 2.0), 0.0) ** _DENSITY_POWER
    rng = SplitMix64(params.seed)
    while rows.sum() / ny < params.target_rate:
        avail = weights * ~rows
        cum = np.cumsum(avail)
        total = float(cum[-1])
        if total <= 0.0:
            raise UnreachableRate(
                f"all drawable rows exhausted at rate {rows.sum() / ny:.4f}"
            )
        u = rng.next_float() * total
        idx = int(np.searchsorted(cum, u, side="right"))
        if idx >= ny or avail[idx] == 0.0:
            # float-rounding edge at the top of the cumulative sum
            idx = int(np.flatnonzero(avail)[-1])
        rows[idx] = True
    cells = np.zeros((ny, nx), dtype=np.uint8)
    cells[rows, :] = 1
    return SamplingMask(cells)


def full_mask(ny: int, nx: int) -> SamplingMask:
    return SamplingMask(np.ones((ny, nx), dtype=np.uint8))


def generate_mask(ny: int, nx: int, params: MaskParams) -> SamplingMask:
    """Dispatch on params.kind."""
    if params.kind == "pseudo-radial":
        return pseudo_radial_mask(ny, nx, params)
    if params.kind == "cartesian-lines":
        return cartesian_mask(ny, nx, params)
    return full_mask(ny, nx)


def apply_mask(ksp, mask: SamplingMask):
    """Elementwise product with the mask; idempotent, same-kind result."""
    if isinstance(ksp, MultiCoilKSpace):
        if ksp.data.shape[1:] != mask.shape:
            raise ShapeMismatch(mask.shape, ksp.data.shape[1:])
        return MultiCoilKSpace(ksp.data * mask.cells[None, :, :], centered=ksp.centered)
    if isinstance(ksp, KSpaceGrid):
        if ksp.shape != mask.shape:
            raise ShapeMismatch(mask.shape, ksp.shape)
        return KSpaceGrid(ksp.data * mask.cells, centered=ksp.centered)
    raise TypeError(f"apply_mask expects KSpaceGrid or MultiCoilKSpace, got {type(ksp).__name__}")
