"""Value types shared by every other module.

All carriers are immutable after construction: the wrapped numpy arrays are
private copies with the writeable flag cleared, so instances can be shared
freely across threads. Construction is where validation happens; an object
that exists is an object whose invariants hold.

Conventions fixed here for the whole package:
  - arrays are row-major with index order (row = y/ky, col = x/kx);
  - complex samples are 128-bit in memory (64-bit per component);
  - k-space grids are centered: the DC term sits at (ny//2, nx//2).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyMask,
    InvalidDimensions,
    InvalidMaskCell,
    InvalidSample,
    ShapeMismatch,
    UnnormalizedMaps,
)

COILMAP_NORMALIZATION_TOL = 1e-6


def _frozen_complex(data, ndim, what):
    arr = np.array(data, dtype=np.complex128, copy=True)
    if arr.ndim != ndim:
        raise InvalidDimensions(f"{what}: expected {ndim}-d array, got {arr.ndim}-d")
    if arr.shape[-1] < 2 or arr.shape[-2] < 2:
        raise InvalidDimensions(f"{what}: ny and nx must be >= 2, got {arr.shape}")
    if ndim == 3 and arr.shape[0] < 1:
        raise InvalidDimensions(f"{what}: need at least one coil")
    if not np.all(np.isfinite(arr)):
        raise InvalidSample(f"{what}: non-finite sample")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ComplexImage:
    """A 2D complex-valued image, shape (ny, nx)."""

    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen_complex(self.data, 2, "ComplexImage"))

    @property
    def ny(self) -> int:
        return self.data.shape[0]

    @property
    def nx(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape


@dataclass(frozen=True)
class KSpaceGrid:
    """A 2D complex k-space grid; `centered` means DC at (ny//2, nx//2).

    Everything this package produces is centered; the flag exists so the
    convention is explicit at type level rather than implied.
    """

    data: np.ndarray
    centered: bool = True

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen_complex(self.data, 2, "KSpaceGrid"))

    @property
    def ny(self) -> int:
        return self.data.shape[0]

    @property
    def nx(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self):
        return self.data.shape


@dataclass(frozen=True)
class MultiCoilKSpace:
    """A stack of per-coil centered k-space grids, shape (nc, ny, nx)."""

    data: np.ndarray
    centered: bool = True

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen_complex(self.data, 3, "MultiCoilKSpace"))

    @property
    def nc(self) -> int:
        return self.data.shape[0]

    @property
    def ny(self) -> int:
        return self.data.shape[1]

    @property
    def nx(self) -> int:
        return self.data.shape[2]

    @property
    def shape(self):
        return self.data.shape

    def coil(self, j: int) -> KSpaceGrid:
        return KSpaceGrid(self.data[j], centered=self.centered)


@dataclass(frozen=True)
class SamplingMask:
    """Binary undersampling pattern, shape (ny, nx), cells in {0, 1}."""

    cells: np.ndarray

    def __post_init__(self):
        arr = np.array(self.cells, copy=True)
        if arr.ndim != 2:
            raise InvalidDimensions(f"SamplingMask: expected 2-d array, got {arr.ndim}-d")
        if arr.shape[0] < 2 or arr.shape[1] < 2:
            raise InvalidDimensions(f"SamplingMask: ny and nx must be >= 2, got {arr.shape}")
        if not np.isin(arr, (0, 1)).all():
            raise InvalidMaskCell("SamplingMask: cells must be 0 or 1")
        arr = arr.astype(np.uint8)
        if arr.sum() == 0:
            raise EmptyMask("SamplingMask: at least one cell must be sampled")
        arr.setflags(write=False)
        object.__setattr__(self, "cells", arr)

    @property
    def ny(self) -> int:
        return self.cells.shape[0]

    @property
    def nx(self) -> int:
        return self.cells.shape[1]

    @property
    def shape(self):
        return self.cells.shape

    @property
    def rate(self) -> float:
        """Measured sampling rate, in (0, 1]."""
        return float(self.cells.sum()) / (self.ny * self.nx)


@dataclass(frozen=True)
class CoilSensitivities:
    """Per-coil complex sensitivity maps, shape (nc, ny, nx).

    On `support` pixels the maps satisfy sum_j |C_j|^2 = 1 (tolerance
    COILMAP_NORMALIZATION_TOL); off support every coil value is exactly 0.
    That normalization is what makes the SENSE forward operator a
    contraction, so it is enforced at construction.
    """

    maps: np.ndarray
    support: np.ndarray = field(default=None)

    def __post_init__(self):
        maps = _frozen_complex(self.maps, 3, "CoilSensitivities")
        object.__setattr__(self, "maps", maps)
        rss2 = np.sum(np.abs(maps) ** 2, axis=0)
        if self.support is None:
            support = rss2 > 0
        else:
            support = np.array(self.support, copy=True).astype(bool)
            if support.shape != maps.shape[1:]:
                raise ShapeMismatch(maps.shape[1:], support.shape)
        support.setflags(write=False)
        object.__setattr__(self, "support", support)
        on = rss2[support]
        if on.size and np.max(np.abs(on - 1.0)) > COILMAP_NORMALIZATION_TOL:
            raise UnnormalizedMaps(
                f"sum-of-squares deviates from 1 by {np.max(np.abs(on - 1.0)):.3g} on support"
            )
        off = rss2[~support]
        if off.size and np.max(off) != 0.0:
            raise UnnormalizedMaps("nonzero coil values outside the support")

    @property
    def nc(self) -> int:
        return self.maps.shape[0]

    @property
    def ny(self) -> int:
        return self.maps.shape[1]

    @property
    def nx(self) -> int:
        return self.maps.shape[2]

    @property
    def shape(self):
        return self.maps.shape


def validate_pair(a, b) -> None:
    """Check that two same-kind grids share a shape; raises ShapeMismatch.

    Used wherever an operation combines two carriers elementwise.
    """
    if type(a) is not type(b):
        raise TypeError(f"cannot pair {type(a).__name__} with {type(b).__name__}")
    if a.shape != b.shape:
        raise ShapeMismatch(a.shape, b.shape)


def as_magnitude(img: ComplexImage) -> np.ndarray:
    """Elementwise |z| of an image; real, nonnegative, same shape."""
    return np.abs(img.data)
