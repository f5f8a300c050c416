"""Linear operators of the reconstruction model.

Three families live here:
  - the centered, unitary 2D DFT pair (F, F†),
  - a tight-frame analysis/synthesis pair (Psi, Psi†): identity or an
    undecimated Haar filter bank,
  - complex soft-thresholding, the proximal map of the l1 penalty.

The DFT is normalized (`norm="ortho"`) and centered by index shifts of
n//2, so the masked forward operator has norm exactly 1 and a unit step
size is always safe for the solver.

The undecimated Haar bank uses tap pairs (1/2, 1/2) and (1/2, -1/2) with
periodic boundaries, the taps spread by 2**(level-1) at each level. With
this normalization |H(w)|^2 + |G(w)|^2 = 1 exactly, so Psi† Psi = I holds
to machine precision (frame bound 1) for any grid with min(ny, nx) >= 2**levels.
"""

from dataclasses import dataclass

import numpy as np

from .errors import LevelsTooDeep, NegativeThreshold, SubbandCountMismatch
from .types import ComplexImage, KSpaceGrid

FRAME_KINDS = ("identity", "undecimated-haar")


@dataclass(frozen=True)
class FrameSpec:
    """Configuration of the sparsifying transform."""

    kind: str = "undecimated-haar"
    levels: int = 3

    def __post_init__(self):
        if self.kind not in FRAME_KINDS:
            raise ValueError(f"unknown frame kind {self.kind!r}; expected one of {FRAME_KINDS}")
        if self.levels < 1:
            raise ValueError("levels must be >= 1")

    def subband_count(self) -> int:
        return 1 if self.kind == "identity" else 3 * self.levels + 1


@dataclass(frozen=True)
class FrameCoefficients:
    """Analysis coefficients: `nb` subbands, each shaped like the source image."""

    subbands: tuple
    frame: FrameSpec

    def __post_init__(self):
        subs = tuple(np.asarray(s, dtype=np.complex128) for s in self.subbands)
        if len(subs) != self.frame.subband_count():
            raise SubbandCountMismatch(
                f"frame {self.frame.kind!r} with levels={self.frame.levels} needs "
                f"{self.frame.subband_count()} subbands, got {len(subs)}"
            )
        shape = subs[0].shape
        for s in subs:
            if s.shape != shape:
                raise SubbandCountMismatch("subbands must share a shape")
        object.__setattr__(self, "subbands", subs)

    @property
    def nb(self) -> int:
        return len(self.subbands)

    @property
    def shape(self):
        return self.subbands[0].shape


# ---------------------------------------------------------------------------
# centered unitary DFT
# ---------------------------------------------------------------------------

def _dft2c(x: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(np.fft.fft2(np.fft.ifftshift(x), norm="ortho"))


def _idft2c(k: np.ndarray) -> np.ndarray:
    return np.fft.fftshift(np.fft.ifft2(np.fft.ifftshift(k), norm="ortho"))


def dft2_centered(img: ComplexImage) -> KSpaceGrid:
    """Unitary 2D DFT with the DC term at (ny//2, nx//2)."""
    return KSpaceGrid(_dft2c(img.data), centered=True)


def idft2_centered(ksp: KSpaceGrid) -> ComplexImage:
    """Exact inverse (= adjoint) of :func:`dft2_centered`."""
    if not ksp.centered:
        raise ValueError("idft2_centered expects a centered grid")
    return ComplexImage(_idft2c(ksp.data))


# ---------------------------------------------------------------------------
# undecimated Haar filter bank
# ---------------------------------------------------------------------------

def _lp(x, d, axis):
    return (x + np.roll(x, -d, axis=axis)) / 2


def _hp(x, d, axis):
    return (x - np.roll(x, -d, axis=axis)) / 2


def _lp_adj(x, d, axis):
    return (x + np.roll(x, d, axis=axis)) / 2


def _hp_adj(x, d, axis):
    return (x - np.roll(x, d, axis=axis)) / 2


def _check_levels(shape, frame: FrameSpec):
    if frame.kind == "identity":
        return
    if 2 ** frame.levels > min(shape):
        raise LevelsTooDeep(
            f"levels={frame.levels} needs min(ny, nx) >= {2 ** frame.levels}, got {min(shape)}"
        )


def _analyze(x: np.ndarray, frame: FrameSpec) -> list:
    if frame.kind == "identity":
        return [x.copy()]
    subs = []
    ll = x
    for lev in range(1, frame.levels + 1):
        d = 2 ** (lev - 1)
        lo_r = _lp(ll, d, 0)
        hi_r = _hp(ll, d, 0)
        # per level: (row-detail, col-detail, diagonal)
        subs.append(_lp(hi_r, d, 1))
        subs.append(_hp(lo_r, d, 1))
        subs.append(_hp(hi_r, d, 1))
        ll = _lp(lo_r, d, 1)
    subs.append(ll)
    return subs


def _synthesize(subs, frame: FrameSpec) -> np.ndarray:
    if frame.kind == "identity":
        return subs[0].copy()
    ll = subs[-1]
    for lev in range(frame.levels, 0, -1):
        d = 2 ** (lev - 1)
        d_row, d_col, d_diag = subs[3 * (lev - 1): 3 * lev]
        lo_r = _lp_adj(ll, d, 1) + _hp_adj(d_col, d, 1)
        hi_r = _lp_adj(d_row, d, 1) + _hp_adj(d_diag, d, 1)
        ll = _lp_adj(lo_r, d, 0) + _hp_adj(hi_r, d, 0)
    return ll


def frame_analysis(img: ComplexImage, frame: FrameSpec) -> FrameCoefficients:
    """Apply the analysis operator Psi.

    Identity: one subband equal to the image. Undecimated Haar: three
    detail subbands per level plus the final approximation, 3*levels + 1
    subbands total, each the full image size.
    """
    _check_levels(img.shape, frame)
    return FrameCoefficients(tuple(_analyze(img.data, frame)), frame)


def frame_synthesis(coeffs: FrameCoefficients) -> ComplexImage:
    """Apply the synthesis operator Psi† (adjoint of analysis; Psi†Psi = I)."""
    _check_levels(coeffs.shape, coeffs.frame)
    return ComplexImage(_synthesize(coeffs.subbands, coeffs.frame))


def soft_threshold(coeffs: FrameCoefficients, tau: float) -> FrameCoefficients:
    """Complex shrinkage z -> z * max(|z| - tau, 0) / |z|, zero at z = 0.

    Phase is preserved; each magnitude drops by exactly min(|z|, tau).
    """
    if tau < 0:
        raise NegativeThreshold(f"tau must be >= 0, got {tau}")
    return FrameCoefficients(
        tuple(_soft(s, tau) for s in coeffs.subbands), coeffs.frame
    )


def _soft(z: np.ndarray, tau: float) -> np.ndarray:
    if tau == 0.0:
        return z.copy()
    mag = np.abs(z)
    out = np.zeros_like(z)
    nz = mag > 0
    out[nz] = z[nz] * (np.maximum(mag[nz] - tau, 0.0) / mag[nz])
    return out
