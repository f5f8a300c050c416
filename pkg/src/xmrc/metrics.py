"""Reconstruction-quality metrics and error-map export.

RLNE (relative l2-norm error) is the single quality number reported
everywhere: ||x - x_hat||_2 / ||x||_2 over the complex samples. Error maps
are magnitude-difference images for display, exported as binary PGM (P5).
"""

from dataclasses import dataclass

import numpy as np

from .errors import ZeroGroundTruth
from .types import ComplexImage, validate_pair


def rlne(truth: ComplexImage, recon: ComplexImage) -> float:
    """Relative l2-norm error ||x - x_hat|| / ||x||; lower is better."""
    validate_pair(truth, recon)
    denom = np.linalg.norm(truth.data)
    if denom == 0.0:
        raise ZeroGroundTruth("ground truth has zero norm")
    return float(np.linalg.norm(truth.data - recon.data) / denom)


@dataclass(frozen=True)
class ErrorMap:
    """Pixelwise | |x| - |x_hat| |; nonnegative reals, display artifact only."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def shape(self):
        return self.values.shape


def error_map(truth: ComplexImage, recon: ComplexImage) -> ErrorMap:
    validate_pair(truth, recon)
    return ErrorMap(np.abs(np.abs(truth.data) - np.abs(recon.data)))


def error_map_to_pgm(em: ErrorMap) -> bytes:
    """Encode as 8-bit binary PGM (P5), linear scale with the max at 255."""
    vals = em.values
    peak = float(vals.max())
    if peak > 0.0:
        scaled = np.rint(vals * (255.0 / peak)).astype(np.uint8)
    else:
        scaled = np.zeros(vals.shape, dtype=np.uint8)
    ny, nx = vals.shape
    header = f"P5\n{nx} {ny}\n255\n".encode("ascii")
    return header + scaled.tobytes()
