"""Synthetic demo data: the Shepp-Logan phantom and coil-sensitivity maps.

Real scanner data never ships with this package, so everything quality
tests run on is generated here: a deterministic phantom, smooth simulated
coil profiles, and an RSS-based calibration that estimates maps back from
the fully sampled center of multi-coil k-space.
"""

import numpy as np

from .errors import InsufficientACS, TooSmall
from .rng import SplitMix64
from .transforms import _idft2c
from .types import CoilSensitivities, ComplexImage, MultiCoilKSpace

# (amplitude, semi-axis a, semi-axis b, x0, y0, rotation degrees);
# the classic 10-ellipse head phantom table.
SHEPP_LOGAN_ELLIPSES = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
)

MIN_PHANTOM_DIM = 16

SUPPORT_THRESHOLD = 0.05  # fraction of peak RSS that counts as object support


def _norm_grid(ny: int, nx: int):
    """Row/col coordinates normalized to [-1, 1] (endpoints on the grid edge)."""
    ya = (np.arange(ny) - (ny - 1) / 2.0) / ((ny - 1) / 2.0)
    xa = (np.arange(nx) - (nx - 1) / 2.0) / ((nx - 1) / 2.0)
    return np.meshgrid(ya, xa, indexing="ij")


def shepp_logan(ny: int, nx: int) -> ComplexImage:
    """The 10-ellipse Shepp-Logan pattern in [0, 1], zero imaginary part."""
    if ny < MIN_PHANTOM_DIM or nx < MIN_PHANTOM_DIM:
        raise TooSmall(f"phantom needs ny, nx >= {MIN_PHANTOM_DIM}, got {ny}x{nx}")
    yy, xx = _norm_grid(ny, nx)
    img = np.zeros((ny, nx))
    for amp, a, b, x0, y0, phi_deg in SHEPP_LOGAN_ELLIPSES:
        phi = np.deg2rad(phi_deg)
        xs = xx - x0
        ys = yy - y0
        c, s = np.cos(phi), np.sin(phi)
        u = xs * c + ys * s
        v = ys * c - xs * s
        img[(u / a) ** 2 + (v / b) ** 2 <= 1.0] += amp
    return ComplexImage(np.clip(img, 0.0, None).astype(np.complex128))


def simulate_coil_maps(ny: int, nx: int, nc: int, seed: int = 0) -> CoilSensitivities:
    """Smooth complex coil profiles, normalized so sum_j |C_j|^2 = 1 everywhere.

    Each coil is a Gaussian magnitude lobe centered on the border circle at
    angle 2*pi*j/nc, with a seeded linear phase ramp. The pixelwise RSS
    normalization gives full support, so these maps make the SENSE operator
    exactly norm-1.
    """
    if nc < 1:
        raise ValueError("nc must be >= 1")
    rng = SplitMix64(seed)
    yy, xx = _norm_grid(ny, nx)
    maps = np.zeros((nc, ny, nx), dtype=np.complex128)
    for j in range(nc):
        ang = 2.0 * np.pi * j / nc
        cy, cx = np.sin(ang), np.cos(ang)
        r2 = (yy - cy) ** 2 + (xx - cx) ** 2
        mag = np.exp(-r2 / (2.0 * 0.7 ** 2))
        a = (rng.next_float() - 0.5) * 2.0 * np.pi
        b = (rng.next_float() - 0.5) * 2.0 * np.pi
        c = rng.next_float() * 2.0 * np.pi
        maps[j] = mag * np.exp(1j * (a * yy + b * xx + c))
    rss = np.sqrt(np.sum(np.abs(maps) ** 2, axis=0))
    return CoilSensitivities(maps / rss)


def estimate_coil_maps(y: MultiCoilKSpace, acs_rows: int) -> CoilSensitivities:
    """RSS calibration from the fully sampled center rows of k-space.

    The central `acs_rows` rows (full width) are windowed with a raised
    cosine, the rest zeroed, and each coil inverse-transformed to a
    low-resolution coil image L_j. Support is where RSS(L) reaches 5% of
    its peak; there C_j = L_j / RSS, elsewhere exactly 0.
    """
    if acs_rows < 1 or acs_rows > y.ny:
        raise InsufficientACS(f"acs_rows must be in [1, {y.ny}], got {acs_rows}")
    ny = y.ny
    start = ny // 2 - acs_rows // 2
    taper = 0.5 - 0.5 * np.cos(2.0 * np.pi * (np.arange(acs_rows) + 0.5) / acs_rows)
    window = np.zeros((ny, 1))
    window[start:start + acs_rows, 0] = taper
    low = np.stack([_idft2c(y.data[j] * window) for j in range(y.nc)])
    rss = np.sqrt(np.sum(np.abs(low) ** 2, axis=0))
    support = rss >= SUPPORT_THRESHOLD * rss.max()
    maps = np.zeros_like(low)
    maps[:, support] = low[:, support] / rss[support]
    return CoilSensitivities(maps, support=support)
