"""Deterministic demo fixture set, shared by the CLI and the service.

One call produces everything needed to exercise both reconstruction paths:
a phantom, the two masks, single-coil k-space undersampled with the radial
mask, and 8-coil k-space undersampled with the Cartesian mask plus the
matching coil maps. Same (size, seed) -> byte-identical fixtures.
"""

from functools import lru_cache

from .container import write_container
from .phantoms import shepp_logan, simulate_coil_maps
from .sampling import MaskParams, apply_mask, cartesian_mask, pseudo_radial_mask
from .solver import sense_forward
from .transforms import dft2_centered
from .types import SamplingMask

RADIAL_RATE = 0.30
CARTESIAN_RATE = 0.25
CARTESIAN_CENTER_FRACTION = 0.08
DEMO_COILS = 8

FIXTURE_NAMES = (
    "phantom",
    "mask_radial_30",
    "mask_cartesian_25",
    "kspace_single",
    "kspace_multi",
    "coil_maps",
)


def build_demo_objects(size: int = 256, seed: int = 1234) -> dict:
    """The fixture set as live carriers, keyed by fixture name."""
    truth = shepp_logan(size, size)
    radial = pseudo_radial_mask(size, size, MaskParams("pseudo-radial", RADIAL_RATE))
    cartesian = cartesian_mask(
        size,
        size,
        MaskParams(
            "cartesian-lines",
            CARTESIAN_RATE,
            center_fraction=CARTESIAN_CENTER_FRACTION,
            seed=seed,
        ),
    )
    maps = simulate_coil_maps(size, size, DEMO_COILS, seed=seed)
    kspace_single = apply_mask(dft2_centered(truth), radial)
    kspace_multi = sense_forward(truth, maps, cartesian)
    return {
        "phantom": truth,
        "mask_radial_30": radial,
        "mask_cartesian_25": cartesian,
        "kspace_single": kspace_single,
        "kspace_multi": kspace_multi,
        "coil_maps": maps,
    }


@lru_cache(maxsize=4)
def build_demo_containers(size: int = 256, seed: int = 1234) -> dict:
    """The same fixtures, serialized; cached since services rebuild on start."""
    return {name: write_container(obj) for name, obj in build_demo_objects(size, seed).items()}


def acs_rows_of(mask: SamplingMask) -> int:
    """Contiguous fully sampled row block around the center row; 0 if none."""
    full_rows = mask.cells.all(axis=1)
    cy = mask.ny // 2
    if not full_rows[cy]:
        return 0
    lo = cy
    while lo > 0 and full_rows[lo - 1]:
        lo -= 1
    hi = cy
    while hi < mask.ny - 1 and full_rows[hi + 1]:
        hi += 1
    return hi - lo + 1
