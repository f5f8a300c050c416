"""Undersampled-MRI reconstruction at desk scale.

Numerics (types, transforms, masks, solvers, metrics) live in plain
modules; the HTTP job service is under ``xmrc.service`` and the command
line under ``xmrc.cli``.
"""

from .container import read_container, read_container_file, write_container, write_container_file
from .errors import XmrcError
from .metrics import ErrorMap, error_map, error_map_to_pgm, rlne
from .phantoms import estimate_coil_maps, shepp_logan, simulate_coil_maps
from .sampling import MaskParams, apply_mask, cartesian_mask, generate_mask, pseudo_radial_mask
from .solver import (
    SolverParams,
    SolverResult,
    objective,
    pfista_parallel,
    pfista_single,
    sense_adjoint,
    sense_forward,
    zero_filled_recon,
)
from .transforms import (
    FrameCoefficients,
    FrameSpec,
    dft2_centered,
    frame_analysis,
    frame_synthesis,
    idft2_centered,
    soft_threshold,
)
from .types import (
    CoilSensitivities,
    ComplexImage,
    KSpaceGrid,
    MultiCoilKSpace,
    SamplingMask,
    as_magnitude,
    validate_pair,
)

__version__ = "0.1.0"

__all__ = [
    "CoilSensitivities",
    "ComplexImage",
    "ErrorMap",
    "FrameCoefficients",
    "FrameSpec",
    "KSpaceGrid",
    "MaskParams",
    "MultiCoilKSpace",
    "SamplingMask",
    "SolverParams",
    "SolverResult",
    "XmrcError",
    "apply_mask",
    "as_magnitude",
    "cartesian_mask",
    "dft2_centered",
    "error_map",
    "error_map_to_pgm",
    "estimate_coil_maps",
    "frame_analysis",
    "frame_synthesis",
    "generate_mask",
    "idft2_centered",
    "objective",
    "pfista_parallel",
    "pfista_single",
    "pseudo_radial_mask",
    "read_container",
    "read_container_file",
    "rlne",
    "sense_adjoint",
    "sense_forward",
    "shepp_logan",
    "simulate_coil_maps",
    "soft_threshold",
    "validate_pair",
    "write_container",
    "write_container_file",
    "zero_filled_recon",
]
