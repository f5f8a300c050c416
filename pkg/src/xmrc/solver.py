"""Accelerated proximal-gradient reconstruction, single-coil and parallel.

The model is the analysis form

    f(x) = 1/2 ||y - U F x||_2^2 + lambda ||Psi x||_1

with U the sampling mask, F the centered unitary DFT and Psi a tight frame.
One iteration takes a gradient step on the data term at the extrapolated
point, shrinks the frame coefficients, projects back through Psi†, and
applies the classical momentum sequence t_{k+1} = (1 + sqrt(1 + 4 t_k^2))/2:

    x_{k+1}     = Psi† S_{gamma*lambda}( Psi( x^_k + gamma * A†(y - A x^_k) ) )
    x^_{k+1}    = x_{k+1} + ((t_k - 1)/t_{k+1}) (x_{k+1} - x_k)

Both operators in use here (masked DFT; masked SENSE with normalized maps)
have norm <= 1, so any step size gamma in (0, 1] converges; only the
regularization weight genuinely needs choosing.

The parallel variant replaces A = U∘F by the coil-stacked A_j = U∘F∘C_j
with adjoint sum_j conj(C_j) F† U†, and starts from the adjoint
reconstruction instead of the zero-filled image. Only the sampled entries
of y ever enter the iteration (U is applied to y up front), so callers may
pass either pre-masked or full grids.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParams, ShapeMismatch, UnnormalizedMaps
from .sampling import apply_mask
from .transforms import (
    FrameSpec,
    _analyze,
    _check_levels,
    _dft2c,
    _idft2c,
    _soft,
    _synthesize,
)
from .types import (
    COILMAP_NORMALIZATION_TOL,
    CoilSensitivities,
    ComplexImage,
    KSpaceGrid,
    MultiCoilKSpace,
    SamplingMask,
)

LAMBDA_MODES = ("absolute", "relative-to-zero-filled")


@dataclass(frozen=True)
class SolverParams:
    """Reconstruction knobs; defaults are safe for any well-scaled input.

    lam: regularization weight. With lambda_mode "relative-to-zero-filled"
      (the default) the effective weight is lam * max|Psi(x_0)|, so the one
      parameter does not silently depend on the data scale.
    gamma: step size in (0, 1]; 1 is always valid under this package's
      operator conventions.
    """

    lam: float = 1e-3
    gamma: float = 1.0
    max_iter: int = 200
    tol: float = 1e-6
    frame: FrameSpec = field(default_factory=FrameSpec)
    lambda_mode: str = "relative-to-zero-filled"

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidParams(f"lambda must be > 0, got {self.lam}")
        if not 0.0 < self.gamma <= 1.0:
            raise InvalidParams(f"gamma must be in (0, 1], got {self.gamma}")
        if self.max_iter < 1:
            raise InvalidParams(f"max_iter must be >= 1, got {self.max_iter}")
        if self.tol < 0:
            raise InvalidParams(f"tol must be >= 0, got {self.tol}")
        if self.lambda_mode not in LAMBDA_MODES:
            raise InvalidParams(
                f"lambda_mode must be one of {LAMBDA_MODES}, got {self.lambda_mode!r}"
            )
        if not isinstance(self.frame, FrameSpec):
            raise InvalidParams("frame must be a FrameSpec")

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "gamma": self.gamma,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "frame": self.frame.kind,
            "levels": self.frame.levels,
            "lambda_mode": self.lambda_mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SolverParams":
        """Build from a JSON-style dict; unknown keys or bad values raise InvalidParams."""
        known = {"lambda", "gamma", "max_iter", "tol", "frame", "levels", "lambda_mode"}
        extra = set(d) - known
        if extra:
            raise InvalidParams(f"unknown parameter(s): {sorted(extra)}")
        defaults = cls()
        try:
            frame = FrameSpec(
                kind=d.get("frame", defaults.frame.kind),
                levels=int(d.get("levels", defaults.frame.levels)),
            )
            return cls(
                lam=float(d.get("lambda", defaults.lam)),
                gamma=float(d.get("gamma", defaults.gamma)),
                max_iter=int(d.get("max_iter", defaults.max_iter)),
                tol=float(d.get("tol", defaults.tol)),
                frame=frame,
                lambda_mode=d.get("lambda_mode", defaults.lambda_mode),
            )
        except (TypeError, ValueError) as exc:
            raise InvalidParams(str(exc)) from exc


@dataclass(frozen=True)
class SolverResult:
    image: ComplexImage
    iterations_run: int
    iterate_change_trace: tuple
    objective_trace: tuple
    wall_time: float


def zero_filled_recon(y: KSpaceGrid, mask: SamplingMask) -> ComplexImage:
    """F†(U∘y): the baseline reconstruction and the solver's starting point."""
    return ComplexImage(_idft2c(apply_mask(y, mask).data))


def _effective_lambda(params: SolverParams, x0: np.ndarray) -> float:
    if params.lambda_mode == "absolute":
        return params.lam
    coeffs = _analyze(x0, params.frame)
    peak = max(float(np.max(np.abs(s))) for s in coeffs)
    return params.lam * peak


def objective(x: ComplexImage, y: KSpaceGrid, mask: SamplingMask, params: SolverParams) -> float:
    """Evaluate 1/2 ||y - U F x||^2 + lambda ||Psi x||_1.

    With the relative lambda mode, the weight is resolved exactly as the
    solver resolves it (against the zero-filled image of y).
    """
    if x.shape != y.shape:
        raise ShapeMismatch(x.shape, y.shape)
    if y.shape != mask.shape:
        raise ShapeMismatch(y.shape, mask.shape)
    _check_levels(x.shape, params.frame)
    lam = _effective_lambda(params, _idft2c(apply_mask(y, mask).data))
    residual = y.data - mask.cells * _dft2c(x.data)
    coeffs = _analyze(x.data, params.frame)
    l1 = sum(float(np.sum(np.abs(s))) for s in coeffs)
    return 0.5 * float(np.linalg.norm(residual) ** 2) + lam * l1


def _run(forward, adjoint, ym, x0, params: SolverParams, progress):
    """Shared iteration; forward/adjoint already close over mask and maps."""
    start = time.perf_counter()
    lam = _effective_lambda(params, x0)
    tau = params.gamma * lam
    frame = params.frame

    x_prev = x0
    x_extr = x0
    t = 1.0
    changes = []
    objectives = []
    iterations = 0
    for k in range(1, params.max_iter + 1):
        grad = adjoint(ym - forward(x_extr))
        z = x_extr + params.gamma * grad
        coeffs = [_soft(s, tau) for s in _analyze(z, frame)]
        x = _synthesize(coeffs, frame)

        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        x_extr = x + ((t - 1.0) / t_next) * (x - x_prev)

        delta = float(np.linalg.norm(x - x_prev))
        denom = float(np.linalg.norm(x_prev))
        if denom > 0.0:
            change = delta / denom
        else:
            change = 0.0 if delta == 0.0 else np.inf
        changes.append(change)
        data_res = ym - forward(x)
        l1 = sum(float(np.sum(np.abs(s))) for s in _analyze(x, frame))
        objectives.append(0.5 * float(np.linalg.norm(data_res) ** 2) + lam * l1)

        x_prev = x
        t = t_next
        iterations = k
        if progress is not None:
            progress(k, change)
        if change <= params.tol:
            break

    wall = time.perf_counter() - start
    return x_prev, iterations, tuple(changes), tuple(objectives), wall


def pfista_single(
    y: KSpaceGrid,
    mask: SamplingMask,
    params: SolverParams,
    progress=None,
) -> SolverResult:
    """Single-coil reconstruction from undersampled k-space.

    `progress`, when given, is called once per iteration with
    (iteration_number, relative_iterate_change).
    """
    if y.shape != mask.shape:
        raise ShapeMismatch(mask.shape, y.shape)
    _check_levels(y.shape, params.frame)
    cells = mask.cells
    ym = cells * y.data

    def forward(x):
        return cells * _dft2c(x)

    def adjoint(k):
        return _idft2c(cells * k)

    x0 = adjoint(ym)
    x, iters, changes, objs, wall = _run(forward, adjoint, ym, x0, params, progress)
    return SolverResult(ComplexImage(x), iters, changes, objs, wall)


def sense_forward(x: ComplexImage, maps: CoilSensitivities, mask: SamplingMask) -> MultiCoilKSpace:
    """Per coil j: U ∘ F(C_j ∘ x)."""
    if x.shape != maps.shape[1:]:
        raise ShapeMismatch(maps.shape[1:], x.shape)
    if x.shape != mask.shape:
        raise ShapeMismatch(mask.shape, x.shape)
    stack = _sense_fwd(x.data, maps.maps, mask.cells)
    return MultiCoilKSpace(stack, centered=True)


def sense_adjoint(y: MultiCoilKSpace, maps: CoilSensitivities, mask: SamplingMask) -> ComplexImage:
    """sum_j conj(C_j) ∘ F†(U ∘ y_j); exact adjoint of :func:`sense_forward`."""
    if y.shape != maps.shape:
        raise ShapeMismatch(maps.shape, y.shape)
    if y.shape[1:] != mask.shape:
        raise ShapeMismatch(mask.shape, y.shape[1:])
    return ComplexImage(_sense_adj(y.data, maps.maps, mask.cells))


def _sense_fwd(x, maps, cells):
    return np.stack([cells * _dft2c(maps[j] * x) for j in range(maps.shape[0])])


def _sense_adj(k, maps, cells):
    out = np.zeros(maps.shape[1:], dtype=np.complex128)
    for j in range(maps.shape[0]):
        out += np.conj(maps[j]) * _idft2c(cells * k[j])
    return out


def pfista_parallel(
    y: MultiCoilKSpace,
    mask: SamplingMask,
    maps: CoilSensitivities,
    params: SolverParams,
    progress=None,
) -> SolverResult:
    """Parallel (sensitivity-encoded) reconstruction across coils.

    Requires maps satisfying the sum-of-squares normalization; that bound
    keeps the stacked forward operator norm <= 1, which is what lets
    gamma <= 1 converge unconditionally.
    """
    if y.shape != maps.shape:
        raise ShapeMismatch(maps.shape, y.shape)
    if y.shape[1:] != mask.shape:
        raise ShapeMismatch(mask.shape, y.shape[1:])
    _check_levels(mask.shape, params.frame)
    rss2 = np.sum(np.abs(maps.maps) ** 2, axis=0)
    on = rss2[maps.support]
    if on.size and float(np.max(np.abs(on - 1.0))) > COILMAP_NORMALIZATION_TOL:
        raise UnnormalizedMaps("coil maps lost their normalization")

    cells = mask.cells
    m = maps.maps
    ym = cells[None, :, :] * y.data

    def forward(x):
        return _sense_fwd(x, m, cells)

    def adjoint(k):
        return _sense_adj(k, m, cells)

    x0 = adjoint(ym)
    x, iters, changes, objs, wall = _run(forward, adjoint, ym, x0, params, progress)
    return SolverResult(ComplexImage(x), iters, changes, objs, wall)
