"""Free paraxial propagation of the two-photon amplitude.

Two independent routes are provided:

* the closed form for the Gaussian source, whose centre-of-mass and relative
  widths pick up ``+ i alpha`` with ``alpha = lambda z / 2 pi``;
* numeric propagation of sampled fields, either spectrally (quadratic phase
  ``exp(-i z k^2 / 2 k0)`` along each particle axis) or by direct quadrature
  of the Fresnel kernel ``(i lambda z)^-1/2 exp(i pi (x - x')^2 / lambda z)``.

The common phase ``exp(i k0 z)`` per photon is dropped everywhere; no density
depends on it.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from threadpoolctl import threadpool_limits

from .errors import AliasingRisk, NonPositiveDistance, OutOfRange, UnderResolved
from .fields import EDGE_TOL, ComplexField2D, check_edges
from .grid import Grid1D
from .params import ExperimentParams, alpha


@dataclass(frozen=True)
class GaussianBiphoton:
    """``norm * exp(-q^2 / cq) * exp(-r^2 / cr)`` with ``r, q = (x1 +- x2) / 2``."""

    cq: complex
    cr: complex
    norm: complex

    def __post_init__(self):
        if self.cq.real <= 0 or self.cr.real <= 0:
            raise ValueError("complex widths need positive real parts")

    def intensity_halfwidth_q(self) -> float:
        """1/e half-width of ``|exp(-q^2/cq)|^2`` along q: ``sqrt(|cq|^2 / (2 Re cq))``."""
        return math.sqrt(abs(self.cq) ** 2 / (2 * self.cq.real))


def propagate_analytic(params: ExperimentParams, distance: float) -> GaussianBiphoton:
    if distance < 0:
        raise NonPositiveDistance(f"distance must be >= 0, got {distance}")
    a = alpha(params, distance)
    s2, o2 = params.sigma**2, params.omega_big**2
    cq, cr = complex(s2, a), complex(o2, a)
    # Each Gaussian factor picks up sqrt(w^2 / (w^2 + i a)); taking the roots
    # separately keeps both on the principal branch.
    norm = cmath.sqrt(s2 / cq) * cmath.sqrt(o2 / cr) / math.sqrt(math.pi * params.sigma * params.omega_big)
    return GaussianBiphoton(cq, cr, norm)


def nominal_prefactor(params: ExperimentParams, distance: float | None = None) -> complex:
    """Nominal slit-plane prefactor ``1/sqrt(pi sqrt(sigma + i a/sigma) sqrt(Omega + i a/Omega))``.

    Kept only so reports can show it next to the normalised value from
    :func:`propagate_analytic`; it does not normalise the state.
    """
    a = alpha(params, distance)
    s, o = params.sigma, params.omega_big
    return 1 / cmath.sqrt(math.pi * cmath.sqrt(s + 1j * a / s) * cmath.sqrt(o + 1j * a / o))


def sample_gaussian(gb: GaussianBiphoton, grid1: Grid1D, grid2: Grid1D, check: bool = True) -> ComplexField2D:
    x1 = grid1.x[:, None]
    x2 = grid2.x[None, :]
    r, q = (x1 + x2) / 2, (x1 - x2) / 2
    field = ComplexField2D(grid1, grid2, gb.norm * np.exp(-q * q / gb.cq - r * r / gb.cr))
    if check:
        check_edges(field, "Gaussian state")
    return field


def _phase(grid: Grid1D, params: ExperimentParams, distance: float, mass: float = 1.0) -> np.ndarray:
    # ``mass`` = 2 for the r and q coordinates, whose kernels carry 2 pi / lambda z.
    return np.exp(-1j * distance * grid.k**2 / (2 * mass * params.k0))


def band_edge_ratio(amp: np.ndarray, axes=(0, 1)) -> float:
    """Largest spectral amplitude on the Nyquist rows/columns relative to the peak."""
    spec = np.abs(np.fft.fftn(amp, axes=axes))
    peak = spec.max()
    if peak == 0:
        return 0.0
    edge = 0.0
    for ax in axes:
        nyq = spec.shape[ax] // 2
        edge = max(edge, np.take(spec, nyq, axis=ax).max())
    return float(edge / peak)


def _check_band(amp: np.ndarray, what: str, axes=(0, 1)) -> None:
    ratio = band_edge_ratio(amp, axes)
    if ratio > EDGE_TOL:
        raise AliasingRisk(f"{what}: spectrum at the band edge is {ratio:.2e} of peak (limit {EDGE_TOL:g}); refine the grid")


def propagate_numeric(field: ComplexField2D, params: ExperimentParams, distance: float,
                      check: bool = True) -> ComplexField2D:
    """Propagate ``field`` by ``distance`` with the spectral quadratic phase on both axes.

    With ``check``, the input spectrum must vanish at the band edge and the
    output must vanish at the grid boundary (both to 1e-6 of peak), which
    keeps the periodic FFT propagation exactly unitary for the physical field.
    """
    if distance < 0:
        raise NonPositiveDistance(f"distance must be >= 0, got {distance}")
    if check:
        _check_band(field.amp, "propagation input")
    if distance == 0:
        return field
    spec = np.fft.fft2(field.amp)
    spec *= _phase(field.grid1, params, distance)[:, None]
    spec *= _phase(field.grid2, params, distance)[None, :]
    out = ComplexField2D(field.grid1, field.grid2, np.fft.ifft2(spec))
    if check:
        check_edges(out, f"field after propagating {distance:g}")
    return out


def _eval_matrix(grid: Grid1D, x: np.ndarray) -> np.ndarray:
    # Band-limited interpolant of the FFT coefficients at arbitrary points; the
    # Nyquist mode (even n) is taken as a cosine so real symmetric data stay so.
    # The interpolant is periodic, so points outside the window would alias.
    x = np.asarray(x, dtype=float)
    lo, hi = grid.x_min - 0.5 * grid.dx, grid.x_max - 0.5 * grid.dx
    if x.size and (x.min() < lo or x.max() > hi):
        raise OutOfRange(f"evaluation points [{x.min():g}, {x.max():g}] leave the grid window [{lo:g}, {hi:g}]")
    arg = np.outer(x - grid.x_min, grid.k)
    e = np.exp(1j * arg)
    if grid.n % 2 == 0:
        e[:, grid.n // 2] = np.cos(arg[:, grid.n // 2])
    return e / grid.n


def propagate_numeric_onto(field: ComplexField2D, params: ExperimentParams, distance: float,
                           grid1: Grid1D, grid2: Grid1D, check: bool = True) -> ComplexField2D:
    """Spectral propagation evaluated on other (typically finer, smaller) grids.

    Identical to :func:`propagate_numeric` followed by exact band-limited
    interpolation, without forming the propagated field on the input grid.
    """
    if distance < 0:
        raise NonPositiveDistance(f"distance must be >= 0, got {distance}")
    if check:
        _check_band(field.amp, "propagation input")
        check_edges(propagate_numeric(field, params, distance, check=False),
                    f"field after propagating {distance:g}")
    spec = np.fft.fft2(field.amp)
    spec *= _phase(field.grid1, params, distance)[:, None]
    spec *= _phase(field.grid2, params, distance)[None, :]
    e1 = _eval_matrix(field.grid1, grid1.x)
    e2 = _eval_matrix(field.grid2, grid2.x)
    with threadpool_limits(1):
        amp = e1 @ spec @ e2.T
    return ComplexField2D(grid1, grid2, amp)


MAX_KERNEL_PHASE_STEP = 0.5


def fresnel_matrix(src: Grid1D, dst: Grid1D, params: ExperimentParams, distance: float,
                   mass: float = 1.0) -> np.ndarray:
    """Quadrature matrix of the Fresnel kernel from ``src`` nodes to ``dst`` nodes.

    Raises :class:`UnderResolved` when the kernel phase changes by more than
    0.5 rad across one source cell anywhere in the output window.
    """
    if distance <= 0:
        raise NonPositiveDistance(f"kernel propagation needs distance > 0, got {distance}")
    lz = params.lam * distance / mass
    sep = np.abs(dst.x[:, None] - src.x[None, :])
    step = 2 * math.pi * sep.max() * src.dx / lz
    if step > MAX_KERNEL_PHASE_STEP:
        raise UnderResolved(
            f"Fresnel kernel phase changes {step:.2f} rad per source cell (limit {MAX_KERNEL_PHASE_STEP}); "
            "refine the source grid or narrow the output window"
        )
    return np.exp(1j * math.pi * sep**2 / lz) * (src.dx / cmath.sqrt(1j * lz))


def propagate_kernel(field: ComplexField2D, params: ExperimentParams, distance: float,
                     grid1: Grid1D | None = None, grid2: Grid1D | None = None) -> ComplexField2D:
    """Direct quadrature of the two-photon kernel ``K1(x1, x1') K2(x2, x2')``.

    The output may live on different grids than the input; rows and columns
    of the input that are identically zero (e.g. outside the slits) are
    skipped, so this is cheap for aperture-limited fields.
    """
    grid1 = grid1 or field.grid1
    grid2 = grid2 or field.grid2
    rows = np.flatnonzero(np.any(field.amp != 0, axis=1))
    cols = np.flatnonzero(np.any(field.amp != 0, axis=0))
    if rows.size == 0:
        return ComplexField2D(grid1, grid2, np.zeros((grid1.n, grid2.n)))
    k1 = fresnel_matrix(field.grid1, grid1, params, distance)[:, rows]
    k2 = fresnel_matrix(field.grid2, grid2, params, distance)[:, cols]
    with threadpool_limits(1):
        amp = k1 @ field.amp[np.ix_(rows, cols)] @ k2.T
    return ComplexField2D(grid1, grid2, amp)


# ---------------------------------------------------------------------------
# grid sizing

def _log_tol(tol: float) -> float:
    return math.log(1 / tol)


def fft_grid(var_x: float, var_k: float, tol: float = EDGE_TOL, margin: float = 1.15,
             min_n: int = 64, min_half_width: float = 0.0) -> Grid1D:
    """Power-of-two FFT grid holding a Gaussian of intensity variances ``var_x``, ``var_k``.

    The amplitude falls to ``tol`` at ``x = sqrt(4 var_x ln(1/tol))``; the same
    holds in k-space.  Spacing splits the spare resolution evenly between the
    window and the band.  ``min_half_width`` widens the window when values
    are needed further out than the Gaussian itself reaches.
    """
    a = max(margin * math.sqrt(4 * var_x * _log_tol(tol)), margin * min_half_width)
    kmax = margin * math.sqrt(4 * var_k * _log_tol(tol))
    need = 2 * a * kmax / math.pi
    n = max(min_n, 1 << max(1, math.ceil(math.log2(need))))
    dx = math.sqrt(2 * math.pi * a / (n * kmax))
    return Grid1D.centered(n * dx / 2, n)


def source_grid(params: ExperimentParams, distance: float, tol: float = EDGE_TOL) -> Grid1D:
    """Per-axis grid holding the source state at every distance up to ``distance``."""
    a = alpha(params, distance)
    s2, o2 = params.sigma**2, params.omega_big**2
    var_x = (o2**2 + a * a) / (4 * o2) + (s2**2 + a * a) / (4 * s2)
    var_k = (1 / s2 + 1 / o2) / 4
    return fft_grid(var_x, var_k, tol)


# ---------------------------------------------------------------------------
# separable route

def propagate_source_separable(params: ExperimentParams, distance: float, grid1: Grid1D,
                               grid2: Grid1D, tol: float = EDGE_TOL) -> ComplexField2D:
    """Numerically propagate the sampled source state in (r, q) and evaluate it on (grid1, grid2).

    The source factorises as ``R(r) Q(q)`` and the two-photon kernel as
    ``K_r K_q``, each a one-dimensional Fresnel kernel with twice the
    wavenumber.  Each factor is sampled on its own FFT grid, propagated
    spectrally and interpolated band-limitedly at the (r, q) values of the
    output nodes.  This keeps narrow ``sigma`` tractable where a full 2D grid
    would not fit in memory.
    """
    if distance < 0:
        raise NonPositiveDistance(f"distance must be >= 0, got {distance}")
    a = alpha(params, distance)
    s2, o2 = params.sigma**2, params.omega_big**2

    def factor(w2: float, coord: np.ndarray) -> np.ndarray:
        g = fft_grid((w2 * w2 + a * a) / (4 * w2), 1 / w2, tol, min_half_width=float(np.abs(coord).max()))
        amp = np.exp(-g.x**2 / w2)
        _check_band(amp, "separable source factor", axes=(0,))
        spec = np.fft.fft(amp) * _phase(g, params, distance, mass=2.0)
        edge = np.abs(np.fft.ifft(spec))
        if max(edge[0], edge[-1]) > tol * edge.max():
            raise AliasingRisk("separable factor reaches the grid boundary")
        with threadpool_limits(1):
            return _eval_matrix(g, coord) @ spec

    # (x1 +- x2)/2 over two uniform grids lie on a half-step lattice; evaluate
    # once per distinct value and scatter.
    x1, x2 = grid1.x, grid2.x
    r_vals, r_idx = _lattice(x1[:, None] + x2[None, :])
    q_vals, q_idx = _lattice(x1[:, None] - x2[None, :])
    big_r = factor(o2, r_vals / 2)[r_idx]
    big_q = factor(s2, q_vals / 2)[q_idx]
    amp = big_r * big_q / math.sqrt(math.pi * params.sigma * params.omega_big)
    return ComplexField2D(grid1, grid2, amp)


def _lattice(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rounded = np.round(values, 9)
    uniq, inv = np.unique(rounded, return_inverse=True)
    # evaluate at the exact (unrounded) representative of each class
    rep = np.zeros(uniq.size)
    rep[inv.ravel()] = values.ravel()
    return rep, inv.reshape(values.shape)
