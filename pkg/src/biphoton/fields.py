"""Two-photon amplitudes sampled on (x1, x2) grids.

Quadrature is the midpoint rule on the uniform grid and the Fourier
convention is ``psi~(k) = (2 pi)^-1/2 int psi(x) exp(-i k x) dx`` per axis.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analysis import Pattern, Provenance
from .errors import GridMismatch, GridTooNarrow, NumericError, OutOfRange, ZeroNorm
from .grid import Grid1D, require_same
from .params import ExperimentParams

EDGE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class ComplexField2D:
    grid1: Grid1D
    grid2: Grid1D
    amp: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amp, dtype=np.complex128)
        if amp.shape != (self.grid1.n, self.grid2.n):
            raise GridMismatch(f"amplitude shape {amp.shape} does not match grids "
                               f"({self.grid1.n}, {self.grid2.n})")
        if not np.all(np.isfinite(amp)):
            raise NumericError("field contains non-finite values")
        amp.setflags(write=False)
        object.__setattr__(self, "amp", amp)

    @property
    def cell(self) -> float:
        return self.grid1.dx * self.grid2.dx

    def density(self) -> np.ndarray:
        return np.abs(self.amp) ** 2

    def scaled(self, factor: complex) -> "ComplexField2D":
        return ComplexField2D(self.grid1, self.grid2, self.amp * factor)

    def edge_ratio(self) -> float:
        """Largest boundary amplitude relative to the peak amplitude."""
        a = np.abs(self.amp)
        peak = a.max()
        if peak == 0:
            raise ZeroNorm("field is identically zero")
        edge = max(a[0].max(), a[-1].max(), a[:, 0].max(), a[:, -1].max())
        return float(edge / peak)


def _rq(grid1: Grid1D, grid2: Grid1D) -> tuple[np.ndarray, np.ndarray]:
    x1 = grid1.x[:, None]
    x2 = grid2.x[None, :]
    return (x1 + x2) / 2, (x1 - x2) / 2


def check_edges(field: ComplexField2D, what: str = "field", tol: float = EDGE_TOL) -> None:
    ratio = field.edge_ratio()
    if ratio > tol:
        raise GridTooNarrow(f"{what}: boundary amplitude is {ratio:.2e} of peak (limit {tol:g}); widen the grid")


def sample_gepr(params: ExperimentParams, grid1: Grid1D, grid2: Grid1D,
                check: bool = True) -> ComplexField2D:
    """Sample the entangled Gaussian source state

    ``Psi(x1, x2) = exp(-(x1-x2)^2 / 4 sigma^2) exp(-(x1+x2)^2 / 4 Omega^2) / sqrt(pi sigma Omega)``.

    With ``check`` the grid must hold the state down to 1e-6 of its peak at
    every boundary, otherwise :class:`GridTooNarrow` is raised.
    """
    s, o = params.sigma, params.omega_big
    x1 = grid1.x[:, None]
    x2 = grid2.x[None, :]
    amp = np.exp(-((x1 - x2) ** 2) / (4 * s * s) - ((x1 + x2) ** 2) / (4 * o * o)) / math.sqrt(math.pi * s * o)
    field = ComplexField2D(grid1, grid2, amp)
    if check:
        check_edges(field, "source state")
    return field


def norm2(field: ComplexField2D) -> float:
    return float(np.sum(field.density()) * field.cell)


def normalize(field: ComplexField2D) -> ComplexField2D:
    n = norm2(field)
    if n == 0:
        raise ZeroNorm("cannot normalise a field that is identically zero")
    return field.scaled(1 / math.sqrt(n))


@dataclass(frozen=True)
class Moments:
    mean_x1: float
    mean_x2: float
    var_x1: float
    var_x2: float
    cov: float


def moments(field: ComplexField2D) -> Moments:
    """First and second moments of ``|Psi|^2`` (normalised internally)."""
    rho = field.density()
    total = rho.sum()
    if total == 0:
        raise ZeroNorm("moments of a zero field")
    rho = rho / total
    x1 = field.grid1.x
    x2 = field.grid2.x
    p1 = rho.sum(axis=1)
    p2 = rho.sum(axis=0)
    m1 = float(p1 @ x1)
    m2 = float(p2 @ x2)
    v1 = float(p1 @ (x1 - m1) ** 2)
    v2 = float(p2 @ (x2 - m2) ** 2)
    cov = float((x1 - m1) @ rho @ (x2 - m2))
    return Moments(m1, m2, v1, v2, cov)


def spectrum(field: ComplexField2D) -> np.ndarray:
    """Continuous 2D Fourier transform sampled on the FFT wavenumber grid (FFT order).

    The grid offset ``x_min`` only contributes a phase, which is included so the
    result approximates ``(2 pi)^-1 int int Psi exp(-i k1 x1 - i k2 x2)``.
    """
    g1, g2 = field.grid1, field.grid2
    phase = np.exp(-1j * g1.k * g1.x_min)[:, None] * np.exp(-1j * g2.k * g2.x_min)[None, :]
    return np.fft.fft2(field.amp) * phase * field.cell / (2 * np.pi)


@dataclass(frozen=True)
class SpectralMoments:
    var_k1: float
    var_k2: float
    norm2_k: float


def spectral_moments(field: ComplexField2D) -> SpectralMoments:
    """Wave-vector variances of ``|Psi~(k1, k2)|^2``; ``norm2_k`` checks Parseval."""
    spec = np.abs(spectrum(field)) ** 2
    dk1 = 2 * np.pi / (field.grid1.n * field.grid1.dx)
    dk2 = 2 * np.pi / (field.grid2.n * field.grid2.dx)
    total = spec.sum()
    if total == 0:
        raise ZeroNorm("spectral moments of a zero field")
    p1 = spec.sum(axis=1) / total
    p2 = spec.sum(axis=0) / total
    k1, k2 = field.grid1.k, field.grid2.k
    m1, m2 = p1 @ k1, p2 @ k2
    return SpectralMoments(float(p1 @ (k1 - m1) ** 2), float(p2 @ (k2 - m2) ** 2),
                           float(total * dk1 * dk2))


def diagonal_slice(field: ComplexField2D, provenance=Provenance.NUMERIC, label: str = "coincidence") -> Pattern:
    """Both detectors at the same position: ``|Psi(x, x)|^2``, normalised over x."""
    require_same(field.grid1, field.grid2, "diagonal slice needs identical axes;")
    return Pattern.from_values(field.grid1, np.abs(np.diagonal(field.amp)) ** 2, provenance, label)


def conditional_slice(field: ComplexField2D, x2_value: float = 0.0,
                      provenance=Provenance.NUMERIC, label: str = "conditional") -> Pattern:
    """Detector 2 held at ``x2_value`` (nearest node): ``|Psi(x1, x2_value)|^2`` over x1."""
    if not field.grid2.contains(x2_value):
        raise OutOfRange(f"x2={x2_value} outside [{field.grid2.x[0]}, {field.grid2.x[-1]}]")
    j = field.grid2.index_of(x2_value)
    return Pattern.from_values(field.grid1, np.abs(field.amp[:, j]) ** 2, provenance, label)


def save_snapshot(field: ComplexField2D, path: str | Path) -> tuple[Path, Path]:
    """Write ``<path>.json`` (grids, layout) and ``<path>.bin`` (little-endian complex128, row-major).

    Intended for debugging; the layout is not a stable format.
    """
    path = Path(path)
    header = {
        "grid1": field.grid1.to_dict(),
        "grid2": field.grid2.to_dict(),
        "dtype": "<c16",
        "order": "C",
        "shape": list(field.amp.shape),
    }
    jpath, bpath = path.with_suffix(".json"), path.with_suffix(".bin")
    jpath.write_text(json.dumps(header, indent=2))
    bpath.write_bytes(field.amp.astype("<c16").tobytes(order="C"))
    return jpath, bpath


def load_snapshot(path: str | Path) -> ComplexField2D:
    path = Path(path)
    header = json.loads(path.with_suffix(".json").read_text())
    g1 = Grid1D.from_dict(header["grid1"])
    g2 = Grid1D.from_dict(header["grid2"])
    amp = np.frombuffer(path.with_suffix(".bin").read_bytes(), dtype="<c16").reshape(header["shape"])
    return ComplexField2D(g1, g2, amp.copy())
