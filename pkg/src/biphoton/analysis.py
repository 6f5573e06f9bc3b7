"""Fringe metrics of 1D detection patterns and pattern-to-pattern comparison."""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import GridMismatch, TooFewPeaks, UnderResolved, ZeroNorm
from .grid import Grid1D

PEAK_THRESHOLD = 0.05
CENTRAL_FRINGES = 5
MIN_NODES_PER_PERIOD = 10


class Provenance(str, enum.Enum):
    ANALYTIC = "Analytic"
    NUMERIC = "NumericOracle"


@dataclass(frozen=True, eq=False)
class Pattern:
    """Detection probability density over ``axis``, normalised to unit integral."""

    axis: Grid1D
    density: np.ndarray
    provenance: Provenance
    label: str = ""

    def __post_init__(self):
        d = np.asarray(self.density, dtype=float)
        if d.shape != (self.axis.n,):
            raise GridMismatch(f"density has shape {d.shape}, axis has {self.axis.n} nodes")
        d.setflags(write=False)
        object.__setattr__(self, "density", d)
        object.__setattr__(self, "provenance", Provenance(self.provenance))

    @classmethod
    def from_values(cls, axis: Grid1D, values, provenance, label: str = "") -> "Pattern":
        """Normalise non-negative ``values`` to unit integral over ``axis``."""
        values = np.asarray(values, dtype=float)
        total = values.sum() * axis.dx
        if not np.isfinite(total) or total <= 0:
            raise ZeroNorm(f"pattern {label!r} has no weight")
        return cls(axis, values / total, provenance, label)

    @property
    def x(self) -> np.ndarray:
        return self.axis.x

    def integral(self) -> float:
        return float(self.density.sum() * self.axis.dx)

    def window(self, half_width: float) -> "Pattern":
        """Restrict to nodes with ``|x| <= half_width`` and renormalise."""
        keep = np.abs(self.x) <= half_width * (1 + 1e-12)
        idx = np.flatnonzero(keep)
        if idx.size < 2:
            raise GridMismatch(f"window +-{half_width} keeps fewer than two nodes")
        dx = self.axis.dx
        sub = Grid1D(self.x[idx[0]], self.x[idx[0]] + dx * idx.size, idx.size)
        return Pattern.from_values(sub, self.density[idx], self.provenance, self.label)


@dataclass(frozen=True)
class FringeMetrics:
    spacing: float
    visibility: float
    n_peaks_used: int
    envelope_halfwidth: float | None
    peaks: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return asdict(self)


def _refine(y: np.ndarray, i: int) -> tuple[float, float]:
    """Parabolic sub-node offset and value of an extremum at interior index ``i``."""
    a, b, c = y[i - 1], y[i], y[i + 1]
    den = a - 2 * b + c
    if den == 0:
        return 0.0, float(b)
    off = 0.5 * (a - c) / den
    return float(off), float(b - 0.25 * (a - c) * off)


def _local_extrema(y: np.ndarray, sign: int) -> np.ndarray:
    s = sign * y
    inner = (s[1:-1] > s[:-2]) & (s[1:-1] >= s[2:])
    return np.flatnonzero(inner) + 1


def fringe_metrics(p: Pattern) -> FringeMetrics:
    """Measure fringe spacing, local visibility and envelope half-width.

    Peaks are local maxima above 5% of the global maximum, refined with a
    parabola through the three nodes around each.  Spacing is the mean
    separation of the (up to) five peaks nearest the axis centre.
    Visibility compares the central peak to the mean of its two adjacent
    minima.
    """
    y = p.density
    x = p.x
    dx = p.axis.dx
    peak_idx = _local_extrema(y, +1)
    peak_idx = peak_idx[y[peak_idx] >= PEAK_THRESHOLD * y.max()]
    if peak_idx.size < 3:
        raise TooFewPeaks(f"found {peak_idx.size} peaks in pattern {p.label!r}, need >= 3")

    refined = [(x[i] + dx * off, val) for i, off, val in
               ((i, *_refine(y, i)) for i in peak_idx)]
    pos = np.array([r[0] for r in refined])
    val = np.array([r[1] for r in refined])

    centre = 0.5 * (x[0] + x[-1])
    nearest = np.sort(np.argsort(np.abs(pos - centre), kind="stable")[:CENTRAL_FRINGES])
    spacing = float(np.mean(np.diff(pos[nearest])))
    if spacing / dx < MIN_NODES_PER_PERIOD * (1 - 1e-9):
        raise UnderResolved(
            f"fringe period {spacing:.4g} spans {spacing / dx:.1f} nodes, need >= {MIN_NODES_PER_PERIOD}"
        )

    c = int(np.argmin(np.abs(pos - centre)))
    ic = peak_idx[c]
    minima = []
    for j in (c - 1, c + 1):
        if 0 <= j < peak_idx.size:
            lo, hi = sorted((ic, peak_idx[j]))
            k = lo + int(np.argmin(y[lo:hi + 1]))
            minima.append(_refine(y, k)[1] if 0 < k < y.size - 1 else float(y[k]))
    i_max = val[c]
    i_min = max(float(np.mean(minima)), 0.0)
    visibility = float(np.clip((i_max - i_min) / (i_max + i_min), 0.0, 1.0))

    return FringeMetrics(
        spacing=spacing,
        visibility=visibility,
        n_peaks_used=int(nearest.size),
        envelope_halfwidth=_envelope_halfwidth(pos, val, c),
        peaks=tuple(float(v) for v in pos[nearest]),
    )


def _envelope_halfwidth(pos: np.ndarray, val: np.ndarray, c: int) -> float | None:
    # Half-maximum crossing of the peak heights on either side of the central
    # peak, linearly interpolated; None if the envelope never halves in the window.
    half = 0.5 * val[c]
    widths = []
    for step in (-1, 1):
        j = c
        while 0 <= j + step < pos.size and val[j + step] > half:
            j += step
        if not 0 <= j + step < pos.size:
            continue
        x0, x1, v0, v1 = pos[j], pos[j + step], val[j], val[j + step]
        widths.append(abs(x0 + (half - v0) * (x1 - x0) / (v1 - v0) - pos[c]))
    return float(np.mean(widths)) if widths else None


@dataclass(frozen=True)
class Comparison:
    l2_err: float
    max_err: float
    spacing_ratio: float | None
    visibility_diff: float | None

    def to_dict(self) -> dict:
        return asdict(self)


def compare(p1: Pattern, p2: Pattern, window: float | None = None) -> Comparison:
    """Compare two patterns on a shared axis.

    ``l2_err = ||p1 - p2|| / ||p1||`` and ``max_err = max|p1 - p2| / max p1``,
    so ``p1`` is the reference; swapping the inputs changes only this
    normalisation.  With ``window`` both patterns are first restricted to
    ``|x| <= window`` and renormalised.  Fringe-metric deltas are ``None``
    when either pattern has too few fringes to measure.
    """
    if p1.axis != p2.axis:
        raise GridMismatch(f"cannot compare patterns on different axes: {p1.axis} vs {p2.axis}")
    if window is not None:
        p1, p2 = p1.window(window), p2.window(window)
    diff = p1.density - p2.density
    l2 = math.sqrt(float(np.sum(diff**2)) / float(np.sum(p1.density**2)))
    mx = float(np.max(np.abs(diff)) / np.max(p1.density))
    try:
        m1, m2 = fringe_metrics(p1), fringe_metrics(p2)
    except (TooFewPeaks, UnderResolved):
        return Comparison(l2, mx, None, None)
    return Comparison(l2, mx, m2.spacing / m1.spacing, m2.visibility - m1.visibility)
