"""Double-slit truncation and the same-slit / different-slit bookkeeping."""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import OverlappingSlits, UnderResolvedSlit, ZeroNorm
from .fields import ComplexField2D
from .grid import Grid1D
from .params import ExperimentParams

log = logging.getLogger(__name__)

MIN_NODES_PER_SLIT = 8
# Closed intervals: nodes on a slit edge transmit.  The slack absorbs rounding
# in node positions only.
_EDGE_SLACK = 1e-9


@dataclass(frozen=True)
class DoubleSlitMask:
    slit_sep: float
    slit_width: float

    def __post_init__(self):
        if not 0 < self.slit_width < self.slit_sep:
            raise OverlappingSlits(f"need 0 < slit_width < slit_sep, got {self.slit_width}, {self.slit_sep}")

    @classmethod
    def from_params(cls, params: ExperimentParams) -> "DoubleSlitMask":
        return cls(params.slit_sep, params.slit_width)

    def slit_index(self, x: np.ndarray) -> np.ndarray:
        """-1 / +1 for nodes in the left / right slit, 0 where blocked."""
        x = np.asarray(x, dtype=float)
        half = 0.5 * self.slit_width * (1 + _EDGE_SLACK)
        out = np.zeros(x.shape, dtype=int)
        out[np.abs(x + self.slit_sep / 2) <= half] = -1
        out[np.abs(x - self.slit_sep / 2) <= half] = 1
        return out

    def transmission(self, x: np.ndarray) -> np.ndarray:
        return (self.slit_index(x) != 0).astype(float)


def _require_resolved(grid: Grid1D, mask: DoubleSlitMask) -> None:
    nodes = mask.slit_width / grid.dx
    if nodes < MIN_NODES_PER_SLIT:
        raise UnderResolvedSlit(
            f"slit width {mask.slit_width} spans {nodes:.1f} nodes, need >= {MIN_NODES_PER_SLIT}"
        )


def apply_mask(field: ComplexField2D, mask: DoubleSlitMask) -> ComplexField2D:
    _require_resolved(field.grid1, mask)
    _require_resolved(field.grid2, mask)
    t1 = mask.transmission(field.grid1.x)
    t2 = mask.transmission(field.grid2.x)
    return ComplexField2D(field.grid1, field.grid2, field.amp * t1[:, None] * t2[None, :])


@dataclass(frozen=True)
class SlitCaseWeights:
    p_same: float
    p_diff: float
    p_blocked: float

    @property
    def ratio(self) -> float:
        """``p_diff / p_same`` (inf when nothing passes the same slit)."""
        return self.p_diff / self.p_same if self.p_same > 0 else math.inf

    def to_dict(self) -> dict:
        return {**asdict(self), "ratio": self.ratio}


def case_weights(field: ComplexField2D, mask: DoubleSlitMask, total: float | None = None) -> SlitCaseWeights:
    """Probability that both photons use the same slit, different slits, or are blocked.

    ``field`` should be normalised before masking.  When it only covers a
    window around the slits, pass the full-plane ``total`` (1 for a normalised
    state) and the mass outside the window is counted as blocked.
    """
    rho = field.density() * field.cell
    s1 = mask.slit_index(field.grid1.x)
    s2 = mask.slit_index(field.grid2.x)
    both = (s1[:, None] != 0) & (s2[None, :] != 0)
    same = both & (s1[:, None] == s2[None, :])
    diff = both & ~same
    p_same, p_diff = float(rho[same].sum()), float(rho[diff].sum())
    if total is None:
        total = float(rho.sum())
        blocked = float(rho[~both].sum())
    else:
        blocked = total - p_same - p_diff
    if total <= 0:
        raise ZeroNorm("case weights of a zero field")
    return SlitCaseWeights(p_same / total, p_diff / total, blocked / total)


def rq_case_weights(field: ComplexField2D, mask: DoubleSlitMask, total: float | None = None) -> SlitCaseWeights:
    """Case weights over the approximate (r, q) rectangles.

    Case (a): ``|r -+ d/2| <= eps/2`` and ``|q| <= eps/2``; case (b): the same
    with r and q exchanged.  Nodes are classified individually, so the
    rotated regions are resolved only to the grid's staircase.
    """
    x1 = field.grid1.x[:, None]
    x2 = field.grid2.x[None, :]
    r, q = (x1 + x2) / 2, (x1 - x2) / 2
    half = 0.5 * mask.slit_width * (1 + _EDGE_SLACK)
    d2 = mask.slit_sep / 2
    in_a = (np.abs(np.abs(r) - d2) <= half) & (np.abs(q) <= half)
    in_b = (np.abs(np.abs(q) - d2) <= half) & (np.abs(r) <= half)
    rho = field.density() * field.cell
    p_a, p_b = float(rho[in_a].sum()), float(rho[in_b].sum())
    if total is None:
        total = float(rho.sum())
    if total <= 0:
        raise ZeroNorm("case weights of a zero field")
    return SlitCaseWeights(p_a / total, p_b / total, 1 - (p_a + p_b) / total)


def aperture_grid(params: ExperimentParams, nodes_per_slit: int = 16, pad: int | None = None) -> Grid1D:
    """Symmetric grid whose cells tile both slits exactly.

    The spacing is ``slit_width / m``; ``m`` starts at ``nodes_per_slit`` and
    is raised until the slit separation is a whole number of cells.  If no
    ``m <= 16 * nodes_per_slit`` works the slit widths are quantised to the
    nearest cell count and a warning is logged.  ``pad`` cells on each side
    (default ``m/2 + 2``) hold the (r, q) rectangles, which reach ``eps/2``
    beyond each slit.
    """
    d, eps = params.slit_sep, params.slit_width
    m = max(int(nodes_per_slit), MIN_NODES_PER_SLIT)
    for cand in range(m, 16 * m + 1):
        cells = d * cand / eps
        if abs(cells - round(cells)) < 1e-9 * max(cells, 1):
            m = cand
            break
    else:
        log.warning("slit separation %g is not a whole number of cells of width %g/%d; "
                    "slit widths will be quantised", d, eps, m)
    dx = eps / m
    if pad is None:
        pad = m // 2 + 2
    span = round((d + eps) / dx) + 2 * pad
    first = -0.5 * (span - 1) * dx
    return Grid1D(first, first + span * dx, span)
