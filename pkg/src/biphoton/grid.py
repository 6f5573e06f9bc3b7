from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, GridMismatch, UnknownKey


@dataclass(frozen=True)
class Grid1D:
    """Uniform axis of ``n`` nodes, ``x_i = x_min + i * dx`` with ``dx = (x_max - x_min) / n``.

    Each node is the midpoint of a cell of width ``dx``, so ``dx * sum(f)``
    is the midpoint-rule quadrature used throughout the package.
    """

    x_min: float
    x_max: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max) and self.x_min < self.x_max):
            raise ConfigError(f"grid needs x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError(f"grid needs an integer n >= 2, got {self.n}")
        object.__setattr__(self, "x_min", float(self.x_min))
        object.__setattr__(self, "x_max", float(self.x_max))
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def centered(cls, half_width: float, n: int) -> "Grid1D":
        """Grid of spacing ``2*half_width/n`` with a node at exactly 0 (index ``n//2``)."""
        dx = 2.0 * half_width / n
        shift = (n // 2) * dx
        return cls(-shift, -shift + n * dx, n)

    @classmethod
    def from_dict(cls, data: dict) -> "Grid1D":
        unknown = set(data) - {"x_min", "x_max", "n"}
        if unknown:
            raise UnknownKey(f"unknown grid key(s): {', '.join(sorted(unknown))}")
        try:
            return cls(data["x_min"], data["x_max"], data["n"])
        except KeyError as exc:
            raise ConfigError(f"grid is missing {exc.args[0]!r}") from exc

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "x_max": self.x_max, "n": self.n}

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @cached_property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.n)

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n, d=self.dx)

    def index_of(self, value: float) -> int:
        """Index of the node nearest ``value``."""
        return int(np.clip(np.rint((value - self.x_min) / self.dx), 0, self.n - 1))

    def contains(self, value: float) -> bool:
        return self.x[0] - 0.5 * self.dx <= value <= self.x[-1] + 0.5 * self.dx

    def is_symmetric(self, rtol: float = 1e-12) -> bool:
        return bool(np.allclose(self.x, -self.x[::-1], rtol=0, atol=rtol * max(abs(self.x_min), abs(self.x_max))))


def require_same(a: Grid1D, b: Grid1D, what: str = "grids") -> None:
    if a != b:
        raise GridMismatch(f"{what} differ: {a} vs {b}")
