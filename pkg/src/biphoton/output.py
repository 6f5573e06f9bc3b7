"""CSV, SVG and JSON writers.  Every file is written atomically (temp file + rename)."""
from __future__ import annotations

import contextlib
import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from xml.sax.saxutils import escape
from typing import Any, Iterable

import numpy as np

from .analysis import Pattern

CSV_HEADER = ("x", "density_analytic", "density_numeric")


def atomic_write(path: str | Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise
    return path


def pattern_csv(analytic: Pattern, numeric: Pattern) -> str:
    if analytic.axis != numeric.axis:
        raise ValueError("analytic and numeric patterns must share an axis")
    buf = io.StringIO()
    buf.write(",".join(CSV_HEADER) + "\n")
    for x, a, n in zip(analytic.x, analytic.density, numeric.density):
        buf.write(f"{x:.12e},{a:.12e},{n:.12e}\n")
    return buf.getvalue()


def rows_csv(rows: list[dict[str, Any]]) -> str:
    keys: list[str] = []
    for row in rows:
        keys += [k for k in row if k not in keys]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _fmt(row.get(k)) for k in keys})
    return buf.getvalue()


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.12e}"
    return "" if v is None else v


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"{type(obj).__name__} is not JSON serialisable")


def to_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, default=_json_default, allow_nan=True) + "\n"


# ---------------------------------------------------------------------------
# SVG

_W, _H = 800, 420
_M = dict(left=70, right=20, top=40, bottom=50)


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    span = hi - lo
    if span <= 0:
        return [lo]
    raw = span / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    first = math.ceil(lo / step) * step
    return [first + i * step for i in range(int((hi - first) / step + 1e-9) + 1)]


def pattern_svg(series: Iterable[tuple[Pattern, str]], title: str = "") -> str:
    """Line plot of one or more patterns on a shared axis.

    ``series`` holds ``(pattern, style)`` pairs with style ``"solid"`` or
    ``"dotted"`` (analytic solid, oracle dotted by convention).
    """
    series = list(series)
    x = series[0][0].x
    ymax = max(float(p.density.max()) for p, _ in series) * 1.05 or 1.0
    x0, x1 = float(x[0]), float(x[-1])
    pw = _W - _M["left"] - _M["right"]
    ph = _H - _M["top"] - _M["bottom"]

    def sx(v):
        return _M["left"] + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return _M["top"] + ph - v / ymax * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}" '
        'font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>',
        f'<rect x="{_M["left"]}" y="{_M["top"]}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{sx(t):.2f}" y1="{_M["top"] + ph}" x2="{sx(t):.2f}" y2="{_M["top"] + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{_M["top"] + ph + 18}" text-anchor="middle">{t:g}</text>')
    for t in _ticks(0.0, ymax):
        out.append(f'<line x1="{_M["left"] - 5}" y1="{sy(t):.2f}" x2="{_M["left"]}" y2="{sy(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{_M["left"] - 8}" y="{sy(t) + 4:.2f}" text-anchor="end">{t:.3g}</text>')
    out.append(f'<text x="{_W / 2:.1f}" y="{_H - 10}" text-anchor="middle">x</text>')
    out.append(f'<text x="16" y="{_H / 2:.1f}" text-anchor="middle" transform="rotate(-90 16 {_H / 2:.1f})">'
               'probability density</text>')

    colors = ("#1f3b73", "#c0392b", "#2e7d32")
    for i, (p, style) in enumerate(series):
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(p.x, p.density))
        dash = ' stroke-dasharray="2,3"' if style == "dotted" else ""
        color = colors[i % len(colors)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.3"{dash} points="{pts}"/>')
        ly = _M["top"] + 16 + 16 * i
        lx = _M["left"] + pw - 230
        out.append(f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 30}" y2="{ly - 4}" stroke="{color}" stroke-width="1.3"{dash}/>')
        out.append(f'<text x="{lx + 36}" y="{ly}">{escape(f"{p.provenance.value}: {p.label}")}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
