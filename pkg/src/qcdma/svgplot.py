"""Minimal deterministic SVG line plots.

Polylines, ticks and a legend, nothing else; output bytes depend only on
the input data, so repeated runs produce identical files.  Intended for
quick inspection of sweep and validation CSVs.
"""

from __future__ import annotations

import math

__all__ = ["render_line_plot"]

_WIDTH, _HEIGHT = 800, 500
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 160, 30, 55
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _linear_ticks(lo: float, hi: float, count: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / (count - 1)
    mag = 10.0 ** math.floor(math.log10(raw))
    step = 10.0 * mag
    for mult in (1.0, 2.0, 2.5, 5.0, 10.0):
        if mult * mag >= raw:
            step = mult * mag
            break
    ticks = []
    t = math.ceil(lo / step) * step
    while t <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return ticks or [lo, hi]


def _log_ticks(lo: float, hi: float) -> list[float]:
    lo_e = math.floor(math.log10(lo))
    hi_e = math.ceil(math.log10(hi))
    return [10.0 ** e for e in range(int(lo_e), int(hi_e) + 1)]


def render_line_plot(
    series: dict[str, tuple[list[float], list[float]]],
    xlabel: str,
    ylabel: str,
    logy: bool = False,
    title: str | None = None,
) -> str:
    """Render one polyline per series; each maps a label to (xs, ys).

    Series may have different lengths (log plots drop nonpositive points
    per series).  With ``logy`` all y values must be positive.
    """
    pairs = {
        label: ([float(v) for v in xs], [float(v) for v in ys])
        for label, (xs, ys) in series.items()
        if len(xs) > 0
    }
    if not pairs:
        raise ValueError("nothing to plot")
    all_x = [v for xs, _ in pairs.values() for v in xs]
    all_y = [v for _, ys in pairs.values() for v in ys]
    if logy and min(all_y) <= 0:
        raise ValueError("log scale requires positive values")
    x_lo, x_hi = min(all_x), max(all_x)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    y_lo, y_hi = min(all_y), max(all_y)
    if y_hi == y_lo:
        if logy:
            y_lo = y_hi / 10.0
        else:
            y_hi, y_lo = y_hi + 1.0, y_lo - 1.0

    def tx(v: float) -> float:
        return _MARGIN_L + (v - x_lo) / (x_hi - x_lo) * (_WIDTH - _MARGIN_L - _MARGIN_R)

    def ty(v: float) -> float:
        if logy:
            frac = (math.log10(v) - math.log10(y_lo)) / (
                math.log10(y_hi) - math.log10(y_lo)
            )
        else:
            frac = (v - y_lo) / (y_hi - y_lo)
        return _HEIGHT - _MARGIN_B - frac * (_HEIGHT - _MARGIN_T - _MARGIN_B)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_WIDTH // 2}" y="20" text-anchor="middle" '
            f'font-family="sans-serif" font-size="14">{title}</text>'
        )
    x0, y0 = _MARGIN_L, _HEIGHT - _MARGIN_B
    x1, y1 = _WIDTH - _MARGIN_R, _MARGIN_T
    parts.append(
        f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" '
        f'fill="none" stroke="black" stroke-width="1"/>'
    )
    for t in _linear_ticks(x_lo, x_hi):
        px = tx(t)
        parts.append(
            f'<line x1="{px:.2f}" y1="{y0}" x2="{px:.2f}" y2="{y0 + 5}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{y0 + 18}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>'
        )
    y_ticks = _log_ticks(y_lo, y_hi) if logy else _linear_ticks(y_lo, y_hi)
    for t in y_ticks:
        if logy and not (y_lo <= t <= y_hi):
            continue
        py = ty(t)
        parts.append(
            f'<line x1="{x0 - 5}" y1="{py:.2f}" x2="{x0}" y2="{py:.2f}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{x0 - 8}" y="{py + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_fmt(t)}</text>'
        )
    parts.append(
        f'<text x="{(x0 + x1) / 2:.2f}" y="{_HEIGHT - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{xlabel}</text>'
    )
    parts.append(
        f'<text x="18" y="{(y0 + y1) / 2:.2f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 18 {(y0 + y1) / 2:.2f})">{ylabel}</text>'
    )
    for k, (label, (xs, ys)) in enumerate(pairs.items()):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{tx(px):.2f},{ty(py):.2f}" for px, py in zip(xs, ys))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = _MARGIN_T + 16 + 18 * k
        parts.append(
            f'<line x1="{x1 + 10}" y1="{ly - 4}" x2="{x1 + 34}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{x1 + 40}" y="{ly}" font-family="sans-serif" '
            f'font-size="12">{label}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
