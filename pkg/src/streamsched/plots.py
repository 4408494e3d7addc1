"""Minimal dependency-free SVG line and bar charts for experiment summaries."""

from __future__ import annotations

from html import escape

__all__ = ["line_chart", "bar_chart"]

_W, _H = 640, 400
_L, _R, _T, _B = 60, 150, 30, 50
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f")


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def _frame(title, xlabel, ylabel):
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" font-family="sans-serif" font-size="11">',
        f'<text x="{_L}" y="18" font-size="13">{escape(title)}</text>',
        f'<line x1="{_L}" y1="{_H - _B}" x2="{_W - _R}" y2="{_H - _B}" stroke="#000"/>',
        f'<line x1="{_L}" y1="{_T}" x2="{_L}" y2="{_H - _B}" stroke="#000"/>',
        f'<text x="{(_L + _W - _R) / 2:.1f}" y="{_H - 12}" text-anchor="middle">{escape(xlabel)}</text>',
        f'<text x="14" y="{(_T + _H - _B) / 2:.1f}" transform="rotate(-90 14 {(_T + _H - _B) / 2:.1f})" '
        f'text-anchor="middle">{escape(ylabel)}</text>',
    ]


def _yaxis(out, lo, hi, ymap):
    for k in range(6):
        v = lo + (hi - lo) * k / 5
        y = ymap(v)
        out.append(f'<line x1="{_L - 4}" y1="{y:.1f}" x2="{_L}" y2="{y:.1f}" stroke="#000"/>')
        out.append(f'<text x="{_L - 6}" y="{y + 4:.1f}" text-anchor="end">{_fmt(v)}</text>')


def line_chart(series: dict, *, title: str = "", xlabel: str = "", ylabel: str = "") -> str:
    """``series`` maps a legend label to a list of (x, y) points."""
    pts = [p for s in series.values() for p in s]
    out = _frame(title, xlabel, ylabel)
    if pts:
        xs = [float(x) for x, _ in pts]
        ys = [float(y) for _, y in pts]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(0.0, min(ys)), max(ys)
        if x1 == x0:
            x1 = x0 + 1
        if y1 == y0:
            y1 = y0 + 1
        xmap = lambda v: _L + (float(v) - x0) / (x1 - x0) * (_W - _L - _R)
        ymap = lambda v: _H - _B - (float(v) - y0) / (y1 - y0) * (_H - _T - _B)
        _yaxis(out, y0, y1, ymap)
        for x in sorted(set(xs)):
            out.append(f'<text x="{xmap(x):.1f}" y="{_H - _B + 15}" text-anchor="middle">{_fmt(x)}</text>')
        for i, (label, s) in enumerate(series.items()):
            color = _COLORS[i % len(_COLORS)]
            path = " ".join(f"{xmap(x):.1f},{ymap(y):.1f}" for x, y in s)
            out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.5"/>')
            for x, y in s:
                out.append(f'<circle cx="{xmap(x):.1f}" cy="{ymap(y):.1f}" r="2.5" fill="{color}"/>')
            ly = _T + 14 * i
            out.append(f'<rect x="{_W - _R + 10}" y="{ly}" width="10" height="10" fill="{color}"/>')
            out.append(f'<text x="{_W - _R + 24}" y="{ly + 9}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def bar_chart(values: dict, *, title: str = "", ylabel: str = "") -> str:
    """``values`` maps a bar label to its height."""
    out = _frame(title, "", ylabel)
    if values:
        hi = max(max(float(v) for v in values.values()), 1e-12)
        ymap = lambda v: _H - _B - float(v) / hi * (_H - _T - _B)
        _yaxis(out, 0.0, hi, ymap)
        slot = (_W - _L - _R) / len(values)
        for i, (label, v) in enumerate(values.items()):
            x = _L + slot * i + slot * 0.15
            y = ymap(v)
            out.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{slot * 0.7:.1f}" height="{_H - _B - y:.1f}" '
                       f'fill="{_COLORS[i % len(_COLORS)]}"/>')
            out.append(f'<text x="{x + slot * 0.35:.1f}" y="{_H - _B + 15}" text-anchor="middle">{escape(label)}</text>')
            out.append(f'<text x="{x + slot * 0.35:.1f}" y="{y - 4:.1f}" text-anchor="middle">{_fmt(float(v))}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
