"""Gantt charts of a schedule: processor rows for tasks, link rows for messages.

Both renderers are deterministic: identical schedules give identical text.
"""

from __future__ import annotations

from html import escape

from ._util import natural_key

__all__ = ["render_svg", "render_ascii", "chart_rows"]

_ROW_H = 28
_BAR_H = 20
_LABEL_W = 60
_PLOT_W = 800
_TASK_FILL = "#8fb8de"
_MSG_FILL = "#f4b183"


def chart_rows(schedule):
    """[(row label, [(start, finish, text, kind)])] with processors first, then links."""
    rows = []
    procs = list(schedule.processors) or sorted({s.processor for s in schedule.tasks.values()}, key=natural_key)
    for p in procs:
        bars = [(s.start, s.finish, s.task, "task") for s in schedule.on_processor(p)]
        rows.append((p, bars))
    reservations = schedule.link_reservations()
    for link in sorted(reservations, key=natural_key):
        bars = [(s, f, f"{a}>{b}", "message") for s, f, (a, b) in reservations[link] if f > s]
        rows.append((link, bars))
    return rows


def _fmt(x) -> str:
    return f"{float(x):.3f}".rstrip("0").rstrip(".")


def _ticks(horizon: float, count: int = 10) -> list[float]:
    if horizon <= 0:
        return [0.0]
    raw = horizon / count
    mag = 10 ** len(str(int(raw))) / 10 if raw >= 1 else 1
    step = next(m * mag for m in (1, 2, 5, 10) if m * mag >= raw)
    out, t = [], 0.0
    while t <= horizon + 1e-9:
        out.append(t)
        t += step
    return out


def render_svg(schedule, title: str | None = None) -> str:
    rows = chart_rows(schedule)
    horizon = float(schedule.makespan) if schedule.tasks else 0.0
    scale = _PLOT_W / horizon if horizon > 0 else 0.0
    top = 30
    height = top + _ROW_H * len(rows) + 40
    width = _LABEL_W + _PLOT_W + 20
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="monospace" font-size="11">',
        f'<text x="{_LABEL_W}" y="18">{escape(title or f"{schedule.variant} makespan {_fmt(schedule.makespan)}")}</text>',
    ]
    for i, (label, bars) in enumerate(rows):
        y = top + i * _ROW_H
        out.append(f'<text x="4" y="{y + 15}">{escape(label)}</text>')
        for start, finish, text, kind in bars:
            x = _LABEL_W + float(start) * scale
            w = (float(finish) - float(start)) * scale
            fill = _TASK_FILL if kind == "task" else _MSG_FILL
            out.append(
                f'<rect class="{kind}" x="{x:.2f}" y="{y}" width="{w:.2f}" height="{_BAR_H}" '
                f'fill="{fill}" stroke="#333"><title>{escape(text)} [{_fmt(start)}, {_fmt(finish)})</title></rect>'
            )
            out.append(f'<text x="{x + 2:.2f}" y="{y + 14}">{escape(text)}</text>')
    axis_y = top + _ROW_H * len(rows) + 5
    out.append(f'<line x1="{_LABEL_W}" y1="{axis_y}" x2="{_LABEL_W + _PLOT_W}" y2="{axis_y}" stroke="#000"/>')
    for t in _ticks(horizon):
        x = _LABEL_W + t * scale
        out.append(f'<line x1="{x:.2f}" y1="{axis_y}" x2="{x:.2f}" y2="{axis_y + 4}" stroke="#000"/>')
        out.append(f'<text x="{x:.2f}" y="{axis_y + 16}" text-anchor="middle">{_fmt(t)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_ascii(schedule, width: int = 72) -> str:
    """Text chart; each bar shows its label padded with ``=``."""
    rows = chart_rows(schedule)
    horizon = float(schedule.makespan) if schedule.tasks else 0.0
    scale = width / horizon if horizon > 0 else 0.0
    label_w = max([len(r[0]) for r in rows] + [4])
    lines = []
    for label, bars in rows:
        cells = [" "] * width
        for start, finish, text, _ in bars:
            a = min(width - 1, int(float(start) * scale))
            b = max(a + 1, min(width, int(round(float(finish) * scale))))
            cells[a:b] = list((text + "=" * (b - a))[: b - a]) if b - a > 1 else ["|"]
        lines.append(f"{label.ljust(label_w)} |{''.join(cells)}|")
    lines.append(f"{''.ljust(label_w)} 0{_fmt(horizon).rjust(width + 1)}")
    return "\n".join(lines) + "\n"
