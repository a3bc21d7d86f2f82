"""Minimal standalone SVG line charts (lines, optional log axes, legend)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from xml.sax.saxutils import escape

from eitdecay.output import CsvFormatError, read_table

WIDTH, HEIGHT = 800, 600
LEFT, RIGHT, TOP, BOTTOM = 90, 170, 40, 70
COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"]


class PlotError(ValueError):
    pass


@dataclass
class PlotSpec:
    x: str
    y: str
    group: str | None = None
    groups: list[str] | None = None
    log_x: bool = False
    log_y: bool = False
    title: str = ""


def _fmt(v: float) -> str:
    return f"{v:.2f}"


def _tick_label(v: float) -> str:
    if v == 0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.0e}".replace("e+0", "e").replace("e-0", "e-").replace("e+", "e")
    return f"{v:g}"


def _nice_step(span: float, target: int = 6) -> float:
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if m * mag >= raw:
            return m * mag
    return 10 * mag


class _Axis:
    def __init__(self, values, log: bool, lo_px: float, hi_px: float):
        if log:
            values = [v for v in values if v > 0]
            if not values:
                raise PlotError("log axis needs positive values")
            lo = 10 ** math.floor(math.log10(min(values)))
            hi = 10 ** math.ceil(math.log10(max(values)))
            if lo == hi:
                hi = lo * 10
            self.ticks = [10.0**e for e in range(round(math.log10(lo)), round(math.log10(hi)) + 1)]
        else:
            lo, hi = min(values), max(values)
            if lo == hi:
                lo, hi = lo - 1, hi + 1
            step = _nice_step(hi - lo)
            lo = math.floor(lo / step) * step
            hi = math.ceil(hi / step) * step
            count = round((hi - lo) / step)
            self.ticks = [lo + i * step for i in range(count + 1)]
        self.log, self.lo, self.hi = log, lo, hi
        self.lo_px, self.hi_px = lo_px, hi_px

    def __call__(self, v: float) -> float:
        if self.log:
            f = (math.log10(v) - math.log10(self.lo)) / (math.log10(self.hi) - math.log10(self.lo))
        else:
            f = (v - self.lo) / (self.hi - self.lo)
        return self.lo_px + f * (self.hi_px - self.lo_px)


def _series(columns, rows, spec: PlotSpec) -> list[tuple[str, list[tuple[float, float]]]]:
    for col in (spec.x, spec.y, spec.group):
        if col is not None and col not in columns:
            raise PlotError(f"unknown column {col!r} (have: {', '.join(columns)})")
    if not rows:
        raise PlotError("table has no data rows")
    order: list[str] = []
    points: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        key = row[spec.group] if spec.group else spec.y
        if key not in points:
            order.append(key)
            points[key] = []
        try:
            x, y = float(row[spec.x]), float(row[spec.y])
        except ValueError:
            continue
        if not (math.isfinite(x) and math.isfinite(y)):
            continue
        if (spec.log_x and x <= 0) or (spec.log_y and y <= 0):
            continue
        points[key].append((x, y))
    if spec.groups is not None:
        wanted = []
        for g in spec.groups:
            match = next((k for k in order if k == g or _same_number(k, g)), None)
            if match is None:
                raise PlotError(f"group {g!r} has no rows")
            wanted.append(match)
        order = wanted
    series = [(key, points[key]) for key in order]
    for key, pts in series:
        if not pts:
            raise PlotError(f"group {key!r} has no plottable points")
    return series


def _same_number(a: str, b: str) -> bool:
    try:
        return float(a) == float(b)
    except ValueError:
        return False


def render_svg(columns, rows, spec: PlotSpec) -> str:
    series = _series(columns, rows, spec)
    xs = [x for _, pts in series for x, _ in pts]
    ys = [y for _, pts in series for _, y in pts]
    ax = _Axis(xs, spec.log_x, LEFT, WIDTH - RIGHT)
    ay = _Axis(ys, spec.log_y, HEIGHT - BOTTOM, TOP)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
    ]
    x0, x1, y0, y1 = LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP
    for t in ax.ticks:
        px = _fmt(ax(t))
        out.append(f'<line x1="{px}" y1="{y0}" x2="{px}" y2="{y1}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{px}" y="{y0 + 18}" text-anchor="middle">{escape(_tick_label(t))}</text>')
    for t in ay.ticks:
        py = _fmt(ay(t))
        out.append(f'<line x1="{x0}" y1="{py}" x2="{x1}" y2="{py}" stroke="#e0e0e0"/>')
        out.append(f'<text x="{x0 - 6}" y="{py}" text-anchor="end" dominant-baseline="middle">'
                   f'{escape(_tick_label(t))}</text>')
    out.append(f'<rect x="{x0}" y="{y1}" width="{x1 - x0}" height="{y0 - y1}" fill="none" stroke="black"/>')
    out.append(f'<text x="{(x0 + x1) / 2:.1f}" y="{HEIGHT - 25}" text-anchor="middle">{escape(spec.x)}</text>')
    out.append(f'<text x="25" y="{(y0 + y1) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 25 {(y0 + y1) / 2:.1f})">{escape(spec.y)}</text>')
    if spec.title:
        out.append(f'<text x="{(x0 + x1) / 2:.1f}" y="24" text-anchor="middle">{escape(spec.title)}</text>')

    for i, (key, pts) in enumerate(series):
        color = COLORS[i % len(COLORS)]
        path = " ".join(f"{_fmt(ax(x))},{_fmt(ay(y))}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{path}"/>')
        ly = TOP + 10 + 20 * i
        out.append(f'<line x1="{x1 + 15}" y1="{ly}" x2="{x1 + 40}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        label = f"{spec.group}={key}" if spec.group else key
        out.append(f'<text x="{x1 + 45}" y="{ly + 4}">{escape(label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot_csv(csv_path, spec: PlotSpec) -> str:
    try:
        columns, rows = read_table(csv_path)
    except CsvFormatError as exc:
        raise PlotError(str(exc)) from None
    return render_svg(columns, rows, spec)
