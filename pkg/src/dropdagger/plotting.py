"""Static SVG charts written by hand; no plotting library involved."""

from __future__ import annotations

import csv
from pathlib import Path
from xml.sax.saxutils import escape

from .experiment import ResultsTable

PANEL_W = 420
PANEL_H = 300
MARGIN_L = 60
MARGIN_R = 20
MARGIN_T = 40
MARGIN_B = 50
LEGEND_H = 30
PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
PANELS = (("safety_mean", "Safety Performance"), ("learning_mean", "Learning Performance"))


def linear_map(value: float, lo: float, hi: float, out_lo: float, out_hi: float) -> float:
    if hi == lo:
        return 0.5 * (out_lo + out_hi)
    return out_lo + (value - lo) * (out_hi - out_lo) / (hi - lo)


def _pad_range(lo: float, hi: float) -> tuple[float, float]:
    if hi - lo < 1e-12:
        return lo - 1.0, hi + 1.0
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def panel_layout(table: ResultsTable):
    """Shared data ranges for both panels: (epoch_lo, epoch_hi, y_lo, y_hi)."""
    epochs = [r.epoch for r in table.rows]
    values = [getattr(r, col) for r in table.rows for col, _ in PANELS]
    e_lo, e_hi = min(epochs), max(epochs)
    if e_lo == e_hi:
        e_lo, e_hi = e_lo - 1, e_hi + 1
    y_lo, y_hi = _pad_range(min(values), max(values))
    return e_lo, e_hi, y_lo, y_hi


def panel_points(table: ResultsTable, column: str, panel_index: int) -> dict[str, list[tuple[float, float]]]:
    e_lo, e_hi, y_lo, y_hi = panel_layout(table)
    x0 = panel_index * PANEL_W + MARGIN_L
    x1 = (panel_index + 1) * PANEL_W - MARGIN_R
    y0 = PANEL_H - MARGIN_B  # bottom of plot area
    y1 = MARGIN_T
    out = {}
    for alg in table.algorithms():
        rows = sorted((r for r in table.rows if r.algorithm == alg), key=lambda r: r.epoch)
        out[alg] = [
            (linear_map(r.epoch, e_lo, e_hi, x0, x1), linear_map(getattr(r, column), y_lo, y_hi, y0, y1))
            for r in rows
        ]
    return out


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    return [lo + (hi - lo) * k / (count - 1) for k in range(count)]


def render_svg(table: ResultsTable) -> str:
    if not table.rows:
        raise ValueError("cannot plot an empty results table")
    e_lo, e_hi, y_lo, y_hi = panel_layout(table)
    algorithms = table.algorithms()
    width = PANEL_W * len(PANELS)
    height = PANEL_H + LEGEND_H
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    bottom = PANEL_H - MARGIN_B
    for k, (column, title) in enumerate(PANELS):
        x0 = k * PANEL_W + MARGIN_L
        x1 = (k + 1) * PANEL_W - MARGIN_R
        parts.append(f'<g class="panel" data-column="{column}">')
        parts.append(f'<text x="{(x0 + x1) / 2:.3f}" y="{MARGIN_T - 15}" text-anchor="middle" font-size="13">{title}</text>')
        parts.append(f'<rect x="{x0}" y="{MARGIN_T}" width="{x1 - x0}" height="{bottom - MARGIN_T}" fill="none" stroke="black"/>')
        for v in _ticks(y_lo, y_hi):
            py = linear_map(v, y_lo, y_hi, bottom, MARGIN_T)
            parts.append(f'<line x1="{x0}" x2="{x1}" y1="{py:.3f}" y2="{py:.3f}" stroke="#ddd"/>')
            parts.append(f'<text x="{x0 - 5}" y="{py + 4:.3f}" text-anchor="end">{v:.2f}</text>')
        for e in range(int(e_lo), int(e_hi) + 1):
            px = linear_map(e, e_lo, e_hi, x0, x1)
            parts.append(f'<text x="{px:.3f}" y="{bottom + 15}" text-anchor="middle">{e}</text>')
        parts.append(f'<text x="{(x0 + x1) / 2:.3f}" y="{bottom + 35}" text-anchor="middle">DAgger Epoch</text>')
        parts.append(
            f'<text transform="translate({x0 - 42},{(MARGIN_T + bottom) / 2:.3f}) rotate(-90)" '
            'text-anchor="middle">Avg. Total Return</text>'
        )
        for i, (alg, pts) in enumerate(panel_points(table, column, k).items()):
            coords = " ".join(f"{x:.6f},{y:.6f}" for x, y in pts)
            color = PALETTE[i % len(PALETTE)]
            parts.append(
                f'<polyline data-algorithm="{escape(alg)}" points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>'
            )
        parts.append("</g>")
    lx = MARGIN_L
    for i, alg in enumerate(algorithms):
        color = PALETTE[i % len(PALETTE)]
        parts.append(f'<line x1="{lx}" x2="{lx + 20}" y1="{PANEL_H + 10}" y2="{PANEL_H + 10}" stroke="{color}" stroke-width="3"/>')
        parts.append(f'<text x="{lx + 25}" y="{PANEL_H + 14}">{escape(alg)}</text>')
        lx += 30 + 7 * len(alg) + 20
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_plots(table: ResultsTable, out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "performance.svg"
    path.write_text(render_svg(table))
    return [path]


def read_trajectory(path, epoch: int | None = None, episode: int | None = None) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{path} holds no trajectory rows")
    if "epoch" in rows[0] and rows[0]["epoch"] != "":
        epoch = int(rows[0]["epoch"]) if epoch is None else epoch
        rows = [r for r in rows if int(r["epoch"]) == epoch]
    if "episode" in rows[0] and rows[0]["episode"] != "":
        episode = int(rows[0]["episode"]) if episode is None else episode
        rows = [r for r in rows if int(r["episode"]) == episode]
    if not rows:
        raise ValueError("no rows match the requested epoch/episode")
    if not {"x", "y"} <= set(rows[0]) or rows[0]["y"] in ("", None):
        raise ValueError(f"{path} has no planar x/y columns to replay")
    return rows


def render_trajectory_svg(rows: list[dict], room_size: float = 100.0, exit_width: float = 20.0, scale: float = 5.0) -> str:
    """Room outline plus the driven path, coloured by which actor was in control."""
    pad = 20
    size = room_size * scale + 2 * pad

    def px(x):
        return pad + float(x) * scale

    def py(y):
        return pad + (room_size - float(y)) * scale

    lo = 0.5 * (room_size - exit_width)
    hi = 0.5 * (room_size + exit_width)
    walls = [
        ((0, 0), (room_size, 0)),
        ((room_size, 0), (room_size, room_size)),
        ((room_size, room_size), (hi, room_size)),
        ((lo, room_size), (0, room_size)),
        ((0, room_size), (0, 0)),
    ]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" height="{size:.0f}" viewBox="0 0 {size:.0f} {size:.0f}">',
        f'<rect width="{size:.0f}" height="{size:.0f}" fill="white"/>',
    ]
    for (ax, ay), (bx, by) in walls:
        parts.append(f'<line x1="{px(ax):.2f}" y1="{py(ay):.2f}" x2="{px(bx):.2f}" y2="{py(by):.2f}" stroke="black" stroke-width="3"/>')
    colors = {"expert": "#1f77b4", "novice": "#ff7f0e"}
    for a, b in zip(rows, rows[1:]):
        color = colors.get(a.get("actor", ""), "#444")
        parts.append(
            f'<line x1="{px(a["x"]):.2f}" y1="{py(a["y"]):.2f}" x2="{px(b["x"]):.2f}" y2="{py(b["y"]):.2f}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
    start = rows[0]
    parts.append(f'<circle cx="{px(start["x"]):.2f}" cy="{py(start["y"]):.2f}" r="4" fill="green"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
