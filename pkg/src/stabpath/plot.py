"""Trajectories ``Z_t(E)`` and phase tracks ``phi_t(E)`` as CSV and a plain SVG 1.1 chart."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .charge import _grid_between, track_log_charge
from .models import Model, P1Scenario, wall_time
from .preorder import build_partitions

CSV_HEADER = "t,re_z,im_z,phase,class"
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f")
WIDTH, HEIGHT, MARGIN = 720, 420, 50


@dataclass(frozen=True)
class Track:
    family: str
    t: np.ndarray
    log_z: np.ndarray

    @property
    def z(self) -> np.ndarray:
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(self.log_z)

    @property
    def phase(self) -> np.ndarray:
        return self.log_z.imag / math.pi


def default_classes(model: Model) -> list[str]:
    """One representative per ``~`` class."""
    _, p_sim = build_partitions(model.families, verify=False)
    return [b[0] for b in p_sim.blocks]


def tracks(model: Model, classes: Sequence[str], t_min: float, t_max: float, points: int) -> list[Track]:
    ts = np.geomspace(t_min, t_max, points)
    by_id = {f.id: f for f in model.families}
    out = []
    for fid in classes:
        if fid not in by_id:
            raise KeyError(f"unknown family {fid!r}")
        f = by_id[fid]
        head = _grid_between(f.seed_t, float(ts[0]))[:-1] if f.seed_t != ts[0] else []
        full = list(head) + [float(x) for x in ts]
        lz = track_log_charge(model.path, f.cls0, full, f.seed_phase0)
        out.append(Track(fid, ts, np.asarray(lz)[len(head):]))
    return out


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def to_csv(trs: Sequence[Track]) -> str:
    lines = [CSV_HEADER]
    for tr in trs:
        z = tr.z
        for t, zz, ph in zip(tr.t, z, tr.phase):
            lines.append(f"{_fmt(t)},{_fmt(zz.real)},{_fmt(zz.imag)},{_fmt(ph)},{tr.family}")
    return "\n".join(lines) + "\n"


def wall_markers(model: Model, t_min: float, t_max: float) -> list[float]:
    s = model.extras.get("scenario")
    if not isinstance(s, P1Scenario):
        return []
    t = wall_time(s)
    return [t] if t is not None and t_min <= t <= t_max else []


def to_svg(trs: Sequence[Track], t_min: float, t_max: float, walls: Sequence[float] = (),
           title: str = "") -> str:
    """Phase tracks against ``log t``; wall crossings as dashed vertical lines."""
    phases = [p for tr in trs for p in tr.phase if math.isfinite(p)]
    lo, hi = (min(phases), max(phases)) if phases else (0.0, 1.0)
    if hi - lo < 1e-12:
        lo, hi = lo - 0.5, hi + 0.5
    lx0, lx1 = math.log(t_min), math.log(t_max)

    def px(t):
        return MARGIN + (math.log(t) - lx0) / (lx1 - lx0) * (WIDTH - 2 * MARGIN)

    def py(v):
        return HEIGHT - MARGIN - (v - lo) / (hi - lo) * (HEIGHT - 2 * MARGIN)

    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" '
           f'viewBox="0 0 {WIDTH} {HEIGHT}">',
           f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
           f'<text x="{MARGIN}" y="20" font-family="sans-serif" font-size="13">{escape(title)}</text>',
           f'<line x1="{MARGIN}" y1="{HEIGHT - MARGIN}" x2="{WIDTH - MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
           f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{HEIGHT - MARGIN}" stroke="black"/>',
           f'<text x="{WIDTH / 2:.1f}" y="{HEIGHT - 12}" font-family="sans-serif" font-size="12" '
           f'text-anchor="middle">t (log scale, {t_min:g} to {t_max:g})</text>',
           f'<text x="14" y="{HEIGHT / 2:.1f}" font-family="sans-serif" font-size="12" '
           f'transform="rotate(-90 14 {HEIGHT / 2:.1f})" text-anchor="middle">phase</text>']
    for w in walls:
        x = px(w)
        out.append(f'<line class="wall" x1="{x:.2f}" y1="{MARGIN}" x2="{x:.2f}" y2="{HEIGHT - MARGIN}" '
                   f'stroke="gray" stroke-dasharray="4,3"/>')
        out.append(f'<text x="{x + 3:.2f}" y="{MARGIN + 12}" font-family="sans-serif" font-size="11">'
                   f'wall t={w:.6g}</text>')
    for k, tr in enumerate(trs):
        pts = " ".join(f"{px(t):.2f},{py(p):.2f}" for t, p in zip(tr.t, tr.phase) if math.isfinite(p))
        color = COLORS[k % len(COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{WIDTH - MARGIN + 4}" y="{MARGIN + 14 * (k + 1)}" font-family="sans-serif" '
                   f'font-size="11" fill="{color}">{escape(tr.family)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def plot(model: Model, classes: Sequence[str] | None, t_min: float, t_max: float,
         points: int = 200) -> tuple[str, str]:
    """``(csv, svg)`` for the requested families (default: one per ``~`` class)."""
    cls = default_classes(model) if classes is None else list(classes)
    trs = tracks(model, cls, t_min, t_max, points)
    return to_csv(trs), to_svg(trs, t_min, t_max, wall_markers(model, t_min, t_max), model.name)
