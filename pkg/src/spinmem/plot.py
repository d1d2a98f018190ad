"""Minimal deterministic SVG rendering of a spectrum with the comb positions ticked."""

from __future__ import annotations

import json
import re
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .spectro import Spectrum

WIDTH, HEIGHT = 900, 360
LEFT, RIGHT, TOP, BOTTOM = 70, 20, 20, 50


def _nice_ticks(lo: float, hi: float, count: int = 6) -> np.ndarray:
    span = hi - lo
    if span <= 0:
        return np.array([lo])
    raw = span / count
    mag = 10 ** np.floor(np.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    return np.arange(np.ceil(lo / step) * step, hi + step / 2, step)


def spectrum_svg(spec: Spectrum, comb_offsets: Sequence[float] = (), title: str = "") -> str:
    """Real part of ``spec`` against frequency. Comb offsets are stored in <metadata> as JSON."""
    if spec.freqs.size == 0:
        raise ValueError("cannot plot an empty spectrum")
    x0, x1 = float(spec.freqs[0]), float(spec.freqs[-1])
    if comb_offsets:
        pad = 2 * (max(comb_offsets) - min(comb_offsets)) / max(len(comb_offsets), 1) + 100
        x0, x1 = max(x0, min(comb_offsets) - pad), min(x1, max(comb_offsets) + pad)
    mask = (spec.freqs >= x0) & (spec.freqs <= x1)
    freqs, re_part = spec.freqs[mask], spec.values.real[mask]
    ymax = float(np.max(np.abs(re_part))) if re_part.size else 0.0
    ymax = ymax or 1.0
    pw, ph = WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM

    def sx(f):
        return LEFT + (f - x0) / (x1 - x0 or 1.0) * pw

    def sy(v):
        return TOP + ph / 2 - v / ymax * ph / 2 * 0.95

    points = " ".join(f"{sx(f):.2f},{sy(v):.2f}" for f, v in zip(freqs, re_part))
    meta = json.dumps({"comb_offsets_hz": [float(f) for f in comb_offsets], "points": int(freqs.size)})
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">',
        f"<metadata>{escape(meta)}</metadata>",
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{LEFT}" y1="{sy(0):.2f}" x2="{WIDTH - RIGHT}" y2="{sy(0):.2f}" stroke="#bbb"/>',
        f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _nice_ticks(x0, x1):
        out.append(f'<line x1="{sx(t):.2f}" y1="{TOP + ph}" x2="{sx(t):.2f}" y2="{TOP + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(t):.2f}" y="{TOP + ph + 18}" text-anchor="middle">{t:g}</text>')
    for f in comb_offsets:
        out.append(
            f'<line class="comb" x1="{sx(f):.2f}" y1="{TOP}" x2="{sx(f):.2f}" y2="{TOP + 8}" stroke="#d62728"/>'
        )
    out.append(f'<polyline fill="none" stroke="#1f77b4" stroke-width="1" points="{points}"/>')
    out.append(f'<text x="{LEFT + pw / 2}" y="{HEIGHT - 10}" text-anchor="middle">frequency offset (Hz)</text>')
    out.append(
        f'<text x="15" y="{TOP + ph / 2}" text-anchor="middle" '
        f'transform="rotate(-90 15 {TOP + ph / 2})">Re spectrum (arb.)</text>'
    )
    if title:
        out.append(f'<text x="{LEFT + 5}" y="{TOP + 14}">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def read_svg_metadata(svg: str) -> dict:
    m = re.search(r"<metadata>(.*?)</metadata>", svg, re.S)
    if not m:
        raise ValueError("SVG has no metadata block")
    text = m.group(1).replace("&lt;", "<").replace("&gt;", ">").replace("&amp;", "&")
    return json.loads(text)
