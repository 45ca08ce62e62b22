"""Plain SVG drawings of charted spaces with loop, arc and band overlays."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ChartError

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
           "#bcbd22", "#17becf")


def render_svg(space, overlays: dict | None = None, path=None, size=512, point_radius=1.2) -> str:
    """SVG of the chart with optional overlays.

    ``overlays`` keys: ``loop`` (closed id sequence, one segment per edge),
    ``arc`` (open id sequence), ``bands`` (integer label per point, drawn as
    color classes; negative labels are skipped), ``marks`` (ids drawn as
    rings).  Returns the SVG text and writes it when ``path`` is given.
    """
    if space.chart is None:
        raise ChartError("rendering needs chart coordinates")
    overlays = overlays or {}
    uv = space.chart
    lo, hi = uv.min(axis=0), uv.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    pad = 0.04 * size

    def xy(i):
        p = (uv[i] - lo) / span * (size - 2 * pad) + pad
        return f"{p[0]:.2f}", f"{size - p[1]:.2f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">', f'<rect width="{size}" height="{size}" fill="white"/>']
    bands = overlays.get("bands")
    if bands is not None:
        bands = np.asarray(bands)
        for i in range(space.n):
            if bands[i] >= 0:
                x, y = xy(i)
                out.append(f'<circle class="band" cx="{x}" cy="{y}" r="{point_radius}" '
                           f'fill="{PALETTE[int(bands[i]) % len(PALETTE)]}"/>')
    else:
        out.append('<g fill="#999999">')
        out.extend(f'<circle cx="{xy(i)[0]}" cy="{xy(i)[1]}" r="{point_radius}"/>' for i in range(space.n))
        out.append("</g>")
    for key, closed, color in (("arc", False, "#2ca02c"), ("loop", True, "#d62728")):
        seq = overlays.get(key)
        if seq is None:
            continue
        seq = [int(v) for v in seq]
        pairs = list(zip(seq, seq[1:] + seq[:1])) if closed else list(zip(seq[:-1], seq[1:]))
        for a, b in pairs:
            (x1, y1), (x2, y2) = xy(a), xy(b)
            out.append(f'<line class="{key}" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
                       f'stroke="{color}" stroke-width="1.5"/>')
    for i in overlays.get("marks", ()):
        x, y = xy(int(i))
        out.append(f'<circle class="mark" cx="{x}" cy="{y}" r="{4 * point_radius}" fill="none" stroke="black"/>')
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
