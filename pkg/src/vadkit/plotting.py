"""Minimal SVG rendering of per-video score timelines.

Emits a self-contained SVG: the smoothed score as a polyline with
abnormal frame ranges shaded. Data-first design; any real plotting tool
can consume the timeline CSVs instead.
"""

from __future__ import annotations

import csv
from pathlib import Path

WIDTH, HEIGHT, PAD = 800, 240, 30


def _segments(labels):
    segs, start = [], None
    for i, lab in enumerate(labels):
        if lab and start is None:
            start = i
        elif not lab and start is not None:
            segs.append((start, i))
            start = None
    if start is not None:
        segs.append((start, len(labels)))
    return segs


def render_timeline_svg(frames, scores, labels, out_path) -> None:
    n = len(frames)
    if n == 0:
        raise ValueError("empty timeline")

    def sx(i):
        return PAD + (WIDTH - 2 * PAD) * (i / max(n - 1, 1))

    def sy(v):
        return HEIGHT - PAD - (HEIGHT - 2 * PAD) * max(0.0, min(1.0, v))

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" '
             f'width="{WIDTH}" height="{HEIGHT}">',
             f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>']
    for start, end in _segments(labels):
        parts.append(f'<rect x="{sx(start):.1f}" y="{PAD}" '
                     f'width="{sx(max(end - 1, start)) - sx(start):.1f}" '
                     f'height="{HEIGHT - 2 * PAD}" fill="#fdd" '
                     f'stroke="none"/>')
    points = " ".join(f"{sx(i):.1f},{sy(s):.1f}" for i, s in enumerate(scores))
    parts.append(f'<polyline points="{points}" fill="none" '
                 f'stroke="#1565c0" stroke-width="1.5"/>')
    parts.append(f'<line x1="{PAD}" y1="{HEIGHT - PAD}" x2="{WIDTH - PAD}" '
                 f'y2="{HEIGHT - PAD}" stroke="black"/>')
    parts.append(f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" '
                 f'y2="{HEIGHT - PAD}" stroke="black"/>')
    parts.append("</svg>")
    Path(out_path).write_text("\n".join(parts))


def render_timeline_csv(csv_path, out_path) -> None:
    frames, scores, labels = [], [], []
    with open(csv_path) as fh:
        for row in csv.DictReader(fh):
            frames.append(int(row["frame"]))
            scores.append(float(row["score"]))
            labels.append(int(row["label"]))
    render_timeline_svg(frames, scores, labels, out_path)
