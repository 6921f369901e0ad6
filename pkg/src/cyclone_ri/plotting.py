"""Dependency-free SVG figures: track maps, histograms and bar charts.

Every figure function returns ``(svg_text, csv_text)`` so the numbers behind
a picture are always written next to it.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Mapping, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import DataError

WIDTH, HEIGHT, PAD = 720, 480, 50
COLORS = ("#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#17becf")
DETECTED, MISSED = "#2ca02c", "#d62728"


def _num(x: float) -> str:
    return f"{x:.2f}"


def _svg(body: list[str], title: str, deterministic: bool) -> str:
    head = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">',
    ]
    if not deterministic:
        stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        head.append(f"<!-- generated {stamp} -->")
    head += [
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


@dataclass
class TrackSeries:
    id: str
    lats: Sequence[float]
    lons: Sequence[float]
    # point index -> True (RI detected) / False (RI missed)
    ri_points: Mapping[int, bool] = field(default_factory=dict)
    dashed: bool = False


def _unwrap(lons: Sequence[float]) -> np.ndarray:
    # keeps antimeridian crossings contiguous without changing 0-360 values elsewhere
    return np.rad2deg(np.unwrap(np.deg2rad(np.asarray(lons, dtype=float))))


def track_map(tracks: Sequence[TrackSeries], title: str = "Tracks", deterministic: bool = True) -> tuple[str, str]:
    if not tracks:
        raise DataError("no tracks selected")
    unwrapped = [_unwrap(t.lons) for t in tracks]
    all_lat = np.concatenate([np.asarray(t.lats, dtype=float) for t in tracks])
    all_lon = np.concatenate(unwrapped)
    lat_lo, lat_hi = all_lat.min() - 1, all_lat.max() + 1
    lon_lo, lon_hi = all_lon.min() - 1, all_lon.max() + 1
    # equirectangular: one scale for both axes
    scale = min((WIDTH - 2 * PAD) / (lon_hi - lon_lo), (HEIGHT - 2 * PAD) / (lat_hi - lat_lo))

    def xy(lat, lon):
        return PAD + (lon - lon_lo) * scale, PAD + (lat_hi - lat) * scale

    body, rows = [], []
    for k, (t, lons) in enumerate(zip(tracks, unwrapped)):
        color = COLORS[k % len(COLORS)]
        pts = [xy(la, lo) for la, lo in zip(t.lats, lons)]
        dash = ' stroke-dasharray="4 3"' if t.dashed else ""
        body.append(f'<polyline id="{escape(t.id)}" fill="none" stroke="{color}" stroke-width="1.5"{dash} '
                    f'points="{" ".join(f"{_num(x)},{_num(y)}" for x, y in pts)}"/>')
        for i, (la, lo) in enumerate(zip(t.lats, t.lons)):
            status = ""
            if i in t.ri_points:
                status = "detected" if t.ri_points[i] else "missed"
                x, y = pts[i]
                body.append(f'<circle cx="{_num(x)}" cy="{_num(y)}" r="4" '
                            f'fill="{DETECTED if t.ri_points[i] else MISSED}" class="ri-{status}"/>')
            rows.append([t.id, i, repr(float(la)), repr(float(lo)), status])
    body.append(f'<text x="{PAD}" y="{HEIGHT - 15}">lon {lon_lo:.1f} to {lon_hi:.1f} E, '
                f'lat {lat_lo:.1f} to {lat_hi:.1f}</text>')
    return _svg(body, title, deterministic), _csv(["track_id", "point", "lat", "lon", "ri_status"], rows)


def histogram_bins(samples: Mapping[str, Sequence[float]], bins: int = 20) -> np.ndarray:
    values = np.concatenate([np.asarray(v, dtype=float) for v in samples.values() if len(v)])
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, bins + 1)


def histogram(samples: Mapping[str, Sequence[float]], bins: int = 20, title: str = "Histogram",
              xlabel: str = "", deterministic: bool = True) -> tuple[str, str]:
    """Overlaid histograms on shared equal-width bins spanning the union's range."""
    if not samples or not any(len(v) for v in samples.values()):
        raise DataError("no values to histogram")
    edges = histogram_bins(samples, bins)
    counts = {name: np.histogram(np.asarray(v, dtype=float), bins=edges)[0] for name, v in samples.items()}
    # compare shapes, not sample sizes
    dens = {name: c / max(c.sum(), 1) for name, c in counts.items()}
    top = max(float(d.max()) for d in dens.values()) or 1.0
    plot_w, plot_h = WIDTH - 2 * PAD, HEIGHT - 2 * PAD
    bw = plot_w / bins
    body = []
    for k, (name, d) in enumerate(dens.items()):
        color = COLORS[k % len(COLORS)]
        for i, v in enumerate(d):
            h = plot_h * v / top
            body.append(f'<rect x="{_num(PAD + i * bw)}" y="{_num(PAD + plot_h - h)}" width="{_num(bw)}" '
                        f'height="{_num(h)}" fill="{color}" fill-opacity="0.45" stroke="{color}"/>')
        body.append(f'<text x="{WIDTH - PAD - 120}" y="{PAD + 15 * k}" fill="{color}">{escape(name)}</text>')
    body.append(f'<text x="{PAD}" y="{HEIGHT - 15}">{escape(xlabel)} [{edges[0]:.1f}, {edges[-1]:.1f}]</text>')
    names = list(samples)
    rows = [[repr(float(edges[i])), repr(float(edges[i + 1]))] + [int(counts[n][i]) for n in names]
            for i in range(bins)]
    return _svg(body, title, deterministic), _csv(["bin_lo", "bin_hi"] + [f"count_{n}" for n in names], rows)


def bar_chart(values: Mapping, title: str = "Counts", xlabel: str = "", ylabel: str = "count",
              deterministic: bool = True) -> tuple[str, str]:
    if not values:
        raise DataError("no values for bar chart")
    keys = list(values)
    top = max(values.values()) or 1
    plot_w, plot_h = WIDTH - 2 * PAD, HEIGHT - 2 * PAD
    bw = plot_w / len(keys)
    body = []
    for i, k in enumerate(keys):
        h = plot_h * values[k] / top
        x = PAD + i * bw
        body.append(f'<rect x="{_num(x + 1)}" y="{_num(PAD + plot_h - h)}" width="{_num(max(bw - 2, 1))}" '
                    f'height="{_num(h)}" fill="{COLORS[0]}"><title>{escape(str(k))}: {values[k]}</title></rect>')
        if len(keys) <= 12 or i % max(1, len(keys) // 10) == 0:
            body.append(f'<text x="{_num(x + bw / 2)}" y="{HEIGHT - PAD + 14}" text-anchor="middle">{escape(str(k))}</text>')
    body.append(f'<text x="{PAD}" y="{HEIGHT - 10}">{escape(xlabel)}</text>')
    body.append(f'<text x="10" y="{PAD - 10}">{escape(ylabel)} (max {top})</text>')
    return _svg(body, title, deterministic), _csv([xlabel or "key", ylabel], [[k, values[k]] for k in keys])
