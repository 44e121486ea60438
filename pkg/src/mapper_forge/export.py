"""DOT, JSON and SVG renderings of a Mapper graph."""

from __future__ import annotations

import json
from collections import defaultdict
from xml.sax.saxutils import escape

import numpy as np

from .nerve import MapperGraph

FORMATS = ("dot", "json", "svg")

_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf")


def _cover_name(cover_index):
    return "-".join(str(i) for i in cover_index)


def node_label(vertex) -> str:
    return f"i{_cover_name(vertex['cover_index'])}:{vertex['label']} ({vertex['size']})"


def export_dot(graph: MapperGraph) -> str:
    """Undirected DOT graph; nodes in id order, edges in lexicographic order."""
    lines = ["graph mapper {"]
    for v in graph.vertices:
        lines.append(f'  n{v["id"]} [label="{node_label(v)}"];')
    for a, b, _ in sorted(graph.edges):
        lines.append(f"  n{a} -- n{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_json(graph: MapperGraph) -> str:
    return json.dumps(graph.to_dict(), indent=2, sort_keys=True) + "\n"


def _fmt(x):
    return f"{x:.2f}"


def _scale(values, lo, hi):
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return values
    vmin, vmax = values.min(), values.max()
    if vmax == vmin:
        return np.full(values.shape, (lo + hi) / 2)
    return lo + (values - vmin) / (vmax - vmin) * (hi - lo)


def graph_layout(graph: MapperGraph):
    """Vertex positions in the unit square.

    x is the first component of the mean lens value (falling back to the
    first cover index); vertices sharing a cover element are spread evenly
    along y in id order.
    """
    xs = []
    for v in graph.vertices:
        lens = v.get("mean_lens")
        xs.append(lens[0] if lens else float(v["cover_index"][0]))
    groups = defaultdict(list)
    for v in graph.vertices:
        groups[tuple(v["cover_index"])].append(v["id"])
    ys = {}
    for ids in groups.values():
        m = len(ids)
        for r, vid in enumerate(sorted(ids)):
            ys[vid] = 0.5 if m == 1 else 0.1 + 0.8 * r / (m - 1)
    x = _scale(xs, 0.05, 0.95)
    return {v["id"]: (float(x[i]), ys[v["id"]]) for i, v in enumerate(graph.vertices)}


def export_svg(graph: MapperGraph, dataset=None, lens_values=None, pullback=None,
               width=800, height=400) -> str:
    """Standalone SVG: data scatter coloured by fiber (left), Mapper graph (right).

    Coordinates are rounded to two decimals so repeated exports are
    byte-identical.
    """
    panel = width / 2
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]

    points = None if dataset is None else np.asarray(getattr(dataset, "points", dataset), dtype=float)
    if points is not None and len(points):
        fiber_of = np.full(len(points), -1)
        if pullback is not None:
            for f, (_, members) in enumerate(pullback):
                unset = members[fiber_of[members] < 0]
                fiber_of[unset] = f
        px = points[:, 0]
        py = points[:, 1] if points.shape[1] > 1 else np.zeros(len(points))
        sx = _scale(px, 20, panel - 20)
        sy = _scale(-py, 20, height - 20)
        out.append('<g id="data">')
        for i in range(len(points)):
            color = "#444444" if fiber_of[i] < 0 else _PALETTE[fiber_of[i] % len(_PALETTE)]
            out.append(f'<circle cx="{_fmt(sx[i])}" cy="{_fmt(sy[i])}" r="2" fill="{color}"/>')
        out.append("</g>")

    pos = graph_layout(graph)
    ox = panel if points is not None else 0.0
    gw = width - ox
    place = {vid: (ox + 20 + x * (gw - 40), 20 + y * (height - 40)) for vid, (x, y) in pos.items()}
    out.append('<g id="graph">')
    for a, b, _ in graph.edges:
        (x1, y1), (x2, y2) = place[a], place[b]
        out.append(f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                   'stroke="#888888" stroke-width="2"/>')
    covers = sorted({tuple(v["cover_index"]) for v in graph.vertices})
    color_of = {c: _PALETTE[i % len(_PALETTE)] for i, c in enumerate(covers)}
    for v in graph.vertices:
        x, y = place[v["id"]]
        r = 4 + 2 * np.log1p(v["size"])
        out.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(r)}" '
                   f'fill="{color_of[tuple(v["cover_index"])]}" stroke="black">'
                   f"<title>{escape(node_label(v))}</title></circle>")
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
