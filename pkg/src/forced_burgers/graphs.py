"""Multivalued graphs of functions with downward jumps, and distances between them.

For a grid function with downward jumps, ``f_plus`` is the left limit and
``f_minus`` the right limit at a jump (so ``f_minus <= f_plus``).  The filled
curve closes every jump with a vertical segment; it is stored with a lifted
``x`` coordinate and winds once around the circle.

A jump is a maximal run of cells with ``y_i - y_{i+1} > threshold``; nodes
strictly inside a run lie on the vertical segment and are not graph points.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from . import hamiltonian as ham
from .grid import GridFunction, max_oneside_slope


@dataclass(frozen=True)
class GraphCurve:
    n: int
    x_offset: float
    values: np.ndarray = field(repr=False)
    continuity: np.ndarray = field(repr=False)  # node is on a continuous branch
    core: np.ndarray = field(repr=False)  # continuity node not touching a jump cell
    jumps: tuple = ()  # (x, f_plus, f_minus, first_node, last_node)
    filled: np.ndarray = field(default=None, repr=False)
    segment_ids: np.ndarray = field(default=None, repr=False)

    @property
    def node_x(self):
        return np.arange(self.n) / self.n + self.x_offset

    @property
    def points_minus(self):
        return self._points(minus=True)

    @property
    def points_plus(self):
        return self._points(minus=False)

    def _points(self, minus):
        xs = list(self.node_x[self.continuity])
        fs = list(self.values[self.continuity])
        for xj, fp, fm, _, _ in self.jumps:
            xs.append(xj % 1.0)
            fs.append(fm if minus else fp)
        order = np.argsort(np.mod(xs, 1.0), kind="stable")
        return np.column_stack([np.mod(xs, 1.0), fs])[order]

    @property
    def has_jumps(self):
        return bool(self.jumps)

    @property
    def vertical_segments(self):
        return [(xj, fm, fp) for xj, fp, fm, _, _ in self.jumps]

    def to_csv(self):
        buf = io.StringIO()
        buf.write("x,p,segment_id\n")
        for (x, p), sid in zip(self.filled, self.segment_ids):
            buf.write(f"{x:.17g},{p:.17g},{sid}\n")
        return buf.getvalue()


def default_threshold(y):
    k_est = max(1.0, max_oneside_slope(y))
    return 5.0 * k_est / y.n


def extract_graph(y, jump_threshold=None, x_offset=0.0):
    """Graph data of ``y``; ``x_offset`` shifts abscissae (``0.5/n`` for cell centres)."""
    n = y.n
    vals = np.array(y.values)
    tau = default_threshold(y) if jump_threshold is None else float(jump_threshold)
    drop = vals - np.roll(vals, -1) > tau  # cell i: node i -> node i+1
    x = np.arange(n) / n + x_offset
    continuity = np.ones(n, dtype=bool)
    core = np.ones(n, dtype=bool)
    if drop.all():
        raise ValueError("every cell is a jump; threshold too small")
    jumps, vert = [], []
    # walk from just after a non-jump cell so no run is split by the wrap
    start = (int(np.flatnonzero(~drop)[0]) + 1) % n
    r = 0
    while r < n:
        if not drop[(start + r) % n]:
            r += 1
            continue
        length = 0
        while drop[(start + r + length) % n]:
            length += 1
        a_node, b_node = (start + r) % n, (start + r + length) % n
        for k in range(r + 1, r + length):
            continuity[(start + k) % n] = False
        core[a_node] = False
        core[b_node] = False
        xm = x[start] + (2 * r + length) / (2 * n)
        jumps.append((xm, vals[a_node], vals[b_node], a_node, b_node))
        vert.append((r, r + length))
        r += length
    core &= continuity

    # filled polyline, lifted x, starting at node ``start``
    pts, sids = [], []
    sid = 0
    jump_at = {a: b for a, b in vert}
    r = 0
    while r <= n:
        node = (start + r) % n
        xr = x[start] + r / n
        pts.append((xr, vals[node]))
        sids.append(sid)
        if r in jump_at and r < n:
            b = jump_at[r]
            xm = x[start] + (r + b) / (2 * n)
            sid += 1
            pts.append((xm, vals[node]))
            sids.append(sid)
            pts.append((xm, vals[(start + b) % n]))
            sids.append(sid)
            sid += 1
            r = b
            continue
        r += 1
    filled = np.array(pts)
    jumps = tuple(jumps)
    return GraphCurve(n, float(x_offset), vals, continuity, core, jumps,
                      filled, np.array(sids))


# -- distances --------------------------------------------------------------

def _circle_dx(px, ax):
    return (px - ax + 0.5) % 1.0 - 0.5


def point_to_segments(points, a, b, chunk=4096):
    """Distance from each point to the nearest segment ``[a_k, b_k]``; circle metric in x."""
    points = np.asarray(points, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    seg = b - a
    seg2 = np.maximum(np.sum(seg * seg, axis=1), 1e-300)
    out = np.empty(len(points))
    for s in range(0, len(points), chunk):
        P = points[s:s + chunk]
        rx = _circle_dx(P[:, None, 0], a[None, :, 0])
        ry = P[:, None, 1] - a[None, :, 1]
        t = np.clip((rx * seg[None, :, 0] + ry * seg[None, :, 1]) / seg2[None, :], 0.0, 1.0)
        dx = rx - t * seg[None, :, 0]
        dy = ry - t * seg[None, :, 1]
        out[s:s + chunk] = np.sqrt(np.min(dx * dx + dy * dy, axis=1))
    return out


def _segments(poly):
    return poly[:-1], poly[1:]


def directed_hausdorff(a, b):
    pa, qa = _segments(b.filled)
    return float(np.max(point_to_segments(a.filled, pa, qa)))


def hausdorff_distance(a, b):
    """Symmetric Hausdorff distance between the filled curves of ``a`` and ``b``."""
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


# -- transport of graphs by the flow -------------------------------------------

def continuous_branches(graph):
    """Pairs of consecutive continuity nodes (index ``i`` and ``i+1``) joined by a non-jump cell."""
    n = graph.n
    jump_cells = np.zeros(n, dtype=bool)
    for _, _, _, a, b in graph.jumps:
        k = a
        while k != b:
            jump_cells[k] = True
            k = (k + 1) % n
    i = np.arange(n)
    ok = graph.continuity & graph.continuity[(i + 1) % n] & ~jump_cells
    return i[ok]


def graph_inclusion_defect(spec, y, y_next, dt_flow=1e-3, t0=0.0, t1=1.0,
                           jump_threshold=None, cell_centred=True):
    """Per-point distances from the closure of the graph of ``y_next`` to the image of the graph of ``y``.

    Continuity nodes of ``y`` are carried by the Hamiltonian flow from ``t0``
    to ``t1``; consecutive images are joined into segments.  Target points are
    the continuity nodes of ``y_next`` that do not touch a jump cell (the cell
    holding a discrete shock carries an intermediate value that lies on the
    vertical segment, not on the graph).  Returns ``(points, distances)``.
    """
    n = y.n
    off = 0.5 / n if cell_centred else 0.0
    src = extract_graph(y, jump_threshold, off)
    dst = extract_graph(y_next, jump_threshold, off)
    idx = np.flatnonzero(src.continuity)
    x_img, p_img = ham.flow_arrays(spec, t0, t1, src.node_x[idx], src.values[idx], dt=dt_flow)
    pos = np.full(n, -1)
    pos[idx] = np.arange(len(idx))
    links = continuous_branches(src)
    ia, ib = pos[links], pos[(links + 1) % n]
    a = np.column_stack([x_img[ia], p_img[ia]])
    b = np.column_stack([x_img[ib], p_img[ib]])
    # a segment crossing the wrap lives on the lift; move b next to a
    b[:, 0] = a[:, 0] + _circle_dx(b[:, 0], a[:, 0])
    targets = np.column_stack([dst.node_x[dst.core], dst.values[dst.core]])
    return targets, point_to_segments(targets, a, b)


def graph_inclusion_check(spec, y, y_next, dt_flow=1e-3, t0=0.0, t1=1.0, jump_threshold=None):
    """Largest distance from a graph point of ``y_next`` to the flow image of the graph of ``y``."""
    _, dist = graph_inclusion_defect(spec, y, y_next, dt_flow, t0, t1, jump_threshold)
    return float(np.max(dist)) if dist.size else 0.0


__all__ = [
    "GraphCurve", "extract_graph", "hausdorff_distance", "directed_hausdorff",
    "point_to_segments", "graph_inclusion_check", "graph_inclusion_defect",
    "default_threshold", "GridFunction",
]
