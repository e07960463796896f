"""SVG drawings of straight-line arrangements.

Points go through an optional local zoom (radial bumps around small
triangle clusters, in world coordinates), then an optional tanh fisheye,
then a fixed scale onto the canvas.  Lines and triangle edges are sampled
adaptively so the projected polyline stays within half a pixel of the true
curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from .straighten import LineSet, intersection, verify_fit
from .table import ArrangementTable, count_triangles

MAX_ZOOM_GAIN = 2.2  # r * g(r) stays increasing below 2 / e^1.5 ~ 2.24


@dataclass(frozen=True)
class ZoomRegion:
    center: tuple
    radius: float
    gain: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("zoom radius must be positive")
        if not 0 <= self.gain <= MAX_ZOOM_GAIN:
            raise ValueError(f"zoom gain must lie in [0, {MAX_ZOOM_GAIN}]")


@dataclass(frozen=True)
class RenderConfig:
    size: int = 800
    margin: int = 20
    clip_radius: float | None = None  # default 1.2 x farthest crossing
    fisheye: float | None = None  # R_f in world units, None = off
    local_zoom: tuple = ()
    shade_triangles: bool = True
    stroke: str = "#222"
    stroke_width: float = 1.0
    fill: str = "#f4b183"
    labels: bool = False
    tolerance_px: float = 0.5

    def __post_init__(self):
        if self.fisheye is not None and self.fisheye <= 0:
            raise ValueError("fisheye radius must be positive")
        if self.size <= 2 * self.margin:
            raise ValueError("canvas too small for margin")
        object.__setattr__(self, "local_zoom", tuple(
            z if isinstance(z, ZoomRegion) else ZoomRegion(*z) for z in self.local_zoom))


def fisheye_map(p, radius: float):
    """Radial map ``p -> p * R tanh(|p|/R) / |p|``; works on (..., 2) arrays."""
    if radius <= 0:
        raise ValueError("fisheye radius must be positive")
    p = np.asarray(p, dtype=float)
    r = np.linalg.norm(p, axis=-1, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        k = np.where(r > 0, radius * np.tanh(r / radius) / r, 1.0)
    return p * k


def zoom_map(p, region: ZoomRegion):
    """Smooth magnification ``g(r) = 1 + gain exp(-(r/radius)^2)`` about a center."""
    p = np.asarray(p, dtype=float)
    c = np.asarray(region.center, dtype=float)
    d = p - c
    r = np.linalg.norm(d, axis=-1, keepdims=True)
    return c + d * (1 + region.gain * np.exp(-(r / region.radius) ** 2))


def crossing_radius(lines: LineSet) -> float:
    n = lines.n
    best = 0.0
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if abs(math.sin(lines.angles[i - 1] - lines.angles[j - 1])) > 1e-12:
                best = max(best, float(np.linalg.norm(intersection(lines, i, j))))
    return best or 1.0


class _Projector:
    def __init__(self, lines: LineSet, cfg: RenderConfig):
        self.cfg = cfg
        self.clip = cfg.clip_radius or 1.2 * crossing_radius(lines)
        # the clip circle is mapped to a circle (zoom bumps are local), so its
        # image radius fixes the canvas scale
        ring = np.stack([np.cos(np.linspace(0, 2 * math.pi, 256)),
                         np.sin(np.linspace(0, 2 * math.pi, 256))], axis=1) * self.clip
        extent = np.abs(self.world_to_plane(ring)).max()
        self.scale = (cfg.size / 2 - cfg.margin) / extent

    def world_to_plane(self, p):
        q = np.asarray(p, dtype=float)
        for z in self.cfg.local_zoom:
            q = zoom_map(q, z)
        if self.cfg.fisheye:
            q = fisheye_map(q, self.cfg.fisheye)
        return q

    def __call__(self, p):
        q = self.world_to_plane(p) * self.scale
        half = self.cfg.size / 2
        return np.stack([half + q[..., 0], half - q[..., 1]], axis=-1)

    def polyline(self, a, b):
        """Projected samples of the segment a-b, refined until flat enough."""
        a, b = np.asarray(a, float), np.asarray(b, float)
        pts = [self(a)]
        self._refine(a, b, pts[0], self(b), pts, 0)
        return np.array(pts)

    def _refine(self, a, b, pa, pb, out, depth):
        m = (a + b) / 2
        pm = self(m)
        if depth >= 16 or (np.linalg.norm(pm - (pa + pb) / 2) < self.cfg.tolerance_px and depth >= 2):
            out.append(pb)
            return
        self._refine(a, m, pa, pm, out, depth + 1)
        self._refine(m, b, pm, pb, out, depth + 1)


def _clip_segment(lines: LineSet, i: int, radius: float):
    a, c = lines.angles[i], lines.offsets[i]
    foot = -c * np.array([math.cos(a), math.sin(a)])
    d = np.array([-math.sin(a), math.cos(a)])
    h2 = radius * radius - c * c
    if h2 <= 0:
        return None
    h = math.sqrt(h2)
    return foot - h * d, foot + h * d


def _pts(arr):
    return " ".join(f"{x:.2f},{y:.2f}" for x, y in arr)


def triangle_vertices(lines: LineSet, tri) -> np.ndarray:
    i, j, k = tri
    return np.array([intersection(lines, i, j), intersection(lines, j, k), intersection(lines, i, k)])


def render_svg(lines: LineSet, table: ArrangementTable | None = None,
               cfg: RenderConfig = RenderConfig()) -> str:
    """Draw the arrangement; shade the table's triangles when requested."""
    proj = _Projector(lines, cfg)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
             f'width="{cfg.size}" height="{cfg.size}" viewBox="0 0 {cfg.size} {cfg.size}">',
             f'<rect width="{cfg.size}" height="{cfg.size}" fill="white"/>']
    tris = []
    if cfg.shade_triangles and table is not None:
        rep = verify_fit(lines, table)
        if not rep.passed:
            raise ValueError(f"lines do not realize the table: {rep.summary()}")
        tris = sorted(count_triangles(table))
    parts.append(f'<g id="triangles" fill="{escape(cfg.fill)}" stroke="none">')
    for tri in tris:
        v = triangle_vertices(lines, tri)
        ring = []
        for s in range(3):
            seg = proj.polyline(v[s], v[(s + 1) % 3])
            ring.extend(seg[:-1])
        parts.append(f'<polygon data-lines="{tri[0]},{tri[1]},{tri[2]}" points="{_pts(ring)}"/>')
    parts.append("</g>")
    parts.append(f'<g id="lines" fill="none" stroke="{escape(cfg.stroke)}" '
                 f'stroke-width="{cfg.stroke_width}">')
    labels = []
    for i in range(lines.n):
        seg = _clip_segment(lines, i, proj.clip)
        if seg is None:
            continue
        pts = proj.polyline(*seg)
        parts.append(f'<polyline data-line="{i + 1}" points="{_pts(pts)}"/>')
        labels.append((i + 1, pts[0]))
    parts.append("</g>")
    if cfg.labels:
        parts.append('<g id="labels" font-family="sans-serif" font-size="12" fill="#444">')
        for i, (x, y) in labels:
            parts.append(f'<text x="{x:.1f}" y="{y:.1f}">{i}</text>')
        parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


@dataclass
class Cluster:
    center: tuple
    radius: float
    triangles: list = field(default_factory=list)


def triangle_areas(lines: LineSet, table: ArrangementTable) -> dict:
    out = {}
    for tri in count_triangles(table):
        v = triangle_vertices(lines, tri)
        u, w = v[1] - v[0], v[2] - v[0]
        out[tri] = 0.5 * abs(float(u[0] * w[1] - u[1] * w[0]))
    return out


def detect_small_triangles(lines: LineSet, table: ArrangementTable, threshold: float = 0.1) -> list:
    """Clusters of triangles smaller than ``threshold`` times the median area.

    Small triangles whose circles (centroid, farthest vertex) overlap are
    merged; each cluster reports a covering circle.
    """
    areas = triangle_areas(lines, table)
    if not areas or threshold <= 0:
        return []
    med = float(np.median(list(areas.values())))
    small = [t for t, a in sorted(areas.items()) if a < threshold * med]
    if not small:
        return []
    verts = {t: triangle_vertices(lines, t) for t in small}
    cent = {t: verts[t].mean(axis=0) for t in small}
    rad = {t: float(np.linalg.norm(verts[t] - cent[t], axis=1).max()) for t in small}
    parent = list(range(len(small)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x in range(len(small)):
        for y in range(x + 1, len(small)):
            tx, ty = small[x], small[y]
            if np.linalg.norm(cent[tx] - cent[ty]) <= 2 * (rad[tx] + rad[ty]):
                parent[find(x)] = find(y)
    groups = {}
    for x, t in enumerate(small):
        groups.setdefault(find(x), []).append(t)
    out = []
    for members in groups.values():
        pts = np.concatenate([verts[t] for t in members])
        center = pts.mean(axis=0)
        radius = float(np.linalg.norm(pts - center, axis=1).max())
        out.append(Cluster((float(center[0]), float(center[1])), radius, sorted(members)))
    out.sort(key=lambda c: (-len(c.triangles), c.center))
    return out
