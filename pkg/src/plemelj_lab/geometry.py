"""Jordan curves: construction, arc-length parametrization, geometric constants.

A curve is described symbolically by :class:`CurveSpec` and realized as a
:class:`SampledCurve`: ``N`` nodes at (approximately) equal arc-length spacing,
positively oriented, together with unit tangents, quadrature weights for the
arc-length measure, and the list of corner nodes for downstream mesh grading.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegeneratePath, InvalidCurve

CURVE_KINDS = ("circle", "ellipse", "polygon", "polar_lipschitz", "koch_prefractal")

# Relative slack allowed on node spacing vs total_length/N.
EPS_GEOM = 0.05


@dataclass(frozen=True)
class CurveSpec:
    """Symbolic description of a positively oriented Jordan curve.

    kind = "circle"          params: radius
    kind = "ellipse"         params: a, b (semi-axes)
    kind = "polygon"         params: vertices (complex array, CCW)
    kind = "polar_lipschitz" params: coeffs {n: c}; r(t) = c0 + sum_{n>0} c_n cos(nt)
                             + sum_{n<0} c_|n| sin(|n|t)
    kind = "koch_prefractal" params: level (0..8), side (base triangle side)
    """

    kind: str
    radius: float = 1.0
    a: float = 1.0
    b: float = 1.0
    vertices: tuple = ()
    coeffs: tuple = ()  # tuple of (n, c) pairs, hashable
    level: int = 0
    side: float = 1.0

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise InvalidCurve(f"unknown curve kind {self.kind!r}")
        if self.kind == "circle" and self.radius <= 0:
            raise InvalidCurve("circle radius must be positive")
        if self.kind == "ellipse" and (self.a <= 0 or self.b <= 0):
            raise InvalidCurve("ellipse semi-axes must be positive")
        if self.kind == "polygon":
            v = np.asarray([complex(z) for z in self.vertices])
            if len(v) < 3:
                raise InvalidCurve("polygon needs at least 3 vertices")
            if not _polygon_is_simple(v):
                raise InvalidCurve("polygon is self-intersecting")
            if _polygon_signed_area(v) <= 0:
                raise InvalidCurve("polygon must be positively oriented (CCW)")
        if self.kind == "polar_lipschitz":
            r = _polar_radius(dict(self.coeffs), np.linspace(0, 2 * np.pi, 4096, endpoint=False))
            if r.min() <= 0:
                raise InvalidCurve("polar radius function must be strictly positive")
        if self.kind == "koch_prefractal":
            if not (0 <= int(self.level) <= 8):
                raise InvalidCurve("koch level must be in [0, 8]")
            if self.side <= 0:
                raise InvalidCurve("koch base side must be positive")

    # -- JSON wire format -------------------------------------------------

    def to_json_dict(self) -> dict:
        if self.kind == "circle":
            return {"kind": "circle", "radius": self.radius}
        if self.kind == "ellipse":
            return {"kind": "ellipse", "a": self.a, "b": self.b}
        if self.kind == "polygon":
            return {"kind": "polygon",
                    "vertices": [[float(np.real(z)), float(np.imag(z))] for z in self.vertices]}
        if self.kind == "polar_lipschitz":
            return {"kind": "polar_lipschitz",
                    "coeffs": {str(n): float(c) for n, c in self.coeffs}}
        return {"kind": "koch", "level": int(self.level), "side": float(self.side)}

    @staticmethod
    def from_json_dict(d: dict) -> "CurveSpec":
        kind = d.get("kind")
        if kind == "circle":
            return CurveSpec("circle", radius=float(d["radius"]))
        if kind == "ellipse":
            return CurveSpec("ellipse", a=float(d["a"]), b=float(d["b"]))
        if kind == "polygon":
            verts = tuple(complex(x, y) for x, y in d["vertices"])
            return CurveSpec("polygon", vertices=verts)
        if kind == "polar_lipschitz":
            coeffs = tuple(sorted((int(n), float(c)) for n, c in d["coeffs"].items()))
            return CurveSpec("polar_lipschitz", coeffs=coeffs)
        if kind in ("koch", "koch_prefractal"):
            return CurveSpec("koch_prefractal", level=int(d["level"]), side=float(d.get("side", 1.0)))
        raise InvalidCurve(f"unknown curve kind {kind!r} in JSON spec")

    def curve_id(self) -> str:
        """Content hash of the canonical JSON form (12 hex chars)."""
        blob = json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]


def polar_spec(coeffs: dict) -> CurveSpec:
    """Convenience constructor for polar_lipschitz specs from an {n: c} dict."""
    return CurveSpec("polar_lipschitz", coeffs=tuple(sorted(coeffs.items())))


@dataclass
class SampledCurve:
    """A positively oriented closed curve sampled at arc-length nodes."""

    nodes: np.ndarray          # complex, shape (N,)
    total_length: float
    tangents: np.ndarray       # unit complex, shape (N,)
    node_weights: np.ndarray   # arc-length quadrature weights, shape (N,)
    arc_pos: np.ndarray        # cumulative arc length of each node, arc_pos[0] = 0
    corner_indices: np.ndarray = field(default_factory=lambda: np.array([], dtype=int))
    spec: CurveSpec | None = None

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def diameter(self) -> float:
        # max pairwise distance; exact on the node set
        pts = self.nodes
        if len(pts) > 1024:
            pts = pts[:: len(pts) // 1024]
        d = np.abs(pts[:, None] - pts[None, :])
        return float(d.max())

    def interior_point(self) -> complex:
        """A probe point in the interior component (winding number +1)."""
        cands = [self.nodes.mean()]
        # inward offsets from a few nodes (positive orientation: interior on the left)
        h = self.total_length / self.n
        for k in range(0, self.n, max(1, self.n // 7)):
            for scale in (2.0, 0.5):
                cands.append(self.nodes[k] + 1j * self.tangents[k] * scale * h)
        tiny = 1e-9 * max(np.abs(self.nodes).max(), 1.0)
        for c in cands:
            if np.min(np.abs(self.nodes - c)) < tiny:
                continue
            if abs(winding_number(self.nodes, c) - 1.0) < 1e-9:
                return complex(c)
        raise InvalidCurve("could not locate an interior probe point")

    def validate(self):
        n = self.n
        if n < 3:
            raise InvalidCurve("need at least 3 nodes")
        gaps = np.abs(np.roll(self.nodes, -1) - self.nodes)
        if gaps.min() == 0.0:
            raise InvalidCurve("coincident consecutive nodes")
        if gaps.max() > (self.total_length / n) * (1 + EPS_GEOM):
            raise InvalidCurve(
                f"node spacing {gaps.max():.3g} exceeds (L/N)(1+eps), L/N={self.total_length / n:.3g}")
        if np.abs(np.abs(self.tangents) - 1.0).max() > 1e-12:
            raise InvalidCurve("tangents must have unit modulus")
        w = winding_number(self.nodes, self.interior_point())
        if abs(w - 1.0) > 1e-9:
            raise InvalidCurve(f"winding number about interior probe is {w}, expected +1")


def winding_number(nodes: np.ndarray, z: complex) -> float:
    """Winding number of the closed node polygon about z."""
    w = nodes - z
    ang = np.angle(np.roll(w, -1) / w)
    return float(ang.sum() / (2 * np.pi))


# ---------------------------------------------------------------------------
# parametrizations


def _polar_radius(coeffs: dict, t: np.ndarray) -> np.ndarray:
    r = np.zeros_like(t, dtype=float)
    for n, c in coeffs.items():
        n = int(n)
        if n == 0:
            r += c
        elif n > 0:
            r += c * np.cos(n * t)
        else:
            r += c * np.sin(-n * t)
    return r


def _polar_radius_deriv(coeffs: dict, t: np.ndarray) -> np.ndarray:
    dr = np.zeros_like(t, dtype=float)
    for n, c in coeffs.items():
        n = int(n)
        if n > 0:
            dr += -c * n * np.sin(n * t)
        elif n < 0:
            dr += c * (-n) * np.cos(-n * t)
    return dr


def _param_point(spec: CurveSpec, t: np.ndarray) -> np.ndarray:
    if spec.kind == "circle":
        return spec.radius * np.exp(1j * t)
    if spec.kind == "ellipse":
        return spec.a * np.cos(t) + 1j * spec.b * np.sin(t)
    if spec.kind == "polar_lipschitz":
        return _polar_radius(dict(spec.coeffs), t) * np.exp(1j * t)
    raise InvalidCurve("not a parametric kind")


def _param_deriv(spec: CurveSpec, t: np.ndarray) -> np.ndarray:
    if spec.kind == "circle":
        return 1j * spec.radius * np.exp(1j * t)
    if spec.kind == "ellipse":
        return -spec.a * np.sin(t) + 1j * spec.b * np.cos(t)
    if spec.kind == "polar_lipschitz":
        c = dict(spec.coeffs)
        r = _polar_radius(c, t)
        dr = _polar_radius_deriv(c, t)
        return (dr + 1j * r) * np.exp(1j * t)
    raise InvalidCurve("not a parametric kind")


def koch_vertices(level: int, side: float = 1.0) -> np.ndarray:
    """Vertices of the Koch snowflake prefractal (CCW, bumps outward)."""
    h = side / math.sqrt(3.0)
    base = np.array([h * np.exp(1j * (np.pi / 2 + 2 * np.pi * k / 3)) for k in range(3)])
    verts = base
    for _ in range(int(level)):
        p = verts
        q = np.roll(verts, -1)
        e = q - p
        # outward apex: rotate edge by -90 degrees (interior lies to the left)
        apex = p + e / 2 - 1j * e * (math.sqrt(3) / 6)
        new = np.empty(4 * len(p), dtype=complex)
        new[0::4] = p
        new[1::4] = p + e / 3
        new[2::4] = apex
        new[3::4] = p + 2 * e / 3
        verts = new
    return verts


def spec_vertices(spec: CurveSpec) -> np.ndarray:
    if spec.kind == "polygon":
        return np.asarray([complex(z) for z in spec.vertices])
    if spec.kind == "koch_prefractal":
        return koch_vertices(spec.level, spec.side)
    raise InvalidCurve("not a polygonal kind")


def _polygon_signed_area(v: np.ndarray) -> float:
    x, y = v.real, v.imag
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _polygon_is_simple(v: np.ndarray) -> bool:
    n = len(v)
    a, b = v, np.roll(v, -1)
    if np.abs(b - a).min() == 0:
        return False
    for i in range(n):
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # shared endpoint
            if _segments_cross(a[i], b[i], a[j], b[j]):
                return False
    return True


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        u, v = b - a, c - a
        return np.sign(u.real * v.imag - u.imag * v.real)

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    return False


# ---------------------------------------------------------------------------
# curve construction


def build_curve(spec: CurveSpec, n_nodes: int, normalize_length: bool = False) -> SampledCurve:
    """Sample a curve at n_nodes equal-arc-length nodes.

    Polygonal kinds allocate nodes per edge (largest-remainder rounding of the
    proportional share) so every corner is a node; equal-edge polygons with
    n_nodes a multiple of the edge count get exactly uniform spacing.

    With normalize_length=True the curve is rescaled to total length 2*pi.
    """
    if n_nodes < 8 or n_nodes % 2:
        raise InvalidCurve("need an even node count >= 8")

    if spec.kind in ("polygon", "koch_prefractal"):
        curve = _build_polygonal(spec, n_nodes)
    elif spec.kind == "circle":
        t = 2 * np.pi * np.arange(n_nodes) / n_nodes
        L = 2 * np.pi * spec.radius
        curve = SampledCurve(
            nodes=_param_point(spec, t),
            total_length=L,
            tangents=np.exp(1j * (t + np.pi / 2)),
            node_weights=np.full(n_nodes, L / n_nodes),
            arc_pos=spec.radius * t,
            spec=spec,
        )
    else:
        curve = _build_parametric(spec, n_nodes)

    if normalize_length:
        curve = scale_curve(curve, 2 * np.pi / curve.total_length)
    curve.validate()
    return curve


def scale_curve(curve: SampledCurve, factor: float, origin: complex = 0.0) -> SampledCurve:
    return SampledCurve(
        nodes=origin + factor * (curve.nodes - origin),
        total_length=curve.total_length * factor,
        tangents=curve.tangents.copy(),
        node_weights=curve.node_weights * factor,
        arc_pos=curve.arc_pos * factor,
        corner_indices=curve.corner_indices.copy(),
        spec=curve.spec,
    )


def _build_parametric(spec: CurveSpec, n_nodes: int) -> SampledCurve:
    m = max(8192, 32 * n_nodes)
    t = 2 * np.pi * np.arange(m + 1) / m
    pts = _param_point(spec, t)
    seg = np.abs(np.diff(pts))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    L = float(cum[-1])
    targets = L * np.arange(n_nodes) / n_nodes
    tk = np.interp(targets, cum, t)
    nodes = _param_point(spec, tk)
    dg = _param_deriv(spec, tk)
    return SampledCurve(
        nodes=nodes,
        total_length=L,
        tangents=dg / np.abs(dg),
        node_weights=np.full(n_nodes, L / n_nodes),
        arc_pos=targets,
        spec=spec,
    )


def _build_polygonal(spec: CurveSpec, n_nodes: int) -> SampledCurve:
    verts = spec_vertices(spec)
    ne = len(verts)
    if n_nodes < ne:
        raise InvalidCurve(f"need at least one node per edge ({ne} edges)")
    edges = np.roll(verts, -1) - verts
    lens = np.abs(edges)
    L = float(lens.sum())

    # largest-remainder proportional allocation, >= 1 node per edge
    share = n_nodes * lens / L
    counts = np.maximum(np.floor(share).astype(int), 1)
    rem = n_nodes - counts.sum()
    if rem < 0:
        raise InvalidCurve("node count too small for the edge structure")
    if rem > 0:
        order = np.argsort(-(share - np.floor(share)))
        counts[order[:rem]] += 1

    nodes, tangents, arc, corners = [], [], [], []
    s0 = 0.0
    for k in range(ne):
        frac = np.arange(counts[k]) / counts[k]
        nodes.append(verts[k] + frac * edges[k])
        tangents.append(np.full(counts[k], edges[k] / lens[k]))
        arc.append(s0 + frac * lens[k])
        corners.append(len(np.concatenate(arc)) - counts[k])
        s0 += lens[k]
    nodes = np.concatenate(nodes)
    arc = np.concatenate(arc)
    gaps = np.diff(np.concatenate([arc, [L]]))
    weights = 0.5 * (gaps + np.roll(gaps, 1))
    return SampledCurve(
        nodes=nodes,
        total_length=L,
        tangents=np.concatenate(tangents),
        node_weights=weights,
        arc_pos=arc,
        corner_indices=np.asarray(corners, dtype=int),
        spec=spec,
    )


def reparametrize_arclength(samples: np.ndarray, n_nodes: int | None = None) -> SampledCurve:
    """Resample a closed polyline at uniform arc-length spacing.

    The cumulative chord-length table is inverted by monotone piecewise-linear
    interpolation, which is exact on polygons. Corners (tangent turning angle
    above ~20 degrees) are detected and recorded.
    """
    pts = np.asarray(samples, dtype=complex)
    if len(pts) >= 2 and abs(pts[-1] - pts[0]) < 1e-15 * max(1.0, np.abs(pts).max()):
        pts = pts[:-1]
    if len(pts) < 3:
        raise DegeneratePath("need at least 3 distinct points")
    seg = np.abs(np.roll(pts, -1) - pts)
    if seg.min() == 0.0:
        raise DegeneratePath("repeated consecutive points")
    if n_nodes is None:
        n_nodes = len(pts) - (len(pts) % 2)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    L = float(cum[-1])
    closed = np.concatenate([pts, [pts[0]]])
    targets = L * np.arange(n_nodes) / n_nodes
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(pts) - 1)
    frac = (targets - cum[idx]) / seg[idx]
    nodes = closed[idx] + frac * (closed[idx + 1] - closed[idx])
    tang = (closed[idx + 1] - closed[idx]) / seg[idx]

    turn = np.abs(np.angle(np.roll(tang, -1) / tang))
    corners = np.where(turn > np.deg2rad(20))[0] + 1
    corners = corners[corners < n_nodes]
    curve = SampledCurve(
        nodes=nodes,
        total_length=L,
        tangents=tang,
        node_weights=np.full(n_nodes, L / n_nodes),
        arc_pos=targets,
        corner_indices=corners,
    )
    curve.validate()
    return curve


# ---------------------------------------------------------------------------
# geometric constants


def chord_arc_constant(curve: SampledCurve, block: int = 1024) -> float:
    """max over node pairs of (shorter-arc length) / (chord length).

    Converges to the chord-arc constant K from below as the node count grows.
    """
    s, z, L = curve.arc_pos, curve.nodes, curve.total_length
    best = 1.0
    n = curve.n
    for i0 in range(0, n, block):
        sl = slice(i0, min(i0 + block, n))
        ds = np.abs(s[sl, None] - s[None, :])
        arcs = np.minimum(ds, L - ds)
        chords = np.abs(z[sl, None] - z[None, :])
        np.fill_diagonal(chords[:, i0:i0 + (sl.stop - sl.start)], np.inf)
        best = max(best, float((arcs / chords).max()))
    return best


def distance_to_curve(curve: SampledCurve, z) -> float | np.ndarray:
    """Distance from z (scalar or array) to the sampled curve (min over segments)."""
    zs = np.atleast_1d(np.asarray(z, dtype=complex))
    a = curve.nodes
    b = np.roll(curve.nodes, -1)
    if zs.size * curve.n <= 4_000_000:
        d = _points_segments_dist(zs, a, b).min(axis=1)
    else:
        d = _distance_kdtree(curve, zs)
    return float(d[0]) if np.isscalar(z) or np.asarray(z).ndim == 0 else d


def _points_segments_dist(zs: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    e = b[None, :] - a[None, :]
    w = zs[:, None] - a[None, :]
    t = np.clip((w * e.conj()).real / np.abs(e) ** 2, 0.0, 1.0)
    return np.abs(w - t * e)


_KDTREE_CACHE: dict[int, cKDTree] = {}


def _distance_kdtree(curve: SampledCurve, zs: np.ndarray, k: int = 8) -> np.ndarray:
    key = id(curve)
    tree = _KDTREE_CACHE.get(key)
    if tree is None:
        tree = cKDTree(np.column_stack([curve.nodes.real, curve.nodes.imag]))
        _KDTREE_CACHE[key] = tree
        if len(_KDTREE_CACHE) > 16:
            _KDTREE_CACHE.pop(next(iter(_KDTREE_CACHE)))
    _, idx = tree.query(np.column_stack([zs.real, zs.imag]), k=k)
    n = curve.n
    out = np.full(len(zs), np.inf)
    closed = np.concatenate([curve.nodes, [curve.nodes[0]]])
    for j in range(k):
        for off in (-1, 0):
            i = (idx[:, j] + off) % n
            a, b = closed[i], closed[i + 1]
            e = b - a
            w = zs - a
            t = np.clip((w * e.conj()).real / np.abs(e) ** 2, 0.0, 1.0)
            out = np.minimum(out, np.abs(w - t * e))
    return out


def lipschitz_constant(spec: CurveSpec, grid: int = 8192) -> float:
    """max |r'(theta)| of a polar_lipschitz radius function on a dense grid."""
    if spec.kind != "polar_lipschitz":
        raise InvalidCurve("lipschitz_constant requires a polar_lipschitz spec")
    t = np.linspace(0, 2 * np.pi, max(grid, 4096), endpoint=False)
    return float(np.abs(_polar_radius_deriv(dict(spec.coeffs), t)).max())


@dataclass(frozen=True)
class GeometryConstants:
    chord_arc_K: float
    diameter: float
    lipschitz_M: float | None = None


def geometry_constants(curve: SampledCurve) -> GeometryConstants:
    M = None
    if curve.spec is not None and curve.spec.kind == "polar_lipschitz":
        M = lipschitz_constant(curve.spec)
    return GeometryConstants(
        chord_arc_K=chord_arc_constant(curve),
        diameter=curve.diameter,
        lipschitz_M=M,
    )
