"""Fractal regularity analysis of curves.

Dilation areas |E + B(0,t)| are measured on pixel bitmaps through a Euclidean
distance transform, giving the content ratios area / t^{2-delta} over a
dyadic ladder of t. The growth of the local constants
sup h_delta(curve within D(z,R)) / R^delta across scales drives a bisection
estimate of the regularity exponent h; the solvable-exponent interval is then
((h-1)/2, (3-h)/2). Plane and circle Muckenhoupt ratios are sampled with a
seeded Monte Carlo / dyadic-arc sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import distance_transform_edt

from .errors import EmptyInterval, GridTooFine, InvalidParameter, InvalidWeight
from .geometry import SampledCurve, distance_to_curve

_MEMORY_CAP_PIXELS = 220_000_000


def _rasterize_distance(points: np.ndarray, pixel: float, pad: float):
    """Distance (in world units) to the point cloud on a padded pixel grid."""
    xmin, xmax = points.real.min() - pad, points.real.max() + pad
    ymin, ymax = points.imag.min() - pad, points.imag.max() + pad
    nx = int(math.ceil((xmax - xmin) / pixel)) + 1
    ny = int(math.ceil((ymax - ymin) / pixel)) + 1
    if nx * ny > _MEMORY_CAP_PIXELS:
        raise GridTooFine(f"bitmap {nx} x {ny} exceeds the memory cap")
    occ = np.ones((ny, nx), dtype=bool)
    ix = np.clip(((points.real - xmin) / pixel).astype(int), 0, nx - 1)
    iy = np.clip(((points.imag - ymin) / pixel).astype(int), 0, ny - 1)
    occ[iy, ix] = False
    dist = distance_transform_edt(occ) * pixel
    return dist, pixel


def _dense_points(curve: SampledCurve, spacing: float) -> np.ndarray:
    """Points along the curve polyline at most `spacing` apart."""
    per_seg = np.maximum(1, np.ceil(curve.node_weights / spacing).astype(int))
    a = curve.nodes
    b = np.roll(curve.nodes, -1)
    out = []
    for k in range(curve.n):
        fr = np.arange(per_seg[k]) / per_seg[k]
        out.append(a[k] + fr * (b[k] - a[k]))
    return np.concatenate(out)


@dataclass
class DilationGrid:
    pixel: float
    t_ladder: np.ndarray
    areas: np.ndarray         # |E + B(0, t_j)|
    perimeter_bound: float    # pixel-error scale: perimeter * pixel

    def content(self, delta: float) -> np.ndarray:
        return self.areas / self.t_ladder ** (2.0 - delta)


def dilation_grid(points: np.ndarray, diam: float, ladder: int = 8,
                  pixel_per_t: int = 8) -> DilationGrid:
    """Dilation areas for t_j = diam * 2^-j, j = 0..ladder."""
    if ladder > 12:
        raise InvalidParameter("ladder depth capped at 12")
    t = diam * 2.0 ** (-np.arange(ladder + 1, dtype=float))
    pixel = t[-1] / pixel_per_t
    dist, pixel = _rasterize_distance(points, pixel, pad=1.05 * diam)
    areas = np.array([(dist <= tj).sum() * pixel * pixel for tj in t])
    # crude perimeter estimate for the pixel error bound
    per = ((dist <= pixel).sum() * pixel * pixel) / (2 * pixel)
    return DilationGrid(pixel=pixel, t_ladder=t, areas=areas,
                        perimeter_bound=float(per * pixel))


def minkowski_content(curve: SampledCurve, delta: float, ladder: int = 8) -> float:
    """sup over the t-ladder of |curve + B(0,t)| / t^{2-delta}."""
    if not 1.0 <= delta <= 2.0:
        raise InvalidParameter("delta must lie in [1, 2]")
    diam = curve.diameter
    pts = _dense_points(curve, diam / 2048)
    grid = dilation_grid(pts, diam, ladder=ladder)
    return float(grid.content(delta).max())


def _feature_scale(curve: SampledCurve) -> float | None:
    if curve.spec is not None and curve.spec.kind == "koch_prefractal":
        return curve.spec.side / 3.0 ** curve.spec.level
    return None


def _local_dilation_table(points: np.ndarray, t_floor: float | None,
                          R: float | None = None):
    """(t_ladder, dilation areas) of a curve piece cut out by a radius-R disk.

    The ladder starts at R/4 (larger t only measures the bulk disk area of
    the dilation, which swamps the fractal content at prefractal scale) and
    descends by octaves to t_floor (the curve's feature scale) when given,
    else four octaves. Anchoring the ladder to R, not to the piece diameter,
    keeps the constants comparable across sample centers.
    """
    sub_diam = float(max(np.ptp(points.real), np.ptp(points.imag)))
    if sub_diam == 0.0 or len(points) < 2:
        return None
    t_top = (R if R is not None else sub_diam) / 4.0
    if t_floor is None or t_floor >= t_top / 16:
        n_oct = 4
    else:
        n_oct = min(10, int(math.ceil(math.log2(t_top / t_floor))))
    t = t_top * 2.0 ** (-np.arange(n_oct + 1, dtype=float))
    pixel = max(t[-1] / 4.0, t_top / 400.0)
    dist, pixel = _rasterize_distance(points, pixel, pad=1.2 * t[0])
    areas = np.array([(dist <= tj).sum() * pixel * pixel for tj in t])
    return t, areas


def _content_tables(curve: SampledCurve, radii, n_centers: int, seed: int):
    """Per (radius, center) dilation tables; delta enters only afterwards.

    One center set is shared by every radius so the constants are comparable
    across the R-ladder (the growth statistic is a ratio of suprema).
    """
    rng = np.random.default_rng(seed)
    diam = curve.diameter
    pts = _dense_points(curve, diam / 4096)
    t_floor = _feature_scale(curve)
    centers = pts[rng.integers(0, len(pts), size=n_centers)]
    tables = []
    for R in radii:
        per_center = {}
        for ci, z in enumerate(centers):
            local = pts[np.abs(pts - z) <= R]
            if len(local) < 8:
                continue
            tab = _local_dilation_table(local, t_floor, R=R)
            if tab is not None:
                per_center[ci] = tab
        tables.append(per_center)
    return tables


def _constants_from_tables(tables, radii, delta: float) -> np.ndarray:
    out = []
    for R, per_center in zip(radii, tables):
        best = 0.0
        for t, areas in per_center.values():
            best = max(best, float((areas / t ** (2.0 - delta)).max()))
        out.append(best / R ** delta)
    return np.asarray(out)


def _per_center_slopes(tables, radii, delta: float) -> np.ndarray:
    """Per-center slope of log2 c_z(R) against log2 R (positive = content
    constants grow toward coarse radii). The finest radius is dropped
    (prefractal flattening near the feature scale)."""
    common = set(tables[0])
    for per_center in tables[1:]:
        common &= set(per_center)
    lr = np.log2(np.asarray(radii[:-1], dtype=float))
    slopes = []
    for ci in sorted(common):
        c = []
        for R, per_center in zip(radii, tables):
            t, areas = per_center[ci]
            c.append(float((areas / t ** (2.0 - delta)).max()) / R ** delta)
        c = np.asarray(c)[:-1]
        if np.any(c <= 0):
            continue
        slopes.append(np.polyfit(lr, np.log2(c), 1)[0])
    return np.asarray(slopes)


def delta_regularity_constant(curve: SampledCurve, delta: float,
                              n_centers: int = 64, radii=None, seed: int = 11,
                              per_radius: bool = False,
                              _tables=None):
    """max over sampled disks D(z, R), z on the curve, of
    h_delta(curve within the disk) / R^delta."""
    diam = curve.diameter
    if radii is None:
        radii = diam * 2.0 ** (-np.arange(1, 7, dtype=float))
    radii = np.asarray(radii, dtype=float)
    if _tables is None:
        _tables = _content_tables(curve, radii, n_centers, seed)
    vals = _constants_from_tables(_tables, radii, delta)
    if per_radius:
        return radii, vals
    return float(vals.max())


@dataclass
class RegularityReport:
    h_estimate: float
    h_bracket: tuple
    h_delta_table: list
    porosity_c: float = math.nan
    ap_constants: dict = field(default_factory=dict)
    solvable_interval: tuple = ()
    noisy: bool = False
    scale_window: tuple = ()


def estimate_h(curve: SampledCurve, n_centers: int = 48, grid_points: int = 33,
               seed: int = 11, growth_tol: float = 1.02,
               scale_window: tuple | None = None) -> RegularityReport:
    """Regularity exponent from the scale-growth of local content constants.

    For each delta the median per-center slope of log c(R) against log R is
    measured over the sampled radius window (a delta-regular curve has flat
    constants; below the exponent they grow like R^(d - delta) toward coarse
    scales). The slope profile is monotonized in delta and h is the first
    delta where it falls below log2(growth_tol). For prefractals the radii
    are clipped to [feature * 4, diam / 4]: below the feature size every
    prefractal is polygonal and the exponent trends back to 1.

    The dilation tables are delta-independent and are computed once; a
    strongly non-monotone slope profile sets the noisy flag.
    """
    diam = curve.diameter
    feature = _feature_scale(curve)
    if scale_window is None and feature is not None:
        scale_window = (4.0 * feature, diam / 4.0)
    lo_R = scale_window[0] if scale_window else diam / 128.0
    hi_R = scale_window[1] if scale_window else diam / 4.0
    octaves = math.log2(hi_R / lo_R)
    n_R = max(4, int(round(2 * octaves)) + 1)  # half-octave spacing
    radii = hi_R * (lo_R / hi_R) ** (np.arange(n_R) / (n_R - 1))

    tables = _content_tables(curve, radii, n_centers, seed)
    deltas = np.linspace(1.0, 2.0, grid_points)
    med_slopes = []
    table_log = []
    for d in deltas:
        sl = _per_center_slopes(tables, radii, d)
        med_slopes.append(np.median(sl) if len(sl) else 0.0)
        table_log.append((float(d),
                          _constants_from_tables(tables, radii, d).tolist()))
    med_slopes = np.asarray(med_slopes)
    # admissibility is monotone in delta up to noise: enforce a
    # non-increasing envelope and flag large deviations
    envelope = np.maximum.accumulate(med_slopes[::-1])[::-1]
    noisy = bool(np.max(np.abs(envelope - med_slopes)) > 0.05)

    thr = math.log2(growth_tol)
    below = envelope <= thr
    if below[0]:
        h, bracket = 1.0, (1.0, float(deltas[1]))
    elif not below.any():
        h, bracket = 2.0 - 1e-9, (float(deltas[-1]), 2.0)
    else:
        i = int(np.argmax(below))
        x0, x1 = deltas[i - 1], deltas[i]
        y0, y1 = envelope[i - 1], envelope[i]
        h = float(x0 + (x1 - x0) * (y0 - thr) / max(y0 - y1, 1e-12))
        bracket = (float(x0), float(x1))
    return RegularityReport(h_estimate=float(h), h_bracket=bracket,
                            h_delta_table=table_log, noisy=noisy,
                            scale_window=tuple(scale_window) if scale_window else (),
                            solvable_interval=solvable_interval(min(h, 2 - 1e-9)))


def box_counting_dimension(curve: SampledCurve, octaves: int = 6,
                           scale_window: tuple | None = None) -> float:
    """Box-counting slope on the same rasterization (oracle for estimate_h)."""
    diam = curve.diameter
    pts = _dense_points(curve, diam / 8192)
    sizes = diam * 2.0 ** (-np.arange(2, 2 + octaves, dtype=float))
    if scale_window is None and curve.spec is not None \
            and curve.spec.kind == "koch_prefractal":
        feature = curve.spec.side / 3.0 ** curve.spec.level
        scale_window = (4.0 * feature, diam / 4.0)
    if scale_window is not None:
        sizes = sizes[(sizes >= scale_window[0]) & (sizes <= scale_window[1])]
    counts = []
    x0, y0 = pts.real.min(), pts.imag.min()
    for eps in sizes:
        ij = np.unique(np.stack([((pts.real - x0) / eps).astype(np.int64),
                                 ((pts.imag - y0) / eps).astype(np.int64)]), axis=1)
        counts.append(ij.shape[1])
    slope = np.polyfit(np.log(1.0 / sizes), np.log(counts), 1)[0]
    return float(slope)


def porosity_constant(curve: SampledCurve, n_samples: int = 48, seed: int = 13,
                      grid: int = 128) -> float:
    """min over sampled disks D(z, r) of (largest empty subdisk radius) / r.

    Sampled lower bound, not a certificate: centers are drawn on and near the
    curve, radii log-spaced up to the diameter.
    """
    rng = np.random.default_rng(seed)
    diam = curve.diameter
    pts = _dense_points(curve, diam / 2048)
    worst = 1.0
    for _ in range(n_samples):
        z = pts[rng.integers(0, len(pts))]
        z = z + (rng.random() - 0.5) * 0.2 * diam * np.exp(2j * np.pi * rng.random())
        r = diam * 10.0 ** (-2.0 * rng.random())  # radii in [diam/100, diam]
        xs = z.real + np.linspace(-r, r, grid)
        ys = z.imag + np.linspace(-r, r, grid)
        P = xs[None, :] + 1j * ys[:, None]
        inside = np.abs(P - z) <= r
        d = distance_to_curve(curve, P.ravel()).reshape(P.shape)
        room = np.minimum(d, r - np.abs(P - z))
        best = float(np.max(np.where(inside, room, -np.inf)))
        worst = min(worst, best / r)
    return float(worst)


def ap_constant_plane(curve: SampledCurve, alpha: float, p: int = 2,
                      n_disks: int = 64, n_mc: int = 4096, seed: int = 17,
                      radii=None) -> float:
    """max over sampled disks of the Muckenhoupt ratio of d(z, curve)^(alpha-1).

    p = 2: mean(w) * mean(1/w); p = 1: mean(w) / (1 percent quantile of w),
    the quantile standing in for the essential infimum under Monte Carlo.
    """
    if p not in (1, 2):
        raise InvalidParameter("p must be 1 or 2")
    rng = np.random.default_rng(seed)
    diam = curve.diameter
    pts = _dense_points(curve, diam / 2048)
    if radii is None:
        radii = diam * 10.0 ** np.linspace(-2, 0, 7)
    worst = 0.0
    for R in radii:
        for _ in range(max(1, n_disks // len(radii))):
            z0 = pts[rng.integers(0, len(pts))]
            z0 = z0 + 0.3 * R * (rng.random() - 0.5 + 1j * (rng.random() - 0.5))
            u = rng.random(n_mc)
            v = rng.random(n_mc)
            zz = z0 + R * np.sqrt(u) * np.exp(2j * np.pi * v)
            d = distance_to_curve(curve, zz)
            d = np.maximum(d, 1e-14 * diam)
            w = d ** (alpha - 1.0)
            if p == 2:
                ratio = float(np.mean(w) * np.mean(1.0 / w))
            else:
                ratio = float(np.mean(w) / np.quantile(w, 0.01))
            worst = max(worst, ratio)
    return worst


def a2_circle_constant(weight_samples: np.ndarray, min_arc: int = 8) -> float:
    """max over dyadic arcs of mean(w) * mean(1/w) for samples on the circle."""
    w = np.asarray(weight_samples, dtype=float)
    if np.any(w <= 0) or not np.all(np.isfinite(w)):
        raise InvalidWeight("weight samples must be positive and finite")
    n = len(w)
    best = 0.0
    length = n
    while length >= max(min_arc, 2):
        # arcs of `length` samples at offsets stepping by length/2
        csum = np.concatenate([[0.0], np.cumsum(np.concatenate([w, w]))])
        cinv = np.concatenate([[0.0], np.cumsum(np.concatenate([1.0 / w, 1.0 / w]))])
        starts = np.arange(0, n, max(1, length // 2))
        m1 = (csum[starts + length] - csum[starts]) / length
        m2 = (cinv[starts + length] - cinv[starts]) / length
        best = max(best, float(np.max(m1 * m2)))
        length //= 2
    return best


def solvable_interval(h: float) -> tuple:
    """((h-1)/2, (3-h)/2); empty (error) when h >= 2."""
    if not 1.0 <= h:
        raise InvalidParameter("h must be >= 1")
    if h >= 2.0:
        raise EmptyInterval(f"h = {h} leaves no admissible exponents")
    return ((h - 1.0) / 2.0, (3.0 - h) / 2.0)


def dump_pbm(mask: np.ndarray, path):
    """Write a boolean bitmap as a plain PBM (P1) file."""
    with open(path, "w") as fh:
        fh.write(f"P1\n{mask.shape[1]} {mask.shape[0]}\n")
        for row in mask:
            fh.write(" ".join("1" if v else "0" for v in row) + "\n")
