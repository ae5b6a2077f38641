"""Riemann maps of the unit disk: Schwarz-Christoffel for polygons,
Theodorsen iteration for star-like polar graphs, identity for the disk.

All maps are normalized to phi(0) = interior anchor and phi'(0) > 0. The
derivative of a polygon map is the product form

    phi'(z) = C * prod_k (1 - z / z_k)^(alpha_k - 1),

where z_k are the prevertices and alpha_k * pi the interior angles. Since
Re(1 - z/z_k) > 0 on the open disk, principal logarithms give a continuous
single-valued branch of log phi', so phi'^beta is well defined for real beta.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.optimize import least_squares
from scipy.special import roots_jacobi

from . import spectral
from .errors import (BranchError, CorrespondenceDegenerate, CurveMapMismatch,
                     IllConditioned, InvalidCurve, SCNoConvergence, SingularPoint,
                     TheodorsenDiverged)
from .geometry import CurveSpec, SampledCurve, _polar_radius, _polar_radius_deriv, spec_vertices

_GL_NODES = np.polynomial.legendre.leggauss(16)


@dataclass
class RiemannMap:
    kind: str                       # identity_disk | schwarz_christoffel | theodorsen
    anchor: complex = 0.0           # phi(0)
    radius: float = 1.0             # identity_disk scale
    prevertices: np.ndarray | None = None
    interior_angles: np.ndarray | None = None  # alpha_k in (0, 2), multiples of pi
    sc_constant: complex = 1.0
    vertex_images: np.ndarray | None = None
    residual: float = 0.0
    # theodorsen data: boundary correspondence Theta on a uniform grid and the
    # Taylor coefficients of G(z) = log(phi(z)/z)
    theta_grid: np.ndarray | None = None
    log_coeffs: np.ndarray | None = None
    polar_coeffs: tuple = ()

    def prevertex_args(self) -> np.ndarray:
        return np.angle(self.prevertices)


def identity_disk_map(radius: float = 1.0) -> RiemannMap:
    return RiemannMap(kind="identity_disk", anchor=0.0, radius=radius)


# ---------------------------------------------------------------------------
# Schwarz-Christoffel


def _interior_angles(verts: np.ndarray) -> np.ndarray:
    """Interior angles alpha_k (multiples of pi) of a CCW polygon."""
    prev = np.roll(verts, 1) - verts
    nxt = np.roll(verts, -1) - verts
    ang = np.angle(prev / nxt)  # in (-pi, pi]
    ang = np.where(ang <= 0, ang + 2 * np.pi, ang)
    return ang / np.pi


def _sc_deriv_factors(z, prevertices, angles):
    """prod_k (1 - z/z_k)^(alpha_k - 1), vectorized over z."""
    z = np.asarray(z, dtype=complex)
    out = np.zeros(z.shape, dtype=complex)
    for zk, ak in zip(prevertices, angles):
        out += (ak - 1.0) * np.log1p(-z / zk)
    return np.exp(out)


def sc_derivative(m: RiemannMap, z) -> np.ndarray | complex:
    vals = m.sc_constant * _sc_deriv_factors(z, m.prevertices, m.interior_angles)
    return vals


def sc_log_derivative(m: RiemannMap, z):
    """Continuous branch of log phi'(z) on the disk."""
    z = np.asarray(z, dtype=complex)
    out = np.full(z.shape, np.log(m.sc_constant + 0j), dtype=complex)
    for zk, ak in zip(m.prevertices, m.interior_angles):
        out += (ak - 1.0) * np.log1p(-z / zk)
    return out


def _sc_side_integrals(args: np.ndarray, angles: np.ndarray, n_quad: int = 48) -> np.ndarray:
    """|side_k| for C = 1: arc integrals of |phi'| with Gauss-Jacobi endpoints.

    On the arc (theta_k, theta_{k+1}) the integrand has algebraic endpoint
    singularities with exponents alpha_k - 1 and alpha_{k+1} - 1; these are
    factored into the Jacobi weight exactly.
    """
    n = len(args)
    th1 = args
    th2 = np.concatenate([args[1:], [args[0] + 2 * np.pi]])
    out = np.empty(n)
    for k in range(n):
        a_exp = angles[(k + 1) % n] - 1.0  # exponent at the right endpoint
        b_exp = angles[k] - 1.0            # exponent at the left endpoint
        x, w = roots_jacobi(n_quad, a_exp, b_exp)
        half = 0.5 * (th2[k] - th1[k])
        theta = 0.5 * (th1[k] + th2[k]) + half * x
        # smooth remainder: all factors with the two singular ones regularized
        val = np.zeros_like(theta)
        for j in range(n):
            d = 2.0 * np.abs(np.sin(0.5 * (theta - args[j])))
            e = angles[j] - 1.0
            if j == k:
                ratio = d / ((1.0 + x) * half)
                val += e * np.log(ratio)
            elif j == (k + 1) % n:
                ratio = d / ((1.0 - x) * half)
                val += e * np.log(ratio)
            else:
                val += e * np.log(d)
        # Jacobi weight absorbs half^(a+b) scaling of the singular factors
        out[k] = half ** (1.0 + a_exp + b_exp) * np.sum(w * np.exp(val))
    return out


def _sc_integral_to_prevertex(prevertices, angles, k: int, n_quad: int = 48) -> complex:
    """int_0^{z_k} prod (1 - u/z_j)^(alpha_j - 1) du along the radius.

    Along the radius 1 - u/z_k = (1 - x)/2 is real, so Gauss-Jacobi with
    weight (1 - x)^(alpha_k - 1) absorbs the endpoint singularity exactly.
    """
    zk = prevertices[k]
    e_k = angles[k] - 1.0
    x, w = roots_jacobi(n_quad, e_k, 0.0)
    u = zk * (1.0 + x) / 2.0
    val = np.zeros(len(x), dtype=complex)
    for j in range(len(prevertices)):
        if j != k:
            val += (angles[j] - 1.0) * np.log1p(-u / prevertices[j])
    return complex(zk / 2.0 * 2.0 ** (-e_k) * np.sum(w * np.exp(val)))


def _sc_segment_integral(prevertices, angles, a: complex, b: complex, depth: int = 0) -> complex:
    """Gauss-Legendre on [a, b] with bisection until no prevertex is closer
    than half the segment length (one-half rule)."""
    mid = 0.5 * (a + b)
    half = 0.5 * abs(b - a)
    if half == 0.0:
        return 0.0
    dmin = np.min(np.abs(prevertices - mid)) if depth < 52 else np.inf
    if half > 0.5 * dmin and depth < 52:
        return (_sc_segment_integral(prevertices, angles, a, mid, depth + 1)
                + _sc_segment_integral(prevertices, angles, mid, b, depth + 1))
    x, w = _GL_NODES
    u = mid + 0.5 * (b - a) * x
    vals = _sc_deriv_factors(u, prevertices, angles)
    return complex(0.5 * (b - a) * np.sum(w * vals))


def solve_sc_parameters(polygon: CurveSpec, tol: float = 1e-10,
                        anchor: complex | None = None) -> RiemannMap:
    """Solve the SC parameter problem for a simple polygon (<= 24 vertices).

    Unknowns are the logs of prevertex argument gaps (softmax-normalized to
    sum 2 pi), the objective is the squared mismatch of normalized side
    lengths, and one rotational gauge is fixed during the solve. The solved
    map is then renormalized so that phi(0) = anchor (polygon centroid by
    default) and phi'(0) > 0.
    """
    verts = spec_vertices(polygon)
    n = len(verts)
    if n > 24:
        raise InvalidCurve("SC solver supports at most 24 vertices")
    angles = _interior_angles(verts)
    if np.any(angles < 0.05) or np.any(angles > 1.95):
        raise IllConditioned(f"near-degenerate interior angle: alpha={angles.min():.4f}pi")
    if abs((1.0 - angles).sum() - 2.0) > 1e-9:
        raise InvalidCurve("interior angles do not close up (sum of 1-alpha != 2)")

    sides = np.abs(np.roll(verts, -1) - verts)
    target = sides / sides.sum()

    def unpack(y):
        g = np.exp(y - y.max())
        g = 2 * np.pi * g / g.sum()
        args = np.concatenate([[0.0], np.cumsum(g)[:-1]])
        return args

    def resid(y):
        args = unpack(y)
        ell = _sc_side_integrals(args, angles)
        return ell / ell.sum() - target

    y0 = np.log(target)
    sol = least_squares(resid, y0, xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=400)
    res = np.abs(sol.fun).max()
    if res > max(tol, 1e-12):
        raise SCNoConvergence("SC parameter solve stagnated", residual=res)

    args = unpack(sol.x)
    prev = np.exp(1j * args)

    # affine constants from the radial integrals to the prevertices
    I = np.array([_sc_integral_to_prevertex(prev, angles, k) for k in range(n)])
    C = (verts[1] - verts[0]) / (I[1] - I[0])
    A = verts[0] - C * I[0]
    vres = np.abs(A + C * I - verts).max()

    m = RiemannMap(kind="schwarz_christoffel", anchor=A, prevertices=prev,
                   interior_angles=angles, sc_constant=C, vertex_images=verts,
                   residual=max(res, 0.0))

    if anchor is None:
        anchor = _polygon_centroid(verts)
    m = _sc_normalize(m, complex(anchor))
    I2 = np.array([_sc_integral_to_prevertex(m.prevertices, m.interior_angles, k)
                   for k in range(n)])
    vres2 = np.abs(m.anchor + m.sc_constant * I2 - verts).max()
    m.residual = float(max(res, min(vres, vres2) / max(sides.sum(), 1.0)))
    return m


def _polygon_centroid(verts: np.ndarray) -> complex:
    x, y = verts.real, verts.imag
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cr = x * yn - xn * y
    a = cr.sum() / 2.0
    cx = np.sum((x + xn) * cr) / (6 * a)
    cy = np.sum((y + yn) * cr) / (6 * a)
    return complex(cx, cy)


def _sc_normalize(m: RiemannMap, anchor: complex) -> RiemannMap:
    """Pre-compose with a disk automorphism so phi(0) = anchor, phi'(0) > 0."""
    # Newton for b with phi(b) = anchor
    b = 0.0 + 0.0j
    for _ in range(60):
        fb = eval_map(m, b)
        dfb = sc_derivative(m, b)
        step = (anchor - fb) / dfb
        if abs(step) > 0.5:
            step *= 0.5 / abs(step)
        b = b + step
        if abs(b) > 0.999:
            b *= 0.995 / abs(b)
        if abs(step) < 1e-15:
            break
    else:
        if abs(eval_map(m, b) - anchor) > 1e-9:
            raise SCNoConvergence("anchor inversion did not converge")

    # psi(w) = phi(m_b(e^{i rho} w)) with e^{i rho} = conj(phase(phi'(b)))
    # makes psi'(0) > 0; its prevertices are e^{-i rho} m_b^{-1}(z_k).
    dphi = sc_derivative(m, b) * (1.0 - abs(b) ** 2)
    rot = dphi / abs(dphi)
    prev_new = rot * (m.prevertices - b) / (1.0 - np.conj(b) * m.prevertices)
    prev_new /= np.abs(prev_new)
    c_new = abs(dphi)
    order = np.argsort(np.mod(np.angle(prev_new), 2 * np.pi))
    m2 = RiemannMap(kind="schwarz_christoffel", anchor=anchor,
                    prevertices=prev_new[order],
                    interior_angles=m.interior_angles[order],
                    sc_constant=c_new,
                    vertex_images=m.vertex_images[order],
                    residual=m.residual)
    # re-fit the constant so the first vertex image is exact
    I0 = _sc_integral_to_prevertex(m2.prevertices, m2.interior_angles, 0)
    c_fit = (m2.vertex_images[0] - anchor) / I0
    if abs(c_fit - c_new) / abs(c_new) < 0.05:
        m2.sc_constant = abs(c_fit)
    return m2


# ---------------------------------------------------------------------------
# map evaluation


def eval_map(m: RiemannMap, z) -> np.ndarray | complex:
    """phi(z) for |z| <= 1 (scalar or array)."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if m.kind == "identity_disk":
        out = m.radius * z_arr
    elif m.kind == "theodorsen":
        out = _theo_eval(m, z_arr)
    else:
        out = np.array([m.anchor + m.sc_constant *
                        _sc_segment_integral(m.prevertices, m.interior_angles, 0.0, zz)
                        for zz in z_arr])
    return out if np.asarray(z).ndim else complex(out[0])


def eval_map_derivative(m: RiemannMap, z) -> np.ndarray | complex:
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if m.kind == "identity_disk":
        out = np.full(z_arr.shape, m.radius, dtype=complex)
    elif m.kind == "theodorsen":
        out = _theo_deriv(m, z_arr)
    else:
        if np.min(np.abs(z_arr.ravel()[:, None] - m.prevertices[None, :])) < 1e-13:
            raise SingularPoint("phi' is singular at a prevertex")
        out = sc_derivative(m, z_arr)
    return out if np.asarray(z).ndim else complex(out.ravel()[0])


def log_map_derivative(m: RiemannMap, z):
    """Continuous branch of log phi' with log phi'(0) real."""
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if m.kind == "identity_disk":
        out = np.full(z_arr.shape, np.log(m.radius), dtype=complex)
    elif m.kind == "theodorsen":
        g, gp = _theo_loggrad(m, z_arr)
        w = z_arr * gp
        if np.any(np.abs(w) >= 1.0):
            raise BranchError("log(1 + z G') leaves the principal branch")
        out = g + np.log1p(w)
    else:
        out = sc_log_derivative(m, z_arr)
    return out if np.asarray(z).ndim else complex(out[0])


def map_derivative_power(m: RiemannMap, z, beta: float):
    """phi'(z)^beta via the continuous log branch."""
    return np.exp(beta * log_map_derivative(m, z))


def eval_map_along_rays(m: RiemannMap, thetas: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """phi on a polar grid, integrating incrementally along each ray.

    Returns an array of shape (len(thetas), len(radii)). Much cheaper than
    independent path integrals when many radii share a ray.
    """
    if m.kind == "identity_disk":
        return m.radius * np.exp(1j * thetas)[:, None] * radii[None, :]
    if m.kind == "theodorsen":
        z = np.exp(1j * thetas)[:, None] * radii[None, :]
        return _theo_eval(m, z)
    out = np.empty((len(thetas), len(radii)), dtype=complex)
    for i, th in enumerate(thetas):
        e = np.exp(1j * th)
        acc = m.anchor
        r_prev = 0.0
        for j, r in enumerate(radii):
            acc = acc + m.sc_constant * _sc_segment_integral(
                m.prevertices, m.interior_angles, r_prev * e, r * e)
            out[i, j] = acc
            r_prev = r
    return out


def sc_boundary_values(m: RiemannMap, t: np.ndarray, n_quad: int = 48) -> np.ndarray:
    """phi(e^{it}) away from prevertices, via arc integrals from the nearest
    preceding prevertex (Gauss-Jacobi at that endpoint)."""
    args = np.mod(m.prevertex_args(), 2 * np.pi)
    order = np.argsort(args)
    args_s = args[order]
    n = len(args_s)
    t = np.mod(np.asarray(t, dtype=float), 2 * np.pi)
    out = np.empty(len(t), dtype=complex)
    for i, ti in enumerate(t):
        k = int(np.searchsorted(args_s, ti + 1e-15) - 1) % n
        kk = order[k]
        th0 = args_s[k]
        span = np.mod(ti - th0, 2 * np.pi)
        if span < 1e-13:
            out[i] = m.vertex_images[kk]
            continue
        b_exp = m.interior_angles[kk] - 1.0
        x, w = roots_jacobi(n_quad, 0.0, b_exp)
        theta = th0 + span * (x + 1.0) / 2.0
        u = np.exp(1j * theta)
        val = np.zeros(len(x), dtype=complex)
        for j in range(n):
            e = m.interior_angles[j] - 1.0
            if j == kk:
                # regularized singular factor; the (1+x)^b_exp part sits in w
                d = (1.0 - u / m.prevertices[j]) / ((1.0 + x) * span / 4.0)
                val += e * np.log(d)
            else:
                val += e * np.log1p(-u / m.prevertices[j])
        integrand = 1j * u * np.exp(val)
        out[i] = m.vertex_images[kk] + m.sc_constant * (span / 2.0) \
            * (span / 4.0) ** b_exp * np.sum(w * integrand)
    return out


def boundary_values(m: RiemannMap, t: np.ndarray) -> np.ndarray:
    """phi on the unit circle at angles t."""
    if m.kind == "identity_disk":
        return m.radius * np.exp(1j * np.asarray(t, dtype=float))
    if m.kind == "theodorsen":
        return _theo_eval(m, np.exp(1j * np.asarray(t, dtype=float)))
    return sc_boundary_values(m, np.asarray(t, dtype=float))


def boundary_derivative_abs(m: RiemannMap, t: np.ndarray) -> np.ndarray:
    """|phi'(e^{it})| (infinite at prevertices; finite elsewhere)."""
    t = np.asarray(t, dtype=float)
    if m.kind == "identity_disk":
        return np.full(t.shape, m.radius)
    if m.kind == "theodorsen":
        th = _theta_interp(m)(t)
        thp = _theta_deriv_interp(m)(t)
        coeffs = dict(m.polar_coeffs)
        r = _polar_radius(coeffs, th)
        dr = _polar_radius_deriv(coeffs, th)
        return r * thp * np.sqrt(1.0 + (dr / r) ** 2)
    u = np.exp(1j * t)
    logs = np.zeros(t.shape, dtype=float)
    for zk, ak in zip(m.prevertices, m.interior_angles):
        logs += (ak - 1.0) * np.log(np.abs(1.0 - u / zk))
    return np.abs(m.sc_constant) * np.exp(logs)


# ---------------------------------------------------------------------------
# Theodorsen


def theodorsen_solve(spec: CurveSpec, n_grid: int = 512, tol: float = 1e-12,
                     max_iter: int = 400) -> RiemannMap:
    """Conformal map of the disk onto the interior of r(theta) e^{i theta}.

    Fixed-point iteration Theta <- t + H[log r(Theta)] on a uniform grid;
    contraction requires max |r'/r| < 1.
    """
    if spec.kind != "polar_lipschitz":
        raise InvalidCurve("theodorsen_solve requires a polar_lipschitz spec")
    coeffs = dict(spec.coeffs)
    tt = np.linspace(0, 2 * np.pi, 8192, endpoint=False)
    eps = np.abs(_polar_radius_deriv(coeffs, tt) / _polar_radius(coeffs, tt)).max()
    if eps >= 1.0:
        raise TheodorsenDiverged(f"epsilon-condition violated: max|r'/r| = {eps:.3f}")

    t = 2 * np.pi * np.arange(n_grid) / n_grid
    theta = t.copy()
    for it in range(max_iter):
        logr = np.log(_polar_radius(coeffs, theta))
        series = spectral.analyze(logr)
        conj = spectral.synthesize(spectral.hilbert_transform(series)).real
        theta_new = t + conj
        change = np.abs(theta_new - theta).max()
        theta = theta_new
        if change < tol:
            break
    else:
        raise TheodorsenDiverged(f"no convergence after {max_iter} iterations "
                                 f"(last change {change:.2e})")

    # G(z) = log(phi(z)/z); boundary values log r(Theta) + i (Theta - t)
    g_bdry = np.log(_polar_radius(coeffs, theta)) + 1j * (theta - t)
    gs = spectral.analyze(g_bdry)
    neg = np.abs(gs.coeffs[gs.freqs < 0]).max() if np.any(gs.freqs < 0) else 0.0
    ncut = n_grid // 2
    log_coeffs = np.array([gs.coeff(k) for k in range(ncut)])
    # phi'(0) = exp(g_0) > 0: the conjugation makes Im g_0 ~ 0; force it
    log_coeffs[0] = log_coeffs[0].real
    return RiemannMap(kind="theodorsen", anchor=0.0, theta_grid=theta,
                      log_coeffs=log_coeffs, residual=float(neg),
                      polar_coeffs=tuple(sorted(coeffs.items())))


def _theo_G(m: RiemannMap, z: np.ndarray) -> np.ndarray:
    return np.polynomial.polynomial.polyval(z, m.log_coeffs)


def _theo_Gp(m: RiemannMap, z: np.ndarray) -> np.ndarray:
    c = m.log_coeffs
    dc = c[1:] * np.arange(1, len(c))
    return np.polynomial.polynomial.polyval(z, dc)


def _theo_eval(m: RiemannMap, z: np.ndarray) -> np.ndarray:
    return z * np.exp(_theo_G(m, z))


def _theo_deriv(m: RiemannMap, z: np.ndarray) -> np.ndarray:
    return np.exp(_theo_G(m, z)) * (1.0 + z * _theo_Gp(m, z))


def _theo_loggrad(m: RiemannMap, z: np.ndarray):
    return _theo_G(m, z), _theo_Gp(m, z)


def _theta_interp(m: RiemannMap):
    n = len(m.theta_grid)
    t = 2 * np.pi * np.arange(n) / n
    # Theta(t + 2 pi) = Theta(t) + 2 pi: spline the periodic residual
    resid = np.concatenate([m.theta_grid - t, [m.theta_grid[0]]])
    spl = CubicSpline(np.concatenate([t, [2 * np.pi]]), resid, bc_type="periodic")
    return lambda q: spl(np.mod(q, 2 * np.pi)) + q


def _theta_deriv_interp(m: RiemannMap):
    n = len(m.theta_grid)
    t = 2 * np.pi * np.arange(n) / n
    resid = np.concatenate([m.theta_grid - t, [m.theta_grid[0]]])
    spl = CubicSpline(np.concatenate([t, [2 * np.pi]]), resid,
                      bc_type="periodic").derivative()
    return lambda q: spl(np.mod(q, 2 * np.pi)) + 1.0


# ---------------------------------------------------------------------------
# boundary correspondence and conjugation


@dataclass
class BoundaryCorrespondence:
    """h with phi = lambda o h: h maps circle angles to arc-length positions."""

    t_grid: np.ndarray       # uniform angles on the circle
    h_values: np.ndarray     # arc-length positions in [0, L), unwrapped monotone
    h_prime_abs: np.ndarray  # |phi'| on the grid
    total_length: float
    curve: SampledCurve = field(repr=False, default=None)

    def as_circle_homeo(self) -> np.ndarray:
        """h rescaled to a circle homeomorphism (values in radians)."""
        return self.h_values * (2 * np.pi / self.total_length)


def arc_coordinate(curve: SampledCurve, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Project points onto the curve polyline: (arc position, distance)."""
    pts = np.asarray(pts, dtype=complex)
    a = curve.nodes
    b = np.roll(curve.nodes, -1)
    e = b - a
    elen = np.abs(e)
    w = pts[:, None] - a[None, :]
    tpar = np.clip((w * e.conj()[None, :]).real / (elen ** 2)[None, :], 0.0, 1.0)
    d = np.abs(w - tpar * e[None, :])
    j = np.argmin(d, axis=1)
    rows = np.arange(len(pts))
    seg_end = np.concatenate([curve.arc_pos[1:], [curve.total_length]])
    seglen = seg_end - curve.arc_pos
    s = curve.arc_pos[j] + tpar[rows, j] * seglen[j]
    return s, d[rows, j]


def boundary_correspondence(m: RiemannMap, curve: SampledCurve,
                            tol: float | None = None) -> BoundaryCorrespondence:
    """h(e^{it}) = lambda^{-1}(phi(e^{it})) on the curve's angular grid."""
    n = curve.n
    t = 2 * np.pi * np.arange(n) / n
    img = boundary_values(m, t)
    s, dist = arc_coordinate(curve, img)
    if tol is None:
        tol = 0.02 * curve.diameter
    if dist.max() > tol:
        raise CurveMapMismatch(
            f"map image misses the curve by {dist.max():.3g} (tol {tol:.3g})")
    # unwrap to a monotone function t -> s with s(t + 2pi) = s(t) + L
    L = curve.total_length
    s = np.unwrap(s * (2 * np.pi / L)) * (L / (2 * np.pi))
    s = s - np.floor(s[0] / L) * L
    if np.any(np.diff(s) <= 0):
        raise CorrespondenceDegenerate("h is not strictly increasing on the grid")
    hp = boundary_derivative_abs(m, t)
    return BoundaryCorrespondence(t_grid=t, h_values=s, h_prime_abs=hp,
                                  total_length=L, curve=curve)


def _periodic_spline(x: np.ndarray, y: np.ndarray, period_x: float, jump_y: float):
    """Cubic spline of a function with y(x + period) = y(x) + jump."""
    xx = np.concatenate([x, [x[0] + period_x]])
    yy = np.concatenate([y, [y[0] + jump_y]])
    if jump_y == 0.0:
        return CubicSpline(xx, yy, bc_type="periodic")
    lin = jump_y / period_x
    resid = yy - lin * xx
    spl = CubicSpline(xx, resid, bc_type="periodic")
    return lambda q: spl(q) + lin * q


def conjugate_on_curve(f_values: np.ndarray, bc: BoundaryCorrespondence) -> np.ndarray:
    """Conjugate boundary function through the correspondence h.

    Resamples f o lambda o h on the uniform circle grid, applies the
    conjugate-function multiplier there, and resamples back through h^{-1}.
    Monotone (PCHIP) interpolation is used for h and h^{-1}.
    """
    curve = bc.curve
    L = bc.total_length
    n = curve.n
    if np.any(np.diff(bc.h_values) <= 0):
        raise CorrespondenceDegenerate("h is not strictly monotone")
    s_nodes = curve.arc_pos

    f_per_re = _periodic_spline(s_nodes, f_values.real, L, 0.0)
    f_per_im = _periodic_spline(s_nodes, f_values.imag, L, 0.0)
    h_mod = np.mod(bc.h_values, L)
    g = f_per_re(h_mod) + 1j * f_per_im(h_mod)

    gt = spectral.synthesize(spectral.hilbert_transform(spectral.analyze(g)))

    # h^{-1}: monotone interpolation of (h, t) extended by one period both ways
    t_ext = np.concatenate([bc.t_grid - 2 * np.pi, bc.t_grid, bc.t_grid + 2 * np.pi])
    h_ext = np.concatenate([bc.h_values - L, bc.h_values, bc.h_values + L])
    hinv = PchipInterpolator(h_ext, t_ext)
    s_shift = np.mod(s_nodes - bc.h_values[0], L) + bc.h_values[0]
    t_back = hinv(s_shift)

    gt_re = _periodic_spline(bc.t_grid, gt.real, 2 * np.pi, 0.0)
    gt_im = _periodic_spline(bc.t_grid, gt.imag, 2 * np.pi, 0.0)
    tb = np.mod(t_back, 2 * np.pi)
    return gt_re(tb) + 1j * gt_im(tb)


# ---------------------------------------------------------------------------
# map cache


def save_map(m: RiemannMap, path):
    d = {"kind": m.kind, "anchor": [m.anchor.real, m.anchor.imag],
         "residual": m.residual}
    if m.kind == "identity_disk":
        d["radius"] = m.radius
    elif m.kind == "schwarz_christoffel":
        d["prevertices"] = [[z.real, z.imag] for z in m.prevertices]
        d["interior_angles"] = list(map(float, m.interior_angles))
        d["sc_constant"] = [m.sc_constant.real, m.sc_constant.imag]
        d["vertex_images"] = [[z.real, z.imag] for z in m.vertex_images]
    else:
        d["theta_grid"] = list(map(float, m.theta_grid))
        d["log_coeffs"] = [[c.real, c.imag] for c in m.log_coeffs]
        d["polar_coeffs"] = {str(k): v for k, v in m.polar_coeffs}
    with open(path, "w") as fh:
        json.dump(d, fh)


def load_map(path) -> RiemannMap:
    with open(path) as fh:
        d = json.load(fh)
    kind = d["kind"]
    anchor = complex(*d["anchor"])
    if kind == "identity_disk":
        return RiemannMap(kind=kind, anchor=anchor, radius=d["radius"],
                          residual=d["residual"])
    if kind == "schwarz_christoffel":
        return RiemannMap(
            kind=kind, anchor=anchor,
            prevertices=np.array([complex(*z) for z in d["prevertices"]]),
            interior_angles=np.array(d["interior_angles"]),
            sc_constant=complex(*d["sc_constant"]),
            vertex_images=np.array([complex(*z) for z in d["vertex_images"]]),
            residual=d["residual"])
    m = RiemannMap(kind=kind, anchor=anchor,
                   theta_grid=np.array(d["theta_grid"]),
                   log_coeffs=np.array([complex(*c) for c in d["log_coeffs"]]),
                   residual=d["residual"])
    m.polar_coeffs = tuple(sorted((int(k), float(v)) for k, v in d["polar_coeffs"].items()))
    return m
