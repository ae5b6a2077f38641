"""Harmonic extension evaluators.

Circle data extends spectrally (Poisson series on either side). For star-like
curves the interior/exterior Dirichlet problems are solved by weighted least
squares in bases of harmonic polynomials {z^n, conj(z)^n} (interior) or
decaying harmonics {1, z^-n, conj(z)^-n} (exterior); the exterior extension is
bounded at infinity, as required for finite weighted energy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import IllConditioned
from .geometry import SampledCurve


@dataclass
class HarmonicEvaluator:
    """Callable harmonic function with a complex-gradient convention.

    eval(z) returns u(z); the gradient is taken numerically by callers.
    """

    fn: callable
    side: str  # interior | exterior

    def __call__(self, z):
        return self.fn(np.asarray(z, dtype=complex))


def disk_harmonic(series: spectral.FourierSeries, side: str = "interior") -> HarmonicEvaluator:
    """Harmonic extension of circle boundary data to either side of T."""

    def fn(z):
        return spectral.poisson_eval_points(series, z, side=side)

    return HarmonicEvaluator(fn=fn, side=side)


def disk_holomorphic_from_mean_plus_analytic(series: spectral.FourierSeries):
    """(F, F') of the analytic completion sum_{n>=0} c(n) z^n of circle data."""
    pos = series.freqs >= 0
    freqs = series.freqs[pos]
    order = np.argsort(freqs)
    coeffs = np.zeros(int(freqs.max()) + 1, dtype=complex)
    coeffs[freqs[order]] = series.coeffs[pos][order]
    dcoeffs = coeffs[1:] * np.arange(1, len(coeffs))

    def F(z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), coeffs)

    def Fp(z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), dcoeffs)

    return F, Fp


def _lsq_solve(A: np.ndarray, b: np.ndarray, w: np.ndarray):
    Aw = A * w[:, None]
    bw = b * w
    coef, *_ = np.linalg.lstsq(Aw, bw, rcond=None)
    resid = np.abs(A @ coef - b)
    return coef, resid


def starlike_harmonic(curve: SampledCurve, f_values: np.ndarray, side: str,
                      n_modes: int = 48, anchor: complex = 0.0,
                      resid_tol: float = 5e-2) -> HarmonicEvaluator:
    """Least-squares harmonic extension on a star-like curve.

    Interior basis: 1, (z/R)^n, conj(z/R)^n.  Exterior: 1, (R/z)^n, conj(R/z)^n
    (bounded at infinity). R is a scale making the columns O(1) on the curve.
    Raises IllConditioned when the boundary residual exceeds resid_tol times
    the data scale.
    """
    z = curve.nodes - anchor
    r = np.abs(z)
    R = np.exp(np.mean(np.log(r)))  # geometric mean radius
    n = int(n_modes)
    if side == "interior":
        cols = [np.ones_like(z)]
        for k in range(1, n + 1):
            cols.append((z / R) ** k)
            cols.append(np.conj(z / R) ** k)
    else:
        cols = [np.ones_like(z)]
        for k in range(1, n + 1):
            cols.append((R / z) ** k)
            cols.append(np.conj(R / z) ** k)
    A = np.column_stack(cols)
    w = np.sqrt(curve.node_weights)
    coef, resid = _lsq_solve(A, np.asarray(f_values, dtype=complex), w)
    scale = max(np.abs(f_values).max(), 1e-30)
    if resid.max() > resid_tol * scale:
        raise IllConditioned(
            f"harmonic extension residual {resid.max():.3g} exceeds "
            f"{resid_tol:.1g} * data scale {scale:.3g}")

    if side == "interior":
        def fn(zz):
            zz = (np.asarray(zz, dtype=complex) - anchor) / R
            out = np.full(zz.shape, coef[0], dtype=complex)
            p = np.ones_like(zz)
            for k in range(1, n + 1):
                p = p * zz
                out += coef[2 * k - 1] * p + coef[2 * k] * np.conj(p)
            return out
    else:
        def fn(zz):
            zz = R / (np.asarray(zz, dtype=complex) - anchor)
            out = np.full(zz.shape, coef[0], dtype=complex)
            p = np.ones_like(zz)
            for k in range(1, n + 1):
                p = p * zz
                out += coef[2 * k - 1] * p + coef[2 * k] * np.conj(p)
            return out

    ev = HarmonicEvaluator(fn=fn, side=side)
    ev.boundary_residual = float(resid.max())
    ev.coef = coef
    return ev


def numerical_gradient(u_eval, z: np.ndarray, step) -> np.ndarray:
    """|grad u|^2 = |u_x|^2 + |u_y|^2 by central differences (vectorized).

    The four stencil points are stacked into one evaluator call.
    """
    z = np.asarray(z, dtype=complex)
    step = np.broadcast_to(np.asarray(step, dtype=float), z.shape)
    stack = np.concatenate([z + step, z - step, z + 1j * step, z - 1j * step])
    vals = np.asarray(u_eval(stack))
    n = z.size
    v = vals.reshape(4, n)
    ux = (v[0] - v[1]) / (2 * step.ravel())
    uy = (v[2] - v[3]) / (2 * step.ravel())
    return (np.abs(ux) ** 2 + np.abs(uy) ** 2).reshape(z.shape)


def numerical_dbar(u_eval, z: np.ndarray, step) -> np.ndarray:
    """(u_x + i u_y) / 2 by central differences."""
    z = np.asarray(z, dtype=complex)
    step = np.broadcast_to(np.asarray(step, dtype=float), z.shape)
    ux = (u_eval(z + step) - u_eval(z - step)) / (2 * step)
    uy = (u_eval(z + 1j * step) - u_eval(z - 1j * step)) / (2 * step)
    return 0.5 * (ux + 1j * uy)
