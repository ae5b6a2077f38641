"""Circle-side Fourier machinery.

Fourier coefficients use the forward-1/N convention
``c(n) = (1/N) sum_k f_k exp(-i n t_k)``, ``t_k = 2 pi k / N``, so for
band-limited samples c(n) equals the analytic Fourier coefficient. Frequencies
run over the symmetric window n in [-N/2, N/2).

Two families of spectral weights are provided:

* ``disk_energy_weights`` diagonalize the interior/exterior weighted Dirichlet
  energies of harmonic extensions over Fourier modes,
  ``w_i(n,s) = 2 pi n^2 B(|n|, 2-2s)``,
  ``w_e(n,s) = 2 pi n^2 B(|n|+2s-1, 2-2s)``.
* ``douglas_weights_circle`` evaluates the kernel integral
  ``W(n,s) = int |e^{i n t} - 1|^2 / |e^{i t} - 1|^{1+2s} dt`` so that the
  circle double-integral seminorm of f equals ``2 pi sum |c(n)|^2 W(n,s)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .errors import DivergentWeight, InvalidInput, InvalidParameter, QuadratureFailure


@dataclass
class FourierSeries:
    """DFT coefficients indexed by frequency n in [-N/2, N/2)."""

    coeffs: np.ndarray  # complex, aligned with freqs
    freqs: np.ndarray   # int
    n_samples: int

    def coeff(self, n: int) -> complex:
        loc = np.where(self.freqs == n)[0]
        return complex(self.coeffs[loc[0]]) if len(loc) else 0.0

    def copy_with(self, coeffs: np.ndarray) -> "FourierSeries":
        return FourierSeries(coeffs=coeffs, freqs=self.freqs, n_samples=self.n_samples)


def analyze(samples: np.ndarray) -> FourierSeries:
    """Discrete Fourier coefficients of equispaced samples on [0, 2 pi)."""
    f = np.asarray(samples, dtype=complex)
    n = len(f)
    if n < 4 or n % 2:
        raise InvalidInput("need an even sample count >= 4")
    c = np.fft.fftshift(np.fft.fft(f)) / n
    freqs = np.fft.fftshift(np.fft.fftfreq(n, d=1.0 / n)).astype(int)
    return FourierSeries(coeffs=c, freqs=freqs, n_samples=n)


def synthesize(series: FourierSeries) -> np.ndarray:
    """Samples at t_k = 2 pi k / N from the coefficients (inverse of analyze)."""
    c = np.fft.ifftshift(series.coeffs) * series.n_samples
    return np.fft.ifft(c)


def from_modes(modes: dict, n_samples: int) -> FourierSeries:
    """Series with prescribed coefficients {n: c} on an N-sample grid."""
    freqs = np.fft.fftshift(np.fft.fftfreq(n_samples, d=1.0 / n_samples)).astype(int)
    c = np.zeros(n_samples, dtype=complex)
    for n, v in modes.items():
        loc = np.where(freqs == int(n))[0]
        if not len(loc):
            raise InvalidInput(f"mode {n} outside the [-N/2, N/2) window")
        c[loc[0]] = v
    return FourierSeries(coeffs=c, freqs=freqs, n_samples=n_samples)


def hs_norm_fourier(series: FourierSeries, s: float) -> float:
    """Squared multiplier seminorm sum_{n != 0} |n|^{2s} |c(n)|^2."""
    if not 0.0 <= s <= 1.0:
        raise InvalidParameter("s must lie in [0, 1]")
    nz = series.freqs != 0
    return float(np.sum(np.abs(series.freqs[nz]) ** (2 * s) * np.abs(series.coeffs[nz]) ** 2))


def hilbert_transform(series: FourierSeries) -> FourierSeries:
    """Conjugate-function multiplier -i sgn(n); the n = 0 mode is dropped."""
    mult = -1j * np.sign(series.freqs)
    return series.copy_with(series.coeffs * mult)


def poisson_eval(series: FourierSeries, r: float, theta, side: str = "interior"):
    """Harmonic extension at radius r: sum c(n) r^{-+|n|} e^{i n theta}."""
    theta = np.asarray(theta, dtype=float)
    if side == "interior":
        if not 0.0 <= r < 1.0:
            raise InvalidParameter("interior evaluation needs 0 <= r < 1")
        radial = r ** np.abs(series.freqs)
    elif side == "exterior":
        if r <= 1.0:
            raise InvalidParameter("exterior evaluation needs r > 1")
        radial = r ** (-np.abs(series.freqs).astype(float))
    else:
        raise InvalidParameter("side must be 'interior' or 'exterior'")
    phase = np.exp(1j * np.multiply.outer(theta, series.freqs))
    out = phase @ (series.coeffs * radial)
    return out if theta.ndim else complex(out)


def poisson_eval_points(series: FourierSeries, z, side: str = "interior"):
    """Harmonic extension evaluated at complex points (vectorized, r from |z|).

    Only modes with nonzero coefficients enter the sum, so sparse series
    (single modes, band-limited data) evaluate cheaply on large point sets.
    """
    z = np.asarray(z, dtype=complex)
    nz = series.coeffs != 0
    freqs = series.freqs[nz]
    coeffs = series.coeffs[nz]
    shape = z.shape
    zf = z.ravel()
    r = np.abs(zf)
    theta = np.angle(zf)
    absn = np.abs(freqs)
    if side == "interior":
        radial = np.power.outer(r, absn)
    else:
        with np.errstate(divide="ignore"):
            radial = np.power.outer(r, -absn.astype(float))
    phase = np.exp(1j * np.multiply.outer(theta, freqs))
    out = ((phase * radial) @ coeffs).reshape(shape)
    return out if z.ndim else complex(out)


@dataclass
class SpectralWeights:
    s: float
    freqs: np.ndarray
    douglas_W: np.ndarray | None = None
    disk_interior_w: np.ndarray | None = None
    disk_exterior_w: np.ndarray | None = None
    divergent: np.ndarray | None = None  # bool mask over freqs (exterior only)


def _beta(a, b):
    return np.exp(gammaln(a) + gammaln(b) - gammaln(a + b))


def disk_energy_weights(n_max: int, s: float) -> SpectralWeights:
    """Exact mode weights of the weighted Dirichlet energies on the disk.

    Interior needs 0 <= s < 1; exterior modes with |n| + 2s - 1 <= 0 have a
    divergent radial integral and are flagged (weight set to inf).
    """
    if not 0.0 <= s < 1.0:
        raise InvalidParameter("s must lie in [0, 1)")
    freqs = np.arange(-n_max, n_max + 1)
    absn = np.abs(freqs).astype(float)
    w_i = np.zeros_like(absn)
    w_e = np.zeros_like(absn)
    nz = absn > 0
    w_i[nz] = 2 * np.pi * absn[nz] ** 2 * _beta(absn[nz], 2 - 2 * s)
    divergent = nz & (absn + 2 * s - 1 <= 0)
    ok = nz & ~divergent
    w_e[ok] = 2 * np.pi * absn[ok] ** 2 * _beta(absn[ok] + 2 * s - 1, 2 - 2 * s)
    w_e[divergent] = np.inf
    return SpectralWeights(s=s, freqs=freqs, disk_interior_w=w_i,
                           disk_exterior_w=w_e, divergent=divergent)


def disk_mode_weight(n: int, s: float, side: str = "interior") -> float:
    w = disk_energy_weights(abs(n), s)
    arr = w.disk_interior_w if side == "interior" else w.disk_exterior_w
    val = arr[np.where(w.freqs == n)[0][0]]
    if not np.isfinite(val):
        raise DivergentWeight(f"exterior weight diverges for n={n}, s={s}")
    return float(val)


def douglas_kernel_weight(n: int, s: float, tol: float = 1e-9) -> float:
    """W(n, s) by adaptive quadrature with the endpoint singularity removed.

    Near t = 0 the integrand behaves like t^{1-2s}; the substitution
    u = t^{2-2s} makes it bounded there. W(n, 1/2) = 2 pi |n| exactly.
    """
    if not 0.0 < s < 1.0:
        raise InvalidParameter("s must lie in (0, 1)")
    n = abs(int(n))
    if n == 0:
        return 0.0

    p = 2.0 - 2.0 * s

    def integrand(t):
        return (4 * np.sin(n * t / 2) ** 2) / (2 * np.sin(t / 2)) ** (1 + 2 * s)

    # split [0, pi]: substitution piece near 0, plain adaptive piece elsewhere
    t0 = min(0.5, np.pi / (2 * n))

    def sub(u):
        t = u ** (1.0 / p)
        return integrand(t) * t ** (1.0 - p) / p

    v1, e1 = integrate.quad(sub, 0.0, t0 ** p, epsabs=tol / 4, epsrel=1e-12, limit=400)
    v2, e2 = integrate.quad(integrand, t0, np.pi, epsabs=tol / 4, epsrel=1e-12, limit=400)
    if e1 + e2 > max(tol, 1e-12 * (abs(v1) + abs(v2))):
        raise QuadratureFailure("Douglas weight quadrature did not converge", achieved=e1 + e2)
    return 2.0 * (v1 + v2)


def douglas_weights_circle(n_max: int, s: float, tol: float = 1e-9) -> SpectralWeights:
    freqs = np.arange(-n_max, n_max + 1)
    W = np.array([douglas_kernel_weight(n, s, tol) for n in freqs])
    return SpectralWeights(s=s, freqs=freqs, douglas_W=W)


def g_function(series: FourierSeries, theta: float, n_radial: int = 256) -> float:
    """Radial square function (int_0^1 (1-r) |f'(r e^{i theta})|^2 dr)^{1/2}.

    Intended for boundary values of holomorphic functions (c(n) = 0 for n < 0);
    negative modes are ignored. Radial integration uses Gauss-Legendre nodes.
    """
    pos = series.freqs > 0
    freqs = series.freqs[pos].astype(float)
    coeffs = series.coeffs[pos]
    x, w = np.polynomial.legendre.leggauss(max(int(n_radial), 256))
    r = 0.5 * (x + 1.0)
    w = 0.5 * w
    # f'(z) = sum n c(n) z^{n-1}
    powers = np.power.outer(r, freqs - 1)
    fp = powers @ (freqs * coeffs * np.exp(1j * (freqs - 1) * theta))
    val = np.sum(w * (1.0 - r) * np.abs(fp) ** 2)
    return float(np.sqrt(max(val, 0.0)))


def export_weights_csv(path, n_max: int, s: float):
    """Write (n, W, w_i, w_e) rows for n = 0..n_max."""
    disk = disk_energy_weights(n_max, s)
    doug = douglas_weights_circle(n_max, s)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["n", "douglas_W", "disk_interior_w", "disk_exterior_w"])
        for n in range(n_max + 1):
            i = np.where(disk.freqs == n)[0][0]
            j = np.where(doug.freqs == n)[0][0]
            wr.writerow([n, repr(float(doug.douglas_W[j])),
                         repr(float(disk.disk_interior_w[i])),
                         repr(float(disk.disk_exterior_w[i]))])
