import numpy as np
import pytest
from scipy import integrate

from plemelj_lab import spectral as sp
from plemelj_lab.errors import DivergentWeight, InvalidInput, InvalidParameter


def grid(n):
    return 2 * np.pi * np.arange(n) / n


def test_analyze_pure_mode():
    s = sp.analyze(np.exp(1j * grid(8)))
    assert s.coeff(1) == pytest.approx(1.0, abs=1e-14)
    assert np.abs(s.coeffs[s.freqs != 1]).max() < 1e-14


def test_analyze_constant_and_cos():
    s = sp.analyze(np.ones(16))
    assert s.coeff(0) == pytest.approx(1.0, abs=1e-14)
    s = sp.analyze(np.cos(grid(16)))
    assert s.coeff(1) == pytest.approx(0.5, abs=1e-14)
    assert s.coeff(-1) == pytest.approx(0.5, abs=1e-14)


def test_analyze_odd_input():
    with pytest.raises(InvalidInput):
        sp.analyze(np.ones(7))


def test_parseval_round_trip():
    rng = np.random.default_rng(1)
    f = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    s = sp.analyze(f)
    assert np.sum(np.abs(s.coeffs) ** 2) == pytest.approx(
        np.mean(np.abs(f) ** 2), rel=1e-10)
    assert np.abs(sp.synthesize(s) - f).max() < 1e-12


def test_real_input_conjugate_symmetry():
    rng = np.random.default_rng(2)
    s = sp.analyze(rng.standard_normal(32))
    for n in range(1, 15):
        assert abs(s.coeff(-n) - np.conj(s.coeff(n))) < 1e-12


def test_hs_norm():
    assert sp.hs_norm_fourier(sp.from_modes({1: 1.0}, 16), 0.7) == pytest.approx(1.0)
    assert sp.hs_norm_fourier(sp.from_modes({3: 1.0}, 16), 0.5) == pytest.approx(3.0)
    got = sp.hs_norm_fourier(sp.from_modes({1: 1.0, 2: 1.0}, 16), 0.25)
    assert got == pytest.approx(1 + 2 ** 0.5, rel=1e-12)
    with pytest.raises(InvalidParameter):
        sp.hs_norm_fourier(sp.from_modes({1: 1.0}, 16), 1.5)


def test_hilbert_transform():
    t = grid(32)
    got = sp.synthesize(sp.hilbert_transform(sp.analyze(np.cos(t))))
    assert np.abs(got - np.sin(t)).max() < 1e-12
    got = sp.synthesize(sp.hilbert_transform(sp.analyze(np.ones(32))))
    assert np.abs(got).max() < 1e-14
    got = sp.synthesize(sp.hilbert_transform(sp.analyze(np.exp(5j * t))))
    assert np.abs(got - (-1j) * np.exp(5j * t)).max() < 1e-12


def test_hilbert_isometry_and_involution():
    rng = np.random.default_rng(3)
    f = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    s = sp.analyze(f)
    s.coeffs[s.freqs == 0] = 0.0  # mean-zero
    h = sp.hilbert_transform(s)
    for ss in (0.25, 0.5, 0.9):
        assert sp.hs_norm_fourier(h, ss) == pytest.approx(
            sp.hs_norm_fourier(s, ss), rel=1e-14)
    hh = sp.hilbert_transform(h)
    assert np.abs(hh.coeffs + s.coeffs).max() < 1e-14


def test_poisson_eval():
    s = sp.from_modes({1: 1.0}, 16)
    assert sp.poisson_eval(s, 0.5, 0.0, "interior") == pytest.approx(0.5)
    assert sp.poisson_eval(s, 2.0, 0.0, "exterior") == pytest.approx(0.5)
    c = sp.from_modes({0: 1.0}, 16)
    assert sp.poisson_eval(c, 0.3, 1.0, "interior") == pytest.approx(1.0)
    assert sp.poisson_eval(c, 3.0, 1.0, "exterior") == pytest.approx(1.0)
    with pytest.raises(InvalidParameter):
        sp.poisson_eval(s, 1.5, 0.0, "interior")
    with pytest.raises(InvalidParameter):
        sp.poisson_eval(s, 0.5, 0.0, "exterior")


def test_disk_energy_weights_reference_values():
    w = sp.disk_energy_weights(4, 0.5)
    i1 = np.where(w.freqs == 1)[0][0]
    assert w.disk_interior_w[i1] == pytest.approx(2 * np.pi, rel=1e-12)
    assert w.disk_exterior_w[i1] == pytest.approx(2 * np.pi, rel=1e-12)
    i0 = np.where(w.freqs == 0)[0][0]
    assert w.disk_interior_w[i0] == 0.0
    assert w.disk_exterior_w[i0] == 0.0


def test_disk_energy_weights_divergent_mode():
    w = sp.disk_energy_weights(2, 0.0)
    i1 = np.where(w.freqs == 1)[0][0]
    assert w.divergent[i1]
    with pytest.raises(DivergentWeight):
        sp.disk_mode_weight(1, 0.0, side="exterior")
    # interior weight is fine at s = 0
    assert sp.disk_mode_weight(1, 0.0, side="interior") > 0


def test_disk_weights_match_radial_quadrature():
    # independent oracle: radial quadrature of the mode energies
    for n in (1, 3):
        for s in (0.25, 0.5, 0.75):
            val, _ = integrate.quad(
                lambda r: 2 * n ** 2 * r ** (2 * n - 2) * (1 - r * r) ** (1 - 2 * s) * r,
                0, 1)
            assert sp.disk_mode_weight(n, s, "interior") == pytest.approx(
                2 * np.pi * val / (2 * np.pi) * 2 * np.pi, rel=1e-9)
            vale, _ = integrate.quad(
                lambda r: 2 * n ** 2 * r ** (-2 * n - 2) * (r * r - 1) ** (1 - 2 * s) * r,
                1, np.inf)
            assert sp.disk_mode_weight(n, s, "exterior") == pytest.approx(
                2 * np.pi * vale, rel=1e-7)


def test_douglas_weights_fejer():
    assert sp.douglas_kernel_weight(1, 0.5) == pytest.approx(2 * np.pi, abs=1e-9)
    assert sp.douglas_kernel_weight(3, 0.5) == pytest.approx(6 * np.pi, abs=1e-8)
    assert sp.douglas_kernel_weight(0, 0.7) == 0.0


def test_douglas_multiplier_comparability():
    # c1 <= W(n,s)/|n|^{2s} <= c2 over 1 <= n <= 64 for each s
    for s in (0.1, 0.3, 0.5, 0.7, 0.9):
        ratios = np.array([sp.douglas_kernel_weight(n, s) / n ** (2 * s)
                           for n in range(1, 65)])
        assert ratios.max() / ratios.min() < 4.0


def test_equality_ratio_at_half():
    # at s = 1/2 the Douglas kernel weight is a fixed multiple of the sum of
    # the two disk energies for every mode: W = (w_i + w_e)/2 exactly
    for n in range(1, 9):
        W = sp.douglas_kernel_weight(n, 0.5)
        tot = sp.disk_mode_weight(n, 0.5, "interior") + \
            sp.disk_mode_weight(n, 0.5, "exterior")
        assert W / tot == pytest.approx(0.5, abs=1e-8)


def test_g_function():
    assert sp.g_function(sp.from_modes({1: 1.0}, 16), 0.3) == pytest.approx(
        1 / np.sqrt(2), rel=1e-10)
    assert sp.g_function(sp.from_modes({0: 2.0}, 16), 0.0) == 0.0
    assert sp.g_function(sp.from_modes({2: 1.0}, 16), 0.0) == pytest.approx(
        np.sqrt(1.0 / 3.0), rel=1e-10)


def test_spectral_consistency_disk_energy():
    # polar-grid integration of the weighted gradient energy matches the
    # closed-form mode weights within 0.5 percent
    rng = np.random.default_rng(4)
    modes = {n: rng.standard_normal() + 1j * rng.standard_normal()
             for n in (-3, 1, 2, 5)}
    ser = sp.from_modes(modes, 32)
    for s in (0.25, 0.5, 0.75):
        want = sum(abs(c) ** 2 * sp.disk_mode_weight(n, s, "interior")
                   for n, c in modes.items())
        # radial Gauss-Jacobi in (1-r^2)-compatible form x angular trapezoid
        from scipy.special import roots_jacobi
        x, wq = roots_jacobi(64, 1.0 - 2.0 * s, 0.0)
        r = (x + 1) / 2
        wr = wq * 0.5 ** (2.0 - 2.0 * s)
        th = grid(128)
        z = r[None, :] * np.exp(1j * th)[:, None]
        h = 1e-5
        ux = (sp.poisson_eval_points(ser, z + h) - sp.poisson_eval_points(ser, z - h)) / (2 * h)
        uy = (sp.poisson_eval_points(ser, z + 1j * h) - sp.poisson_eval_points(ser, z - 1j * h)) / (2 * h)
        grad2 = np.abs(ux) ** 2 + np.abs(uy) ** 2
        vals = grad2 * ((1 + r) ** (1 - 2 * s) * r)[None, :]
        got = (2 * np.pi / 128) * np.sum(vals @ wr)
        assert got == pytest.approx(want, rel=5e-3)


def test_weights_csv_export(tmp_path):
    path = tmp_path / "w.csv"
    sp.export_weights_csv(path, 4, 0.5)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "n,douglas_W,disk_interior_w,disk_exterior_w"
    assert len(lines) == 6
