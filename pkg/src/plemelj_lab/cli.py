"""Batch experiment driver.

    plemelj-lab <subcommand> --config FILE [--s LIST] [--N LIST]
                [--out DIR] [--seed U64]

Subcommands: norms, plemelj, regularity, sweep-equivalence, murai.
Exit codes: 0 success, 2 validation error, 3 numerical failure (partial
outputs are kept). PLEMELJ_THREADS caps the worker-thread count. Reruns with
the same config, seed and thread cap produce byte-identical CSV files: float
cells use shortest round-trip repr, row order is fixed, and no timestamps or
environment data enter the artifacts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cauchy, conformal, harmonic, regularity, sobolev, spectral
from .errors import InvalidCurve, InvalidParameter, PlemeljLabError
from .geometry import CurveSpec, build_curve, lipschitz_constant, polar_spec


@dataclass
class FunctionSpec:
    kind: str                 # fourier | poly | pole | bump
    modes: dict = field(default_factory=dict)
    coeffs: list = field(default_factory=list)
    pole: complex = 3.0
    center: complex = 0.0
    width: float = 1.0
    label: str = ""

    @staticmethod
    def from_json(d: dict, idx: int) -> "FunctionSpec":
        if "fourier" in d:
            modes = {int(k): _as_complex(v) for k, v in d["fourier"].items()}
            return FunctionSpec(kind="fourier", modes=modes, label=f"fourier_{idx}")
        if "entire" in d:
            if d["entire"] == "poly":
                coeffs = [_as_complex(c) for c in d["coeffs"]]
                return FunctionSpec(kind="poly", coeffs=coeffs, label=f"poly_{idx}")
            if d["entire"] == "pole":
                return FunctionSpec(kind="pole", pole=_as_complex(d["pole"]),
                                    label=f"pole_{idx}")
            raise InvalidParameter(f"unknown entire function {d['entire']!r}")
        if "bump" in d:
            b = d["bump"]
            return FunctionSpec(kind="bump", center=_as_complex(b["center"]),
                                width=float(b["width"]), label=f"bump_{idx}")
        raise InvalidParameter(f"unrecognized function spec {d!r}")

    def is_holomorphic(self) -> bool:
        return self.kind in ("poly", "pole", "bump")

    def holomorphic_pair(self):
        if self.kind == "poly":
            c = np.asarray(self.coeffs, dtype=complex)
            dc = c[1:] * np.arange(1, len(c))
            return (lambda z: np.polynomial.polynomial.polyval(z, c),
                    lambda z: np.polynomial.polynomial.polyval(z, dc))
        if self.kind == "pole":
            p = self.pole
            return (lambda z: 1.0 / (z - p), lambda z: -1.0 / (z - p) ** 2)
        if self.kind == "bump":
            c, w = self.center, self.width
            return (lambda z: np.exp(-((z - c) / w) ** 2),
                    lambda z: -2.0 * (z - c) / w ** 2 * np.exp(-((z - c) / w) ** 2))
        raise InvalidParameter("fourier data has no holomorphic evaluator")

    def boundary_values(self, curve) -> np.ndarray:
        if self.is_holomorphic():
            F, _ = self.holomorphic_pair()
            return F(curve.nodes)
        t = 2 * np.pi * curve.arc_pos / curve.total_length
        out = np.zeros(curve.n, dtype=complex)
        for n, c in self.modes.items():
            out += c * np.exp(1j * n * t)
        return out


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


@dataclass
class ExperimentConfig:
    curve: CurveSpec
    functions: list
    s_grid: list
    resolutions: list
    seed: int
    outputs: str
    murai_M: list

    @staticmethod
    def load(path, s_override=None, n_override=None, out_override=None,
             seed_override=None) -> "ExperimentConfig":
        with open(path) as fh:
            d = json.load(fh)
        curve = CurveSpec.from_json_dict(d["curve"])
        functions = [FunctionSpec.from_json(f, i)
                     for i, f in enumerate(d.get("functions", []))]
        s_grid = list(s_override if s_override is not None
                      else d.get("s_grid", [0.25, 0.5, 0.75]))
        if any(not 0.0 < s < 1.0 for s in s_grid):
            raise InvalidParameter("s_grid entries must lie in (0, 1)")
        res = list(n_override if n_override is not None
                   else d.get("resolutions", [256]))
        if sorted(res) != res:
            raise InvalidParameter("resolutions must be ascending")
        seed = int(seed_override if seed_override is not None
                   else d.get("seed", 0))
        out = str(out_override if out_override is not None
                  else d.get("outputs", "."))
        return ExperimentConfig(curve=curve, functions=functions, s_grid=s_grid,
                                resolutions=res, seed=seed, outputs=out,
                                murai_M=list(d.get("murai_M", [0.2, 0.5, 1.0, 2.0])))


def _fmt(x) -> str:
    if isinstance(x, float):
        if x != x:
            return "nan"
        return repr(x)
    return str(x)


def _write_csv(path: Path, header: list, rows: list):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _riemann_map(spec: CurveSpec):
    if spec.kind == "circle":
        return conformal.identity_disk_map(spec.radius)
    if spec.kind in ("polygon", "koch_prefractal"):
        return conformal.solve_sc_parameters(spec, tol=1e-9)
    if spec.kind == "polar_lipschitz":
        return conformal.theodorsen_solve(spec, n_grid=512, tol=1e-12)
    raise InvalidCurve(f"no Riemann map route for kind {spec.kind!r}")


def _g_series_on_circle(fspec: FunctionSpec, m, curve, n_grid: int):
    """Fourier series of f o phi on the circle grid."""
    t = 2 * np.pi * np.arange(n_grid) / n_grid
    if m.kind == "identity_disk" and fspec.kind == "fourier":
        return spectral.from_modes(fspec.modes, n_grid)
    w = conformal.boundary_values(m, t)
    if fspec.is_holomorphic():
        F, _ = fspec.holomorphic_pair()
        return spectral.analyze(F(w))
    bc = conformal.boundary_correspondence(m, curve)
    fvals = fspec.boundary_values(curve)
    from scipy.interpolate import CubicSpline
    s_nodes = np.concatenate([curve.arc_pos, [curve.total_length]])
    fv = np.concatenate([fvals, [fvals[0]]])
    spl_re = CubicSpline(s_nodes, fv.real, bc_type="periodic")
    spl_im = CubicSpline(s_nodes, fv.imag, bc_type="periodic")
    hmod = np.mod(bc.h_values, curve.total_length)
    g = spl_re(hmod) + 1j * spl_im(hmod)
    if len(g) != n_grid:
        gs = spectral.analyze(g)
        keep = {int(n): gs.coeff(n) for n in gs.freqs
                if abs(n) <= n_grid // 2 - 1 and gs.coeff(n) != 0}
        return spectral.from_modes(keep, n_grid)
    return spectral.analyze(g)


def cmd_norms(cfg: ExperimentConfig, outdir: Path) -> int:
    curve_id = cfg.curve.curve_id()
    m = _riemann_map(cfg.curve)
    for fidx, fspec in enumerate(cfg.functions):
        rows = []
        for s in cfg.s_grid:
            for N in cfg.resolutions:
                curve = build_curve(cfg.curve, N)
                fvals = fspec.boundary_values(curve)
                doug, band = sobolev.douglas_norm(curve, fvals, s, return_band=True)
                if fspec.is_holomorphic():
                    F, Fp = fspec.holomorphic_pair()
                    pb_i = sobolev.pullback_energy(m, F, Fp, s)
                else:
                    gser = _g_series_on_circle(fspec, m, curve, min(N, 512))
                    pb_i = sobolev.pullback_energy_harmonic(m, gser, s)
                pb_e = float("nan")
                if cfg.curve.kind == "circle" and fspec.kind == "fourier":
                    ww = spectral.disk_energy_weights(
                        max(abs(n) for n in fspec.modes), s)
                    pb_e = 0.0
                    for n, c in fspec.modes.items():
                        loc = np.where(ww.freqs == n)[0][0]
                        pb_e += abs(c) ** 2 * float(ww.disk_exterior_w[loc])
                direct = float("nan")
                try:
                    u = _interior_evaluator(cfg.curve, fspec, m, curve)
                    if u is not None:
                        direct = sobolev.direct_weighted_energy(
                            curve, u, s, resolution=min(N, 512))
                except PlemeljLabError:
                    pass
                rows.append([curve_id, s, N, doug, pb_i, pb_e, direct, band])
        name = "norms.csv" if fidx == 0 else f"norms_{fidx}.csv"
        _write_csv(outdir / name,
                   ["curve_id", "s", "N", "douglas", "pullback_i", "pullback_e",
                    "direct", "band_corr"], rows)
    return 0


def _interior_evaluator(spec: CurveSpec, fspec: FunctionSpec, m, curve):
    if fspec.is_holomorphic():
        F, _ = fspec.holomorphic_pair()
        return lambda z: F(np.asarray(z, dtype=complex))
    if spec.kind == "circle":
        ser = spectral.from_modes(fspec.modes, 256)
        return harmonic.disk_harmonic(ser, "interior")
    if spec.kind == "polar_lipschitz":
        return harmonic.starlike_harmonic(curve, fspec.boundary_values(curve),
                                          "interior")
    return None


def cmd_plemelj(cfg: ExperimentConfig, outdir: Path) -> int:
    curve_id = cfg.curve.curve_id()
    split_rows, norm_rows = [], []
    for N in cfg.resolutions:
        curve = build_curve(cfg.curve, N)
        op = cauchy.build_sio(curve)
        for fidx, fspec in enumerate(cfg.functions):
            fvals = fspec.boundary_values(op.curve)
            sp = cauchy.plemelj_split(op, fvals)
            dir0 = complex(np.exp(0.37j))
            decays = []
            for R in (10.0, 100.0):
                val = sp.Fe_eval(R * dir0 * max(1.0, curve.diameter))
                decays.append(abs(val) * R * max(1.0, curve.diameter))
            split_rows.append([curve_id, N, fspec.label, sp.jump_residual,
                               decays[0], decays[1]])
        for space in ("L2", "H1"):
            norm_rows.append([curve_id, N, space, "",
                              cauchy.operator_norm(op, space)])
        for s in cfg.s_grid:
            norm_rows.append([curve_id, N, "Hs", s,
                              cauchy.operator_norm(op, "Hs", s)])
    _write_csv(outdir / "plemelj.csv",
               ["curve_id", "N", "function", "jump_residual",
                "decay_R10", "decay_R100"], split_rows)
    _write_csv(outdir / "opnorms.csv",
               ["curve_id", "N", "space", "s", "norm"], norm_rows)
    return 0


def cmd_regularity(cfg: ExperimentConfig, outdir: Path) -> int:
    curve = build_curve(cfg.curve, max(cfg.resolutions))
    rep = regularity.estimate_h(curve, seed=cfg.seed or 11)
    por = regularity.porosity_constant(curve, seed=cfg.seed or 13)
    ap = {}
    for s in cfg.s_grid:
        alpha = 2.0 - 2.0 * s
        ap[f"p2_alpha_{alpha:g}"] = regularity.ap_constant_plane(
            curve, alpha, p=2, seed=cfg.seed or 17)
    box = regularity.box_counting_dimension(curve)
    out = {
        "curve_id": cfg.curve.curve_id(),
        "h_estimate": rep.h_estimate,
        "h_bracket": list(rep.h_bracket),
        "solvable_interval": list(rep.solvable_interval),
        "porosity_c": por,
        "ap_constants": ap,
        "box_counting": box,
        "scale_window": list(rep.scale_window),
    }
    outdir.mkdir(parents=True, exist_ok=True)
    with open(outdir / "regularity.json", "w") as fh:
        json.dump(out, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return 0


def cmd_sweep_equivalence(cfg: ExperimentConfig, outdir: Path) -> int:
    curve_id = cfg.curve.curve_id()
    m = _riemann_map(cfg.curve)
    rows, summary = [], []
    for s in cfg.s_grid:
        ratios = []
        for N in cfg.resolutions:
            curve = build_curve(cfg.curve, N)
            for fidx, fspec in enumerate(cfg.functions):
                fvals = fspec.boundary_values(curve)
                doug = sobolev.douglas_norm(curve, fvals, s)
                if fspec.is_holomorphic():
                    F, Fp = fspec.holomorphic_pair()
                    pb = sobolev.pullback_energy(m, F, Fp, s)
                else:
                    gser = _g_series_on_circle(fspec, m, curve, min(N, 512))
                    pb = sobolev.pullback_energy_harmonic(m, gser, s)
                ratio = doug / pb if pb > 0 else float("nan")
                rows.append([curve_id, s, N, fspec.label, doug, pb, ratio])
                ratios.append(ratio)
        finite = [r for r in ratios if r == r]
        summary.append([curve_id, s, min(finite), max(finite),
                        max(finite) / min(finite)])
    _write_csv(outdir / "sweep.csv",
               ["curve_id", "s", "N", "function", "douglas", "pullback", "ratio"],
               rows)
    _write_csv(outdir / "sweep_summary.csv",
               ["curve_id", "s", "ratio_min", "ratio_max", "ratio_spread"],
               summary)
    return 0


def cmd_murai(cfg: ExperimentConfig, outdir: Path) -> int:
    rows = []
    for M in cfg.murai_M:
        spec = polar_spec({0: 1.0, 4: M / 4.0})
        lip = lipschitz_constant(spec)
        for N in cfg.resolutions:
            curve = build_curve(spec, N)
            op = cauchy.build_sio(curve)
            for s in cfg.s_grid:
                nrm = cauchy.operator_norm(op, "Hs", s, max_iter=600, tol=1e-10)
                rows.append([spec.curve_id(), M, lip, s, N, nrm])
    _write_csv(outdir / "murai.csv",
               ["curve_id", "M", "lipschitz", "s", "N", "norm"], rows)
    return 0


_COMMANDS = {
    "norms": cmd_norms,
    "plemelj": cmd_plemelj,
    "regularity": cmd_regularity,
    "sweep-equivalence": cmd_sweep_equivalence,
    "murai": cmd_murai,
}


def _parse_list(text, cast):
    return [cast(tok) for tok in text.split(",") if tok]


def main(argv=None) -> int:
    cap = os.environ.get("PLEMELJ_THREADS")
    if cap:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, cap)
        try:
            from threadpoolctl import threadpool_limits
            threadpool_limits(int(cap))
        except ImportError:
            pass

    ap = argparse.ArgumentParser(prog="plemelj-lab", description=__doc__)
    ap.add_argument("command", choices=sorted(_COMMANDS))
    ap.add_argument("--config", required=True)
    ap.add_argument("--s", type=str, default=None,
                    help="comma-separated override of the s grid")
    ap.add_argument("--N", type=str, default=None,
                    help="comma-separated override of the resolutions")
    ap.add_argument("--out", type=str, default=None)
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args(argv)

    try:
        cfg = ExperimentConfig.load(
            args.config,
            s_override=_parse_list(args.s, float) if args.s else None,
            n_override=_parse_list(args.N, int) if args.N else None,
            out_override=args.out, seed_override=args.seed)
    except (OSError, KeyError, ValueError, json.JSONDecodeError,
            InvalidCurve, InvalidParameter) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    outdir = Path(cfg.outputs)
    try:
        return _COMMANDS[args.command](cfg, outdir)
    except (InvalidCurve, InvalidParameter) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except PlemeljLabError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
