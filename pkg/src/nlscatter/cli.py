"""Batch front end: config-driven experiments with CSV artifacts and a run manifest.

One YAML config drives every subcommand; outputs are plain CSVs with fixed
float formatting (17 significant digits, scientific), so a fixed config and
seed reproduce byte-identical data files.  Logging goes to stderr, data
only to files.  Exit status: 0 success, 2 validation failure, 3 numerical
abort.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .born import born_functional_concentrated, ConcentratedData, localized_readout, sigma_scan
from .deconvolve import (
    ConvolutionData,
    assemble_kernel,
    fit_leading_exponent,
    recover_h_fourier,
    recover_h_tikhonov,
    synthesize_data,
)
from .grids import Field, make_grid, lebesgue_norm, sample_gaussian
from .laplace import M_closed, M_quadrature, check_bounds, outer_criterion
from .mu import build_mu_table, mu_monte_carlo, mu_quadrature
from .nonlinearity import (
    Coefficient,
    NonlinearitySpec,
    PotentialProfile,
    PowerTerm,
    check_admissible,
    eval_h,
)
from .propagator import free_propagate, sample_free_flow
from .solver import BlowupError, ScatteringConfig, scattering_map, sobolev_surrogate

FLOAT_FMT = "%.16e"  # 17 significant digits, fixed scientific notation

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERIC = 3


class ConfigError(Exception):
    """Invalid configuration; message carries the offending key path."""


def _log(msg: str):
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------- config


@dataclass
class ExperimentConfig:
    dimension: int
    seed: int
    output_dir: str
    spec: NonlinearitySpec
    grid_params: dict
    scattering: dict
    born: dict
    mu: dict
    laplace: dict
    deconvolve: dict
    pipeline: dict
    raw: dict = dc_field(default_factory=dict)
    source_bytes: bytes = b""

    def grid(self):
        return make_grid(self.dimension, self.grid_params["half_extent"],
                         self.grid_params["points_per_dim"])

    def scattering_config(self) -> ScatteringConfig:
        return ScatteringConfig(
            horizon=self.scattering["horizon"], dt=self.scattering["dt"],
            grid=self.grid(), amplitude_cap=self.scattering["amplitude_cap"],
        )

    def profile(self) -> PotentialProfile:
        return PotentialProfile(self.born["t0"], tuple(self.born["x0"]), self.spec)


_DEFAULTS = {
    "grid": {"half_extent": 512.0, "points_per_dim": 4096},
    "scattering": {"horizon": 50.0, "dt": 0.02, "amplitude_cap": 0.5},
    "born": {"t0": 0.0, "x0": [0.0], "amplitude": 1.0, "sigmas": [0.5, 0.4, 0.3, 0.25]},
    "mu": {"lambda_min": 1e-6, "n_lambda": 200, "mc_samples": 10_000_000, "mc_lambdas": 12},
    "laplace": {"bounds_re": [2.5, 3.0, 5.0], "bounds_im": [0.0, 1.0, -1.0, 10.0, -10.0, 100.0, -100.0],
                "outer_c": None, "outer_n": 3},
    "deconvolve": {"a_min": -4.0, "a_max": 2.0, "a_step": 0.05,
                   "k_min": -2.5, "k_max": 18.0, "k_step": 0.025,
                   "method": "both", "reg": "auto", "c_line": None},
    "pipeline": {"sigma": 0.3, "a_min": -4.0, "a_max": 0.5, "a_step": 0.05,
                 "fit_k_lo": 1.0, "fit_k_hi": 3.0, "compare_p": 6.0},
}


def _term_from_dict(i: int, t: dict, dim: int) -> PowerTerm:
    try:
        p = float(t["p"])
        kind = t.get("coeff_type", "constant")
        c = float(t.get("c", 1.0))
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"nonlinearity.terms[{i}]: {e}") from e
    if kind == "constant":
        return PowerTerm(p, Coefficient("constant", c))
    if kind == "bump":
        return PowerTerm(p, Coefficient(
            "bump", c,
            t_c=float(t.get("t_c", 0.0)), tau=float(t.get("tau", 1.0)),
            x_c=tuple(np.atleast_1d(t.get("x_c", [0.0] * dim)).astype(float)),
            w=float(t.get("w", 1.0)),
        ))
    raise ConfigError(f"nonlinearity.terms[{i}].coeff_type: unknown kind {kind!r}")


def load_config(path: str) -> ExperimentConfig:
    p = Path(path)
    try:
        source = p.read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        raw = yaml.safe_load(source)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        loc = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ConfigError(f"YAML parse error in {path}{loc}: {e}") from e
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")

    def section(name):
        out = dict(_DEFAULTS.get(name, {}))
        out.update(raw.get(name, {}) or {})
        return out

    try:
        dim = int(raw["dimension"])
    except KeyError:
        raise ConfigError("missing required key 'dimension'")
    seed = int(raw.get("seed", 0))
    nl = raw.get("nonlinearity") or {}
    terms = nl.get("terms") or []
    if not terms:
        raise ConfigError("nonlinearity.terms: at least one term is required")
    spec = NonlinearitySpec(
        dim,
        tuple(_term_from_dict(i, t, dim) for i, t in enumerate(terms)),
        p1=float(nl.get("p1", 16.0)),
    )
    return ExperimentConfig(
        dimension=dim, seed=seed,
        output_dir=str(raw.get("output_dir", "out")),
        spec=spec,
        grid_params=section("grid"),
        scattering=section("scattering"),
        born=section("born"),
        mu=section("mu"),
        laplace=section("laplace"),
        deconvolve=section("deconvolve"),
        pipeline=section("pipeline"),
        raw=raw, source_bytes=source,
    )


def validate_config(cfg: ExperimentConfig) -> list:
    """Admissibility, grid resolution, and amplitude-cap checks; returns messages."""
    problems = []
    rep = check_admissible(cfg.spec)
    if not rep.ok:
        problems.extend(f"nonlinearity: {v}" for v in rep.violations)
    try:
        grid = cfg.grid()
    except ValueError as e:
        problems.append(f"grid: {e}")
        return problems
    try:
        cfg.scattering_config()
    except ValueError as e:
        problems.append(f"scattering: {e}")
    for s in cfg.born["sigmas"]:
        if s < 4.0 * grid.spacing:
            problems.append(
                f"born.sigmas: sigma = {s} unresolvable (< 4 dx = {4 * grid.spacing:.4g})"
            )
    if len(cfg.born["x0"]) != cfg.dimension:
        problems.append("born.x0: length must equal dimension")
    x0 = np.atleast_1d(cfg.born["x0"])
    if np.any(np.abs(x0) >= grid.half_extent):
        problems.append("born.x0: outside the simulation domain")
    eps = math.sqrt(cfg.born["amplitude"])
    psi = sample_gaussian(grid)
    if eps * sobolev_surrogate(psi) > 40.0:
        problems.append("born.amplitude: unreasonably large for the small-data regime")
    dc = cfg.deconvolve
    if not (dc["a_min"] < dc["a_max"] and dc["k_min"] < dc["k_max"]):
        problems.append("deconvolve: empty a or k grid")
    ratio = dc["a_step"] / dc["k_step"]
    if abs(ratio - round(ratio)) > 1e-9:
        problems.append("deconvolve: k_step must divide a_step (kink alignment)")
    return problems


# ---------------------------------------------------------------- artifacts


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % float(v)
    return str(v)


class ArtifactWriter:
    def __init__(self, out_dir: Path):
        self.out_dir = out_dir
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.files = []
        self.timings = {}

    def write_csv(self, name: str, header: list, rows) -> Path:
        path = self.out_dir / name
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        path.write_text("\n".join(lines) + "\n")
        self.files.append(name)
        return path

    def manifest(self, cfg: ExperimentConfig, subcommand: str):
        data = {
            "tool_version": __version__,
            "subcommand": subcommand,
            "config_sha256": hashlib.sha256(cfg.source_bytes).hexdigest(),
            "seed": cfg.seed,
            "artifacts": self.files,
            "timings_sec": {k: round(v, 3) for k, v in self.timings.items()},
        }
        path = self.out_dir / "manifest.json"
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


class _Timer:
    def __init__(self, writer: ArtifactWriter, stage: str):
        self.writer, self.stage = writer, stage

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.writer.timings[self.stage] = time.perf_counter() - self.t0


# ---------------------------------------------------------------- subcommands


def cmd_validate(cfg: ExperimentConfig, writer: ArtifactWriter, args) -> int:
    problems = validate_config(cfg)
    if problems:
        for msg in problems:
            _log(f"invalid: {msg}")
        return EXIT_INVALID
    _log("config valid")
    return EXIT_OK


def cmd_propagate(cfg: ExperimentConfig, writer: ArtifactWriter, args) -> int:
    grid = cfg.grid()
    psi = sample_gaussian(grid)
    rows = []
    with _Timer(writer, "propagate"):
        for t in np.linspace(-5.0, 5.0, 21):
            num = free_propagate(psi, t)
            exact = sample_free_flow(grid, t)
            err = float(np.max(np.abs(num.values - exact.values)))
            drift = abs(lebesgue_norm(num, 2) - lebesgue_norm(psi, 2)) / lebesgue_norm(psi, 2)
            rows.append((t, err, drift))
    writer.write_csv("propagate.csv", ["t", "max_abs_error", "l2_drift_rel"], rows)
    return EXIT_OK


def cmd_scatter(cfg: ExperimentConfig, writer: ArtifactWriter, args) -> int:
    grid = cfg.grid()
    scfg = cfg.scattering_config()
    psi = sample_gaussian(grid)
    checks = []
    with _Timer(writer, "scatter"):
        free_spec = NonlinearitySpec(cfg.dimension, (PowerTerm(4.0 / cfg.dimension,
                                                               Coefficient("constant", 0.0)),))
        phi = Field(grid, 0.2 * psi.values)
        s_free = scattering_map(free_spec, phi, scfg)
        checks.append(("identity_free_F", float(np.max(np.abs(s_free.values - phi.values)))))

        theta = 1.1
        s1 = scattering_map(cfg.spec, phi, scfg)
        s2 = scattering_map(cfg.spec, Field(grid, np.exp(1j * theta) * phi.values), scfg)
        gauge = float(np.max(np.abs(s2.values - np.exp(1j * theta) * s1.values)))
        checks.append(("gauge_equivariance", gauge))

        eps_list = [0.05, 0.1, 0.15, 0.2]
        rows = []
        for eps in eps_list:
            phi_e = Field(grid, eps * psi.values)
            s = scattering_map(cfg.spec, phi_e, scfg)
            diff = lebesgue_norm(Field(grid, s.values - phi_e.values), 2)
            rows.append((eps, diff))
        lx = np.log([r[0] for r in rows])
        ly = np.log([r[1] for r in rows])
        slope = float(np.polyfit(lx, ly, 1)[0])
        checks.append(("amplitude_scan_slope", slope))
    writer.write_csv("scatter_scan.csv", ["eps", "s_minus_identity_l2"], rows)
    writer.write_csv("scatter_checks.csv", ["check", "value"], checks)
    return EXIT_OK


def cmd_born(cfg: ExperimentConfig, writer: ArtifactWriter, args) -> int:
    scfg = cfg.scattering_config()
    b = cfg.born
    with _Timer(writer, "born_scan"):
        result = sigma_scan(cfg.spec, b["t0"], b["x0"], b["amplitude"], b["sigmas"], scfg)
    rows = [
        (r.sigma, r.pairing.real, r.pairing.imag, r.born, r.residual, r.born_over_sigma)
        for r in result.rows
    ]
    writer.write_csv(
        "born_scan.csv",
        ["sigma", "pairing_re", "pairing_im", "born", "residual", "born_over_sigma_d2"],
        rows,
    )
    writer.write_csv(
        "born_fit.csv",
        ["quantity", "slope", "stderr"],
        [("residual", result.residual_slope, result.residual_slope_width),
         ("born", result.born_slope, result.born_slope_width)],
    )
    return EXIT_OK


def cmd_mu(cfg: ExperimentConfig, writer: ArtifactWriter, args) -> int:
    m = cfg.mu
    with _Timer(writer, "mu_table"):
        table = build_mu_table(cfg.dimension, m["lambda_min"], m["n_lambda"])
    rows = [(l, v, "") for l, v in zip(table.lambdas, table.values)]
    writer.write_csv("mu_table.csv", ["lambda", "mu", "stderr"], rows)

    with _Timer(writer, "mu_monte_carlo"):
        lam_mc = np.logspace(-3.0, -0.1, m["mc_lambdas"])
        mc_rows = []
        for i, lam in enumerate(lam_mc):
            est, se = mu_monte_carlo(cfg.dimension, lam, m["mc_samples"], cfg.seed + i)
            mc_rows.append((lam, mu_quadrature(cfg.dimension, lam), est, se))
    writer.write_csv("mu_mc_check.csv", ["lambda", "mu_quadrature", "mu_mc", "stderr"], mc_rows)
    return EXIT_OK


def _laplace_points(d: int):
    base = 1.0 + 3.0 / (2.0 * d)
    return [complex(base), complex(base + 0.5), complex(base + 1.5),
            complex(base + 2.5), complex(base + 0.5, 0.5), complex(base + 1.0, -1.0)]


def cmd_laplace(cfg: ExperimentConfig, writer: ArtifactWriter, args) -> int:
    d = cfg.dimension
    lp = cfg.laplace
    rows = []
    with _Timer(writer, "laplace_crosscheck"):
        for z in _laplace_points(d):
            mc = M_closed(d, z)
            mq = M_quadrature(d, z)
            rows.append((z.real, z.imag, abs(mc), abs(mq - mc) / abs(mc)))
    writer.write_csv("laplace_check.csv", ["re_z", "im_z", "abs_M", "rel_err_quadrature"], rows)

    with _Timer(writer, "laplace_bounds"):
        zg = [complex(re, im) for re in lp["bounds_re"] for im in lp["bounds_im"]]
        rep = check_bounds(d, zg)
        brows = [(z.real, z.imag, abs(M_closed(d, z)), wv)
                 for z, wv in zip(rep.z_grid, rep.weighted)]
    writer.write_csv("bounds.csv", ["re_z", "im_z", "abs_M", "weighted_ratio"], brows)

    with _Timer(writer, "laplace_outer"):
        c = lp["outer_c"] if lp["outer_c"] is not None else 1.0 + 3.0 / (2.0 * d)
        orep = outer_criterion(d, c, lp["outer_n"])
    writer.write_csv(
        "outer.csv",
        ["c", "n", "hardy_sup", "criterion_sup", "hardy_converged",
         "criterion_converged", "passed", "n_sufficient"],
        [(orep.c, orep.n, orep.hardy_sup, orep.criterion_sup, orep.hardy_converged,
          orep.criterion_converged, orep.passed, orep.n_sufficient)],
    )
    if not rep.passed:
        _log("bounds comparability check failed")
        return EXIT_NUMERIC
    return EXIT_OK


def _deconv_grids(cfg: ExperimentConfig):
    dc = cfg.deconvolve
    a = np.arange(dc["a_min"], dc["a_max"] + 1e-12, dc["a_step"])
    k = np.arange(dc["k_min"], dc["k_max"] + 1e-12, dc["k_step"])
    return a, k


def cmd_synthesize(cfg: ExperimentConfig, writer: ArtifactWriter, args) -> int:
    a_grid, _ = _deconv_grids(cfg)
    with _Timer(writer, "synthesize"):
        data = synthesize_data(cfg.profile(), a_grid)
    writer.write_csv("synth.csv", ["a", "d_value", "noise"],
                     zip(data.a_grid, data.d_values, data.noise))
    return EXIT_OK


def _run_recoveries(cfg: ExperimentConfig, data: ConvolutionData, writer: ArtifactWriter,
                    h_true_fn=None, tag: str = "recovery"):
    dc = cfg.deconvolve
    _, k_grid = _deconv_grids(cfg)
    kern = assemble_kernel(data.a_grid, k_grid, dim=cfg.dimension)
    out = {}
    method = dc["method"]
    if method in ("tikhonov", "both"):
        with _Timer(writer, f"{tag}_tikhonov"):
            reg = dc["reg"]
            out["tikhonov"] = recover_h_tikhonov(
                data, kern, reg=reg if reg == "auto" else float(reg), c_line=dc["c_line"])
    if method in ("fourier", "both"):
        with _Timer(writer, f"{tag}_fourier"):
            out["fourier"] = recover_h_fourier(data)

    base = out.get("tikhonov") or out.get("fourier")
    kcol = base.k_grid
    header = ["k"]
    cols = [kcol]
    if h_true_fn is not None:
        header.append("h_true")
        cols.append(h_true_fn(kcol))
    for name in ("tikhonov", "fourier"):
        if name in out:
            header.append(f"h_hat_{name}")
            cols.append(np.interp(kcol, out[name].k_grid, out[name].h_hat))
    writer.write_csv(f"{tag}_h.csv", header, zip(*cols))

    lam = base.lambda_grid
    gheader = ["lambda"]
    gcols = [lam]
    if h_true_fn is not None:
        from .deconvolve import reconstruct_G  # local to avoid cycle confusion
        gheader.append("g_true")
        prof = cfg.profile()
        gcols.append(np.array([prof.g(l) for l in lam]))
    gheader.append("g_hat")
    gcols.append(base.g_hat)
    writer.write_csv(f"{tag}_g.csv", gheader, zip(*gcols))
    return out


def cmd_recover(cfg: ExperimentConfig, writer: ArtifactWriter, args) -> int:
    a_grid, _ = _deconv_grids(cfg)
    with _Timer(writer, "synthesize"):
        data = synthesize_data(cfg.profile(), a_grid)
    prof = cfg.profile()
    _run_recoveries(cfg, data, writer, h_true_fn=lambda k: eval_h(prof, k))
    return EXIT_OK


def cmd_pipeline(cfg: ExperimentConfig, writer: ArtifactWriter, args) -> int:
    """End to end: simulated scattering readout -> deconvolution -> exponent fit."""
    scfg = cfg.scattering_config()
    pl = cfg.pipeline
    b = cfg.born
    sigma = pl["sigma"]
    a_grid = np.arange(pl["a_min"], pl["a_max"] + 1e-12, pl["a_step"])

    with _Timer(writer, "pipeline_readout"):
        d_hat = np.array([
            localized_readout(cfg.spec, b["t0"], b["x0"], math.exp(a), sigma, scfg)
            for a in a_grid
        ])
    # noise level: Born residual measured once at a = 0
    with _Timer(writer, "pipeline_noise_estimate"):
        data0 = ConcentratedData(b["t0"], tuple(b["x0"]), sigma, 1.0)
        born0 = born_functional_concentrated(cfg.spec, data0, scfg.grid,
                                             t_window=scfg.horizon, dt=scfg.dt)
        read0 = d_hat[np.argmin(np.abs(a_grid))] if np.any(np.abs(a_grid) < 1e-9) else \
            localized_readout(cfg.spec, b["t0"], b["x0"], 1.0, sigma, scfg)
        d = cfg.dimension
        rel_noise = abs(read0 - born0 / sigma ** (d + 2)) / abs(born0 / sigma ** (d + 2))
    data = ConvolutionData(cfg.dimension, a_grid, d_hat, "simulated-scattering",
                           noise=np.maximum(rel_noise * np.abs(d_hat), 1e-12))
    writer.write_csv("pipeline_data.csv", ["a", "d_hat", "noise"],
                     zip(data.a_grid, data.d_values, data.noise))

    prof = cfg.profile()
    out = _run_recoveries(cfg, data, writer, h_true_fn=lambda k: eval_h(prof, k),
                          tag="pipeline_recovery")

    with _Timer(writer, "pipeline_separation"):
        alt_spec = NonlinearitySpec(
            cfg.dimension,
            (PowerTerm(pl["compare_p"], Coefficient("constant", 1.0)),),
            p1=cfg.spec.p1,
        )
        d_alt0 = localized_readout(alt_spec, b["t0"], b["x0"], 1.0, sigma, scfg)
        separation = abs(read0 - d_alt0) / abs(read0)

    rows = [("separation_at_a0", separation), ("noise_rel", rel_noise)]
    for name, rec in out.items():
        p_fit = fit_leading_exponent(rec, pl["fit_k_lo"], pl["fit_k_hi"])
        rows.append((f"fitted_p_{name}", p_fit))
    writer.write_csv("pipeline_summary.csv", ["quantity", "value"], rows)
    return EXIT_OK


_SUBCOMMANDS = {
    "validate": cmd_validate,
    "propagate": cmd_propagate,
    "scatter": cmd_scatter,
    "born": cmd_born,
    "mu": cmd_mu,
    "laplace": cmd_laplace,
    "synthesize": cmd_synthesize,
    "recover": cmd_recover,
    "pipeline": cmd_pipeline,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nlscatter",
        description="NLS scattering simulation and nonlinearity recovery experiments",
    )
    ap.add_argument("subcommand", choices=sorted(_SUBCOMMANDS))
    ap.add_argument("--config", required=True, help="YAML experiment config")
    ap.add_argument("--out", default=None, help="output directory (overrides config)")
    ap.add_argument("--seed", type=int, default=None, help="seed override")
    ap.add_argument("--threads", type=int, default=1, help="worker count (reduction is ordered)")
    ap.add_argument("--sigma", type=float, default=None, help="override pipeline/readout sigma")
    ap.add_argument("--reg", default=None, help="override Tikhonov regularization")
    ap.add_argument("--c-line", dest="c_line", type=float, default=None,
                    help="override the weighting abscissa c")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        _log(f"config error: {e}")
        return EXIT_INVALID
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.output_dir = args.out
    if args.sigma is not None:
        cfg.pipeline["sigma"] = args.sigma
    if args.reg is not None:
        cfg.deconvolve["reg"] = args.reg
    if args.c_line is not None:
        cfg.deconvolve["c_line"] = args.c_line

    problems = validate_config(cfg)
    if problems:
        for msg in problems:
            _log(f"invalid: {msg}")
        return EXIT_INVALID

    writer = ArtifactWriter(Path(cfg.output_dir))
    t0 = time.perf_counter()
    try:
        status = _SUBCOMMANDS[args.subcommand](cfg, writer, args)
    except (BlowupError, FloatingPointError) as e:
        _log(f"numerical abort in stage '{args.subcommand}': {e}")
        return EXIT_NUMERIC
    except ValueError as e:
        _log(f"error in stage '{args.subcommand}': {e}")
        return EXIT_NUMERIC
    writer.timings["total"] = time.perf_counter() - t0
    writer.manifest(cfg, args.subcommand)
    _log(f"{args.subcommand}: wrote {len(writer.files)} artifact(s) to {cfg.output_dir}")
    return status


if __name__ == "__main__":
    raise SystemExit(main())
