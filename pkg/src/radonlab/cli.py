"""Command-line entry point: decay, probe, check, apply and mu-hat workflows.

Every subcommand reads an optional ``--config`` key-value file, lets any
key be overridden on the command line, validates the merged configuration,
runs the computation, and writes a JSON report (with the resolved config
embedded), a full-precision CSV where the output is tabular, and a PNG
figure rendered from the report.

Exit codes: 0 pass / verdict as expected, 1 verdict mismatch, 2 usage or
configuration error, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from fractions import Fraction

import numpy as np

from . import figures
from .config import COMMAND_SCHEMAS, ConfigError, RunConfig, build_surface, \
    parse_config_file
from .decay import decay_sweep, family_decay_sweep
from .families import RotationSampler, rotation_family
from .nondegeneracy import builtin_case_names, run_builtin_check
from .oscillatory import FrequencyGrid, QuadratureError, mu_hat_batch
from .probes import exponent_table, knapp_probe, lp_norm
from .radon import DiscreteMeasure, GridField, apply_averaged, convolve, \
    discretize_measure
from .reports import write_report
from .util import resolve_threads

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _add_command(sub, name: str, help_text: str):
    p = sub.add_parser(name, help=help_text)
    p.add_argument("--config", help="key = value configuration file")
    for key in COMMAND_SCHEMAS[name]:
        p.add_argument("--" + key.replace("_", "-"), dest=key, default=None)
    return p


def _build_config(args) -> RunConfig:
    file_values = parse_config_file(args.config) if args.config else {}
    cli_values = {k: v for k, v in vars(args).items()
                  if k not in ("command", "config")}
    return RunConfig.build(args.command, file_values, cli_values)


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def cmd_decay(cfg: RunConfig) -> int:
    t0 = time.time()
    threads = resolve_threads(cfg["threads"])
    chart = build_surface(cfg["surface"], cfg["vertices"])
    rhos = cfg["rho_min"] * 2.0 ** np.arange(cfg["levels"])
    out_base = cfg["out"] or "decay_report"

    if cfg["family"]:
        if cfg["family"] not in ("rotation2d", "rotation3d"):
            raise ConfigError("family must be rotation2d or rotation3d")
        n = 2 if cfg["family"] == "rotation2d" else 3
        if chart.ambient_dim != n:
            raise ConfigError("surface dimension does not match the family")
        box = None if n == 2 else [[-cfg["s_box_half"], cfg["s_box_half"]]] * 3
        fam = rotation_family(n, param_box=box)
        direction = cfg["frequency_direction"]
        if direction is None:
            direction = [0.0] * (n - 1) + [1.0] if n == 3 else [1.0, 0.0]
        report = family_decay_sweep(chart, fam, direction, rhos,
                                    s_counts=cfg["s_counts"], tol=cfg["tol"],
                                    threads=threads)
    elif cfg["ray_direction"] is not None:
        report = decay_sweep(chart, rhos, [cfg["p"]], tol=cfg["tol"],
                             direction=cfg["ray_direction"],
                             threads=threads)["ray"]
        if chart.kind == "beta_surface":
            report.predicted_slope = -(chart.ambient_dim - 1) / chart.params["beta"]
            report.regime = "pointwise-envelope"
    else:
        report = decay_sweep(chart, rhos, [cfg["p"]], count=cfg["direction_count"],
                             tol=cfg["tol"], threads=threads)[cfg["p"]]

    rep = report.to_dict()
    rows = list(zip([float(r) for r in report.rho_levels],
                    [float(a) for a in report.averages]))
    paths = write_report(
        out_base, "decay", cfg.resolved(), rep,
        csv_header=("rho", "average"), csv_rows=rows,
        figure_fn=(lambda p: figures.decay_figure(rep, p,
                   title=f"decay: {cfg['surface']}")) if cfg["figures"] else None,
        runtime_s=time.time() - t0,
    )
    ok = (report.predicted_slope is None
          or abs(report.fitted_slope - report.predicted_slope) <= cfg["slope_band"])
    print(f"fitted slope {report.fitted_slope:+.4f}"
          + (f" (predicted {report.predicted_slope:+.4f})"
             if report.predicted_slope is not None else "")
          + f" -> {paths['json']}")
    return EXIT_OK if ok else EXIT_MISMATCH


def cmd_probe(cfg: RunConfig) -> int:
    t0 = time.time()
    threads = resolve_threads(cfg["threads"])
    out_base = cfg["out"] or "probe_report"
    p, q, outer_r = cfg["p"], cfg["q"], None
    surface_spec = cfg["surface"]
    extra = {}

    if cfg["theorem"]:
        tag = cfg["theorem"]
        if tag == "thm6":
            if cfg["beta"] is None:
                raise ConfigError("thm6 probes need beta")
            pf, ppf, rf = exponent_table("thm6", n=2, beta=cfg["beta"],
                                         p=Fraction(cfg["p"]).limit_denominator(10**6))
            q, outer_r = float(ppf), (math.inf if math.isinf(rf) else float(rf))
            surface_spec = f"beta:n=2,beta={cfg['beta']}"
            extra["exponents"] = {"p": str(pf), "p_prime": str(ppf), "r": str(rf)}
        elif tag in ("thm1", "thm2", "thm3", "thm7"):
            pq = exponent_table(tag, n=2, k=1)
            p, q = float(pq[0]), float(pq[1])
        else:
            raise ConfigError(f"unknown theorem tag {tag!r}")

    chart = build_surface(surface_spec, cfg["vertices"])
    report = knapp_probe(
        chart, cfg["averaging"], p, q, cfg["deltas"],
        family=cfg["family_shape"], center=cfg["center"],
        plate_axis=cfg["plate_axis"], plate_length=cfg["plate_length"],
        grid_div=cfg["grid_div"], theta_count=cfg["theta_count"],
        outer_r=outer_r, threads=threads,
    )
    rep = report.to_dict()
    rep["meta"].update(extra)
    rows = list(zip([float(d) for d in report.deltas],
                    [float(v) for v in report.input_norms],
                    [float(v) for v in report.output_norms]))
    paths = write_report(
        out_base, "probe", cfg.resolved(), rep,
        csv_header=("delta", "input_norm", "output_norm"), csv_rows=rows,
        figure_fn=(lambda pth: figures.probe_figure(rep, pth,
                   title=f"probe: {surface_spec}")) if cfg["figures"] else None,
        runtime_s=time.time() - t0,
    )
    print(f"ratio slope {report.ratio_slope:+.4f} verdict {report.verdict} "
          f"-> {paths['json']}")
    if cfg["expect"]:
        want_bounded = cfg["expect"] == "bounded"
        got_bounded = report.verdict == "bounded-consistent"
        if want_bounded != got_bounded:
            return EXIT_MISMATCH
        if cfg["expected_rate"] is not None and not want_bounded:
            if abs(report.ratio_slope - cfg["expected_rate"]) > cfg["rate_band"]:
                return EXIT_MISMATCH
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    t0 = time.time()
    if not cfg["condition"]:
        raise ConfigError("check needs --condition (1.4|4.1|5.6|5.8|5.9|christ)")
    cases = builtin_case_names()
    if cfg["condition"] not in cases:
        raise ConfigError(f"unknown condition {cfg['condition']!r}")
    case = cfg["case"] or cases[cfg["condition"]][0]
    if case not in cases[cfg["condition"]]:
        raise ConfigError(
            f"unknown case {case!r} for {cfg['condition']}; "
            f"choose from {cases[cfg['condition']]}")
    report = run_builtin_check(cfg["condition"], case, tol=cfg["tol"],
                               invert=cfg["invert"], seed=cfg["seed"])
    rep = report.to_dict()
    out_base = cfg["out"] or "check_report"
    paths = write_report(
        out_base, "check", cfg.resolved(), rep,
        figure_fn=(lambda p: figures.rank_figure(
            report.margins, report.tol, p,
            title=f"{cfg['condition']} / {case}")) if cfg["figures"] else None,
        runtime_s=time.time() - t0,
    )
    print(f"condition {cfg['condition']} case {case}: "
          f"{'pass' if report.passed else 'fail'} "
          f"(margin {report.min_margin:.3e}) -> {paths['json']}")
    expected_pass = cfg["expect"] != "fail"
    return EXIT_OK if report.passed == expected_pass else EXIT_MISMATCH


def cmd_apply(cfg: RunConfig) -> int:
    t0 = time.time()
    chart = build_surface(cfg["surface"], cfg["vertices"])
    n = chart.ambient_dim
    if n != 2:
        raise ConfigError("the apply workflow builds planar grids (n = 2)")
    half = cfg["box_half"]
    N = cfg["grid"]
    center = np.asarray(cfg["center"] if cfg["center"] is not None
                        else [0.0] * n, float)

    if cfg["field"] == "gaussian":
        from .geometry import smoothstep_bump
        sigma = cfg["sigma"]
        cut = smoothstep_bump(3.0 * sigma, 4.0 * sigma, center=center)

        def fn(X):
            return (np.exp(-np.sum((X - center) ** 2, axis=1) / (2 * sigma**2))
                    * cut(X))
    elif cfg["field"] == "ball":
        r = cfg["field_radius"]

        def fn(X):
            return (np.linalg.norm(X - center[None, :], axis=1) <= r).astype(float)
    else:
        raise ConfigError("field must be 'gaussian' or 'ball'")
    f = GridField.from_function([-half] * n, [half] * n, (N,) * n, fn)

    if cfg["measure"] == "point":
        meas = DiscreteMeasure(np.zeros((1, n)), np.array([1.0]))
    elif cfg["measure"] == "chart":
        meas = None
    else:
        raise ConfigError("measure must be 'chart' or 'point'")

    out_base = cfg["out"] or "apply_field"
    if cfg["rotation_count"] > 0:
        rots = RotationSampler(n, count=cfg["rotation_count"],
                               seed=cfg["seed"]).sample()
        stack = apply_averaged(f, chart, rotations=rots, method=cfg["method"])
        mean_field = GridField(f.lo, f.hi,
                               np.tensordot(stack.param_weights, stack.values, 1))
        out = mean_field
        summary = {"mode": "rotation-average", "slices": len(stack.values)}
    else:
        if meas is None:
            meas = discretize_measure(chart, 0.5 * float(np.min(f.spacing)))
        out = convolve(f, meas, method=cfg["method"])
        summary = {"mode": "single", "measure_points": len(meas.points)}
    grid_path = out_base + ".grid"
    out.save(grid_path)
    summary.update({
        "input_l2": lp_norm(f, 2.0),
        "output_l2": lp_norm(out, 2.0),
        "output_max": lp_norm(out, math.inf),
        "grid_file": grid_path,
    })
    paths = write_report(
        out_base, "apply", cfg.resolved(), summary,
        figure_fn=(lambda p: figures.field_figure(
            out.values, out.lo, out.hi, p,
            title=f"applied: {cfg['surface']}")) if cfg["figures"] else None,
        runtime_s=time.time() - t0,
    )
    print(f"output L2 {summary['output_l2']:.6g} -> {paths['json']}")
    return EXIT_OK


def cmd_mu_hat(cfg: RunConfig) -> int:
    t0 = time.time()
    chart = build_surface(cfg["surface"], cfg["vertices"])
    grid = FrequencyGrid.dyadic(cfg["rho_min"], cfg["levels"],
                                chart.ambient_dim, cfg["direction_count"])
    rows = []
    mags = []
    for rho in grid.rho_levels:
        vals = mu_hat_batch(chart, rho * grid.directions, tol=cfg["tol"])
        mags.append(np.abs(vals))
        for i, v in enumerate(vals):
            rows.append((float(rho), i, float(v.real), float(v.imag),
                         float(abs(v))))
    out_base = cfg["out"] or "mu_hat"
    rep = {
        "rho_levels": [float(r) for r in grid.rho_levels],
        "direction_count": len(grid.directions),
        "max_abs": [float(np.max(m)) for m in mags],
        "mean_abs": [float(np.mean(m)) for m in mags],
    }
    paths = write_report(
        out_base, "mu-hat", cfg.resolved(), rep,
        csv_header=("rho", "omega_index", "re", "im", "abs"), csv_rows=rows,
        figure_fn=(lambda p: figures.mu_hat_figure(
            rep["rho_levels"], np.stack(mags), p,
            title=f"|mu_hat|: {cfg['surface']}")) if cfg["figures"] else None,
        runtime_s=time.time() - t0,
    )
    print(f"{len(rows)} samples -> {paths['csv']}")
    return EXIT_OK


_DISPATCH = {
    "decay": cmd_decay,
    "probe": cmd_probe,
    "check": cmd_check,
    "apply": cmd_apply,
    "mu-hat": cmd_mu_hat,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="radonlab",
        description="decay exponents, norm probes and rank conditions for "
                    "averaged Radon operators",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    _add_command(sub, "decay", "spherical / family average decay slopes")
    _add_command(sub, "probe", "scaling-family norm probes")
    _add_command(sub, "check", "nondegeneracy rank conditions")
    _add_command(sub, "apply", "apply the averaged operator on a grid")
    _add_command(sub, "mu-hat", "tabulate the measure transform")

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        cfg = _build_config(args)
        return _DISPATCH[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (QuadratureError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except RuntimeError as exc:
        if "converge" in str(exc) or "Newton" in str(exc):
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        raise


if __name__ == "__main__":
    sys.exit(main())
