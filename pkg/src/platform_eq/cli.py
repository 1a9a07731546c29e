"""Command-line front end: solve, compare, classify, sweep, verify, figures.

Every command reads a strict INI config (see :mod:`platform_eq.config`),
prints CSV to stdout and optionally writes files under --out.  All floating
point output uses 17 significant digits, LF line endings and a header comment
carrying the tool version, the config hash and a parameter echo, so identical
config + seed reproduce byte-identical bytes.

Exit codes: 0 success, 1 config/usage error, 2 solver failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .config import ConfigError, RunConfig, load_config
from .demand import FixedPointError
from .equilibrium import SolverError, compare_regimes, solve_cne, solve_ce
from .limits import outside_option_limit_check, perfect_competition_check
from .model import MarketParams, Side
from .regions import (FIGURES, RegionGrid, Verdict, classify_direction,
                      classify_sign_z, figure_paint, figure_threshold_curve,
                      grid_agreement, region_grid)
from . import __version__
from .statics import AnalyticDomainError, derivative_bundle, fd_derivative, _ANALYTIC_OPS
from .svg import BLUE, GRAY, RED, region_svg
from .verify import soc_report, verify_nash

INPUT_COLS = ("n_platforms", "beta_b", "beta_s", "phi_bb", "phi_bs", "phi_sb",
              "phi_ss", "u0_b", "u0_s", "mu_b", "mu_s")
EQ_COLS = ("regime", "z_b", "z_s", "p_b", "p_s", "x_b", "x_s", "nx_b", "nx_s",
           "pi_b", "pi_s", "pi_platform", "pi_aggregate", "cs_b", "cs_s",
           "foc_residual", "price_check", "warnings")
DERIV_SPECS = (("price", "u0", "dprice_du0"), ("profit", "u0", "dprofit_du0"),
               ("consumer_surplus", "u0", "dcs_du0"), ("z", "u0", "dz_du0"),
               ("price", "n_platforms", "dprice_dn"),
               ("participation", "n_platforms", "dpart_dn"),
               ("consumer_surplus", "n_platforms", "dcs_dn"),
               ("profit", "n_platforms", "dprofit_dn"))
CLASSIFIER_SPECS = (("price", "u0", "vprice_du0"), ("profit", "u0", "vprofit_du0"),
                    ("consumer_surplus", "u0", "vcs_du0"),
                    ("price", "n_platforms", "vprice_dn"),
                    ("participation", "n_platforms", "vpart_dn"),
                    ("consumer_surplus", "n_platforms", "vcs_dn"),
                    ("profit", "n_platforms", "vprofit_dn"))


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float) or isinstance(v, np.floating):
        return f"{float(v):.17g}"
    return str(v)


def csv_text(comments: list[str], header: tuple | list, rows: list) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _emit(text: str, out_dir: str, filename: str, echo: bool = True) -> None:
    if echo:
        sys.stdout.write(text)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        path = os.path.join(out_dir, filename)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _comments(cfg: RunConfig, command: str) -> list[str]:
    return [
        f"platform-eq {__version__} {command}",
        f"config sha256 {cfg.sha256}",
        f"params {cfg.echo()}",
        f"seed {cfg.get('output', 'seed')}",
    ]


def _input_row(params: MarketParams) -> list:
    return [params.n_platforms, params.beta[0], params.beta[1],
            params.phi[0][0], params.phi[0][1], params.phi[1][0], params.phi[1][1],
            params.u0[0], params.u0[1], params.mu[0], params.mu[1]]


def _eq_row(eq) -> list:
    return [eq.regime, eq.z.z_b, eq.z.z_s, eq.prices[0], eq.prices[1],
            eq.shares[0], eq.shares[1], eq.participation[0], eq.participation[1],
            eq.profit_per_side[0], eq.profit_per_side[1], eq.total_profit,
            eq.aggregate_profit, eq.consumer_surplus[0], eq.consumer_surplus[1],
            eq.foc_residual, eq.price_check, ";".join(eq.warnings)]


def _regimes(cfg: RunConfig) -> list[str]:
    regime = cfg.get("solve", "regime")
    return ["cne", "ce"] if regime == "both" else [regime]


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_solve(cfg: RunConfig) -> int:
    params = cfg.market
    tol = cfg.get("solve", "tol")
    rows = []
    for regime in _regimes(cfg):
        solver = solve_cne if regime == "cne" else solve_ce
        eq = solver(params, tol=tol)
        rows.append(_input_row(params) + _eq_row(eq))
    text = csv_text(_comments(cfg, "solve"), INPUT_COLS + EQ_COLS, rows)
    _emit(text, cfg.get("output", "dir"), "solve.csv")
    return 0


def cmd_compare(cfg: RunConfig) -> int:
    params = cfg.market
    cmp_ = compare_regimes(params, tol=cfg.get("solve", "tol"))
    header = INPUT_COLS + tuple(f"cne_{c}" for c in EQ_COLS[1:]) \
        + tuple(f"ce_{c}" for c in EQ_COLS[1:]) \
        + ("dz_b", "dz_s", "dpart_b", "dpart_s", "dprice_b", "dprice_s",
           "decomp_ext_b", "decomp_ext_s", "decomp_util_b", "decomp_util_s",
           "decomp_residual")
    row = _input_row(params) + _eq_row(cmp_.cne)[1:] + _eq_row(cmp_.ce)[1:] + [
        cmp_.dz[0], cmp_.dz[1], cmp_.d_participation[0], cmp_.d_participation[1],
        cmp_.d_price[0], cmp_.d_price[1],
        cmp_.decomposition_externality[0], cmp_.decomposition_externality[1],
        cmp_.decomposition_utility[0], cmp_.decomposition_utility[1],
        cmp_.decomposition_residual]
    text = csv_text(_comments(cfg, "compare"), header, [row])
    _emit(text, cfg.get("output", "dir"), "compare.csv")
    return 0


def _label_cells(label) -> list:
    thr = ";".join(f"{k.value}={v:.17g}" for k, v in label.thresholds_used)
    return [label.verdict.value, label.margin, thr, label.reason]


def cmd_classify(cfg: RunConfig) -> int:
    params = cfg.market
    eq = solve_cne(params, tol=cfg.get("solve", "tol"))
    z_star = {s: eq.z.side(s) for s in Side}
    rows = []
    for side in Side:
        for regime in ("cne", "ce"):
            label = classify_sign_z(regime, params, side)
            rows.append([f"sign_z_{regime}", side.label] + _label_cells(label))
        for quantity, wrt, name in CLASSIFIER_SPECS:
            try:
                label = classify_direction(quantity, wrt, params, side,
                                           z_star=z_star[side])
            except ValueError as exc:
                rows.append([name, side.label, "error", "", "", str(exc)])
                continue
            rows.append([name, side.label] + _label_cells(label))
    header = ("classifier", "side", "verdict", "margin", "thresholds", "reason")
    text = csv_text(_comments(cfg, "classify"), header, rows)
    _emit(text, cfg.get("output", "dir"), "classify.csv")
    return 0


def _axis_values(start: float, stop: float, step: float) -> list[float]:
    if step <= 0:
        raise ConfigError("sweep step must be positive")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(max(count, 1))]


def _apply_axis(params: MarketParams, axis: str, value: float) -> MarketParams:
    phi = [list(params.phi[0]), list(params.phi[1])]
    if axis == "n_platforms":
        return params.replace(n_platforms=int(round(value)))
    if axis in ("u0", "u0_b", "u0_s"):
        u0 = list(params.u0)
        if axis in ("u0", "u0_b"):
            u0[0] = value
        if axis in ("u0", "u0_s"):
            u0[1] = value
        return params.replace(u0=tuple(u0))
    if axis in ("beta", "beta_b", "beta_s"):
        beta = list(params.beta)
        if axis in ("beta", "beta_b"):
            beta[0] = value
        if axis in ("beta", "beta_s"):
            beta[1] = value
        return params.replace(beta=tuple(beta))
    if axis in ("phi_own", "phi_bb"):
        phi[0][0] = value
    if axis in ("phi_own", "phi_ss"):
        phi[1][1] = value
    if axis == "phi_bs":
        phi[0][1] = value
    if axis == "phi_sb":
        phi[1][0] = value
    return params.replace(phi=(tuple(phi[0]), tuple(phi[1])))


def _sweep_row_worker(task) -> list[list]:
    params, regimes, tol, with_derivs = task
    rows = []
    for regime in regimes:
        base = _input_row(params)
        try:
            eq = (solve_cne if regime == "cne" else solve_ce)(params, tol=tol)
        except (SolverError, FixedPointError, ArithmeticError) as exc:
            # empty equilibrium cells, the message in the error column
            rows.append(base + [regime] + [""] * (len(EQ_COLS) - 1)
                        + [f"{type(exc).__name__}: {exc}"])
            continue
        row = base + _eq_row(eq) + [""]  # empty error column
        if regime == "cne" and with_derivs:
            analytic_ok = params.cross_externalities_zero
            row.append("analytic" if analytic_ok else "fd")
            for quantity, wrt, _name in DERIV_SPECS:
                for side in Side:
                    try:
                        if analytic_ok:
                            op = _ANALYTIC_OPS[(quantity, wrt)]
                            val = op(params, side, z_star=eq.z.side(side))
                        else:
                            val = fd_derivative(quantity, wrt, params, side)
                        row.append(val)
                    except (ArithmeticError, AnalyticDomainError, SolverError,
                            FixedPointError) as exc:
                        row.append(f"error:{type(exc).__name__}")
            row.append(classify_sign_z("cne", params, Side.BUYER).verdict.value)
            row.append(classify_sign_z("cne", params, Side.SELLER).verdict.value)
            for quantity, wrt, _name in CLASSIFIER_SPECS:
                for side in Side:
                    try:
                        lab = classify_direction(quantity, wrt, params, side,
                                                 z_star=eq.z.side(side))
                        row.append(lab.verdict.value)
                    except ValueError:
                        row.append("error")
        else:
            row.append("")
            row.extend([""] * 16)
            row.append(classify_sign_z("ce", params, Side.BUYER).verdict.value
                       if regime == "ce" else "")
            row.append(classify_sign_z("ce", params, Side.SELLER).verdict.value
                       if regime == "ce" else "")
            row.extend([""] * 14)
        rows.append(row)
    return rows


def _map_ordered(fn, tasks: list, jobs: int) -> list:
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (jobs * 4))))


def cmd_sweep(cfg: RunConfig) -> int:
    params0 = cfg.market
    tol = cfg.get("solve", "tol")
    regimes = _regimes(cfg)
    sweep = cfg.values["sweep"]
    with_derivs = sweep["derivatives"]
    axis1 = sweep["axis"]
    vals1 = _axis_values(sweep["start"], sweep["stop"], sweep["step"])
    tasks = []
    if sweep["axis2"]:
        vals2 = _axis_values(sweep["start2"], sweep["stop2"], sweep["step2"])
        for v1 in vals1:
            for v2 in vals2:
                p = _apply_axis(_apply_axis(params0, axis1, v1), sweep["axis2"], v2)
                tasks.append((p, regimes, tol, with_derivs))
    else:
        for v1 in vals1:
            tasks.append((_apply_axis(params0, axis1, v1), regimes, tol, with_derivs))

    jobs = cfg.get("output", "jobs")
    results = _map_ordered(_sweep_row_worker, tasks, jobs)
    header = INPUT_COLS + EQ_COLS + ("error", "deriv_method")
    for _q, _w, name in DERIV_SPECS:
        header += (f"{name}_b", f"{name}_s")
    header += ("vsign_z_b", "vsign_z_s")
    for _q, _w, name in CLASSIFIER_SPECS:
        header += (f"{name}_b", f"{name}_s")
    rows = [row + [""] * (len(header) - len(row))
            for chunk in results for row in chunk]
    text = csv_text(_comments(cfg, "sweep") + [f"sweep axis {axis1}"], header, rows)
    _emit(text, cfg.get("output", "dir"), "sweep.csv")
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    params = cfg.market
    tol = cfg.get("solve", "tol")
    vconf = cfg.values["verify"]
    eq = solve_cne(params, tol=tol)
    target = eq
    if vconf["perturb_price"]:
        target = dataclasses.replace(
            eq, prices=(eq.prices[0] + vconf["perturb_price"],
                        eq.prices[1] + vconf["perturb_price"]))
    report = verify_nash(params, target, radius=vconf["radius"], grid_n=vconf["grid_n"])
    soc_cne = soc_report(params, eq)
    eq_ce = solve_ce(params, tol=tol)
    soc_ce = soc_report(params, eq_ce)

    certified = report.certified(vconf["tolerance"])
    soc_ok = soc_cne.numeric_negative_definite and soc_ce.numeric_negative_definite
    if soc_cne.closed_form_negative is not None:
        soc_ok = soc_ok and soc_cne.closed_form_negative
    if soc_ce.closed_form_negative is not None:
        soc_ok = soc_ok and soc_ce.closed_form_negative

    doc = {
        "tool": f"platform-eq {__version__}",
        "config_sha256": cfg.sha256,
        "deviation": {
            "base_profit": report.base_profit,
            "best_gain": report.best_gain,
            "best_deviation_prices": list(report.best_deviation_prices),
            "grid_radius": report.grid_radius,
            "grid_n": report.grid_n,
            "refined": report.refined,
            "certified": certified,
        },
        "soc_cne": {
            "closed_form_diag": list(soc_cne.cne_diag) if soc_cne.cne_diag else None,
            "numeric_hessian": [list(r) for r in soc_cne.numeric_hessian],
            "negative_definite": soc_cne.numeric_negative_definite,
        },
        "soc_ce": {
            "closed_form_hessian": [list(r) for r in soc_ce.ce_hessian],
            "negative_definite": soc_ce.numeric_negative_definite,
            "closed_form_negative_definite": soc_ce.closed_form_negative,
        },
        "passed": bool(certified and soc_ok),
    }
    text = json.dumps(doc, indent=2) + "\n"
    sys.stdout.write(text)
    out_dir = cfg.get("output", "dir")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "verify.json"), "w", encoding="utf-8",
                  newline="\n") as fh:
            fh.write(text)
        rows = [[report.base_profit, report.best_gain,
                 report.best_deviation_prices[0], report.best_deviation_prices[1],
                 report.grid_radius, report.grid_n, report.refined, certified]]
        _emit(csv_text(_comments(cfg, "verify"),
                       ("base_profit", "best_gain", "dev_p_b", "dev_p_s",
                        "radius", "grid_n", "refined", "certified"), rows),
              out_dir, "verify.csv", echo=False)
    return 0 if doc["passed"] else 3


_FIGURE_LEGENDS = {
    "fig1": [(BLUE, "unique symmetric equilibrium certified"),
             (RED, "no uniqueness certificate")],
    "fig2": [(BLUE, "net utility above outside option (z*>0)"),
             (RED, "net utility below outside option (z*<0)")],
    "fig3": [(BLUE, "z*>0 in the many-platform limit"),
             (RED, "z*<0 in the many-platform limit")],
    "fig4": [(BLUE, "entry raises prices"), (RED, "entry lowers prices"),
             (GRAY, "unclassified")],
    "fig5": [(BLUE, "entry raises participation"), (GRAY, "unclassified")],
    "fig6": [(BLUE, "entry raises consumer surplus"),
             (RED, "decrease band (needs z* cap)"), (GRAY, "unclassified")],
}


def _figure_worker(task):
    figure, panel_u0, n, res, phi_range, beta_range, width, height = task
    spec = FIGURES[figure]
    grid = region_grid(spec.classifier, phi_range=phi_range, beta_range=beta_range,
                       resolution=res, n=n, u0=panel_u0, solve_signs=True)
    agree, checked, frac = grid_agreement(grid)
    paint = figure_paint(figure, grid)
    curve = figure_threshold_curve(figure, grid)
    rows = []
    nb = len(grid.betas)
    for i, phi in enumerate(grid.phis):
        for j, beta in enumerate(grid.betas):
            label = grid.labels[i * nb + j]
            rows.append([phi, beta, label.verdict.value, label.margin,
                         int(paint[i, j]), int(grid.solved_signs[i, j])])
    title = f"{figure}: {spec.description} (N={n:g}, u0={panel_u0:g})"
    svg = region_svg(grid.phis, grid.betas, paint, curve, title,
                     _FIGURE_LEGENDS[figure], width=width, height=height)
    stem = figure if len(spec.panel_u0) == 1 else f"{figure}_u0_{panel_u0:g}"
    return stem, rows, svg, (agree, checked, frac), n, panel_u0


def cmd_figures(cfg: RunConfig) -> int:
    fig_conf = cfg.values["figure"]
    fig_id = cfg.overrides.get("figure") or fig_conf["id"]
    ids = [fig_id] if fig_id else list(FIGURES)
    for f in ids:
        if f not in FIGURES:
            raise ConfigError(f"unknown figure {f!r}; choose from {sorted(FIGURES)}")
    gconf = cfg.values["grid"]
    tasks = []
    for f in ids:
        spec = FIGURES[f]
        n = fig_conf["n_platforms"] or spec.n
        panels = [float(fig_conf["u0"])] if fig_conf["u0"] else list(spec.panel_u0)
        for u0 in panels:
            tasks.append((f, u0, n, gconf["resolution"],
                          (gconf["phi_min"], gconf["phi_max"]),
                          (gconf["beta_min"], gconf["beta_max"]),
                          cfg.get("output", "width"), cfg.get("output", "height")))
    jobs = cfg.get("output", "jobs")
    results = _map_ordered(_figure_worker, tasks, jobs)
    out_dir = cfg.get("output", "dir")
    for stem, rows, svg, (agree, checked, frac), n, u0 in results:
        comments = _comments(cfg, "figures") + [
            f"figure {stem} n {n:g} u0 {u0:.17g}",
            f"sign agreement {agree}/{checked} = {frac:.17g} (margin > 0.01)",
        ]
        text = csv_text(comments, ("phi", "beta", "verdict", "margin", "paint",
                                   "solved_sign"), rows)
        _emit(text, out_dir, f"{stem}.csv", echo=False)
        if out_dir:
            with open(os.path.join(out_dir, f"{stem}.svg"), "w", encoding="utf-8",
                      newline="\n") as fh:
                fh.write(svg)
        sys.stdout.write(f"{stem}: {len(rows)} cells, sign agreement "
                         f"{agree}/{checked} ({frac:.4f})\n")
    return 0


def cmd_limits(cfg: RunConfig) -> int:
    params = cfg.market
    pc = perfect_competition_check(params)
    rows = [["large_n", pc.points[-1], pc.achieved_error, pc.tolerance, pc.converged]]
    if params.cross_externalities_zero:
        lo, hi = outside_option_limit_check(params)
        rows.append(["small_u0", lo.points[0], lo.achieved_error, lo.tolerance, lo.converged])
        rows.append(["large_u0", hi.points[0], hi.achieved_error, hi.tolerance, hi.converged])
    text = csv_text(_comments(cfg, "limits"),
                    ("kind", "at", "achieved_error", "tolerance", "converged"), rows)
    _emit(text, cfg.get("output", "dir"), "limits.csv")
    return 0 if all(r[-1] for r in rows) else 3


# --------------------------------------------------------------------------
# entry point
# --------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="platform-eq",
        description="Two-sided platform market equilibria with an outside option")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (("solve", "solve one parameter point"),
                            ("compare", "competitive vs collusive outputs"),
                            ("classify", "sign/direction region classifiers"),
                            ("sweep", "parameter sweeps to CSV"),
                            ("verify", "deviation search and second-order checks"),
                            ("figures", "region grids as CSV + SVG"),
                            ("limits", "asymptotic limit checks")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to INI config")
        p.add_argument("--regime", choices=("cne", "ce", "both"))
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--jobs", type=int)
        if name == "figures":
            p.add_argument("--figure", choices=sorted(FIGURES))
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.regime:
            cfg.values["solve"]["regime"] = args.regime
        if args.out is not None:
            cfg.values["output"]["dir"] = args.out
        if args.seed is not None:
            cfg.values["output"]["seed"] = args.seed
        if args.tol is not None:
            cfg.values["solve"]["tol"] = args.tol
        if args.jobs is not None:
            cfg.values["output"]["jobs"] = args.jobs
        env_jobs = os.environ.get("PLATFORM_EQ_JOBS")
        if env_jobs:
            cfg.values["output"]["jobs"] = int(env_jobs)
        if getattr(args, "figure", None):
            cfg.overrides["figure"] = args.figure
        command = {
            "solve": cmd_solve, "compare": cmd_compare, "classify": cmd_classify,
            "sweep": cmd_sweep, "verify": cmd_verify, "figures": cmd_figures,
            "limits": cmd_limits,
        }[args.command]
        return command(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (SolverError, FixedPointError, ArithmeticError, ValueError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
