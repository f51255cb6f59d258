"""Command-line entry point: ``polystab {baseflow,spectrum,margin,sweep,oracle}``.

Exit codes: 0 success, 1 configuration or specification error, 2 base-flow
failure (no convergence, lost closure branch, no bracket), 3 oracle matching
failed for every seed.
"""

from __future__ import annotations

import argparse
import concurrent.futures as cf
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import asymptotics, oracle
from .baseflow import RESIDUAL_NAMES, solve_base_flow
from .config import Grid, ModelParams, SweepSpec, load_config_file, params_hash
from .errors import (BracketFailure, BranchLoss, DomainError, NoConvergence, ParseError,
                     PolystabError, SingularTransform, ValidationError)
from .lincoeff import build_coefficients
from .report import RunManifest, Stopwatch, emit_profile_svg, write_csv, write_json

log = logging.getLogger("polystab")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_ORACLE = 0, 1, 2, 3
SOLVER_ERRORS = (NoConvergence, BranchLoss, BracketFailure, SingularTransform)
CONFIG_ERRORS = (ParseError, ValidationError, OSError)
BOUNDARY_XTOL = 1e-6
MATCH_LIMIT = 0.10

BASEFLOW_COLUMNS = ("y", "u", "a11", "a12", "a22", "Z", "L", "P")
SPECTRUM_COLUMNS = ("omega", "k", "re_lambda", "im_lambda")
ORACLE_COLUMNS = ("k_seed", "re_lambda_seed", "im_lambda_seed", "re_lambda_found",
                  "im_lambda_found", "residual", "divergence_diag", "n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _grid(args) -> Grid:
    return Grid(args.grid)


def _manifest(args, params, grids, **extra) -> RunManifest:
    return RunManifest(command=args.command, params_hash=params_hash(params),
                       grids=list(grids), tolerances={"tol": args.tol}, extra=extra)


def _header(manifest: RunManifest, *lines) -> list:
    return [f"manifest {manifest.input_hash}", f"polystab {__version__}", *lines]


def _finish(manifest: RunManifest, out: Path, watch: Stopwatch):
    manifest.wall_clock = round(watch.elapsed(), 3)
    manifest.write(out / f"{manifest.command}_manifest.json")


def cmd_baseflow(args) -> int:
    watch = Stopwatch()
    params = load_config_file(args.config)
    grid = _grid(args)
    flow = solve_base_flow(params, grid, tol=args.tol)
    out = _out_dir(args)
    manifest = _manifest(args, params, [grid.n_nodes])
    cols = [flow.y, flow.u_hat, flow.a11_hat, flow.a12_hat, flow.a22_hat,
            flow.Z_hat, flow.L_hat, flow.P_hat]
    rows = zip(*[np.asarray(c, dtype=float) for c in cols])
    comments = _header(manifest, f"C_bar {flow.C_bar!r}",
                       *[f"residual {k} {flow.residuals[k]!r}" for k in RESIDUAL_NAMES])
    path = write_csv(out / "baseflow.csv", BASEFLOW_COLUMNS, rows, comments)
    svg = emit_profile_svg(flow.y, {"u": np.asarray(flow.u_hat, dtype=float)},
                           out / "baseflow_u.svg", manifest.input_hash, ylabel="u")
    svg2 = emit_profile_svg(
        flow.y, {name: np.asarray(getattr(flow, f"{name}_hat"), dtype=float)
                 for name in ("a11", "a12", "a22", "Z", "L")},
        out / "baseflow_fields.svg", manifest.input_hash, ylabel="profile")
    manifest.outputs = [str(path), str(svg), str(svg2)]
    _finish(manifest, out, watch)
    print(f"C_bar = {flow.C_bar!r}; wrote {path}")
    return EXIT_OK


def _oracle_run(params, grid, coeffs, flow, omega, k_range, tol, jobs):
    pencil = oracle.assemble_pencil(coeffs, flow, params, omega, grid.n_nodes)
    family = asymptotics.asymptotic_eigenvalues(coeffs, omega, k_range)
    pairs = oracle.hunt_spectrum(pencil, family, tol=tol, conventions=asymptotics.CONVENTIONS,
                                 jobs=jobs)
    convention, scores = oracle.infer_convention(pairs, family)
    return pencil, family, pairs, convention, scores


def _oracle_rows(family, pairs, convention, n):
    k, seeds, found, dist = oracle.match_seeds(pairs, family, convention)
    by_lam = {p.lam: p for p in pairs if p.status == "accepted"}
    rows = []
    for kk, s, lam in zip(k, seeds, found):
        pair = by_lam.get(lam)
        rows.append((kk, s.real, s.imag, lam.real, lam.imag,
                     pair.residual if pair else math.nan,
                     pair.divergence_diag if pair else math.nan, n))
    return rows, dist


def cmd_spectrum(args, force_oracle=False) -> int:
    watch = Stopwatch()
    params = load_config_file(args.config)
    omega = params.omega if args.omega is None else args.omega
    grid = _grid(args)
    flow = solve_base_flow(params, grid, tol=args.tol)
    coeffs = build_coefficients(flow)
    k_range = range(args.k_lo, args.k_hi + 1)
    family = asymptotics.asymptotic_eigenvalues(coeffs, omega, k_range)
    margin = asymptotics.stability_margin(coeffs)
    out = _out_dir(args)
    manifest = _manifest(args, params, [grid.n_nodes], omega=omega,
                         k_range=[args.k_lo, args.k_hi],
                         oracle=bool(args.with_oracle or force_oracle))
    rows = [(omega, k, lam.real, lam.imag) for k, lam in zip(family.k_list, family.lambdas)]
    spath = write_csv(out / "spectrum.csv", SPECTRUM_COLUMNS, rows,
                      _header(manifest, f"A_phase {family.A_phase!r}"))
    summary = {
        "manifest": manifest.input_hash, "params_hash": manifest.params_hash,
        "omega": omega, "grid": grid.n_nodes, "A_phase": family.A_phase,
        "B_drift": family.B_drift, "spacing": math.pi / family.A_phase,
        "margin": margin.to_dict(),
    }
    manifest.outputs = [str(spath)]
    if getattr(args, "dump_coefficients", False):
        profiles = coeffs.profiles()
        cpath = write_csv(out / "coefficients.csv", ["y", *profiles],
                          zip(coeffs.y, *profiles.values()), _header(manifest))
        manifest.outputs.append(str(cpath))
    code = EXIT_OK
    if args.with_oracle or force_oracle:
        if omega == 0.0:
            print("warning: omega = 0 is outside the oracle's domain; oracle skipped",
                  file=sys.stderr)
            summary["oracle"] = {"skipped": "omega = 0"}
        else:
            pencil, family, pairs, convention, scores = _oracle_run(
                params, grid, coeffs, flow, omega, k_range, args.oracle_tol, args.jobs)
            orows, dist = _oracle_rows(family, pairs, convention, grid.n_nodes)
            opath = write_csv(out / "oracle.csv", ORACLE_COLUMNS, orows,
                              _header(manifest, f"convention {convention}"))
            manifest.outputs.append(str(opath))
            matched = np.isfinite(dist) & (dist < MATCH_LIMIT)
            ks = family.k_list
            summary["oracle"] = {
                "convention": convention, "convention_scores": scores,
                "accepted": sum(p.status == "accepted" for p in pairs),
                "spurious": sum(p.status == "spurious" for p in pairs),
                "no_convergence": sum(p.status == "no-convergence" for p in pairs),
                "matched": int(matched.sum()),
                "C_fit": float(np.nanmax(ks * dist)) if matched.any() else math.nan,
            }
            if force_oracle:
                fine = _refined_pencil(params, grid, omega)
                keep = [p for p in pairs if p.status == "accepted"]
                summary["oracle"]["persistent"] = sum(oracle.persists(p, fine) for p in keep)
            if not matched.any():
                code = EXIT_ORACLE
    jpath = write_json(out / "spectrum.json", summary)
    manifest.outputs.append(str(jpath))
    _finish(manifest, out, watch)
    print(f"A_phase = {family.A_phase!r}; wrote {spath}")
    return code


def _refined_pencil(params, grid, omega):
    fine_grid = Grid(2 * grid.n_nodes - 1)
    flow = solve_base_flow(params, fine_grid)
    coeffs = build_coefficients(flow)
    return oracle.assemble_pencil(coeffs, flow, params, omega, fine_grid.n_nodes)


def cmd_oracle(args) -> int:
    return cmd_spectrum(args, force_oracle=True)


def cmd_margin(args) -> int:
    watch = Stopwatch()
    params = load_config_file(args.config)
    grid = _grid(args)
    flow = solve_base_flow(params, grid, tol=args.tol)
    report = asymptotics.stability_margin(build_coefficients(flow))
    out = _out_dir(args)
    manifest = _manifest(args, params, [grid.n_nodes])
    data = {"manifest": manifest.input_hash, "params_hash": manifest.params_hash,
            "grid": grid.n_nodes, **report.to_dict()}
    path = write_json(out / "margin.json", data)
    manifest.outputs = [str(path)]
    _finish(manifest, out, watch)
    print(f"margin_form_B = {report.margin_form_B!r} ({report.classification})")
    return EXIT_OK


# sweep ------------------------------------------------------------------------

def sweep_point(params: ModelParams, grid_n: int, tol: float) -> dict:
    """Margins and branch data at one parameter set; errors become an ``error`` entry."""
    try:
        flow = solve_base_flow(params, Grid(grid_n), tol=tol)
        coeffs = build_coefficients(flow)
        rep = asymptotics.stability_margin(coeffs)
        B = asymptotics.drift_integral(coeffs, params.omega)
    except (PolystabError, ArithmeticError) as exc:
        return {"error": type(exc).__name__}
    return {"margin_form_A": rep.margin_form_A, "margin_form_B": rep.margin_form_B,
            "classification": rep.classification, "discrepancy": rep.discrepancy,
            "A_phase": rep.A_phase, "B_re": B.real, "B_im": B.imag,
            "re_lambda": B.real / rep.A_phase, "error": ""}


def _columns(outputs) -> list:
    cols = []
    if "margin" in outputs:
        cols += ["margin_form_A", "margin_form_B", "classification", "discrepancy"]
    if "A" in outputs:
        cols.append("A_phase")
    if "B" in outputs:
        cols += ["B_re", "B_im"]
    if "re_lambda" in outputs:
        cols.append("re_lambda")
    return cols


def _bisect_boundary(spec: SweepSpec, lo: float, hi: float, f_lo: float) -> dict:
    """Refine a sign change of margin_form_B on [lo, hi] to BOUNDARY_XTOL."""
    while hi - lo >= BOUNDARY_XTOL:
        mid = 0.5 * (lo + hi)
        res = sweep_point(spec.point(mid), spec.grid, spec.tol)
        if res["error"]:
            return {"lo": lo, "hi": hi, "boundary": math.nan, "error": res["error"]}
        f_mid = res["margin_form_B"]
        if f_mid == 0.0:
            return {"lo": mid, "hi": mid, "boundary": mid, "error": ""}
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return {"lo": lo, "hi": hi, "boundary": 0.5 * (lo + hi), "error": ""}


def _point_task(task):
    spec, value = task
    try:
        params = spec.point(value)
    except ValidationError as exc:
        return {"error": f"ValidationError({exc.field})"}
    return sweep_point(params, spec.grid, spec.tol)


def _bisect_task(task):
    spec, lo, hi, f_lo = task
    return _bisect_boundary(spec, lo, hi, f_lo)


def run_sweep(spec: SweepSpec, jobs: int = 1):
    """Evaluate every axis value (ascending) and refine margin sign changes."""
    values = sorted(spec.values)
    tasks = [(spec, v) for v in values]
    if jobs > 1:
        with cf.ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_point_task, tasks))
    else:
        results = [_point_task(t) for t in tasks]
    brackets = []
    for (a, ra), (b, rb) in zip(zip(values, results), zip(values[1:], results[1:])):
        if ra["error"] or rb["error"]:
            continue
        fa, fb = ra["margin_form_B"], rb["margin_form_B"]
        if (fa > 0) != (fb > 0):
            brackets.append((spec, a, b, fa))
    if jobs > 1 and len(brackets) > 1:
        with cf.ProcessPoolExecutor(max_workers=jobs) as pool:
            boundaries = list(pool.map(_bisect_task, brackets))
    else:
        boundaries = [_bisect_task(t) for t in brackets]
    return values, results, boundaries


def cmd_sweep(args) -> int:
    watch = Stopwatch()
    try:
        spec = SweepSpec.from_text(Path(args.config).read_text(encoding="utf-8"))
    except CONFIG_ERRORS as exc:
        raise ParseError(str(exc)) from exc
    if args.grid_given:
        spec = SweepSpec(axis=spec.axis, values=spec.values, fixed=spec.fixed,
                         outputs=spec.outputs, grid=args.grid, tol=spec.tol)
    values, results, boundaries = run_sweep(spec, jobs=args.jobs)
    out = _out_dir(args)
    manifest = RunManifest(command="sweep", params_hash=params_hash(spec.fixed),
                           grids=[spec.grid], tolerances={"tol": spec.tol},
                           extra={"axis": spec.axis, "values": list(values),
                                  "outputs": list(spec.outputs)})
    cols = _columns(spec.outputs)
    rows = [[v, *[r.get(c, math.nan) for c in cols], r["error"]]
            for v, r in zip(values, results)]
    path = write_csv(out / "sweep.csv", [spec.axis, *cols, "error"], rows,
                     _header(manifest, f"axis {spec.axis}"))
    bpath = write_csv(out / "sweep_boundaries.csv", ["lo", "hi", "boundary", "error"],
                      [[b["lo"], b["hi"], b["boundary"], b["error"]] for b in boundaries],
                      _header(manifest, f"axis {spec.axis}", "sign changes of margin_form_B"))
    manifest.outputs = [str(path), str(bpath)]
    good = [(v, r["margin_form_B"]) for v, r in zip(values, results) if not r["error"]]
    if good and "margin" in spec.outputs:
        xs, ys = zip(*good)
        svg = emit_profile_svg(np.array(xs), {"margin": np.array(ys)}, out / "sweep_margin.svg",
                               manifest.input_hash, xlabel=spec.axis, ylabel="stability margin")
        manifest.outputs.append(str(svg))
    _finish(manifest, out, watch)
    failed = sum(1 for r in results if r["error"])
    print(f"{len(values)} points ({failed} failed), {len(boundaries)} boundaries; wrote {path}")
    return EXIT_OK


# entry point ------------------------------------------------------------------

class _GridAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        setattr(namespace, self.dest, values)
        namespace.grid_given = True


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polystab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"polystab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_help="JSON parameter file"):
        p.add_argument("--config", required=True, metavar="PATH", help=config_help)
        p.add_argument("--grid", type=int, default=401, metavar="N", action=_GridAction,
                       help="odd number of grid nodes (default 401)")
        p.add_argument("--out", default=".", metavar="DIR", help="output directory")
        p.add_argument("--tol", type=float, default=1e-11, metavar="F",
                       help="base-flow tolerance (default 1e-11)")
        p.add_argument("--jobs", type=int, default=1, metavar="N", help="worker count")
        p.add_argument("-v", "--verbose", action="store_true")
        p.set_defaults(grid_given=False)

    def spectral(p):
        p.add_argument("--omega", type=float, default=None, metavar="F",
                       help="streamwise wavenumber (default: value in the config)")
        p.add_argument("--k-lo", type=int, default=10, dest="k_lo")
        p.add_argument("--k-hi", type=int, default=30, dest="k_hi")
        p.add_argument("--oracle-tol", type=float, default=1e-7, dest="oracle_tol",
                       help="eigenpair residual tolerance")

    p = sub.add_parser("baseflow", help="solve the stationary profiles")
    common(p)
    p.set_defaults(func=cmd_baseflow)

    p = sub.add_parser("spectrum", help="asymptotic eigenvalue branch")
    common(p)
    spectral(p)
    p.add_argument("--with-oracle", action="store_true", dest="with_oracle",
                   help="also hunt eigenvalues of the discretised problem")
    p.add_argument("--dump-coefficients", action="store_true", dest="dump_coefficients",
                   help="write every linearised coefficient profile to coefficients.csv")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("oracle", help="branch plus direct eigenvalue hunt and refinement check")
    common(p)
    spectral(p)
    p.set_defaults(func=cmd_oracle, with_oracle=True)

    p = sub.add_parser("margin", help="stability margin in both forms")
    common(p)
    p.set_defaults(func=cmd_margin)

    p = sub.add_parser("sweep", help="one-parameter sweep with boundary bisection")
    common(p, config_help="JSON sweep specification")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command in ("spectrum", "oracle") and args.k_lo > args.k_hi:
        print("error: --k-lo must not exceed --k-hi", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except CONFIG_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SOLVER_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except DomainError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
