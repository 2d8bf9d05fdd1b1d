"""Command-line front end.

Subcommands: ``bounds``, ``gaussian``, ``check-povm``, ``sweep``,
``fixtures``.  Reports go to stdout (byte-deterministic for identical
inputs and flags), diagnostics and timings to stderr.

Exit codes: 0 success; 1 unreadable or invalid input file; 2 semantic
rejection (infeasible model, unphysical covariance matrix, locally biased
POVM); 3 solver failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import bounds as bounds_mod
from . import gaussian as gaussian_mod
from . import holevo, linalg, povm as povm_mod, sdp
from .exceptions import InfeasibleModel, ModelError, NotLocallyUnbiased, VerificationFailed
from .model import FIXTURE_NAMES, fixture, load_model, model_to_dict, save_model, validate
from .sld import compute_slds, infeasible_columns, information

EXIT_OK = 0
EXIT_FILE = 1
EXIT_REJECTED = 2
EXIT_SOLVER = 3

_FIXTURE_HELP = {
    "qubit_bloch": "params rx,ry,rz with |r|<1; p=q=3",
    "qubit_xy_at_z": "params z with |z|<1; transverse-derivative qubit, p=q=2",
    "pure_qubit_angles": "params theta,phi (away from poles); rank-1 state, p=q=2, QFIM weight",
    "classical_diagonal": "params p1..p_{d-1} (>0, sum<1); commuting diagonal model",
    "random_full_rank": "params seed[,d[,p[,q]]]; seeded random full-rank model",
}


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def _print_json(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, indent=1) + "\n")


def _diag(msg: str) -> None:
    sys.stderr.write(msg + "\n")


def _tolerances(args) -> dict:
    return {"sdp_gap": args.tol, "max_iter": args.max_iter, "rank_tol": args.rank_tol}


def _bound_pipeline(model, args):
    """validate -> SLDs -> information -> feasibility -> closed forms -> SDP.

    Returns (report dict, exit code); diagnostics on stderr.
    """
    t0 = time.perf_counter()
    validate(model)
    slds = compute_slds(model, rank_tol=args.rank_tol)
    info = information(model, slds, rank_tol=args.rank_tol)
    bad = infeasible_columns(info, model.dbeta)
    if bad:
        raise InfeasibleModel(
            f"beta component(s) {bad} are not estimable (dbeta column outside range of J)",
            bad_columns=bad,
        )
    closed = bounds_mod.sandwich(model, slds, info)
    t1 = time.perf_counter()
    problem = holevo.build_problem(model, slds, rank_tol=args.rank_tol)
    sol = holevo.solve(problem, tol=args.tol, max_iter=args.max_iter)
    t2 = time.perf_counter()
    report = {
        "model_label": model.label,
        "feasible": True,
        "c_gs": closed.c_gs,
        "c_h": sol.c_h,
        "c_d": closed.c_d,
        "two_c_gs": 2 * closed.c_gs,
        "duality_gap": sol.duality_gap,
        "solver_status": sol.status,
        "iterations": sol.iterations,
        "tolerances": _tolerances(args),
    }
    timings = {"closed_forms_s": t1 - t0, "sdp_s": t2 - t1}
    if sol.status != sdp.OPTIMAL:
        return report, sol, timings, EXIT_SOLVER
    verification = holevo.verify_solution(model, sol, slds)
    report["verified"] = True
    report["unbias_residual"] = verification.unbias_residual
    if getattr(args, "include_x_opt", False):
        basis = linalg.hermitian_basis(model.dim)
        report["x_opt_coefficients"] = [
            [float(c) for c in linalg.basis_coefficients(xs, basis)] for xs in sol.x_opt
        ]
    return report, sol, timings, EXIT_OK


def _emit_bound_report(report: dict, timings: dict, args) -> None:
    if getattr(args, "timings", False):
        report = dict(report)
        report["timings"] = timings
    else:
        _diag("timings: " + ", ".join(f"{k}={v:.3f}" for k, v in timings.items()))
    if args.format == "json":
        _print_json(report)
        return
    lines = [f"model: {report['model_label'] or '(unlabeled)'}"]
    lines.append(
        "c_gs <= c_h <= c_d <= 2*c_gs : "
        f"{_fmt(report['c_gs'])} <= {_fmt(report['c_h'])} <= "
        f"{_fmt(report['c_d'])} <= {_fmt(report['two_c_gs'])}"
    )
    lines.append(f"solver: {report['solver_status']} after {report['iterations']} iterations, "
                 f"relative gap {_fmt(report['duality_gap'])}")
    if "unbias_residual" in report:
        lines.append(f"verification: unbiasedness residual {_fmt(report['unbias_residual'])}")
    sys.stdout.write("\n".join(lines) + "\n")


def cmd_bounds(args) -> int:
    try:
        model = load_model(args.model)
    except (OSError, ValueError) as exc:
        _diag(f"error: {exc}")
        return EXIT_FILE
    try:
        report, sol, timings, code = _bound_pipeline(model, args)
    except InfeasibleModel as exc:
        _diag(f"infeasible model: {exc}")
        return EXIT_REJECTED
    except VerificationFailed as exc:
        _diag(f"verification failed: {exc}")
        return EXIT_SOLVER
    except ModelError as exc:
        _diag(f"invalid model: {exc}")
        return EXIT_FILE
    if code == EXIT_SOLVER:
        _diag(f"solver failed: status {sol.status} after {sol.iterations} iterations "
              f"(gap {sol.duality_gap:.3e}); best iterate reported")
    _emit_bound_report(report, timings, args)
    return code


def cmd_gaussian(args) -> int:
    try:
        model = gaussian_mod.load_gaussian_model(args.model)
    except (OSError, ValueError) as exc:
        _diag(f"error: {exc}")
        return EXIT_FILE
    try:
        physical = gaussian_mod.validate_cm(model.cm, model.modes)
    except ValueError as exc:
        _diag(f"error: {exc}")
        return EXIT_FILE
    if not physical:
        _diag("unphysical covariance matrix: sigma + i*Omega has negative eigenvalues")
        return EXIT_REJECTED
    if args.measurement_cm:
        try:
            meas = gaussian_mod.load_measurement(args.measurement_cm, model.modes)
        except (OSError, ValueError) as exc:
            _diag(f"error: {exc}")
            return EXIT_FILE
        if not gaussian_mod.validate_cm(meas.cm_m, model.modes):
            _diag("unphysical measurement covariance matrix")
            return EXIT_REJECTED
    else:
        meas = gaussian_mod.GaussianMeasurement(cm_m=np.asarray(model.cm, dtype=float))

    qfim = gaussian_mod.gaussian_qfim(model)
    fim = gaussian_mod.gaussian_fim(model, meas)
    f_half, _, deviation = gaussian_mod.half_qfim_check(model)
    dbeta = model.dbeta_or_default()
    weight = model.weight_or_default()
    chained = float(np.trace(weight @ dbeta.T @ linalg.pseudoinverse(f_half, args.rank_tol) @ dbeta))
    two_c_gs = 2.0 * float(np.trace(weight @ dbeta.T @ linalg.pseudoinverse(qfim, args.rank_tol) @ dbeta))
    report = {
        "model_label": model.label,
        "modes": model.modes,
        "qfim": [[float(x) for x in row] for row in qfim],
        "fim": [[float(x) for x in row] for row in fim],
        "half_qfim_deviation": deviation,
        "chained_scalar_bound": chained,
        "two_c_gs": two_c_gs,
        "tolerances": {"rank_tol": args.rank_tol},
    }
    if args.format == "json":
        _print_json(report)
        return EXIT_OK
    lines = [f"model: {model.label or '(unlabeled)'} ({model.modes} mode(s), p={model.n_params})"]
    lines.append("qfim:")
    lines.extend("  " + " ".join(_fmt(x) for x in row) for row in qfim)
    lines.append("fim(sigma_m):")
    lines.extend("  " + " ".join(_fmt(x) for x in row) for row in fim)
    lines.append(f"half-qfim deviation max|F(s,s) - J/2| = {_fmt(deviation)}")
    lines.append(f"chained scalar bound tr[W dbeta^T F+ dbeta] = {_fmt(chained)}")
    lines.append(f"two_c_gs                                  = {_fmt(two_c_gs)}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_check_povm(args) -> int:
    try:
        povm = povm_mod.load_povm(args.povm)
        model = load_model(args.model)
    except (OSError, ValueError) as exc:
        _diag(f"error: {exc}")
        return EXIT_FILE
    q = model.n_targets
    beta = np.zeros(q)
    if args.beta:
        try:
            beta = np.array([float(x) for x in args.beta.split(",")])
        except ValueError:
            _diag(f"error: --beta expects comma-separated floats, got {args.beta!r}")
            return EXIT_FILE
        if beta.shape != (q,):
            _diag(f"error: --beta needs {q} entries, got {beta.shape[0]}")
            return EXIT_FILE

    report_data = povm_mod.measurement_report(povm, model, beta)
    if report_data.unbias_residual > povm_mod.UNBIAS_TOL:
        _diag(f"not locally unbiased: residual {report_data.unbias_residual:.6e}")
        return EXIT_REJECTED
    dv_min, dz_min = povm_mod.matrix_crb_check(povm, model, beta)
    tr_w_sigma = float(np.trace(model.weight @ report_data.sigma))
    try:
        breport, sol, timings, code = _bound_pipeline(model, args)
    except InfeasibleModel as exc:
        _diag(f"infeasible model: {exc}")
        return EXIT_REJECTED
    if code != EXIT_OK:
        _diag(f"solver failed while computing bound comparison: {sol.status}")
        return EXIT_SOLVER
    report = {
        "model_label": model.label,
        "unbias_residual": report_data.unbias_residual,
        "sigma": [[float(x) for x in row] for row in report_data.sigma],
        "min_eig_sigma_minus_v": dv_min,
        "min_eig_sigma_minus_z": dz_min,
        "tr_w_sigma": tr_w_sigma,
        "c_gs": breport["c_gs"],
        "c_h": breport["c_h"],
        "c_d": breport["c_d"],
        "tolerances": _tolerances(args),
    }
    if args.format == "json":
        _print_json(report)
        return EXIT_OK
    lines = [f"model: {model.label or '(unlabeled)'}"]
    lines.append(f"unbiasedness residual: {_fmt(report_data.unbias_residual)}")
    lines.append("sigma:")
    lines.extend("  " + " ".join(_fmt(x) for x in row) for row in report_data.sigma)
    lines.append(f"min eig (sigma - V): {_fmt(dv_min)}")
    lines.append(f"min eig (sigma - Z): {_fmt(dz_min)}")
    lines.append(
        f"tr W sigma = {_fmt(tr_w_sigma)} vs c_gs = {_fmt(report['c_gs'])}, "
        f"c_h = {_fmt(report['c_h'])}, c_d = {_fmt(report['c_d'])}"
    )
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def _parse_values(spec: str) -> list[float]:
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError("grid must be 'start:stop:count' or comma-separated values")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        return [float(x) for x in np.linspace(start, stop, count)]
    return [float(x) for x in spec.split(",")]


def cmd_sweep(args) -> int:
    if args.fixture not in FIXTURE_NAMES:
        _diag(f"error: unknown fixture '{args.fixture}'; known: {', '.join(FIXTURE_NAMES)}")
        return EXIT_FILE
    try:
        values = _parse_values(args.values)
    except ValueError as exc:
        _diag(f"error: {exc}")
        return EXIT_FILE
    fixed = [float(x) for x in args.fixed.split(",")] if args.fixed else []
    rows = []
    for value in values:
        try:
            model = fixture(args.fixture, [value] + fixed)
            report, sol, _, code = _bound_pipeline(model, args)
        except (ValueError, ModelError) as exc:
            _diag(f"error at param {value!r}: {exc}")
            return EXIT_REJECTED if isinstance(exc, InfeasibleModel) else EXIT_FILE
        if code != EXIT_OK:
            _diag(f"solver failed at param {value!r}: {sol.status}")
            return EXIT_SOLVER
        rows.append((value, report["c_gs"], report["c_h"], report["c_d"],
                     report["two_c_gs"], report["duality_gap"]))
    sys.stdout.write("param,c_gs,c_h,c_d,two_c_gs,gap\n")
    for row in rows:
        sys.stdout.write(",".join(_fmt(x) for x in row) + "\n")
    return EXIT_OK


def cmd_fixtures(args) -> int:
    if not args.emit:
        for name in FIXTURE_NAMES:
            sys.stdout.write(f"{name}: {_FIXTURE_HELP[name]}\n")
        return EXIT_OK
    params: list[float] = []
    if args.seed is not None:
        params.append(float(args.seed))
    if args.params:
        params.extend(float(x) for x in args.params.split(","))
    try:
        model = fixture(args.emit, params)
    except ValueError as exc:
        _diag(f"error: {exc}")
        return EXIT_FILE
    if args.out:
        save_model(model, args.out)
        _diag(f"wrote {args.out}")
    else:
        _print_json(model_to_dict(model))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcrb",
        description="Precision bounds for multiparameter quantum estimation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("text", "json")):
        p.add_argument("--tol", type=float, default=1e-8, help="SDP relative-gap tolerance")
        p.add_argument("--max-iter", type=int, default=200, help="SDP iteration cap")
        p.add_argument("--rank-tol", type=float, default=1e-10, help="relative spectral rank cutoff")
        if formats:
            p.add_argument("--format", choices=formats, default=formats[0])

    p = sub.add_parser("bounds", help="compute c_gs, c_h, c_d for a model file")
    p.add_argument("model")
    common(p)
    p.add_argument("--include-x-opt", action="store_true",
                   help="include optimal influence-operator coefficients in the report")
    p.add_argument("--timings", action="store_true",
                   help="embed wall-clock timings in the report (breaks byte determinism)")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("gaussian", help="information matrices of a Gaussian shift model")
    p.add_argument("model")
    p.add_argument("--measurement-cm", help="measurement CM file; default sigma_m = sigma")
    common(p)
    p.set_defaults(func=cmd_gaussian)

    p = sub.add_parser("check-povm", help="audit a POVM against a model")
    p.add_argument("povm")
    p.add_argument("model")
    p.add_argument("--beta", help="comma-separated target values at the true point (default 0)")
    common(p)
    p.set_defaults(func=cmd_check_povm)

    p = sub.add_parser("sweep", help="sweep a fixture parameter, CSV to stdout")
    p.add_argument("fixture")
    p.add_argument("values", help="comma-separated values or start:stop:count")
    p.add_argument("--fixed", help="comma-separated trailing fixture params")
    common(p, formats=())
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fixtures", help="list built-in fixtures or emit one as a model file")
    p.add_argument("--emit", help="fixture name to materialize")
    p.add_argument("--params", help="comma-separated fixture parameters")
    p.add_argument("--seed", type=int, help="seed (prepended to params) for randomized fixtures")
    p.add_argument("--out", help="output model file path")
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NotLocallyUnbiased as exc:
        _diag(f"not locally unbiased: {exc}")
        return EXIT_REJECTED
    except ModelError as exc:
        _diag(f"error: {exc}")
        return EXIT_REJECTED
    except OSError as exc:
        _diag(f"error: {exc}")
        return EXIT_FILE


if __name__ == "__main__":
    sys.exit(main())
