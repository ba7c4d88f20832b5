"""Command-line interface: curvature checks, energies, variation and flow
diagnostics, spectral indices, and the acceptance suite.

Reports are JSON (stable key order, timings kept in a separate field so
result sections are reproducible byte-for-byte); tables can additionally
be written as CSV and decay traces as SVG polyline plots.  Exit codes:
0 success, 1 verdict-contract failure, 2 input error.
"""

import argparse
import json
import os
import sys

import numpy as np

from .acceptance import (DEFAULT_TOLERANCES, first_variation_suite,
                         run_acceptance, second_variation_suite)
from .charts import build_quadrature, chart_from_config, sphere_chart
from .errors import PhivarError, ConfigError
from .flows import homotopy_decay
from .maps import map_from_config, energy, p_energy, phi_energy, tension_sup_norm
from .report import Report, polyline_svg, rows_to_csv
from .spectral import (load_spectrum, p_index_nullity, phi_index_nullity,
                       theorem91_table)
from .ssu import check_phi_ssu, check_p_ssu, phi_form_batch
from .variations import (fd_first_variation, fd_second_variation,
                         first_variation, second_variation)


def _load_json(path):
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _parse_grid(text):
    if text is None:
        return None
    try:
        return [int(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --grid value {text!r}") from exc


def _parse_dims(text):
    try:
        if ".." in text:
            lo, hi = text.split("..")
            return list(range(int(lo), int(hi) + 1))
        return [int(tok) for tok in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad --dims value {text!r}") from exc


def _extract_tolerances(argv):
    """Pull --tol.<name> <value> (or --tol.<name>=<value>) pairs out of
    argv; returns (remaining argv, tolerance dict)."""
    rest, tols = [], {}
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg.startswith("--tol."):
            key, eq, val = arg[6:].partition("=")
            if not eq:
                if i + 1 >= len(argv):
                    raise ConfigError(f"missing value for --tol.{key}")
                val = argv[i + 1]
                i += 1
            if key not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance {key!r}; choose from "
                                  f"{sorted(DEFAULT_TOLERANCES)}")
            try:
                tols[key] = float(val)
            except ValueError as exc:
                raise ConfigError(f"bad tolerance value {val!r}") from exc
        else:
            rest.append(arg)
        i += 1
    return rest, tols


def _verdict_dict(v):
    return {
        "is_ssu": v.is_ssu,
        "worst_value": v.worst_value,
        "witness_point": list(np.asarray(v.witness_point).ravel()),
        "witness_direction": list(np.asarray(v.witness_direction).ravel()),
        "samples_tested": v.samples_tested,
        "method": v.method,
        "marginal": v.marginal,
        "converged": v.converged,
    }


def _resolve_grid(chart, grid):
    if grid is None:
        return [8] * (chart.param_dim - 1) + [16] if chart.param_dim > 1 else [160]
    if len(grid) == 1 and chart.param_dim > 1:
        return grid * chart.param_dim
    return grid


def _emit(report, args, exit_code=0):
    out = getattr(args, "out", None)
    if out:
        report.write(path=out)
    else:
        report.write(stream=sys.stdout)
    return exit_code


def _target_from_name(name):
    if name.startswith("sphere"):
        return {"kind": "sphere", "dim": int(name[len("sphere"):])}
    raise ConfigError(f"unknown target shorthand {name!r}")


# ---------------------------------------------------------------------------
# subcommands


def _cmd_ssu(args, tols):
    if args.action == "check":
        if not args.chart:
            raise ConfigError("ssu check needs --chart")
        chart = chart_from_config(_load_json(args.chart))
        grid = _resolve_grid(chart, _parse_grid(args.grid))
        quad = build_quadrature(chart, grid)
        verdict = check_phi_ssu(chart, quad)
        results = {"chart": _load_json(args.chart), "grid": grid,
                   "phi": _verdict_dict(verdict)}
        if args.p is not None:
            # search the quartic at the most marginal sampled points
            frames = quad.frames
            top = np.linalg.eigvalsh(phi_form_batch(frames.sff))[:, -1]
            order = np.argsort(top)[::-1][:min(50, len(quad))]
            worst = None
            for i in order:
                sv = check_p_ssu(frames.point(int(i)), args.p,
                                 seed=args.seed or 0)
                if worst is None or sv.worst_value > worst.worst_value:
                    worst = sv
            results["p"] = dict(_verdict_dict(worst), p=args.p,
                                points_searched=int(order.size))
        return _emit(Report("ssu-check", inputs=vars(args) | {"tol": tols},
                            results=results), args)

    if args.action == "sweep":
        if args.kind != "sphere":
            raise ConfigError("ssu sweep supports --kind sphere")
        dims = _parse_dims(args.dims or "2..8")
        rows = []
        for n in dims:
            chart = sphere_chart(n)
            quad = build_quadrature(chart, [2] * (n - 1) + [4])
            v = check_phi_ssu(chart, quad)
            rows.append({"dim": n, "verdict": v.is_ssu,
                         "worst_value": v.worst_value})
        if args.csv:
            rows_to_csv(rows, path=args.csv)
        return _emit(Report("ssu-sweep", inputs=vars(args) | {"tol": tols},
                            results={"rows": rows}), args)
    raise ConfigError("ssu action must be 'check' or 'sweep'")


def _cmd_energy(args, tols):
    if args.action != "eval":
        raise ConfigError("energy action must be 'eval'")
    if not args.map:
        raise ConfigError("energy eval needs --map")
    mp = map_from_config(_load_json(args.map))
    p = args.p if args.p is not None else 4.0
    results = {
        "E": energy(mp),
        "E_phi": phi_energy(mp),
        "E_p": p_energy(mp, p),
        "p": p,
        "tension_sup": tension_sup_norm(mp),
    }
    return _emit(Report("energy-eval", inputs=vars(args) | {"tol": tols},
                        results=results), args)


def _cmd_variation(args, tols):
    if args.action != "check":
        raise ConfigError("variation action must be 'check'")
    tol = tols.get("fd_match", DEFAULT_TOLERANCES["fd_match"])
    rows = []
    ok = True
    for name, mp, var in first_variation_suite():
        an, fd = first_variation(mp, var), fd_first_variation(mp, var)
        rel = abs(an - fd) / max(abs(an), abs(fd), 1e-12)
        ok = ok and rel < tol
        rows.append({"case": name, "order": 1, "analytic": an, "fd": fd,
                     "abs_err": abs(an - fd), "rel_err": rel})
    for name, mp, var in second_variation_suite():
        an, fd = second_variation(mp, var), fd_second_variation(mp, var)
        rel = abs(an - fd) / max(abs(an), abs(fd), 1e-12)
        ok = ok and rel < 1e-3
        rows.append({"case": name, "order": 2, "analytic": an, "fd": fd,
                     "abs_err": abs(an - fd), "rel_err": rel})
    if args.csv:
        rows_to_csv(rows, path=args.csv)
    report = Report("variation-check", inputs=vars(args) | {"tol": tols},
                    results={"rows": rows, "all_within_tolerance": ok})
    return _emit(report, args, exit_code=0 if ok else 1)


def _cmd_flow(args, tols):
    if args.action != "decay":
        raise ConfigError("flow action must be 'decay'")
    if not args.map:
        raise ConfigError("flow decay needs --map")
    cfg = _load_json(args.map)
    if args.target and "target" not in cfg and cfg.get("kind") != "identity":
        cfg["target"] = _target_from_name(args.target)
    mp = map_from_config(cfg)
    trace = homotopy_decay(mp, max_iters=args.iters,
                           seed=args.seed or 0)
    rows = [{"iter": 0, "energy": trace.energies[0], "ratio": "",
             "ell": "", "sign": "", "zeta": ""}]
    for k, (E, rho, (ell, sign, zeta)) in enumerate(
            zip(trace.energies[1:], trace.rho_estimates, trace.steps), 1):
        rows.append({"iter": k, "energy": E, "ratio": rho, "ell": ell,
                     "sign": sign, "zeta": zeta})
    if args.csv:
        rows_to_csv(rows, path=args.csv)
    if args.svg:
        logE = [float(np.log10(max(E, 1e-300))) for E in trace.energies]
        polyline_svg(logE, path=args.svg, title="log10 energy per iteration")
    results = {
        "initial_energy": trace.energies[0],
        "final_energy": trace.energies[-1],
        "iterations": len(trace.energies) - 1,
        "trailing_geometric_ratio": trace.trailing_geometric_mean,
        "kappa": trace.kappa,
        "xi": trace.xi,
    }
    return _emit(Report("flow-decay", inputs=vars(args) | {"tol": tols},
                        results=results), args)


def _cmd_index(args, tols):
    if args.action == "table":
        dims = _parse_dims(args.dims or "2..8")
        rows = theorem91_table(dims, seed=args.seed or 0)
        csv_path = args.csv
        out_path = args.out
        if out_path and out_path.endswith(".csv") and not csv_path:
            csv_path, out_path = out_path, None
        if csv_path:
            rows_to_csv(rows, path=csv_path)
        report = Report("table-9-1", inputs=vars(args) | {"tol": tols},
                        results={"rows": rows})
        if out_path:
            report.write(path=out_path)
        else:
            report.write(stream=sys.stdout)
        return 0 if all(r["consistent"] for r in rows) else 1

    if not args.spectrum:
        raise ConfigError("index needs --spectrum (or the 'table' action)")
    spec = load_spectrum(args.spectrum)
    if args.p is not None:
        index, nullity = p_index_nullity(spec, args.p)
        mode = {"p": args.p}
    else:
        index, nullity = phi_index_nullity(spec)
        mode = {"phi": True}
    results = {"index": index, "nullity": nullity, **mode}
    print(f"(index, nullity) = ({index}, {nullity})")
    return _emit(Report("index", inputs=vars(args) | {"tol": tols},
                        results=results), args)


def _cmd_acceptance(args, tols):
    try:
        report, all_passed = run_acceptance(only=args.only, tolerances=tols,
                                            log=print)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.out:
        report.write(path=args.out)
    return 0 if all_passed else 1


# ---------------------------------------------------------------------------
# parser


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="phivar",
        description="Quartic-energy stability toolkit for embedded "
                    "manifolds: curvature tests, variation formulas, "
                    "decay flows, and spectral indices.")
    sub = parser.add_subparsers(dest="command")

    def common(p, action_choices=None, action_default=None):
        if action_choices:
            p.add_argument("action", nargs="?", default=action_default,
                           choices=action_choices)
        p.add_argument("--chart", help="chart config JSON path")
        p.add_argument("--map", help="map config JSON path")
        p.add_argument("--spectrum", help="spectrum JSON path")
        p.add_argument("--grid", help="per-axis resolutions, e.g. 8,8,16")
        p.add_argument("--dims", help="dimension range, e.g. 2..8")
        p.add_argument("--kind", default="sphere")
        p.add_argument("--p", type=float, default=None)
        p.add_argument("--phi", action="store_true")
        p.add_argument("--iters", type=int, default=100)
        p.add_argument("--target", help="target shorthand, e.g. sphere5")
        p.add_argument("--suite", default="default")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--only", help="run a single acceptance criterion")
        p.add_argument("--out", help="report JSON output path")
        p.add_argument("--csv", help="CSV side-file output path")
        p.add_argument("--svg", help="SVG side-file output path")

    common(sub.add_parser("ssu", help="stability-form verdicts"),
           ["check", "sweep"], "check")
    common(sub.add_parser("energy", help="energy and tension evaluation"),
           ["eval"], "eval")
    common(sub.add_parser("variation", help="variation-formula FD checks"),
           ["check"], "check")
    common(sub.add_parser("flow", help="energy-decay flow iteration"),
           ["decay"], "decay")
    common(sub.add_parser("index", help="spectral index and nullity"),
           ["table"], None)
    common(sub.add_parser("acceptance", help="run the acceptance suite"))
    return parser


COMMANDS = {
    "ssu": _cmd_ssu,
    "energy": _cmd_energy,
    "variation": _cmd_variation,
    "flow": _cmd_flow,
    "index": _cmd_index,
    "acceptance": _cmd_acceptance,
}


def run(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        argv, tols = _extract_tolerances(argv)
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 2
        if args.threads:
            for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                        "MKL_NUM_THREADS"):
                os.environ[var] = str(args.threads)
        return COMMANDS[args.command](args, tols)
    except PhivarError as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error (FileIO): {exc}", file=sys.stderr)
        return 2


def main():
    raise SystemExit(run())


if __name__ == "__main__":
    main()
