"""Command-line front end.

    circlefol solve    --model NAME [--param k=v ...] [--ntheta N --order L --delta d --tol t] --out sol.json
    circlefol continue --model NAME [--param k=v ...] --sweep param:start:end:step --outdir DIR
    circlefol verify   --solution sol.json [--model NAME --param k=v ...]
    circlefol cohom    --l l.json --a a.json --eta eta.json [--tol t]
    circlefol export   --solution sol.json --grid G --smax S [--ns K] --format csv --out leaves.csv

Exit status: 0 success, 1 solver error or failed verification, 2 usage error.
"""
import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .aposteriori import Thresholds, condition_report, verify_aposteriori
from .bootstrap import BootstrapConfig, continuation, initial_guess
from .cohomology import cohomology_residual, solve_cohomological
from .errors import CirclefolError
from .fourier import CircleMap
from .io import load_periodic, load_solution, save_solution, spectrum_to_list
from .models import MODEL_REGISTRY, make_model
from .newton import SolverConfig, solve


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _param(text):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected k=v, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter {key!r} is not a decimal number: {value!r}") from None


def _sweep(text):
    parts = text.split(":")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("expected param:start:end:step")
    try:
        return parts[0], float(parts[1]), float(parts[2]), float(parts[3])
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric sweep bounds in {text!r}") from None


def _model_args(p, required=True):
    p.add_argument("--model", required=required, help=f"one of {', '.join(sorted(MODEL_REGISTRY))}")
    p.add_argument("--param", type=_param, action="append", default=[], metavar="K=V")


def _solver_args(p):
    p.add_argument("--ntheta", type=int, default=64, help="Fourier modes N")
    p.add_argument("--order", type=int, default=10, help="Taylor order L")
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iters", type=int, default=20)
    p.add_argument("--schedule", choices=["fixed", "nash_moser", "none"], default="fixed")
    p.add_argument("--residual-threshold", type=float, default=None,
                   help="verification threshold on ||e||; defaults to 100*tol")


def build_parser():
    parser = _Parser(prog="circlefol", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("solve", help="bootstrap and solve the invariance equation")
    _model_args(p)
    _solver_args(p)
    p.add_argument("--warm", help="solution file to start from instead of bootstrapping")
    p.add_argument("--out", required=True)

    p = sub.add_parser("continue", help="parameter continuation")
    _model_args(p)
    _solver_args(p)
    p.add_argument("--sweep", type=_sweep, required=True, metavar="PARAM:START:END:STEP")
    p.add_argument("--outdir", required=True)

    p = sub.add_parser("verify", help="condition report for a stored solution")
    _model_args(p, required=False)
    p.add_argument("--solution", required=True)
    p.add_argument("--residual-threshold", type=float, default=1e-8)
    p.add_argument("--out", help="also write the report as JSON here")

    p = sub.add_parser("cohom", help="solve phi = l phi(a) + eta")
    p.add_argument("--l", required=True, dest="l_file")
    p.add_argument("--a", required=True, dest="a_file", help="coefficients of the periodic part of a")
    p.add_argument("--eta", required=True, dest="eta_file")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--method", choices=["doubling", "orbit"], default="doubling")

    p = sub.add_parser("export", help="sample leaves W(theta, s) to CSV")
    p.add_argument("--solution", required=True)
    p.add_argument("--grid", type=int, default=256)
    p.add_argument("--smax", type=float, required=True)
    p.add_argument("--ns", type=int, default=11, help="number of s samples in [-smax, smax]")
    p.add_argument("--format", choices=["csv"], default="csv")
    p.add_argument("--out", required=True)
    return parser


def _model(args, fallback=None):
    name = args.model or (fallback or {}).get("name")
    if name is None:
        raise UsageError("--model is required")
    params = dict((fallback or {}).get("params", {})) if not args.model or args.model == (fallback or {}).get("name") else {}
    params.update(dict(args.param))
    try:
        return make_model(name, **params)
    except KeyError as err:
        raise UsageError(str(err.args[0])) from None


def _solver_config(args):
    return SolverConfig(tol=args.tol, max_iters=args.max_iters, schedule=args.schedule)


def _thresholds(args):
    t = args.residual_threshold if args.residual_threshold is not None else max(100 * args.tol, 1e-14)
    return Thresholds(residual=t)


def _summary(report, verdict, extra=None):
    out = {"passed": verdict.passed, "flags": verdict.flags}
    out.update(extra or {})
    out["report"] = report.to_dict()
    return out


def cmd_solve(args):
    f = _model(args)
    cfg = _solver_config(args)
    if args.warm:
        _, u0 = load_solution(args.warm)
    else:
        u0 = initial_guess(f, BootstrapConfig(n_modes=args.ntheta, order=args.order, delta=args.delta))
    u, history = solve(f, u0, cfg)
    report = condition_report(f, u, _thresholds(args))
    verdict = verify_aposteriori(report, _thresholds(args))
    save_solution(args.out, f, u, report, history)
    print(json.dumps(_summary(report, verdict, {"iterations": len(history), "out": args.out}), indent=1))
    return 0


def cmd_continue(args):
    f = _model(args)
    param, start, end, step = args.sweep
    if param not in f.params:
        raise UsageError(f"model {f.name!r} has no parameter {param!r}")
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = _solver_config(args)
    start_model = f.with_params(**{param: start})
    u0 = initial_guess(start_model, BootstrapConfig(n_modes=args.ntheta, order=args.order, delta=args.delta))
    rows = []

    def record(pt):
        g = f.with_params(**{param: pt.value})
        report = condition_report(g, pt.triple, _thresholds(args))
        path = outdir / f"point_{len(rows):04d}.json"
        save_solution(path, g, pt.triple, report)
        rows.append({"index": len(rows), param: pt.value, "iterations": pt.iterations, "residual": pt.residual,
                     "m_max": report.to_dict()["m_max"], "lambda_c0": report.lambda_c0, "file": path.name})
        print(json.dumps(rows[-1]), flush=True)

    status = 0
    try:
        continuation(f, u0, param, start, end, step, cfg, callback=record)
    except CirclefolError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        status = 1
    with open(outdir / "summary.json", "w", encoding="utf-8") as fh:
        json.dump({"param": param, "points": rows, "completed": status == 0}, fh, indent=1)
    return status


def cmd_verify(args):
    doc, u = load_solution(args.solution)
    f = _model(args, doc.get("model"))
    th = Thresholds(residual=args.residual_threshold)
    report = condition_report(f, u, th)
    verdict = verify_aposteriori(report, th)
    summary = _summary(report, verdict)
    print(json.dumps(summary, indent=1))
    print(verdict.summary(), file=sys.stderr)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(summary, fh, indent=1)
    return 0 if verdict.passed else 1


def cmd_cohom(args):
    l = load_periodic(args.l_file)
    a = CircleMap(load_periodic(args.a_file))
    eta = load_periodic(args.eta_file)
    n = max(l.n_modes, a.n_modes, eta.n_modes)
    l, a, eta = l.resize(n), CircleMap(a.periodic_part.resize(n)), eta.resize(n)
    phi, info = solve_cohomological(l, a, eta, tol=args.tol, method=args.method, return_info=True)
    out = {
        "coeffs": spectrum_to_list(phi.spectrum),
        "residual": cohomology_residual(phi, l, a, eta),
        "rounds": info.rounds,
        "terms": info.terms,
    }
    print(json.dumps(out, indent=1))
    return 0


def cmd_export(args):
    if args.grid < 1 or args.ns < 1:
        raise UsageError("--grid and --ns must be positive")
    _, u = load_solution(args.solution)
    theta = np.arange(args.grid) / args.grid
    svals = np.linspace(-args.smax, args.smax, args.ns) if args.ns > 1 else np.array([0.0])
    T, S = np.meshgrid(theta, svals, indexing="ij")
    x, y = u.W.evaluate(T.ravel(), S.ravel())
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "s", "x", "y"])
        for row in zip(T.ravel(), S.ravel(), x, y):
            w.writerow([repr(float(v)) for v in row])
    print(json.dumps({"rows": int(T.size), "out": args.out}))
    return 0


COMMANDS = {"solve": cmd_solve, "continue": cmd_continue, "verify": cmd_verify, "cohom": cmd_cohom,
            "export": cmd_export}


def _thread_limit():
    value = os.environ.get("CIRCLEFOL_THREADS")
    if not value:
        return None
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(value))


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
        limiter = _thread_limit()
        try:
            return COMMANDS[args.command](args)
        finally:
            if limiter is not None:
                limiter.restore_original_limits()
    except UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        print(parser.format_usage().rstrip(), file=sys.stderr)
        print(__doc__, file=sys.stderr)
        return 2
    except CirclefolError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError, ValueError) as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return 2 if isinstance(err, (OSError, json.JSONDecodeError)) else 1


if __name__ == "__main__":
    sys.exit(main())
