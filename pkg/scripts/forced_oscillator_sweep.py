"""Continuation of the forced oscillator in one parameter.

Prints lambda, the dynamical average and the condition-0 regularity m_max at
every accepted point.  Stops cleanly when the continuation step collapses.
"""
import argparse
import csv
import sys
from dataclasses import dataclass

from circlefol.aposteriori import condition_report
from circlefol.bootstrap import BootstrapConfig, continuation, initial_guess
from circlefol.errors import StepTooSmall
from circlefol.models import make_model
from circlefol.newton import SolverConfig


@dataclass
class Config:
    param: str = "eps2"
    start: float = 0.1
    end: float = 0.3
    step: float = 0.05
    n_modes: int = 64
    order: int = 8
    delta: float = 0.1
    tol: float = 1e-11
    max_iters: int = 10


def run(cfg, out=sys.stdout):
    f = make_model("forced_oscillator")
    u0 = initial_guess(f.with_params(**{cfg.param: cfg.start}),
                       BootstrapConfig(n_modes=cfg.n_modes, order=cfg.order, delta=cfg.delta))
    w = csv.writer(out)
    w.writerow([cfg.param, "iterations", "residual", "lambda_c0", "lambda_star", "m_max"])

    def record(pt):
        r = condition_report(f.with_params(**{cfg.param: pt.value}), pt.triple)
        w.writerow([f"{pt.value:.6g}", pt.iterations, f"{pt.residual:.3e}", f"{r.lambda_c0:.6f}",
                    f"{r.lambda_star:.6f}", f"{r.m_max:.4f}"])
        out.flush()

    try:
        continuation(f, u0, cfg.param, cfg.start, cfg.end, cfg.step,
                     SolverConfig(tol=cfg.tol, max_iters=cfg.max_iters), callback=record)
    except StepTooSmall as err:
        print(f"# stopped: {err}", file=sys.stderr)
        return 1
    return 0


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--param", default="eps2")
    p.add_argument("--start", type=float, default=0.1)
    p.add_argument("--end", type=float, default=0.3)
    p.add_argument("--step", type=float, default=0.05)
    p.add_argument("--n-modes", type=int, default=64)
    p.add_argument("--order", type=int, default=8)
    a = p.parse_args()
    return run(Config(param=a.param, start=a.start, end=a.end, step=a.step, n_modes=a.n_modes, order=a.order))


if __name__ == "__main__":
    sys.exit(main())
