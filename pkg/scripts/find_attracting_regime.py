"""Coarse scan of forced-oscillator parameters for a usable attracting circle.

For each (b, eps2) on a grid, try the bootstrap and a short solve and report
the outcome: the error class on failure, otherwise lambda and m_max.
"""
import argparse
import itertools
from dataclasses import dataclass, field

import numpy as np

from circlefol.aposteriori import condition_report
from circlefol.bootstrap import BootstrapConfig, initial_guess
from circlefol.errors import CirclefolError
from circlefol.models import make_model
from circlefol.newton import SolverConfig, solve


@dataclass
class Config:
    b: list = field(default_factory=lambda: list(np.linspace(0.2, 1.4, 7)))
    eps2: list = field(default_factory=lambda: [0.0, 0.1, 0.2, 0.3])
    n_modes: int = 32
    order: int = 6
    tol: float = 1e-10


def classify(f, cfg):
    try:
        u0 = initial_guess(f, BootstrapConfig(n_modes=cfg.n_modes, order=cfg.order))
        u, hist = solve(f, u0, SolverConfig(tol=cfg.tol, max_iters=10))
    except CirclefolError as err:
        return type(err).__name__
    r = condition_report(f, u)
    return f"ok it={len(hist)} lam={r.lambda_c0:.3f} m={r.m_max:.2f}"


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n-modes", type=int, default=32)
    cfg = Config(n_modes=p.parse_args().n_modes)
    base = make_model("forced_oscillator")
    for b, e in itertools.product(cfg.b, cfg.eps2):
        print(f"b={b:.2f} eps2={e:.2f}: {classify(base.with_params(b=b, eps2=e), cfg)}")


if __name__ == "__main__":
    main()
