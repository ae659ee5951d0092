"""Empirical order of the quasi-Newton iteration on the linear model.

Perturbs the exact triple in the normal component, runs the solver with no
smoothing and fits log e_{n+1} against log e_n.
"""
import argparse
import json
from dataclasses import asdict, dataclass

import numpy as np

from circlefol.fourier import PeriodicFunction
from circlefol.jets import FourierTaylor, FTPair
from circlefol.models import make_model
from circlefol.newton import ConjugacyTriple, SolverConfig, solve


@dataclass
class Config:
    omega: float = 0.3
    b: float = 0.5
    n_modes: int = 64
    order: int = 8
    delta: float = 0.3
    amplitudes: tuple = (1e-2, 1e-3, 1e-4)
    floor: float = 1e-13
    schedule: str = "none"


def perturbed(cfg, h):
    u = ConjugacyTriple.trivial(cfg.omega, cfg.b, cfg.n_modes, cfg.order, cfg.delta)
    sp = np.array(u.W.y.spectra)
    for j, kind, k in ((0, "cos", 1), (1, "sin", 2), (2, "cos", 1)):
        sp[j] += h * PeriodicFunction.from_cos_sin(cfg.n_modes, **{kind: {k: 1.0}}).spectrum
    return ConjugacyTriple(FTPair(u.W.x, FourierTaylor(sp)), u.a, u.lam, u.delta)


def run(cfg):
    f = make_model("linear", omega=cfg.omega, b=cfg.b)
    rows, pairs = [], []
    for h in cfg.amplitudes:
        _, hist = solve(f, perturbed(cfg, h), SolverConfig(tol=1e-14, schedule=cfg.schedule))
        seq = [hist[0].residual[0.0]] + [d.residual_after for d in hist]
        rows.append({"h": h, "residuals": seq})
        pairs += [(a, b) for a, b in zip(seq, seq[1:]) if b > cfg.floor]
    x, y = np.log([p[0] for p in pairs]), np.log([p[1] for p in pairs])
    slope, intercept = np.polyfit(x, y, 1)
    return {"config": asdict(cfg), "runs": rows, "slope": float(slope), "constant": float(np.exp(intercept))}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--schedule", default="none", choices=["none", "fixed", "nash_moser"])
    p.add_argument("--n-modes", type=int, default=64)
    args = p.parse_args()
    out = run(Config(schedule=args.schedule, n_modes=args.n_modes))
    for r in out["runs"]:
        print(f"h={r['h']:.0e}: " + "  ".join(f"{v:.2e}" for v in r["residuals"]))
    print(f"fitted order {out['slope']:.3f}, constant {out['constant']:.3g}")
    print(json.dumps(out))


if __name__ == "__main__":
    main()
