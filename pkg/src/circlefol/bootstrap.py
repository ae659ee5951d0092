"""Initial guesses from forward simulation, and zeroth-order continuation.

The circle is sought as a graph ``y = phi(x)`` over the angle, so the
parameterization ``K(theta) = (theta, phi(theta))`` has no periodic part in
its angular component.  Burn-in is a forward cloud iteration; refinement is a
spectral graph transform (each new grid value is found by solving
``f_1(x, phi(x)) = theta_i`` for ``x``).  The stable bundle comes from power
iteration of the inverse derivative cocycle.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    BundleIterationStalled,
    CirclefolError,
    InadmissibleTriple,
    NoAttractorFound,
    StepTooSmall,
)
from .fourier import (
    CircleMap,
    PeriodicFunction,
    differentiate,
    eval_spectra,
    grid_size,
    invert_circle_map,
    sup_norm,
    theta_grid,
)
from .newton import ConjugacyTriple, SolverConfig, solve

log = logging.getLogger(__name__)


@dataclass
class BootstrapConfig:
    n_modes: int = 64
    order: int = 10
    delta: float = 0.1
    seed_y: float = 0.0
    burn_in: int = 60
    max_gap: float = 0.05
    y_bound: float = 1e6
    graph_iters: int = 2000
    graph_tol: float = 1e-14
    bundle_iters: int = 5000
    bundle_tol: float = 1e-14


def _cloud_burn_in(f, cfg):
    g = grid_size(cfg.n_modes)
    x = theta_grid(g)
    y = np.full(g, cfg.seed_y)
    with np.errstate(all="ignore"):
        for _ in range(cfg.burn_in):
            x, y = f.f(x, y)
            x, y = np.asarray(x, float), np.asarray(y, float)
            if not (np.all(np.isfinite(y)) and np.max(np.abs(y)) < cfg.y_bound):
                raise NoAttractorFound("orbit cloud diverged during burn-in")
    xm = np.mod(x, 1.0)
    order = np.argsort(xm)
    xs, ys = xm[order], y[order]
    gaps = np.diff(np.concatenate([xs, [xs[0] + 1.0]]))
    if gaps.max() > cfg.max_gap:
        raise NoAttractorFound(f"angular gap {gaps.max():.3g} exceeds {cfg.max_gap}")
    # periodic linear re-interpolation of the sorted cloud onto the grid
    xp = np.concatenate([xs[-1:] - 1.0, xs, xs[:1] + 1.0])
    yp = np.concatenate([ys[-1:], ys, ys[:1]])
    return np.interp(theta_grid(g), xp, yp)


def _graph_transform(f, phi, max_newton=50):
    """One spectral graph-transform step ``phi -> phi'``."""
    n = phi.n_modes
    th = phi.grid
    dphi = 2j * np.pi * np.arange(n + 1) * phi.spectrum
    x = th.copy()
    # solve f_1(x, phi(x)) = theta_i; start from the inverse of a first guess
    x0, _ = f.f(th, phi.values)
    shift = np.median(np.asarray(x0) - th)
    x = th - shift
    for _ in range(max_newton):
        y = eval_spectra(phi.spectrum, x)
        fx, _ = f.f(x, y)
        fxx, fxy, _, _ = (np.broadcast_to(np.asarray(d, float), x.shape) for d in f.df(x, y))
        slope = fxx + fxy * eval_spectra(dphi, x)
        if np.any(slope <= 0):
            raise NoAttractorFound("image of the graph folds over the angle")
        step = (np.asarray(fx) - th) / slope
        x = x - step
        if np.max(np.abs(step)) < 1e-15:
            break
    y = eval_spectra(phi.spectrum, x)
    _, fy = f.f(x, y)
    return PeriodicFunction.from_samples(np.asarray(fy, float), n)


def fit_circle(f, cfg):
    """Attracting circle as ``phi`` with ``y = phi(x)``."""
    phi = PeriodicFunction.from_samples(_cloud_burn_in(f, cfg), cfg.n_modes)
    for _ in range(cfg.graph_iters):
        new = _graph_transform(f, phi)
        change = sup_norm(new - phi)
        if not np.isfinite(change) or sup_norm(new) > cfg.y_bound:
            raise NoAttractorFound("graph transform diverged")
        phi = new
        if change < cfg.graph_tol * max(1.0, sup_norm(phi)):
            break
    else:
        if cfg.graph_iters > 0:
            log.warning("graph transform stopped at change %.2e", change)
    return phi


def internal_dynamics(f, K):
    """``a`` with ``K(a(theta)) = f(K(theta))`` via angular projection."""
    kx, ky = K
    th = kx.grid
    fx, _ = f.f(th + kx.values, ky.values)
    target = np.asarray(fx, float)
    if sup_norm(kx) == 0.0:
        lifted = target
    else:
        lifted = invert_circle_map(CircleMap(kx)).lift(target)
    return CircleMap(PeriodicFunction.from_samples(lifted - th, kx.n_modes))


def stable_bundle(f, K, a, cfg):
    """Unit vector field ``v`` and rate ``lam`` with ``Df(K) v = lam v(a)``."""
    kx, ky = K
    n = kx.n_modes
    th = kx.grid
    x, y = th + kx.values, ky.values
    dfxx, dfxy, dfyx, dfyy = (np.broadcast_to(np.asarray(d, float), th.shape) for d in f.df(x, y))
    det = dfxx * dfyy - dfxy * dfyx
    if np.min(np.abs(det)) == 0:
        raise BundleIterationStalled("singular derivative along the circle")
    ax = a.grid_lift()
    tx = 1.0 + differentiate(kx).values
    ty = differentiate(ky).values
    vx = np.zeros_like(th)
    vy = np.ones_like(th)
    for it in range(cfg.bundle_iters):
        sx = PeriodicFunction.from_samples(vx, n)
        sy = PeriodicFunction.from_samples(vy, n)
        wx, wy = eval_spectra(sx.spectrum, ax), eval_spectra(sy.spectrum, ax)
        # Df(K)^-1 v(a)
        nx = (dfyy * wx - dfxy * wy) / det
        ny = (-dfyx * wx + dfxx * wy) / det
        norm = np.hypot(nx, ny)
        sign = np.sign(tx * ny - ty * nx)
        if np.any(sign == 0):
            raise BundleIterationStalled("bundle became tangent to the circle")
        nx, ny = sign * nx / norm, sign * ny / norm
        change = max(np.max(np.abs(nx - vx)), np.max(np.abs(ny - vy)))
        vx, vy = nx, ny
        if change < cfg.bundle_tol:
            break
    else:
        if change > 1e-8:
            raise BundleIterationStalled(f"bundle iteration stalled at change {change:.2e}")
    sx = PeriodicFunction.from_samples(vx, n)
    sy = PeriodicFunction.from_samples(vy, n)
    wx, wy = eval_spectra(sx.spectrum, ax), eval_spectra(sy.spectrum, ax)
    lam = (dfxx * vx + dfxy * vy) * wx + (dfyx * vx + dfyy * vy) * wy
    return (sx, sy), PeriodicFunction.from_samples(lam, n)


def initial_guess(f, cfg=None):
    """Admissible first-order triple from forward simulation of ``f``."""
    cfg = cfg or BootstrapConfig()
    phi = fit_circle(f, cfg)
    K = (PeriodicFunction.zeros(cfg.n_modes), phi)
    a = internal_dynamics(f, K)
    if not a.is_diffeomorphism():
        raise NoAttractorFound("fitted internal dynamics is not a diffeomorphism")
    v, lam = stable_bundle(f, K, a, cfg)
    u = ConjugacyTriple.from_parts(K, v, a, lam, cfg.delta, cfg.order)
    try:
        return u.check_admissible()
    except InadmissibleTriple as err:
        raise NoAttractorFound(f"bootstrap produced an inadmissible triple: {err}") from err


def continuation_step(family, u_prev, eps_next):
    """Zeroth-order predictor: the previous solution is the next initial guess."""
    return u_prev


@dataclass
class ContinuationPoint:
    value: float
    triple: ConjugacyTriple
    iterations: int
    residual: float


@dataclass
class ContinuationResult:
    points: list = field(default_factory=list)
    failures: list = field(default_factory=list)


def continuation(model, u0, param, start, end, step, cfg=None, min_step=None, grow=1.5, fast_iters=2,
                 callback=None):
    """Sweep ``param`` from ``start`` to ``end``, solving at each value.

    A failed solve halves the step (retrying from the last converged point);
    a solve needing at most ``fast_iters`` iterations lets the step grow by
    ``grow`` up to its initial size.  ``StepTooSmall`` is raised, carrying
    the points computed so far, when the step falls below ``min_step``.
    """
    cfg = cfg or SolverConfig()
    if step == 0 or (end - start) * step < 0:
        raise ValueError("step must be nonzero and point from start to end")
    min_step = abs(step) / 64 if min_step is None else min_step
    direction = 1.0 if end >= start else -1.0
    h_max = abs(step)
    h = h_max
    result = ContinuationResult()
    u, hist = solve(model.with_params(**{param: start}), u0, cfg)
    result.points.append(ContinuationPoint(start, u, len(hist), _last_residual(hist, model, param, start, u)))
    if callback:
        callback(result.points[-1])
    value = start
    eps = 1e-12 * max(1.0, abs(end))
    while direction * (end - value) > eps:
        nxt = value + direction * min(h, direction * (end - value))
        if abs(nxt - end) < eps:
            nxt = end
        guess = continuation_step(model, u, nxt)
        try:
            u_new, hist = solve(model.with_params(**{param: nxt}), guess, cfg)
        except CirclefolError as err:
            result.failures.append((nxt, type(err).__name__))
            h /= 2
            if h < min_step:
                raise StepTooSmall(
                    f"continuation step fell below {min_step:g} at {param}={value:g} ({type(err).__name__})",
                    result.points,
                ) from err
            continue
        u, value = u_new, nxt
        result.points.append(ContinuationPoint(value, u, len(hist), _last_residual(hist, model, param, value, u)))
        if callback:
            callback(result.points[-1])
        if len(hist) <= fast_iters:
            h = min(h * grow, h_max)
    return result


def _last_residual(hist, model, param, value, u):
    if hist:
        return hist[-1].residual_after
    from .newton import residual_norm

    return residual_norm(model.with_params(**{param: value}), u)
