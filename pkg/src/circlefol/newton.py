"""Quasi-Newton solver for ``f(W(theta, s)) = W(a(theta), lambda(theta) s)``.

One step writes the correction of ``W`` in the frame ``DW``,
``Delta_W = DW * Gamma``, drops the terms that are quadratically small and
matches powers of ``s``.  What remains is a triangular hierarchy of scalar
cohomological equations:

    Gamma_1^(0) = 0,               Delta_a      = -et_1^(0)
    Gamma_1^(j) = lam^j/Da Gamma_1^(j)(a) + et_1^(j)/Da          j >= 1
    M           = et_2 - Dlam * s * Gamma_1
    Gamma_2^(1) = 0,               Delta_lambda = -M^(1)
    Gamma_2^(0) = lam(a^-1) Gamma_2^(0)(a^-1) - M^(0)(a^-1)
    Gamma_2^(j) = lam^(j-1) Gamma_2^(j)(a) + M^(j)/lam           j >= 2

with ``et = -(DW(a, lam s))^-1 e``.  The gauge ``Gamma_1^(0) = Gamma_2^(1) = 0``
is the graph style.
"""
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .cohomology import solve_cohomological_batch, solve_cohomological_orbit
from .errors import InadmissibleTriple, MaxItersExceeded, NonDiffeo, NotContracting
from .fourier import (
    CircleMap,
    PeriodicFunction,
    compose_with_circle_map,
    differentiate,
    grid_to_spectra,
    holder_norm,
    invert_circle_map,
    smooth_periodic,
    sup_norm,
)
from .jets import (
    FourierTaylor,
    FTMatrix,
    FTPair,
    ft_compose_inner,
    ft_norm,
    jet_det,
    jet_matrix_inverse,
)
from .models import apply_map_jet


@dataclass(frozen=True)
class ConjugacyTriple:
    """Unknown ``(W, a, lambda)`` plus the s-domain radius ``delta``."""

    W: FTPair
    a: CircleMap
    lam: PeriodicFunction
    delta: float

    @property
    def order(self):
        return self.W.x.order

    @property
    def n_modes(self):
        return self.W.x.n_modes

    @classmethod
    def from_parts(cls, K, W1, a, lam, delta, order):
        """Assemble from the circle ``K = (Kx, Ky)`` (periodic parts) and the
        first-order bundle ``W1 = (vx, vy)``; higher orders are zero."""
        n = a.n_modes
        wx = FourierTaylor.from_coeffs([K[0].resize(n), W1[0].resize(n)], winding=1, order=order)
        wy = FourierTaylor.from_coeffs([K[1].resize(n), W1[1].resize(n)], winding=0, order=order)
        return cls(FTPair(wx, wy), a, lam.resize(n), float(delta))

    @classmethod
    def trivial(cls, omega, lam, n_modes, order, delta):
        """``W = (theta, s)``, ``a = theta + omega``, constant ``lambda``."""
        zero = PeriodicFunction.zeros(n_modes)
        one = PeriodicFunction.constant(1.0, n_modes)
        return cls.from_parts(
            (zero, zero), (zero, one), CircleMap.rotation(omega, n_modes),
            PeriodicFunction.constant(lam, n_modes), delta, order,
        )

    def check_admissible(self):
        if self.W.x.winding != 1 or self.W.y.winding != 0:
            raise InadmissibleTriple("W must have windings (1, 0)")
        if self.W.y.order != self.order or self.W.y.n_modes != self.n_modes:
            raise InadmissibleTriple("W components disagree in order or modes")
        if not self.delta > 0:
            raise InadmissibleTriple("delta must be positive")
        lam_c0 = sup_norm(self.lam)
        if not lam_c0 < 1.0:
            raise InadmissibleTriple(f"||lambda||_C0 = {lam_c0:.4g} >= 1")
        if not self.a.is_diffeomorphism():
            raise InadmissibleTriple(f"a is not a diffeomorphism (min Da = {self.a.min_derivative():.3g})")
        return self

    def shifted(self, c):
        """Rigid reparameterization ``theta -> theta + c`` of the whole triple."""
        g = CircleMap.rotation(c, self.n_modes)
        px = ft_compose_inner(self.W.x.periodic_part(), g, 1.0)
        wx = FourierTaylor(px.spectra + _const_spectra(c, px), 1)
        wy = ft_compose_inner(self.W.y, g, 1.0)
        a = CircleMap(compose_with_circle_map(self.a.periodic_part, g))
        lam = compose_with_circle_map(self.lam, g)
        return ConjugacyTriple(FTPair(wx, wy), a, lam, self.delta)

    def distance(self, other, r=0.0):
        """Product-space norm of ``self - other`` (grid estimator)."""
        d = self.delta
        return (
            ft_norm(FourierTaylor(self.W.x.spectra - other.W.x.spectra), r, d)
            + ft_norm(FourierTaylor(self.W.y.spectra - other.W.y.spectra), r, d)
            + holder_norm(self.a.periodic_part - other.a.periodic_part, r)
            + holder_norm(self.lam - other.lam, r)
        )


def _const_spectra(c, like):
    out = np.zeros_like(like.spectra)
    out[0, 0] = c
    return out


@dataclass
class SolverConfig:
    """Knobs of the outer loop.

    ``schedule`` is ``"fixed"`` (keep ``keep_fraction`` of the modes in every
    correction), ``"nash_moser"`` (cutoff ``exp(beta kappa^(n-1))`` capped at
    the mode count; ``beta=None`` picks ``kappa ln(N/4)`` so the first cutoff
    is about ``N/4``) or ``"none"``.
    """

    tol: float = 1e-10
    max_iters: int = 20
    schedule: str = "fixed"
    keep_fraction: float = 2.0 / 3.0
    beta: float = None
    kappa: float = 1.75
    coho_tol: float = 1e-14
    coho_kmax: int = 64
    coho_method: str = "doubling"
    det_threshold: float = 1e-8
    division_floor: float = 1e-10
    m: float = 2.0

    def cutoff(self, n, n_modes):
        if self.schedule == "none":
            return math.inf
        if self.schedule == "fixed":
            return self.keep_fraction * n_modes
        if self.schedule == "nash_moser":
            beta = self.beta if self.beta is not None else self.kappa * math.log(max(n_modes / 4.0, 1.0 + 1e-12))
            expo = beta * self.kappa ** (n - 1)
            return float(n_modes) if expo > math.log(n_modes) else max(math.exp(expo), 1.0)
        raise ValueError(f"unknown schedule {self.schedule!r}")


@dataclass
class StepDiagnostics:
    residual: dict = field(default_factory=dict)
    residual_after: float = float("nan")
    correction_W: float = 0.0
    correction_a: float = 0.0
    correction_lambda: float = 0.0
    frame_det_min: float = float("nan")
    coho_rounds: int = 0
    cutoff: float = math.inf
    seconds: float = 0.0

    def as_dict(self):
        d = dict(self.__dict__)
        d["residual"] = {str(k): v for k, v in self.residual.items()}
        return d


@dataclass
class Correction:
    """Everything one quasi-Newton step computes (before smoothing)."""

    e: FTPair
    e_tilde: FTPair
    gamma: FTPair
    M: FourierTaylor
    dW: FTPair
    da: PeriodicFunction
    dlam: PeriodicFunction
    DW: FTMatrix
    diag: StepDiagnostics


def compute_error(f, u):
    """``e = f o W - W(a, lambda s)``; both components have winding 0."""
    fW = apply_map_jet(f, u.W)
    Wx = ft_compose_inner(u.W.x, u.a, u.lam)
    Wy = ft_compose_inner(u.W.y, u.a, u.lam)
    return FTPair(fW.x - Wx, fW.y - Wy)


def residual_norm(f, u, r=0.0):
    return compute_error(f, u).norm(r, u.delta)


def frame(W):
    return FTMatrix(W.x.d_theta(), W.x.d_s(), W.y.d_theta(), W.y.d_s())


def _solve_batch(l_vals, a, eta_vals, n, cfg):
    l_spec = grid_to_spectra(l_vals, n)
    eta_spec = grid_to_spectra(eta_vals, n)
    if cfg.coho_method == "orbit":
        rows, rounds = [], 0
        for ls, es in zip(l_spec, eta_spec):
            phi, info = solve_cohomological_orbit(
                PeriodicFunction(ls), a, PeriodicFunction(es), tol=cfg.coho_tol, k_max=cfg.coho_kmax
            )
            rows.append(phi.spectrum)
            rounds += info.terms
        return np.array(rows), rounds
    spec, info = solve_cohomological_batch(l_spec, a, eta_spec, tol=cfg.coho_tol, k_max=cfg.coho_kmax)
    return spec, info.rounds


def quasi_newton_correction(f, u, cfg=None, e=None):
    """Corrections ``(Delta_W, Delta_a, Delta_lambda)`` of one step, unsmoothed."""
    cfg = cfg or SolverConfig()
    L, n = u.order, u.n_modes
    W, a, lam = u.W, u.a, u.lam
    diag = StepDiagnostics()
    if e is None:
        e = compute_error(f, u)
    for r in sorted({0.0, max(cfg.m - 2.0, 0.0), cfg.m}):
        diag.residual[r] = e.norm(r, u.delta)

    DW = frame(W)
    diag.frame_det_min = float(np.min(np.abs(jet_det(DW).coeffs[0])))
    DWa = FTMatrix(*(ft_compose_inner(m, a, lam) for m in DW))
    e_tilde_pos = jet_matrix_inverse(DWa, cfg.det_threshold).matvec(e)
    e_tilde = FTPair(-e_tilde_pos.x, -e_tilde_pos.y)

    da_vals = a.derivative().values
    lam_vals = lam.values
    floor = cfg.division_floor
    if np.min(np.abs(da_vals)) < floor:
        raise NotContracting(f"|Da| below {floor:g}; hierarchy undefined")
    if np.min(np.abs(lam_vals)) < floor and L >= 2:
        raise NotContracting(f"|lambda| below {floor:g}; hierarchy undefined")

    # first component
    da_corr = -e_tilde.x.coeff(0)
    g1 = np.zeros((L + 1, n + 1), dtype=complex)
    rounds = 0
    if L >= 1:
        j = np.arange(1, L + 1)[:, None]
        l_vals = lam_vals[None, :] ** j / da_vals[None, :]
        eta_vals = e_tilde.x.values[1:] / da_vals[None, :]
        g1[1:], r1 = _solve_batch(l_vals, a, eta_vals, n, cfg)
        rounds += r1
    gamma1 = FourierTaylor(g1)

    # second component
    M = e_tilde.y - gamma1.times_s() * differentiate(lam)
    dlam = -M.coeff(1) if L >= 1 else PeriodicFunction.zeros(n)
    g2 = np.zeros((L + 1, n + 1), dtype=complex)
    a_inv = invert_circle_map(a)
    l0 = compose_with_circle_map(lam, a_inv)
    eta0 = -compose_with_circle_map(M.coeff(0), a_inv)
    g2[:1], r0 = _solve_batch(l0.values[None], a_inv, eta0.values[None], n, cfg)
    rounds += r0
    if L >= 2:
        j = np.arange(2, L + 1)[:, None]
        l_vals = lam_vals[None, :] ** (j - 1)
        eta_vals = M.values[2:] / lam_vals[None, :]
        g2[2:], r2 = _solve_batch(l_vals, a, eta_vals, n, cfg)
        rounds += r2
    gamma = FTPair(gamma1, FourierTaylor(g2))
    dW = DW.matvec(gamma)

    diag.coho_rounds = rounds
    diag.correction_W = dW.norm(0, u.delta)
    diag.correction_a = sup_norm(da_corr)
    diag.correction_lambda = sup_norm(dlam)
    return Correction(e, e_tilde, gamma, M, dW, da_corr, dlam, DW, diag)


def apply_correction(u, corr, cutoff=math.inf):
    """Add (low-passed) corrections to ``u``."""
    dW, da, dlam = corr.dW, corr.da, corr.dlam
    if math.isfinite(cutoff):
        dW = dW.smooth(cutoff)
        da = smooth_periodic(da, cutoff)
        dlam = smooth_periodic(dlam, cutoff)
    a = u.a.shifted(da)
    if not a.is_diffeomorphism():
        raise NonDiffeo(f"updated internal map lost monotonicity (min Da = {a.min_derivative():.3g})")
    W = FTPair(u.W.x + dW.x, u.W.y + dW.y)
    return ConjugacyTriple(W, a, u.lam + dlam, u.delta)


def newton_step(f, u, cfg=None, cutoff=math.inf, e=None):
    """One quasi-Newton iteration; returns ``(new_triple, diagnostics)``."""
    t0 = time.perf_counter()
    corr = quasi_newton_correction(f, u, cfg, e=e)
    new = apply_correction(u, corr, cutoff)
    corr.diag.cutoff = cutoff
    corr.diag.seconds = time.perf_counter() - t0
    return new, corr.diag


def solve(f, u0, cfg=None, callback=None):
    """Iterate smoothed quasi-Newton steps until ``||e||_{X^{0,delta}} < tol``.

    Returns ``(triple, history)`` where ``history`` is the list of per-step
    :class:`StepDiagnostics`.  An initial guess that already meets ``tol``
    returns with an empty history.
    """
    cfg = cfg or SolverConfig()
    u = u0.check_admissible()
    history = []
    e = compute_error(f, u)
    for n in range(cfg.max_iters + 1):
        norm = e.norm(0, u.delta)
        if history:
            history[-1].residual_after = norm
        if norm < cfg.tol:
            return u, history
        if n == cfg.max_iters:
            break
        u, diag = newton_step(f, u, cfg, cfg.cutoff(n, u.n_modes), e=e)
        history.append(diag)
        if callback is not None:
            callback(n, u, diag)
        e = compute_error(f, u)
    raise MaxItersExceeded(
        f"residual {norm:.3e} above tol {cfg.tol:.1e} after {cfg.max_iters} iterations", history
    )


def linearized_residuals(f, u, corr):
    """Residuals of the two linearized equations the step is meant to solve.

    Returns sup-based X^{0,delta} norms of
    ``Da Gamma_1 - Delta_a - Gamma_1(a, lam s) - et_1`` and
    ``lam Gamma_2 - Delta_lam s - Gamma_2(a, lam s) - M``.
    """
    n, L = u.n_modes, u.order
    g1, g2 = corr.gamma
    da = u.a.derivative()
    r1 = g1 * da - ft_compose_inner(g1, u.a, u.lam) - corr.e_tilde.x
    r1 = FourierTaylor(r1.spectra - FourierTaylor.monomial(0, L, n, corr.da).spectra)
    r2 = g2 * u.lam - ft_compose_inner(g2, u.a, u.lam) - corr.M
    r2 = FourierTaylor(r2.spectra - FourierTaylor.monomial(1, L, n, corr.dlam).spectra)
    return ft_norm(r1, 0, u.delta), ft_norm(r2, 0, u.delta)
