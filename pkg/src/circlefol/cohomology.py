"""Twisted cohomological equations ``phi = l * (phi o a) + eta`` over circle maps.

The solution is the series ``phi = sum_j l^[j] * eta(a^j)`` where
``l^[j] = l * l(a) * ... * l(a^(j-1))`` is the cocycle product.  Partial sums
are doubled with

    S_2k = S_k + l^[k] * (S_k o a^k),
    l^[2k] = l^[k] * (l^[k] o a^k),
    a^2k = a^k o a^k,

so ``M`` terms cost ``log2 M`` rounds.  The three compositions in a round are
evaluated at the same points, so one basis matrix serves all of them.
"""
from dataclasses import dataclass

import numpy as np

from .errors import (
    NoConvergence,
    NonPositiveLambda,
    NotContracting,
    SmallDivisorOverflow,
)
from .fourier import (
    CircleMap,
    PeriodicFunction,
    eval_spectra,
    grid_size,
    grid_to_spectra,
    spectra_to_grid,
    sup_norm,
    theta_grid,
)


@dataclass
class CohomologyInfo:
    rounds: int = 0
    terms: int = 1
    contraction_k: int = 0
    contraction_norm: float = float("nan")
    tail_bound: float = float("nan")
    method: str = "doubling"


@dataclass
class CocycleState:
    """Doubling state ``(l^[k], a^k, S_k, k)``."""

    l_k: PeriodicFunction
    a_k: CircleMap
    S_k: PeriodicFunction
    k: int

    def double(self):
        """Advance ``k -> 2k`` in one composition round."""
        spectra, a_spec = _double(self.l_k.spectrum[None], self.S_k.spectrum[None], self.a_k.periodic_part.spectrum)
        l2, s2 = spectra
        return CocycleState(PeriodicFunction(l2), CircleMap(PeriodicFunction(a_spec)), PeriodicFunction(s2), 2 * self.k)


def _double(l_spec, s_spec, a_spec):
    """One doubling round on stacked spectra ``(m, N+1)`` sharing one map."""
    n = l_spec.shape[-1] - 1
    g = grid_size(n)
    th = theta_grid(g)
    a_vals = spectra_to_grid(a_spec, g)
    x = th + a_vals
    stacked = np.concatenate([l_spec, s_spec, a_spec[None]], axis=0)
    comp = eval_spectra(stacked, x)
    m = l_spec.shape[0]
    l_at, s_at, a_at = comp[:m], comp[m : 2 * m], comp[2 * m]
    l_vals = spectra_to_grid(l_spec, g)
    s_vals = spectra_to_grid(s_spec, g)
    new_s = s_vals + l_vals * s_at
    new_l = l_vals * l_at
    new_a = a_vals + a_at
    return (grid_to_spectra(new_l, n), grid_to_spectra(new_s, n)), grid_to_spectra(new_a, n)


def _row_sup(spec):
    return np.max(np.abs(spectra_to_grid(spec)), axis=-1)


def _common_modes(*items):
    return max(it.n_modes for it in items)


def cocycle_product(l, a, k):
    """``l^[k](theta) = l(theta) l(a(theta)) ... l(a^(k-1)(theta))`` by binary doubling."""
    if k < 0:
        raise ValueError("k must be non-negative")
    n = _common_modes(l, a)
    result = PeriodicFunction.constant(1.0, n)
    r_map = CircleMap.identity(n)
    power = l.resize(n)
    p_map = CircleMap(a.periodic_part.resize(n))
    while k:
        if k & 1:
            # l^[2^i + r] = l^[2^i](a^r) * l^[r]
            x = r_map.grid_lift()
            comp = eval_spectra(np.stack([power.spectrum, p_map.periodic_part.spectrum]), x)
            result = PeriodicFunction.from_samples(comp[0] * result.values, n)
            r_map = CircleMap(PeriodicFunction.from_samples(r_map.periodic_part.values + comp[1], n))
        k >>= 1
        if k:
            (lp, _), ap = _double(power.spectrum[None], power.spectrum[None], p_map.periodic_part.spectrum)
            power = PeriodicFunction(lp[0])
            p_map = CircleMap(PeriodicFunction(ap))
    return result


def iterate_map(a, k):
    """``a^k`` as a CircleMap (binary powering)."""
    n = a.n_modes
    out = CircleMap.identity(n)
    base = a
    while k:
        if k & 1:
            out = base.compose(out)
        k >>= 1
        if k:
            base = base.compose(base)
    return out


def doubling_partial_sum(l, a, eta, rounds):
    """Partial sum of ``2**rounds`` terms built with ``rounds`` doubling rounds."""
    n = _common_modes(l, a, eta)
    state = CocycleState(l.resize(n), CircleMap(a.periodic_part.resize(n)), eta.resize(n), 1)
    for _ in range(rounds):
        state = state.double()
    return state.S_k


def solve_cohomological_batch(l_spec, a, eta_spec, tol=1e-12, k_max=64, max_rounds=60):
    """Solve several equations sharing the map ``a`` by doubling.

    ``l_spec`` and ``eta_spec`` are stacked half-spectra of shape ``(m, N+1)``.
    Returns ``(phi_spec, info)``.
    """
    l_spec = np.atleast_2d(np.asarray(l_spec, dtype=complex))
    s_spec = np.atleast_2d(np.asarray(eta_spec, dtype=complex))
    n = l_spec.shape[-1] - 1
    a_spec = a.periodic_part.resize(n).spectrum.copy()
    info = CohomologyInfo()
    k = 1
    contracted = np.zeros(l_spec.shape[0], dtype=bool)
    while True:
        lnorm = _row_sup(l_spec)
        contracted |= lnorm < 1.0
        if contracted.all():
            if not info.contraction_k:
                info.contraction_k = k
            snorm = _row_sup(s_spec)
            with np.errstate(divide="ignore", invalid="ignore"):
                tail = np.where(lnorm < 1.0, lnorm * snorm / (1.0 - lnorm), np.inf)
            info.contraction_norm = float(lnorm.max())
            info.tail_bound = float(tail.max())
            if info.tail_bound < tol:
                break
        elif k >= k_max:
            raise NotContracting(
                f"||l^[k]||_C0 >= 1 for all k <= {k_max} (min {lnorm.min():.4g} at k={k})"
            )
        if info.rounds >= max_rounds:
            raise NoConvergence(f"cohomology tail bound stalled at {info.tail_bound:.3e} after {info.rounds} rounds")
        (l_spec, s_spec), a_spec = _double(l_spec, s_spec, a_spec)
        k *= 2
        info.rounds += 1
    info.terms = k
    return s_spec, info


def solve_cohomological_orbit(l, a, eta, tol=1e-12, k_max=64, max_terms=100000):
    """Same equation summed term by term along pointwise orbits of ``a``.

    Costs one evaluation per term but never represents ``a^k`` as a Fourier
    series, so it stays accurate for strongly phase-locked ``a``.
    """
    n = _common_modes(l, a, eta)
    g = grid_size(n)
    x = theta_grid(g)
    prod = np.ones(g)
    total = np.zeros(g)
    info = CohomologyInfo(method="orbit")
    for j in range(max_terms):
        total += prod * eval_spectra(eta.spectrum, x)
        prod = prod * eval_spectra(l.spectrum, x)
        x = a.lift(x)
        pn = float(np.max(np.abs(prod)))
        info.terms = j + 1
        if pn < 1.0:
            if not info.contraction_k:
                info.contraction_k = j + 1
            tail = pn * float(np.max(np.abs(total))) / (1.0 - pn)
            info.tail_bound = tail
            if tail < tol:
                break
        elif j + 1 >= k_max and not info.contraction_k:
            raise NotContracting(f"||l^[k]||_C0 >= 1 for all k <= {k_max}")
    else:
        raise NoConvergence(f"orbit sum did not reach tol after {max_terms} terms")
    return PeriodicFunction.from_samples(total, n), info


def solve_cohomological(l, a, eta, tol=1e-12, k_max=64, method="doubling", return_info=False):
    """Solve ``phi = l * (phi o a) + eta`` for the unique bounded ``phi``.

    Parameters
    ----------
    l, eta : PeriodicFunction
    a : CircleMap
    tol : float
        Absolute target for the geometric tail bound
        ``||l^[k]|| ||S_k|| / (1 - ||l^[k]||)``.
    k_max : int
        Largest cocycle length searched for ``||l^[k]||_C0 < 1``.
    method : {"doubling", "orbit"}

    Raises
    ------
    NotContracting
        No ``k <= k_max`` with ``||l^[k]||_C0 < 1``.
    NoConvergence
        The tail bound does not reach ``tol``.
    """
    n = _common_modes(l, a, eta)
    if method == "orbit":
        phi, info = solve_cohomological_orbit(l.resize(n), a, eta.resize(n), tol=tol, k_max=k_max)
    elif method == "doubling":
        spec, info = solve_cohomological_batch(
            l.resize(n).spectrum[None], a, eta.resize(n).spectrum[None], tol=tol, k_max=k_max
        )
        phi = PeriodicFunction(spec[0])
    else:
        raise ValueError(f"unknown method {method!r}")
    return (phi, info) if return_info else phi


def cohomology_residual(phi, l, a, eta):
    """``sup_grid |phi - l * phi(a) - eta|`` with ``phi(a)`` evaluated exactly."""
    n = _common_modes(phi, l, eta, a)
    th = theta_grid(grid_size(n))
    phi_a = eval_spectra(phi.spectrum, a.lift(th))
    res = eval_spectra(phi.spectrum, th) - eval_spectra(l.spectrum, th) * phi_a - eval_spectra(eta.spectrum, th)
    return float(np.max(np.abs(res)))


def dynamical_average(lam, a, n):
    """``||lam^[n]||_C0 ** (1/n)``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return sup_norm(cocycle_product(lam, a, n)) ** (1.0 / n)


def dynamical_average_sequence(lam, a, ns=(1, 2, 4, 8, 16, 32, 64)):
    return {int(n): dynamical_average(lam, a, n) for n in ns}


def reduce_lambda_rotation(lam, omega, tol=1e-10):
    """Reduce ``lam`` over the rotation ``theta + omega`` to a constant.

    Returns ``(lam_bar, r)`` with ``lam_bar = exp(int log lam)`` and ``r > 0``
    such that ``r(theta + omega) * lam(theta) / r(theta) = lam_bar``.
    ``log r`` has zero mean and Fourier coefficients
    ``(log lam)_k / (1 - exp(2 pi i k omega))``.
    """
    vals = lam.values
    if np.any(vals <= 0):
        raise NonPositiveLambda(f"min lambda = {vals.min():.3e} <= 0")
    n = lam.n_modes
    log_spec = grid_to_spectra(np.log(vals), n)
    lam_bar = float(np.exp(log_spec[0].real))
    k = np.arange(1, n + 1)
    divisors = 1.0 - np.exp(2j * np.pi * k * omega)
    if np.min(np.abs(divisors)) < 1e-10:
        bad = int(k[np.argmin(np.abs(divisors))])
        raise SmallDivisorOverflow(f"|1 - exp(2 pi i k omega)| < 1e-10 at k={bad}")
    rho = np.zeros(n + 1, dtype=complex)
    rho[1:] = log_spec[1:] / divisors
    r = PeriodicFunction(rho).map_values(np.exp)
    th = lam.grid
    check = np.exp(eval_spectra(rho, th + omega)) * vals / np.exp(eval_spectra(rho, th)) - lam_bar
    err = float(np.max(np.abs(check)))
    if err >= tol:
        raise NoConvergence(f"lambda reduction residual {err:.3e} >= tol {tol:.1e}")
    return lam_bar, r


def regularity_bound(l, a):
    """``-ln ||l||_C0 / ln ||Da||_C0``; ``inf`` when ``||Da|| <= 1``."""
    lnorm = sup_norm(l)
    if lnorm >= 1.0:
        raise NotContracting(f"||l||_C0 = {lnorm:.4g} >= 1")
    da = sup_norm(a.derivative())
    # round-off on a rigid rotation can leave ||Da|| a few ulps above one
    if da <= 1.0 + 1e-12:
        return float("inf")
    if lnorm == 0.0:
        return float("inf")
    return float(-np.log(lnorm) / np.log(da))


def regularity_criteria(l, a, k, r):
    """The sharper solvability quantities, reported only.

    Returns ``||l^[k]|| ||D(a^k)||^r`` and ``||l^[k] D(a^k)||``; values below
    one indicate a C^r solution.
    """
    lk = cocycle_product(l, a, k)
    dak = iterate_map(a, k).derivative()
    return {
        "product_bound": sup_norm(lk) * sup_norm(dak) ** r,
        "pointwise_bound": sup_norm(lk * dak),
    }
