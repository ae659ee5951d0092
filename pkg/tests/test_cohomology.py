import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from circlefol.cohomology import (
    CocycleState,
    cocycle_product,
    cohomology_residual,
    doubling_partial_sum,
    dynamical_average,
    dynamical_average_sequence,
    iterate_map,
    reduce_lambda_rotation,
    regularity_bound,
    regularity_criteria,
    solve_cohomological,
)
from circlefol.errors import NoConvergence, NonPositiveLambda, NotContracting, SmallDivisorOverflow
from circlefol.fourier import (
    CircleMap,
    PeriodicFunction,
    compose_with_circle_map,
    eval_spectra,
    holder_norm,
    sup_norm,
)

from conftest import GOLDEN, random_periodic

seeds = st.integers(0, 2**32 - 1)
N = 64


def random_triple(rng, n=N, l_max=0.9, a_amp=0.05):
    """Admissible (l, a, eta): ||l|| < 1 and a a small perturbation of a rotation.

    Inputs are trigonometric polynomials of degree <= 8 so that the solution
    is resolved by the 64-mode representation.
    """
    l = random_periodic(rng, n, amp=1.0, decay=0.8, max_mode=8)
    l = l * (rng.uniform(0.1, l_max) / max(sup_norm(l), 1e-12))
    p = random_periodic(rng, n, amp=1.0, decay=1.0, max_mode=8)
    p = p * (rng.uniform(0, a_amp) / max(holder_norm(p, 1), 1e-12)) + rng.uniform(0, 1)
    eta = random_periodic(rng, n, amp=1.0, decay=0.6, mean=rng.standard_normal(), max_mode=8)
    return l, CircleMap(p), eta


def naive_orbit_sum(l, a, eta, terms, theta):
    """sum_{j < terms} l^[j](theta) eta(a^j(theta)) by pointwise orbits."""
    x = np.array(theta, dtype=float)
    prod = np.ones_like(x)
    total = np.zeros_like(x)
    for _ in range(terms):
        total += prod * eval_spectra(eta.spectrum, x)
        prod *= eval_spectra(l.spectrum, x)
        x = a.lift(x)
    return total


def naive_cocycle(l, a, k, theta):
    x = np.array(theta, dtype=float)
    prod = np.ones_like(x)
    for _ in range(k):
        prod *= eval_spectra(l.spectrum, x)
        x = a.lift(x)
    return prod


# --- cocycle products -----------------------------------------------------

def test_cocycle_zero_is_one(rng):
    l, a, _ = random_triple(rng)
    assert sup_norm(cocycle_product(l, a, 0) - 1.0) == 0.0


def test_cocycle_constant(rng):
    _, a, _ = random_triple(rng)
    out = cocycle_product(PeriodicFunction.constant(0.8, N), a, 7)
    assert sup_norm(out - 0.8**7) < 1e-15


@pytest.mark.parametrize("k", [1, 2, 3, 5, 8, 13])
def test_cocycle_against_pointwise_product(k, rng):
    l, a, _ = random_triple(rng)
    th = rng.uniform(0, 1, 40)
    assert np.max(np.abs(cocycle_product(l, a, k)(th) - naive_cocycle(l, a, k, th))) < 1e-11


@pytest.mark.parametrize("j,k", [(1, 1), (3, 5), (8, 8)])
@given(seed=seeds)
def test_cocycle_law(j, k, seed):
    l, a, _ = random_triple(np.random.default_rng(seed))
    lhs = cocycle_product(l, a, j + k)
    rhs = compose_with_circle_map(cocycle_product(l, a, j), iterate_map(a, k)) * cocycle_product(l, a, k)
    assert sup_norm(lhs - rhs) < 1e-11


def test_cocycle_state_doubling_law(rng):
    l, a, eta = random_triple(rng)
    state = CocycleState(l, a, eta, 1)
    for _ in range(4):
        nxt = state.double()
        expected = cocycle_product(l, a, 2 * state.k)
        assert sup_norm(nxt.l_k - expected) < 1e-11
        state = nxt
    assert state.k == 16
    assert sup_norm(state.a_k.periodic_part - iterate_map(a, 16).periodic_part) < 1e-11


def test_cocycle_negative_power():
    with pytest.raises(ValueError):
        cocycle_product(PeriodicFunction.constant(0.5, 4), CircleMap.identity(4), -1)


# --- cohomological equation -----------------------------------------------

def test_geometric_series():
    a = CircleMap(PeriodicFunction.from_cos_sin(N, mean=0.2, sin={1: 0.05}))
    phi = solve_cohomological(PeriodicFunction.constant(0.5, N), a, PeriodicFunction.constant(1.0, N))
    assert sup_norm(phi - 2.0) < 1e-12


def test_zero_twist(rng):
    _, a, eta = random_triple(rng)
    phi = solve_cohomological(PeriodicFunction.zeros(N), a, eta)
    assert sup_norm(phi - eta) < 1e-14


def test_rotation_closed_form():
    omega = 0.234
    a = CircleMap.rotation(omega, N)
    eta = PeriodicFunction.from_cos_sin(N, cos={1: 1.0})
    phi = solve_cohomological(PeriodicFunction.constant(0.5, N), a, eta, tol=1e-14)
    th = np.linspace(0, 1, 97)
    exact = np.real(np.exp(2j * np.pi * th) / (1 - 0.5 * np.exp(2j * np.pi * omega)))
    assert np.max(np.abs(phi(th) - exact)) < 1e-12
    direct = naive_orbit_sum(PeriodicFunction.constant(0.5, N), a, eta, 60, th)
    assert np.max(np.abs(phi(th) - direct)) < 1e-12


def test_doubling_matches_naive_64_terms(rng):
    l, a, eta = random_triple(rng)
    s64 = doubling_partial_sum(l, a, eta, 6)
    th = s64.grid
    assert np.max(np.abs(s64.values - naive_orbit_sum(l, a, eta, 64, th))) < 1e-12


def test_doubling_round_count():
    a = CircleMap.rotation(0.234, N)
    _, info = solve_cohomological(
        PeriodicFunction.constant(0.5, N), a, PeriodicFunction.from_cos_sin(N, cos={1: 1.0}),
        tol=1e-12, return_info=True,
    )
    # 2^rounds terms with tail 0.5^k * 2 < 1e-12 needs k = 64
    assert info.rounds <= 7
    assert info.terms == 2**info.rounds


@given(seeds)
def test_residual_identity_random(seed):
    rng = np.random.default_rng(seed)
    l, a, eta = random_triple(rng, n=2 * N)
    tol = 1e-12
    phi = solve_cohomological(l, a, eta, tol=tol)
    assert cohomology_residual(phi, l, a, eta) <= tol


def test_residual_identity_hundred_trials():
    # near ||l|| = 0.9 the solution's spectrum decays slowly; 128 modes resolve it
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(100):
        l, a, eta = random_triple(rng, n=2 * N)
        phi = solve_cohomological(l, a, eta, tol=1e-12)
        worst = max(worst, cohomology_residual(phi, l, a, eta))
    assert worst <= 1e-12


def test_orbit_method_agrees(rng):
    l, a, eta = random_triple(rng)
    p1 = solve_cohomological(l, a, eta, method="doubling")
    p2 = solve_cohomological(l, a, eta, method="orbit")
    assert sup_norm(p1 - p2) < 1e-11


@given(seeds, st.floats(-3, 3), st.floats(-3, 3))
def test_linearity_in_eta(seed, alpha, beta):
    rng = np.random.default_rng(seed)
    l, a, eta1 = random_triple(rng)
    eta2 = random_periodic(rng, N, decay=0.6)
    lhs = solve_cohomological(l, a, eta1 * alpha + eta2 * beta, tol=1e-14)
    rhs = solve_cohomological(l, a, eta1, tol=1e-14) * alpha + solve_cohomological(l, a, eta2, tol=1e-14) * beta
    assert sup_norm(lhs - rhs) < 1e-11 * (1 + abs(alpha) + abs(beta))


def test_eventual_contraction():
    # ||l|| = 1.3 but l(theta) l(theta + 1/2) = 1.3 * 0.5 < 1
    l = PeriodicFunction.from_cos_sin(N, mean=0.9, cos={1: 0.4})
    a = CircleMap.rotation(0.5, N)
    eta = PeriodicFunction.constant(1.0, N)
    phi, info = solve_cohomological(l, a, eta, return_info=True)
    assert info.contraction_k >= 2
    assert cohomology_residual(phi, l, a, eta) < 1e-12


def test_not_contracting():
    with pytest.raises(NotContracting):
        solve_cohomological(PeriodicFunction.constant(1.1, 8), CircleMap.rotation(0.3, 8), PeriodicFunction.constant(1.0, 8))
    with pytest.raises(NotContracting):
        solve_cohomological(PeriodicFunction.constant(1.0, 8), CircleMap.rotation(0.3, 8),
                            PeriodicFunction.constant(1.0, 8), method="orbit")


def test_tail_stall_raises():
    # 0.999^k needs far more than two rounds
    from circlefol.cohomology import solve_cohomological_batch

    l = PeriodicFunction.constant(0.999, 8)
    with pytest.raises(NoConvergence):
        solve_cohomological_batch(l.spectrum[None], CircleMap.rotation(0.3, 8),
                                  PeriodicFunction.constant(1.0, 8).spectrum[None], max_rounds=2)


# --- dynamical average ----------------------------------------------------

def test_dynamical_average_constant():
    a = CircleMap.rotation(GOLDEN, 16)
    for n in (1, 4, 17):
        assert dynamical_average(PeriodicFunction.constant(0.7, 16), a, n) == pytest.approx(0.7, rel=1e-14)


def test_dynamical_average_coboundary():
    n = 64
    omega = 0.3819660112501051
    g = PeriodicFunction.from_cos_sin(n, cos={1: 0.3})
    a = CircleMap.rotation(omega, n)
    lam = PeriodicFunction.from_callable(
        lambda t: 0.6 * np.exp(0.3 * np.cos(2 * np.pi * t) - 0.3 * np.cos(2 * np.pi * (t + omega))), n
    )
    seq = dynamical_average_sequence(lam, a)
    assert seq[64] == pytest.approx(0.6, rel=0.02)
    assert abs(seq[64] - 0.6) < abs(seq[1] - 0.6)
    assert g.n_modes == n


def test_dynamical_average_submultiplicative(rng):
    l, a, _ = random_triple(rng)
    assert sup_norm(cocycle_product(l, a, 16)) <= sup_norm(cocycle_product(l, a, 8)) ** 2 * (1 + 1e-12)


def test_dynamical_average_bad_n():
    with pytest.raises(ValueError):
        dynamical_average(PeriodicFunction.constant(0.5, 4), CircleMap.identity(4), 0)


# --- lambda reduction -----------------------------------------------------

def test_reduce_constant():
    lam_bar, r = reduce_lambda_rotation(PeriodicFunction.constant(0.5, 16), GOLDEN)
    assert lam_bar == pytest.approx(0.5, rel=1e-14)
    assert sup_norm(r - 1.0) < 1e-14


def test_reduce_coboundary():
    n = 64
    g = lambda t: 0.2 * np.sin(2 * np.pi * t)  # noqa: E731
    lam = PeriodicFunction.from_callable(lambda t: 0.5 * np.exp(g(t) - g(t + GOLDEN)), n)
    lam_bar, r = reduce_lambda_rotation(lam, GOLDEN, tol=1e-10)
    assert lam_bar == pytest.approx(0.5, rel=1e-13)
    th = np.linspace(0, 1, 50)
    # r(theta + omega) lam / r = lam_bar, solved by r = exp(g) (zero-mean log)
    np.testing.assert_allclose(r(th), np.exp(g(th)), rtol=1e-12)
    np.testing.assert_allclose(r(th + GOLDEN) * lam(th) / r(th), lam_bar, rtol=1e-10)


@given(seeds)
def test_reduce_lambda_bar_is_log_mean(seed):
    rng = np.random.default_rng(seed)
    lam = random_periodic(rng, 32, amp=0.05, decay=1.0, mean=0.5)
    lam_bar, _ = reduce_lambda_rotation(lam, GOLDEN, tol=1e-6)
    assert lam_bar == pytest.approx(np.exp(np.mean(np.log(lam.values))), rel=1e-13)


def test_reduce_nonpositive():
    with pytest.raises(NonPositiveLambda):
        reduce_lambda_rotation(PeriodicFunction.from_cos_sin(8, mean=0.1, cos={1: 0.5}), GOLDEN)


def test_reduce_small_divisor():
    lam = PeriodicFunction.from_cos_sin(8, mean=0.5, cos={1: 0.1})
    with pytest.raises(SmallDivisorOverflow):
        reduce_lambda_rotation(lam, 0.25)


# --- regularity -----------------------------------------------------------

def test_regularity_rotation_is_infinite():
    assert regularity_bound(PeriodicFunction.constant(0.25, 8), CircleMap.rotation(0.3, 8)) == float("inf")


def _map_with_max_derivative(dmax, n=32):
    amp = (dmax - 1.0) / (2 * np.pi)
    return CircleMap(PeriodicFunction.from_cos_sin(n, mean=0.1, sin={1: amp}))


def test_regularity_values():
    a2 = _map_with_max_derivative(2.0)
    assert regularity_bound(PeriodicFunction.constant(0.25, 32), a2) == pytest.approx(2.0, rel=1e-12)
    # ||Da|| = 4 needs a non-monotone lift, which the bound itself does not care about
    a4 = _map_with_max_derivative(4.0)
    assert regularity_bound(PeriodicFunction.constant(0.5, 32), a4) == pytest.approx(0.5, rel=1e-12)


def test_regularity_not_contracting():
    with pytest.raises(NotContracting):
        regularity_bound(PeriodicFunction.constant(1.0, 8), CircleMap.rotation(0.3, 8))


def test_regularity_criteria_reported():
    a = _map_with_max_derivative(1.2)
    out = regularity_criteria(PeriodicFunction.constant(0.5, 32), a, 4, 2.0)
    assert out["product_bound"] > 0 and out["pointwise_bound"] > 0
    assert out["pointwise_bound"] <= 0.5**4 * 1.2**4 + 1e-12
