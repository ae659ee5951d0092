import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from circlefol.aposteriori import condition_report
from circlefol.bootstrap import (
    BootstrapConfig,
    continuation,
    continuation_step,
    fit_circle,
    initial_guess,
)
from circlefol.errors import BundleIterationStalled, CirclefolError, NoAttractorFound, StepTooSmall
from circlefol.fourier import sup_norm
from circlefol.models import make_model
from circlefol.newton import ConjugacyTriple, SolverConfig, residual_norm, solve

from helpers import skew_graph_oracle

CFG = BootstrapConfig(n_modes=64, order=8, delta=0.1)


def test_linear_recovers_exact_structure():
    f = make_model("linear", omega=0.3, b=0.5)
    u = initial_guess(f, CFG)
    assert residual_norm(f, u) < 1e-10
    assert sup_norm(u.a.periodic_part - 0.3) < 1e-12
    assert sup_norm(u.lam - 0.5) < 1e-12
    assert sup_norm(u.W.y.coeff(1) - 1.0) < 1e-12
    assert sup_norm(u.W.x.coeff(1)) < 1e-12


def test_skew_circle_matches_oracle():
    f = make_model("skew")
    phi = fit_circle(f, CFG)
    th = np.linspace(0, 1, 201)
    assert np.max(np.abs(phi(th) - skew_graph_oracle(f, th))) < 1e-6


def test_forced_oscillator_guess_converges():
    f = make_model("forced_oscillator")
    u0 = initial_guess(f, CFG)
    u, hist = solve(f, u0, SolverConfig(tol=1e-11))
    assert residual_norm(f, u) < 1e-11
    assert len(hist) <= 6


def test_bundle_is_unit_and_transverse():
    f = make_model("forced_oscillator")
    u = initial_guess(f, CFG)
    vx, vy = u.W.x.coeff(1), u.W.y.coeff(1)
    np.testing.assert_allclose(np.hypot(vx.values, vy.values), 1.0, atol=1e-10)
    tx, ty = u.W.x.d_theta().coeff(0), u.W.y.d_theta().coeff(0)
    det = tx.values * vy.values - ty.values * vx.values
    assert np.min(det) > 0.1


def test_divergent_orbit_is_refused():
    with pytest.raises(NoAttractorFound):
        initial_guess(make_model("forced_oscillator", b=1.5), CFG)


def test_phase_locked_cloud_gap_is_refused():
    # alpha has an attracting fixed point; the cloud collapses onto it
    with pytest.raises(NoAttractorFound):
        initial_guess(make_model("skew", omega=0.0, c=0.1), CFG)


def test_bundle_stall():
    with pytest.raises(BundleIterationStalled):
        initial_guess(make_model("forced_oscillator"), BootstrapConfig(n_modes=32, order=4, bundle_iters=1))


@settings(max_examples=8)
@given(
    b=st.floats(0.05, 1.3),
    c=st.floats(0.0, 0.06),
    eps1=st.floats(0.0, 0.3),
    eps2=st.floats(0.0, 0.4),
)
def test_output_is_admissible_or_error(b, c, eps1, eps2):
    f = make_model("forced_oscillator", b=b, c=c, eps1=eps1, eps2=eps2)
    try:
        u = initial_guess(f, BootstrapConfig(n_modes=32, order=4, graph_iters=300, bundle_iters=2000))
    except CirclefolError:
        return
    assert isinstance(u, ConjugacyTriple)
    u.check_admissible()
    assert u.W.x.winding == 1 and u.W.y.winding == 0


# --- continuation ---------------------------------------------------------

def test_continuation_step_is_identity():
    f = make_model("linear")
    u = initial_guess(f, CFG)
    assert continuation_step(f, u, f.b) is u
    _, hist = solve(f, continuation_step(f, u, f.b), SolverConfig(tol=1e-12))
    assert hist == []


def test_linear_sweep_iterations():
    f = make_model("linear", b=0.3)
    u0 = initial_guess(f, BootstrapConfig(n_modes=64, order=8, delta=0.3))
    res = continuation(f, u0, "b", 0.3, 0.8, 0.05, SolverConfig(tol=1e-12))
    values = [p.value for p in res.points]
    assert values[0] == 0.3 and values[-1] == pytest.approx(0.8)
    assert len(values) == 11
    assert all(p.iterations <= 4 for p in res.points)
    assert all(p.residual < 1e-12 for p in res.points)


def test_forced_sweep_m_max_decreases():
    f = make_model("forced_oscillator")
    u0 = initial_guess(f, BootstrapConfig(n_modes=64, order=8))
    m = []

    def record(pt):
        m.append(condition_report(f.with_params(eps2=pt.value), pt.triple).m_max)

    try:
        continuation(f, u0, "eps2", 0.1, 0.3, 0.05, SolverConfig(tol=1e-11), callback=record)
    except StepTooSmall:
        pass
    assert len(m) >= 3
    assert all(b < a for a, b in zip(m, m[1:]))


def test_step_too_small_near_breakdown():
    f = make_model("forced_oscillator")
    u0 = initial_guess(f, BootstrapConfig(n_modes=32, order=6))
    with pytest.raises(StepTooSmall) as info:
        continuation(f, u0, "b", 0.3, 1.5, 0.1, SolverConfig(tol=1e-10, max_iters=8))
    pts = info.value.results
    assert len(pts) >= 3
    assert pts[-1].value > 0.8


def test_continuation_rejects_bad_step():
    f = make_model("linear")
    u0 = initial_guess(f, CFG)
    with pytest.raises(ValueError):
        continuation(f, u0, "b", 0.3, 0.8, -0.1)


def test_raw_cloud_fit_without_refinement():
    f = make_model("skew")
    phi = fit_circle(f, BootstrapConfig(n_modes=64, graph_iters=0))
    th = np.linspace(0, 1, 101)
    # linear re-interpolation of the cloud limits the raw fit
    assert np.max(np.abs(phi(th) - skew_graph_oracle(f, th))) < 1e-4
