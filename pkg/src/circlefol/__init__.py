"""Attracting invariant circles of planar maps and their isochron foliations.

Solves ``f(W(theta, s)) = W(a(theta), lambda(theta) s)`` for a Fourier-Taylor
embedding ``W``, a circle map ``a`` and a normal rate ``lambda`` by a
quasi-Newton method, and reports condition numbers for the result.
"""
__version__ = "0.1.0"

from .aposteriori import ConditionReport, Thresholds, condition_report, m_max_condition0, verify_aposteriori
from .bootstrap import BootstrapConfig, continuation, continuation_step, initial_guess
from .cohomology import (
    cocycle_product,
    dynamical_average,
    reduce_lambda_rotation,
    regularity_bound,
    solve_cohomological,
)
from .errors import *  # noqa: F401,F403
from .fourier import (
    CircleMap,
    PeriodicFunction,
    compose_with_circle_map,
    differentiate,
    eval_periodic,
    holder_norm,
    invert_circle_map,
    smooth_periodic,
)
from .io import load_solution, save_solution
from .jets import (
    FourierTaylor,
    FTMatrix,
    FTPair,
    TaylorJet,
    analyticity_radius_estimate,
    ft_compose_inner,
    ft_mul,
    ft_norm,
    ft_smooth,
    jet_matrix_inverse,
)
from .models import MapModel, apply_dmap_jet, apply_map_jet, make_model, register_model
from .newton import ConjugacyTriple, SolverConfig, compute_error, newton_step, solve
