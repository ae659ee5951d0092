"""Shared constructions for solver tests: perturbed exact triples and
independent oracles for the skew-product graph."""
import numpy as np

from circlefol.fourier import PeriodicFunction
from circlefol.jets import FourierTaylor, FTPair
from circlefol.newton import ConjugacyTriple


def linear_exact(n=64, order=8, delta=0.3, omega=0.3, b=0.5):
    return ConjugacyTriple.trivial(omega, b, n, order, delta)


def perturb_normal(u, h, pattern=((0, "cos", 1), (1, "sin", 2), (2, "cos", 1))):
    """Add ``h`` times trigonometric terms to chosen s-orders of W_y."""
    n = u.n_modes
    sp = np.array(u.W.y.spectra)
    for j, kind, k in pattern:
        if j <= u.order:
            sp[j] += h * PeriodicFunction.from_cos_sin(n, **{kind: {k: 1.0}}).spectrum
    return ConjugacyTriple(FTPair(u.W.x, FourierTaylor(sp)), u.a, u.lam, u.delta)


def perturbation_family(u, amplitudes, draws, seed=0):
    """Perturbed guesses sharing one mode pattern with random weights in
    ``+-[0.5, 1]`` on each term, at every amplitude."""
    rng = np.random.default_rng(seed)
    out = []
    for h in amplitudes:
        for _ in range(draws):
            w = rng.uniform(0.5, 1.0, 3) * rng.choice([-1.0, 1.0], 3)
            sp = np.array(u.W.y.spectra)
            for j, (kind, k) in enumerate((("cos", 1), ("sin", 2), ("cos", 1))):
                sp[j] += h * w[j] * PeriodicFunction.from_cos_sin(u.n_modes, **{kind: {k: 1.0}}).spectrum
            out.append(ConjugacyTriple(FTPair(u.W.x, FourierTaylor(sp)), u.a, u.lam, u.delta))
    return out


def skew_alpha_inverse(f, theta, iters=60):
    """Pointwise inverse of x -> x + omega + c sin(2 pi x) by plain Newton."""
    theta = np.asarray(theta, dtype=float)
    x = theta - f.omega
    for _ in range(iters):
        g = x + f.omega + f.c * np.sin(2 * np.pi * x) - theta
        x = x - g / (1 + 2 * np.pi * f.c * np.cos(2 * np.pi * x))
    return x


def skew_graph_oracle(f, theta, terms=80):
    """Invariant graph of the skew product by a backward orbit sum.

    ``phi(alpha(x)) = l phi(x) + eta(x)`` gives
    ``phi(theta) = sum_j l^j eta(alpha^-(j+1)(theta))``.
    """
    x = np.asarray(theta, dtype=float)
    total = np.zeros_like(x)
    weight = 1.0
    for _ in range(terms):
        x = skew_alpha_inverse(f, x)
        total += weight * (f.eta1 * np.cos(2 * np.pi * x) + f.eta2 * np.sin(4 * np.pi * x))
        weight *= f.l
    return total


def skew_exact_triple(f, n=64, order=6, delta=0.2):
    """``W = (theta, phi(theta) + s)``, ``a = alpha``, ``lambda = l``."""
    from circlefol.fourier import CircleMap

    phi = PeriodicFunction.from_callable(lambda t: skew_graph_oracle(f, t), n)
    zero = PeriodicFunction.zeros(n)
    one = PeriodicFunction.constant(1.0, n)
    a = CircleMap(PeriodicFunction.from_cos_sin(n, mean=f.omega, sin={1: f.c}))
    return ConjugacyTriple.from_parts((zero, phi), (zero, one), a, PeriodicFunction.constant(f.l, n), delta, order)


def fit_slope(pairs):
    x = np.log([p[0] for p in pairs])
    y = np.log([p[1] for p in pairs])
    return float(np.polyfit(x, y, 1)[0])
