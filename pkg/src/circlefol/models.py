"""Analytic maps of the cylinder T x R and their evaluation along series.

A model implements ``f(x, y)`` and ``df(x, y)`` with operations that work
both on numpy arrays and on :class:`~circlefol.jets.TaylorJet` (use the
``sin``/``cos``/``exp`` helpers from :mod:`circlefol.jets`).  The angular
coordinate ``x`` is a lift, so ``f(x + 1, y) = f(x, y) + (1, 0)``.

New models are registered with :func:`register_model`; the CLI looks them up
by name.
"""
import numpy as np

from .errors import DomainError
from .jets import FourierTaylor, FTMatrix, FTPair, TaylorJet, cos, sin

TWO_PI = 2.0 * np.pi

MODEL_REGISTRY = {}


def register_model(name):
    """Class decorator adding a model to the registry under ``name``."""

    def wrap(cls):
        cls.name = name
        MODEL_REGISTRY[name] = cls
        return cls

    return wrap


def make_model(name, **params):
    try:
        cls = MODEL_REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown model {name!r}; known: {sorted(MODEL_REGISTRY)}") from None
    return cls(**params)


class MapModel:
    """Base class; subclasses set ``defaults`` and implement ``f`` and ``df``."""

    name = "base"
    defaults = {}
    # parameter swept by default in continuation
    distinguished = None

    def __init__(self, **params):
        unknown = set(params) - set(self.defaults)
        if unknown:
            raise KeyError(f"unknown parameters for {self.name}: {sorted(unknown)}")
        merged = dict(self.defaults)
        merged.update({k: float(v) for k, v in params.items()})
        self.params = merged

    def __getattr__(self, key):
        params = self.__dict__.get("params", {})
        if key in params:
            return params[key]
        raise AttributeError(key)

    def with_params(self, **updates):
        p = dict(self.params)
        p.update(updates)
        return type(self)(**p)

    def f(self, x, y):
        raise NotImplementedError

    def df(self, x, y):
        raise NotImplementedError

    def __call__(self, x, y):
        return self.f(x, y)

    def orbit(self, x, y, n):
        """Iterate pointwise ``n`` times; returns arrays of shape ``(n+1,) + shape``."""
        xs, ys = [np.asarray(x, float)], [np.asarray(y, float)]
        for _ in range(n):
            x, y = self.f(xs[-1], ys[-1])
            xs.append(np.asarray(x, float))
            ys.append(np.asarray(y, float))
        return np.array(xs), np.array(ys)

    def __repr__(self):
        args = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{type(self).__name__}({args})"


@register_model("linear")
class LinearModel(MapModel):
    """``f(x, y) = (x + omega, b y)``; exact solution ``W = (theta, s)``."""

    defaults = {"omega": 0.3, "b": 0.5}
    distinguished = "b"

    def f(self, x, y):
        return x + self.omega, y * self.b

    def df(self, x, y):
        return 1.0, 0.0, 0.0, self.b


@register_model("skew")
class SkewModel(MapModel):
    """Skew product ``(alpha(x), l y + eta(x))`` with
    ``alpha(x) = x + omega + c sin(2 pi x)`` and
    ``eta(x) = eta1 cos(2 pi x) + eta2 sin(4 pi x)``.

    The invariant circle is the graph of ``phi = sum_j l^j eta(alpha^j)``.
    """

    defaults = {"omega": 0.6180339887498949, "c": 0.0414, "l": 0.5, "eta1": 0.2, "eta2": 0.05}
    distinguished = "l"

    def alpha(self, x):
        return x + self.omega + self.c * sin(TWO_PI * x)

    def eta(self, x):
        return self.eta1 * cos(TWO_PI * x) + self.eta2 * sin(2 * TWO_PI * x)

    def f(self, x, y):
        return self.alpha(x), y * self.l + self.eta(x)

    def df(self, x, y):
        dalpha = 1.0 + TWO_PI * self.c * cos(TWO_PI * x)
        deta = -TWO_PI * self.eta1 * sin(TWO_PI * x) + 2 * TWO_PI * self.eta2 * cos(2 * TWO_PI * x)
        return dalpha, 0.0, deta, self.l


@register_model("forced_oscillator")
class ForcedOscillatorModel(MapModel):
    """``(x + omega + eps1 y + c sin(2 pi x),  b y + eps2 sin(2 pi x))``.

    A dissipative standard-map-like family; for small coupling it has an
    attracting invariant circle near ``y = 0``.
    """

    defaults = {"omega": 0.6180339887498949, "b": 0.3, "c": 0.02, "eps1": 0.1, "eps2": 0.1}
    distinguished = "eps2"

    def f(self, x, y):
        sx = sin(TWO_PI * x)
        return x + self.omega + y * self.eps1 + sx * self.c, y * self.b + sx * self.eps2

    def df(self, x, y):
        cx = cos(TWO_PI * x)
        return 1.0 + cx * (TWO_PI * self.c), self.eps1, cx * (TWO_PI * self.eps2), self.b


def _as_jet(v, like):
    if isinstance(v, TaylorJet):
        return v
    c = np.zeros_like(like.coeffs)
    c[0] = v
    return TaylorJet(c)


def _check_finite(*jets):
    for j in jets:
        if not np.all(np.isfinite(j.coeffs)):
            raise DomainError("model evaluation produced non-finite values")


def apply_map_jet(f, W):
    """``f o W`` as an FTPair; the angular component keeps winding 1."""
    X, Y = W.x.jet(), W.y.jet()
    try:
        # non-finite results are reported below as DomainError
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            fx, fy = f.f(X, Y)
    except (ValueError, FloatingPointError, ZeroDivisionError) as err:
        raise DomainError(str(err)) from err
    fx, fy = _as_jet(fx, X), _as_jet(fy, X)
    _check_finite(fx, fy)
    n = W.x.n_modes
    cx = np.array(fx.coeffs)
    if W.x.winding:
        cx[0] -= W.x.grid
    return FTPair(FourierTaylor.from_values(cx, n, W.x.winding), FourierTaylor.from_values(fy.coeffs, n))


def apply_dmap_jet(f, W):
    """``Df o W`` as an FTMatrix (all entries periodic)."""
    X, Y = W.x.jet(), W.y.jet()
    entries = [_as_jet(e, X) for e in f.df(X, Y)]
    _check_finite(*entries)
    n = W.x.n_modes
    return FTMatrix(*(FourierTaylor.from_values(e.coeffs, n) for e in entries))


def finite_difference_check(f, x, y, h=1e-7):
    """Max abs difference between ``df`` and central differences of ``f``."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    fxp, fyp = f.f(x + h, y)
    fxm, fym = f.f(x - h, y)
    gxp, gyp = f.f(x, y + h)
    gxm, gym = f.f(x, y - h)
    num = [(fxp - fxm) / (2 * h), (gxp - gxm) / (2 * h), (fyp - fym) / (2 * h), (gyp - gym) / (2 * h)]
    ana = [np.broadcast_to(np.asarray(d, float), x.shape) for d in f.df(x, y)]
    return float(max(np.max(np.abs(a - b)) for a, b in zip(num, ana)))
