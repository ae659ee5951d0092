"""Fourier-Taylor series ``u(theta, s) = w*theta + sum_j u_j(theta) s^j``.

Coefficients are stored as one ``(L+1, N+1)`` array of half-spectra so that
arithmetic vectorizes over orders.  Nonlinear operations go through
:class:`TaylorJet`, a truncated power series in ``s`` held at every point of
a grid, and are refitted to spectra afterwards.
"""
from typing import NamedTuple

import numpy as np

from .errors import OrderMismatch, SingularFrame
from .fourier import (
    PeriodicFunction,
    eval_spectra,
    grid_size,
    grid_to_spectra,
    holder_norm,
    spectra_to_grid,
    theta_grid,
)


class TaylorJet:
    """Truncated power series in ``s``, one per grid point.

    ``coeffs`` has shape ``(L+1, npts)``; row ``j`` holds the ``s^j``
    coefficients.  Supports ``+ - * /``, ``sin``, ``cos`` and ``exp`` with the
    usual truncated-series recurrences.
    """

    __array_priority__ = 100
    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = np.asarray(coeffs, dtype=float)

    @classmethod
    def constant(cls, value, order, shape):
        shape = (shape,) if np.ndim(shape) == 0 else tuple(shape)
        c = np.zeros((order + 1,) + shape)
        c[0] = value
        return cls(c)

    @classmethod
    def variable(cls, value, order):
        """The jet ``value + s``."""
        value = np.asarray(value, dtype=float)
        c = np.zeros((order + 1,) + value.shape)
        c[0] = value
        if order >= 1:
            c[1] = 1.0
        return cls(c)

    @property
    def order(self):
        return self.coeffs.shape[0] - 1

    def value(self):
        return self.coeffs[0]

    def _other(self, other):
        if isinstance(other, TaylorJet):
            if other.order != self.order:
                raise OrderMismatch(f"jet orders {self.order} and {other.order}")
            return other.coeffs
        return None

    def __add__(self, other):
        oc = self._other(other)
        c = self.coeffs.copy()
        if oc is None:
            c[0] = c[0] + other
        else:
            c = c + oc
        return TaylorJet(c)

    __radd__ = __add__

    def __neg__(self):
        return TaylorJet(-self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        oc = self._other(other)
        if oc is None:
            return TaylorJet(self.coeffs * other)
        return TaylorJet(cauchy_product(self.coeffs, oc))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TaylorJet):
            return self * other.reciprocal()
        return TaylorJet(self.coeffs / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, n):
        n = int(n)
        if n < 0:
            return self.reciprocal() ** (-n)
        out = TaylorJet.constant(1.0, self.order, self.coeffs.shape[1:])
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def reciprocal(self):
        """``1/u`` by Newton iteration ``r <- r (2 - u r)``; order doubles per pass."""
        c0 = self.coeffs[0]
        if np.any(c0 == 0):
            raise ZeroDivisionError("jet reciprocal with zero constant term")
        L = self.order
        r = np.zeros_like(self.coeffs)
        r[0] = 1.0 / c0
        known = 1
        while known < L + 1:
            known = min(2 * known, L + 1)
            ur = cauchy_product(self.coeffs[:known], r[:known])
            corr = -ur
            corr[0] += 2.0
            r[:known] = cauchy_product(r[:known], corr)
        return TaylorJet(r)

    def _sincos(self):
        u = self.coeffs
        L = self.order
        s = np.zeros_like(u)
        c = np.zeros_like(u)
        s[0] = np.sin(u[0])
        c[0] = np.cos(u[0])
        for k in range(1, L + 1):
            j = np.arange(1, k + 1).reshape((-1,) + (1,) * (u.ndim - 1))
            ju = j * u[1 : k + 1]
            s[k] = np.sum(ju * c[k - 1 :: -1][:k], axis=0) / k
            c[k] = -np.sum(ju * s[k - 1 :: -1][:k], axis=0) / k
        return TaylorJet(s), TaylorJet(c)

    def sin(self):
        return self._sincos()[0]

    def cos(self):
        return self._sincos()[1]

    def exp(self):
        u = self.coeffs
        e = np.zeros_like(u)
        e[0] = np.exp(u[0])
        for k in range(1, self.order + 1):
            j = np.arange(1, k + 1).reshape((-1,) + (1,) * (u.ndim - 1))
            e[k] = np.sum(j * u[1 : k + 1] * e[k - 1 :: -1][:k], axis=0) / k
        return TaylorJet(e)

    def evaluate(self, s):
        """Horner evaluation at ``s`` (broadcast against the grid shape)."""
        out = np.zeros(np.broadcast_shapes(self.coeffs.shape[1:], np.shape(s)))
        for cj in self.coeffs[::-1]:
            out = out * s + cj
        return out


def cauchy_product(u, v):
    """Truncated Cauchy product along axis 0."""
    n = min(u.shape[0], v.shape[0])
    out = np.zeros(np.broadcast_shapes(u[:n].shape, v[:n].shape))
    for i in range(n):
        out[i:] += u[i] * v[: n - i]
    return out


def sin(u):
    return u.sin() if isinstance(u, TaylorJet) else np.sin(u)


def cos(u):
    return u.cos() if isinstance(u, TaylorJet) else np.cos(u)


def exp(u):
    return u.exp() if isinstance(u, TaylorJet) else np.exp(u)


class FourierTaylor:
    """Truncated Fourier-Taylor series with optional unit winding. Immutable."""

    __slots__ = ("spectra", "winding", "_values")

    def __init__(self, spectra, winding=0):
        spectra = np.array(spectra, dtype=complex)
        if spectra.ndim != 2 or spectra.shape[1] < 2:
            raise ValueError("spectra must have shape (order+1, n_modes+1)")
        spectra[:, 0] = spectra[:, 0].real
        spectra.setflags(write=False)
        if winding not in (0, 1):
            raise ValueError("winding must be 0 or 1")
        self.spectra = spectra
        self.winding = int(winding)
        self._values = None

    @classmethod
    def zeros(cls, order, n_modes, winding=0):
        return cls(np.zeros((order + 1, n_modes + 1), dtype=complex), winding)

    @classmethod
    def from_coeffs(cls, coeffs, winding=0, order=None):
        """Build from a list of PeriodicFunction (missing orders are zero)."""
        n = max(c.n_modes for c in coeffs)
        L = len(coeffs) - 1 if order is None else order
        spectra = np.zeros((L + 1, n + 1), dtype=complex)
        for j, c in enumerate(coeffs[: L + 1]):
            spectra[j] = c.resize(n).spectrum
        return cls(spectra, winding)

    @classmethod
    def from_values(cls, values, n_modes, winding=0):
        return cls(grid_to_spectra(values, n_modes), winding)

    @classmethod
    def constant(cls, value, order, n_modes):
        spectra = np.zeros((order + 1, n_modes + 1), dtype=complex)
        spectra[0, 0] = value
        return cls(spectra)

    @classmethod
    def monomial(cls, j, order, n_modes, coeff=None):
        """``coeff(theta) * s^j`` (coeff defaults to 1)."""
        spectra = np.zeros((order + 1, n_modes + 1), dtype=complex)
        if coeff is None:
            spectra[j, 0] = 1.0
        else:
            spectra[j] = coeff.resize(n_modes).spectrum
        return cls(spectra)

    @property
    def order(self):
        return self.spectra.shape[0] - 1

    @property
    def n_modes(self):
        return self.spectra.shape[1] - 1

    @property
    def grid(self):
        return theta_grid(grid_size(self.n_modes))

    def coeff(self, j):
        return PeriodicFunction(self.spectra[j])

    @property
    def coeffs(self):
        return [self.coeff(j) for j in range(self.order + 1)]

    @property
    def values(self):
        """Grid samples of the periodic coefficients, shape ``(L+1, G)``."""
        if self._values is None:
            v = spectra_to_grid(self.spectra)
            v.setflags(write=False)
            self._values = v
        return self._values

    def full_values(self):
        """Grid samples including the winding term in the ``s^0`` row."""
        v = np.array(self.values)
        if self.winding:
            v[0] += self.grid
        return v

    def jet(self):
        return TaylorJet(self.full_values())

    def __call__(self, theta, s):
        return self.evaluate(theta, s)

    def evaluate(self, theta, s):
        theta = np.asarray(theta, dtype=float)
        s = np.asarray(s, dtype=float)
        theta, s = np.broadcast_arrays(theta, s)
        coeffs = eval_spectra(self.spectra, theta)
        out = np.zeros(theta.shape)
        for cj in coeffs[::-1]:
            out = out * s + cj
        if self.winding:
            out = out + theta
        return out

    def with_spectra(self, spectra, winding=None):
        return FourierTaylor(spectra, self.winding if winding is None else winding)

    def periodic_part(self):
        return FourierTaylor(self.spectra, 0)

    def resize(self, order=None, n_modes=None):
        L = self.order if order is None else order
        n = self.n_modes if n_modes is None else n_modes
        out = np.zeros((L + 1, n + 1), dtype=complex)
        lj = min(L, self.order) + 1
        nk = min(n, self.n_modes) + 1
        out[:lj, :nk] = self.spectra[:lj, :nk]
        return FourierTaylor(out, self.winding)

    def _check(self, other):
        if other.order != self.order:
            raise OrderMismatch(f"orders {self.order} and {other.order} differ")
        if other.n_modes != self.n_modes:
            raise OrderMismatch(f"mode caps {self.n_modes} and {other.n_modes} differ")

    def __add__(self, other):
        if isinstance(other, FourierTaylor):
            self._check(other)
            return FourierTaylor(self.spectra + other.spectra, self.winding + other.winding)
        spectra = self.spectra.copy()
        spectra[0, 0] += other
        return FourierTaylor(spectra, self.winding)

    __radd__ = __add__

    def __neg__(self):
        if self.winding:
            raise ValueError("cannot negate a series with winding")
        return FourierTaylor(-self.spectra)

    def __sub__(self, other):
        if isinstance(other, FourierTaylor):
            self._check(other)
            return FourierTaylor(self.spectra - other.spectra, self.winding - other.winding)
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, FourierTaylor):
            return ft_mul(self, other)
        if isinstance(other, PeriodicFunction):
            return ft_mul(self, FourierTaylor.monomial(0, self.order, self.n_modes, other))
        if self.winding:
            raise ValueError("scalar multiple of a series with winding")
        return FourierTaylor(self.spectra * other)

    __rmul__ = __mul__

    def d_theta(self):
        k = np.arange(self.n_modes + 1)
        spectra = 2j * np.pi * k * self.spectra
        if self.winding:
            spectra[0, 0] += 1.0
        return FourierTaylor(spectra)

    def d_s(self):
        spectra = np.zeros_like(self.spectra)
        j = np.arange(1, self.order + 1)[:, None]
        spectra[:-1] = j * self.spectra[1:]
        return FourierTaylor(spectra)

    def times_s(self):
        """``s * u`` truncated at the same order (periodic part only)."""
        spectra = np.zeros_like(self.spectra)
        spectra[1:] = self.spectra[:-1]
        return FourierTaylor(spectra)

    def __repr__(self):
        return f"FourierTaylor(order={self.order}, n_modes={self.n_modes}, winding={self.winding})"


class FTPair(NamedTuple):
    x: FourierTaylor
    y: FourierTaylor

    def __add__(self, other):
        return FTPair(self.x + other.x, self.y + other.y)

    def __sub__(self, other):
        return FTPair(self.x - other.x, self.y - other.y)

    def evaluate(self, theta, s):
        return self.x.evaluate(theta, s), self.y.evaluate(theta, s)

    def norm(self, r, delta):
        return ft_norm(self.x.periodic_part(), r, delta) + ft_norm(self.y.periodic_part(), r, delta)

    def smooth(self, t):
        return FTPair(ft_smooth(self.x, t), ft_smooth(self.y, t))


class FTMatrix(NamedTuple):
    xx: FourierTaylor
    xy: FourierTaylor
    yx: FourierTaylor
    yy: FourierTaylor

    @classmethod
    def identity(cls, order, n_modes):
        one = FourierTaylor.constant(1.0, order, n_modes)
        zero = FourierTaylor.zeros(order, n_modes)
        return cls(one, zero, zero, one)

    def matvec(self, v):
        jets = _matvec_jets(self.jets(), (v.x.jet(), v.y.jet()))
        n = self.xx.n_modes
        return FTPair(*(FourierTaylor.from_values(j.coeffs, n) for j in jets))

    def matmul(self, other):
        a, b, c, d = self.jets()
        e, f, g, h = other.jets()
        n = self.xx.n_modes
        out = (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
        return FTMatrix(*(FourierTaylor.from_values(j.coeffs, n) for j in out))

    def jets(self):
        return tuple(m.jet() for m in self)

    def evaluate(self, theta, s):
        return np.array([[self.xx(theta, s), self.xy(theta, s)], [self.yx(theta, s), self.yy(theta, s)]])


def _matvec_jets(m, v):
    a, b, c, d = m
    return a * v[0] + b * v[1], c * v[0] + d * v[1]


def ft_mul(u, v):
    """Product of two series with zero winding, truncated at order L."""
    if u.winding or v.winding:
        raise ValueError("ft_mul acts on periodic parts (winding 0) only")
    if u.order != v.order:
        raise OrderMismatch(f"orders {u.order} and {v.order} differ")
    n = max(u.n_modes, v.n_modes)
    u, v = u.resize(n_modes=n), v.resize(n_modes=n)
    return FourierTaylor.from_values(cauchy_product(u.values, v.values), n)


def _powers(values, order):
    """Rows ``values**j`` for ``j = 0..order``."""
    out = np.ones((order + 1,) + np.shape(values))
    for j in range(1, order + 1):
        out[j] = out[j - 1] * values
    return out


def ft_compose_inner(u, a, lam):
    """``u(a(theta), lam(theta) s)``, keeping u's mode cap and order."""
    n = u.n_modes
    th = theta_grid(grid_size(n))
    x = a.lift(th)
    vals = eval_spectra(u.spectra, x)
    lam_vals = eval_spectra(lam.spectrum, th) if isinstance(lam, PeriodicFunction) else np.full(th.shape, float(lam))
    vals *= _powers(lam_vals, u.order)
    if u.winding:
        vals[0] += x - th
    return FourierTaylor.from_values(vals, n, u.winding)


def ft_norm(u, r, delta):
    """Grid estimator of the X^{r,delta} norm of the periodic part."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    return float(sum(holder_norm(c, r) * delta**j for j, c in enumerate(u.coeffs)))


def ft_smooth(u, t):
    """Low-pass every s-coefficient at cutoff t; s-direction untouched."""
    if not t > 0:
        raise ValueError(f"smoothing cutoff must be positive, got {t}")
    k = np.arange(u.n_modes + 1)
    return FourierTaylor(np.where(k <= t, u.spectra, 0.0), u.winding)


def jet_det(M):
    a, b, c, d = M.jets()
    return a * d - b * c


def jet_matrix_inverse(M, threshold=1e-8):
    """Inverse of a 2x2 matrix of series: adjugate times the series reciprocal of det."""
    a, b, c, d = M.jets()
    det = a * d - b * c
    det0 = np.abs(det.coeffs[0])
    if det0.min() < threshold:
        raise SingularFrame(f"min |det| = {det0.min():.3e} below {threshold:.1e}")
    rdet = det.reciprocal()
    n = M.xx.n_modes
    inv = (d * rdet, -b * rdet, -c * rdet, a * rdet)
    return FTMatrix(*(FourierTaylor.from_values(j.coeffs, n) for j in inv))


def coefficient_sup_norms(u):
    return np.array([float(np.max(np.abs(row))) for row in u.values])


def analyticity_radius_estimate(u, rel_floor=1e-14):
    """Radius of convergence in s from the decay of sup-norms of the coefficients.

    Fits ``log ||u_j||`` linearly in ``j`` over the top half of the orders;
    the radius is ``exp(-slope)``.  Coefficients below ``rel_floor`` times the
    largest one count as zero; with fewer than two nonzero points left the
    series is treated as a polynomial and ``inf`` is returned.
    """
    if u.order < 4:
        raise ValueError("analyticity radius estimate needs order >= 4")
    norms = coefficient_sup_norms(u)
    top = max(norms.max(), 1e-300)
    j = np.arange(u.order // 2, u.order + 1)
    n = norms[j]
    keep = n > rel_floor * top
    if keep.sum() < 2:
        return float("inf")
    slope = np.polyfit(j[keep], np.log(n[keep]), 1)[0]
    return float(np.exp(-slope))


def taylor_tail_ratio(u, delta):
    """``||u_L|| delta^L / sum_j ||u_j|| delta^j`` with sup-norm estimators."""
    norms = coefficient_sup_norms(u) * delta ** np.arange(u.order + 1)
    total = norms.sum()
    return float(norms[-1] / total) if total > 0 else 0.0
