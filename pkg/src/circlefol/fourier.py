"""Real periodic functions on T = R/Z and degree-1 circle maps.

A :class:`PeriodicFunction` stores the non-negative half of a Hermitian
Fourier spectrum,

    f(theta) = sum_{|k| <= N} c_k exp(2 pi i k theta),    c_{-k} = conj(c_k),

as the complex array ``(c_0, ..., c_N)``.  Its native sampling grid has
``grid_size(N) = 4N`` equispaced points, i.e. twice the Nyquist requirement,
so that products of two band-limited functions are resolved without aliasing
and compositions are evaluated on an oversampled grid before refitting.
"""
import math

import numpy as np

from .errors import InvalidRegularity, NoConvergence, NotADiffeomorphism

TWO_PI = 2.0 * np.pi


def grid_size(n_modes):
    return 4 * max(int(n_modes), 1)


def theta_grid(n_points):
    return np.arange(n_points) / n_points


def _hermitian_weights(n_modes):
    w = np.full(n_modes + 1, 2.0)
    w[0] = 1.0
    return w


def eval_spectra(spectra, x):
    """Evaluate one or several half-spectra at arbitrary points.

    ``spectra`` has shape ``(N+1,)`` or ``(m, N+1)``; the result has shape
    ``x.shape`` or ``(m,) + x.shape``.  Direct summation, so exact for the
    represented trigonometric polynomial at any real ``x``.
    """
    spectra = np.asarray(spectra)
    x = np.asarray(x, dtype=float)
    n = spectra.shape[-1] - 1
    k = np.arange(n + 1)
    basis = np.exp(1j * TWO_PI * np.multiply.outer(x.ravel(), k))
    weighted = spectra * _hermitian_weights(n)
    vals = (weighted @ basis.T).real
    return vals.reshape(spectra.shape[:-1] + x.shape)


def spectra_to_grid(spectra, n_points=None):
    """Sample half-spectra on the equispaced grid of ``n_points`` points."""
    spectra = np.asarray(spectra)
    n = spectra.shape[-1] - 1
    g = grid_size(n) if n_points is None else n_points
    if g // 2 + 1 < n + 1:
        raise ValueError(f"grid of {g} points cannot resolve {n} modes")
    padded = np.zeros(spectra.shape[:-1] + (g // 2 + 1,), dtype=complex)
    padded[..., : n + 1] = spectra
    # Nyquist bin (even g) must stay real for irfft.
    return np.fft.irfft(padded * g, n=g, axis=-1)


def grid_to_spectra(values, n_modes):
    """Least-squares projection of grid samples onto modes ``|k| <= n_modes``."""
    values = np.asarray(values, dtype=float)
    g = values.shape[-1]
    c = np.fft.rfft(values, axis=-1) / g
    out = np.zeros(values.shape[:-1] + (n_modes + 1,), dtype=complex)
    m = min(n_modes + 1, c.shape[-1])
    out[..., :m] = c[..., :m]
    if g % 2 == 0 and m == g // 2 + 1:
        # a Nyquist coefficient carries both +-k/2; halve to keep Hermitian sum
        out[..., m - 1] *= 0.5
    out[..., 0] = out[..., 0].real
    return out


class PeriodicFunction:
    """Finite Fourier series of a real function on the circle. Immutable."""

    __slots__ = ("spectrum", "_values")

    def __init__(self, spectrum):
        spec = np.array(spectrum, dtype=complex).ravel()
        if spec.size < 2:
            spec = np.concatenate([spec, np.zeros(2 - spec.size, dtype=complex)])
        spec[0] = spec[0].real
        spec.setflags(write=False)
        self.spectrum = spec
        self._values = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def constant(cls, value, n_modes):
        spec = np.zeros(n_modes + 1, dtype=complex)
        spec[0] = value
        return cls(spec)

    @classmethod
    def zeros(cls, n_modes):
        return cls(np.zeros(n_modes + 1, dtype=complex))

    @classmethod
    def from_samples(cls, values, n_modes):
        return cls(grid_to_spectra(values, n_modes))

    @classmethod
    def from_callable(cls, fn, n_modes, n_points=None):
        g = grid_size(n_modes) if n_points is None else n_points
        return cls.from_samples(fn(theta_grid(g)), n_modes)

    @classmethod
    def from_cos_sin(cls, n_modes, mean=0.0, cos=None, sin=None):
        """Build ``mean + sum_k cos[k] cos(2 pi k t) + sin[k] sin(2 pi k t)``.

        ``cos`` and ``sin`` are dicts mapping positive mode numbers to amplitudes.
        """
        spec = np.zeros(n_modes + 1, dtype=complex)
        spec[0] = mean
        for k, v in (cos or {}).items():
            spec[k] += 0.5 * v
        for k, v in (sin or {}).items():
            spec[k] += -0.5j * v
        return cls(spec)

    # -- views ------------------------------------------------------------
    @property
    def n_modes(self):
        return self.spectrum.size - 1

    @property
    def grid(self):
        return theta_grid(grid_size(self.n_modes))

    @property
    def values(self):
        """Samples on the native grid (cached)."""
        if self._values is None:
            v = spectra_to_grid(self.spectrum)
            v.setflags(write=False)
            self._values = v
        return self._values

    def sample(self, n_points):
        return spectra_to_grid(self.spectrum, n_points)

    def __call__(self, theta):
        return eval_periodic(self, theta)

    def mean(self):
        return float(self.spectrum[0].real)

    def resize(self, n_modes):
        if n_modes == self.n_modes:
            return self
        spec = np.zeros(n_modes + 1, dtype=complex)
        m = min(n_modes, self.n_modes) + 1
        spec[:m] = self.spectrum[:m]
        return PeriodicFunction(spec)

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, PeriodicFunction):
            n = max(self.n_modes, other.n_modes)
            return self.resize(n), other.resize(n)
        return None

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is None:
            spec = self.spectrum.copy()
            spec[0] += other
            return PeriodicFunction(spec)
        return PeriodicFunction(pair[0].spectrum + pair[1].spectrum)

    __radd__ = __add__

    def __neg__(self):
        return PeriodicFunction(-self.spectrum)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return PeriodicFunction(self.spectrum * other)
        f, g = pair
        return PeriodicFunction.from_samples(f.values * g.values, f.n_modes)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PeriodicFunction):
            return self.map_values(lambda v, w: v / w, other)
        return PeriodicFunction(self.spectrum / other)

    def map_values(self, fn, *others):
        """Apply a pointwise function on the native grid and refit."""
        n = max([self.n_modes] + [o.n_modes for o in others])
        vals = [self.resize(n).values] + [o.resize(n).values for o in others]
        return PeriodicFunction.from_samples(fn(*vals), n)

    def __repr__(self):
        return f"PeriodicFunction(n_modes={self.n_modes}, mean={self.mean():.6g})"


def eval_periodic(pf, theta):
    """Value of ``pf`` at lift coordinate(s) ``theta`` (period-1 wrap)."""
    out = eval_spectra(pf.spectrum, theta)
    return float(out) if np.ndim(out) == 0 else out


def differentiate(pf):
    k = np.arange(pf.n_modes + 1)
    return PeriodicFunction(1j * TWO_PI * k * pf.spectrum)


def sup_norm(pf):
    return float(np.max(np.abs(pf.values)))


def holder_norm(pf, r):
    """Grid estimator of the C^r norm.

    For ``r = n + alpha`` returns ``max(max_{p<=n} sup|D^p f|, H_alpha(D^n f))``
    where sups are taken over the native grid and the Hoelder quotient over
    grid pairs at dyadic separations ``2^-m``.  Every term is a lower bound of
    the true supremum.
    """
    if r < 0 or not np.isfinite(r):
        raise InvalidRegularity(f"regularity must be a finite r >= 0, got {r}")
    n = int(math.floor(r))
    alpha = r - n
    best = 0.0
    g = pf
    for p in range(n + 1):
        if p:
            g = differentiate(g)
        best = max(best, sup_norm(g))
    if alpha > 0:
        best = max(best, _holder_seminorm(g.values, alpha))
    return best


def _holder_seminorm(vals, alpha):
    g = vals.size
    h = 0.0
    for m in range(1, int(math.log2(g)) + 1):
        shift = int(round(g / 2**m))
        if shift < 1:
            break
        d = min(shift, g - shift) / g
        diff = np.abs(vals - np.roll(vals, -shift))
        h = max(h, float(diff.max()) / d**alpha)
    return h


def smooth_periodic(pf, t):
    """Sharp low-pass filter: keep modes ``|k| <= t``."""
    if not t > 0:
        raise ValueError(f"smoothing cutoff must be positive, got {t}")
    k = np.arange(pf.n_modes + 1)
    return PeriodicFunction(np.where(k <= t, pf.spectrum, 0.0))


class CircleMap:
    """Lift ``theta -> theta + p(theta)`` of a degree-1 circle map."""

    __slots__ = ("periodic_part",)
    degree = 1

    def __init__(self, periodic_part):
        self.periodic_part = periodic_part

    @classmethod
    def rotation(cls, omega, n_modes):
        return cls(PeriodicFunction.constant(omega, n_modes))

    @classmethod
    def identity(cls, n_modes):
        return cls(PeriodicFunction.zeros(n_modes))

    @property
    def n_modes(self):
        return self.periodic_part.n_modes

    def __call__(self, theta):
        return self.lift(theta)

    def lift(self, theta):
        theta = np.asarray(theta, dtype=float)
        return theta + eval_spectra(self.periodic_part.spectrum, theta)

    def grid_lift(self):
        p = self.periodic_part
        return p.grid + p.values

    def derivative(self):
        return differentiate(self.periodic_part) + 1.0

    def min_derivative(self):
        return float(np.min(self.derivative().values))

    def is_diffeomorphism(self):
        return self.min_derivative() > 0.0

    def compose(self, other):
        """Return ``self o other``."""
        n = max(self.n_modes, other.n_modes)
        q = other.periodic_part.resize(n)
        x = q.grid + q.values
        vals = q.values + eval_spectra(self.periodic_part.spectrum, x)
        return CircleMap(PeriodicFunction.from_samples(vals, n))

    def shifted(self, delta):
        """Additive update of the periodic part."""
        return CircleMap(self.periodic_part + delta)

    def __repr__(self):
        return f"CircleMap(n_modes={self.n_modes}, mean_shift={self.periodic_part.mean():.6g})"


def compose_with_circle_map(pf, a):
    """Fourier representation of ``theta -> pf(a(theta))`` with pf's mode cap."""
    x = a.lift(pf.grid)
    return PeriodicFunction.from_samples(eval_spectra(pf.spectrum, x), pf.n_modes)


def invert_circle_map(a, max_iter=50, tol=1e-15):
    """Inverse circle map via safeguarded pointwise Newton on the lift.

    Each grid point ``y`` solves ``x + p(x) = y``; iterates leaving the
    current bracket fall back to bisection.
    """
    if not a.is_diffeomorphism():
        raise NotADiffeomorphism(
            f"min Da = {a.min_derivative():.3e} <= 0; map is not invertible"
        )
    p = a.periodic_part
    dp = differentiate(p)
    y = p.grid
    pmax = float(p.values.max())
    pmin = float(p.values.min())
    margin = 1e-3 * (pmax - pmin) + 1e-12
    lo = y - pmax - margin
    hi = y - pmin + margin
    # widen brackets the grid sup may have missed
    for _ in range(60):
        bad_lo = a.lift(lo) > y
        bad_hi = a.lift(hi) < y
        if not (bad_lo.any() or bad_hi.any()):
            break
        lo = np.where(bad_lo, lo - 2 * margin, lo)
        hi = np.where(bad_hi, hi + 2 * margin, hi)
        margin *= 2
    x = y - p.values
    done = np.zeros(y.shape, dtype=bool)
    for _ in range(max_iter):
        fx = x + eval_spectra(p.spectrum, x) - y
        lo = np.where(fx < 0, x, lo)
        hi = np.where(fx > 0, x, hi)
        d = 1.0 + eval_spectra(dp.spectrum, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_new = x - fx / d
        outside = ~((x_new > lo) & (x_new < hi)) | ~np.isfinite(x_new)
        x_new = np.where(outside, 0.5 * (lo + hi), x_new)
        step = np.abs(x_new - x)
        done = (step <= tol * np.maximum(1.0, np.abs(x))) | (np.abs(fx) <= 4e-16 * np.maximum(1.0, np.abs(y)))
        x = np.where(done, x, x_new)
        if done.all():
            break
    else:
        raise NoConvergence(f"circle-map inversion: {int((~done).sum())} points unresolved")
    return CircleMap(PeriodicFunction.from_samples(x - y, p.n_modes))
