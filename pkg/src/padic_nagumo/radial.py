"""Radial step functions on Q_p and their exact Fourier calculus.

A :class:`RadialField` holds one value on the inner ball B_{j_min} and one
value per shell S_k for j_min < k <= j_max; it vanishes outside B_{j_max}.
The class is closed under pointwise algebra and under the Fourier
transform, which maps window [j_min, j_max] to [-j_max, -j_min].

Values are float64 by default. Passing :class:`fractions.Fraction` values
gives an object-dtype field on which ``fourier``, ``integral`` and
``norm_L2_squared`` are exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import DivergentConstant, InvalidArgument, InvalidWindow
from .padic import check_prime, rational_valuation


@dataclass(frozen=True, eq=False)
class RadialField:
    p: int
    j_min: int
    j_max: int
    ball_value: float
    shell_values: np.ndarray

    def __post_init__(self):
        check_prime(self.p)
        if self.j_min > self.j_max:
            raise InvalidWindow(f"j_min={self.j_min} > j_max={self.j_max}")
        shells = np.asarray(self.shell_values)
        exact = shells.dtype == object or isinstance(self.ball_value, Fraction)
        if exact:
            shells = np.array([Fraction(x) for x in shells.ravel()], dtype=object)
            object.__setattr__(self, "ball_value", Fraction(self.ball_value))
        else:
            shells = np.array(shells, dtype=float).ravel()
            object.__setattr__(self, "ball_value", float(self.ball_value))
        if shells.shape != (self.j_max - self.j_min,):
            raise InvalidArgument(
                f"expected {self.j_max - self.j_min} shell values, got {shells.shape}"
            )
        shells.flags.writeable = False
        object.__setattr__(self, "shell_values", shells)

    @classmethod
    def from_values(cls, p: int, j_min: int, values) -> RadialField:
        """Build from the stacked array ``[ball_value, shell_values...]``."""
        values = np.asarray(values)
        return cls(p, j_min, j_min + len(values) - 1, values[0], values[1:])

    @classmethod
    def zero(cls, p: int, j_min: int = 0, j_max: int = 0) -> RadialField:
        return cls(p, j_min, j_max, 0.0, np.zeros(j_max - j_min))

    @property
    def exact(self) -> bool:
        return self.shell_values.dtype == object

    @property
    def shells(self) -> np.ndarray:
        """Shell indices j_min..j_max aligned with :attr:`values`."""
        return np.arange(self.j_min, self.j_max + 1)

    @property
    def values(self) -> np.ndarray:
        dtype = object if self.exact else float
        out = np.empty(self.j_max - self.j_min + 1, dtype=dtype)
        out[0] = self.ball_value
        out[1:] = self.shell_values
        return out

    def measures(self) -> np.ndarray:
        """Haar measure of each region: the inner ball, then each shell."""
        return _region_measures(self.p, self.j_min, self.j_max, self.exact)

    def value_on_shell(self, k: int):
        if k <= self.j_min:
            return self.ball_value
        if k <= self.j_max:
            return self.shell_values[k - self.j_min - 1]
        return Fraction(0) if self.exact else 0.0

    def __call__(self, x):
        """Evaluate at a rational point x of Q_p."""
        v = rational_valuation(Fraction(x), self.p)
        if v == math.inf:
            return self.ball_value
        return self.value_on_shell(-v)

    def extended(self, j_min: int, j_max: int) -> RadialField:
        """Same function on a window containing the current one (lossless)."""
        if j_min > self.j_min or j_max < self.j_max:
            raise InvalidArgument("extended() only enlarges the window")
        ks = np.arange(j_min + 1, j_max + 1)
        vals = [self.value_on_shell(int(k)) for k in ks]
        dtype = object if self.exact else float
        return RadialField(self.p, j_min, j_max, self.ball_value, np.array(vals, dtype=dtype))

    def to_float(self) -> RadialField:
        if not self.exact:
            return self
        return RadialField(
            self.p, self.j_min, self.j_max, float(self.ball_value),
            self.shell_values.astype(float),
        )

    def __repr__(self):
        return (
            f"RadialField(p={self.p}, window=[{self.j_min}, {self.j_max}], "
            f"ball={self.ball_value!r}, shells={np.array2string(self.shell_values, precision=4)})"
        )


def _pow(p: int, ks: np.ndarray, exact: bool) -> np.ndarray:
    if exact:
        return np.array([Fraction(p) ** int(k) for k in ks], dtype=object)
    return np.power(float(p), ks.astype(float))


def _region_measures(p: int, j_min: int, j_max: int, exact: bool) -> np.ndarray:
    ks = np.arange(j_min, j_max + 1)
    mu = _pow(p, ks, exact)
    factor = Fraction(p - 1, p) if exact else (p - 1) / p
    mu[1:] = mu[1:] * factor
    return mu


def fsum_safe(terms: np.ndarray):
    if terms.dtype == object:
        return sum(terms, Fraction(0))
    if not np.all(np.isfinite(terms)):
        # fsum raises on inf - inf; let overflow surface as inf or nan
        return float(np.sum(terms))
    return math.fsum(terms)


def from_profile(p: int, j_min: int, j_max: int, profile: Callable[[int], float]) -> RadialField:
    """Sample ``profile(k)`` on each shell; the inner ball takes ``profile(j_min)``."""
    if j_min > j_max:
        raise InvalidWindow(f"j_min={j_min} > j_max={j_max}")
    vals = [profile(k) for k in range(j_min, j_max + 1)]
    exact = any(isinstance(v, Fraction) for v in vals)
    return RadialField.from_values(p, j_min, np.array(vals, dtype=object if exact else float))


def gaussian_profile(p: int, amplitude: float, width: float) -> Callable[[int], float]:
    """amplitude * exp(-p^|ord(x)| / width); on S_j the order is -j."""
    return lambda j: amplitude * math.exp(-float(p) ** abs(j) / width)


def ball_indicator(p: int, k: int) -> RadialField:
    """1 on B_k, as a one-region field."""
    return RadialField(p, k, k, 1.0, np.zeros(0))


def _common(f: RadialField, g: RadialField) -> tuple[RadialField, RadialField]:
    if f.p != g.p:
        raise InvalidArgument(f"fields over different primes {f.p} and {g.p}")
    lo, hi = min(f.j_min, g.j_min), max(f.j_max, g.j_max)
    f2 = f if (f.j_min, f.j_max) == (lo, hi) else f.extended(lo, hi)
    g2 = g if (g.j_min, g.j_max) == (lo, hi) else g.extended(lo, hi)
    return f2, g2


def pointwise_map(f: RadialField, g: Callable) -> RadialField:
    """Apply ``g`` region by region. ``g(0)`` must be 0 to keep compact support."""
    if f.exact:
        zero = g(Fraction(0))
        vals = np.array([g(v) for v in f.values], dtype=object)
    else:
        zero = np.asarray(g(np.zeros(1)))[0]
        vals = np.asarray(g(f.values), dtype=float)
    if zero != 0:
        raise InvalidArgument("pointwise map must send 0 to 0")
    return RadialField.from_values(f.p, f.j_min, vals)


def linear_combine(a, f: RadialField, b, g: RadialField) -> RadialField:
    """a*f + b*g on the union of the two windows."""
    f2, g2 = _common(f, g)
    return RadialField.from_values(f.p, f2.j_min, a * f2.values + b * g2.values)


def multiply(f: RadialField, g: RadialField) -> RadialField:
    f2, g2 = _common(f, g)
    return RadialField.from_values(f.p, f2.j_min, f2.values * g2.values)


def scale(c, f: RadialField) -> RadialField:
    return RadialField.from_values(f.p, f.j_min, c * f.values)


def fourier(f: RadialField) -> RadialField:
    """Exact Fourier transform of a radial step function.

    Writes f as a sum of ball indicators, sum_k a_k 1_{B_k}, and uses
    F[1_{B_k}] = p^k 1_{B_{-k}}. The result lives on [-j_max, -j_min];
    its value on S_m is the partial sum of a_k p^k over k <= -m.
    Radial fields are even, so the same map is also the inverse transform.
    """
    vals = f.values
    diffs = vals.copy()
    diffs[:-1] = vals[:-1] - vals[1:]
    terms = diffs * _pow(f.p, f.shells, f.exact)
    partial = np.cumsum(terms) if not f.exact else np.array(
        list(_accumulate(terms)), dtype=object
    )
    return RadialField.from_values(f.p, -f.j_max, partial[::-1])


def _accumulate(terms):
    total = Fraction(0)
    for t in terms:
        total += t
        yield total


def integral(f: RadialField):
    return fsum_safe(f.values * f.measures())


def norm_L2_squared(f: RadialField):
    vals = f.values
    return fsum_safe(vals * vals * f.measures())


def norm_L2(f: RadialField) -> float:
    return math.sqrt(float(norm_L2_squared(f)))


def norm_sup(f: RadialField) -> float:
    return float(np.max(np.abs(f.values.astype(float))))


def sobolev_weights(p: int, j_min: int, j_max: int, s: float) -> np.ndarray:
    """Integral of [xi]^s over each region of the window, as floats."""
    ks = np.arange(j_min + 1, j_max + 1, dtype=float)
    shell_mu = np.power(float(p), ks) * (p - 1) / p
    shell_w = shell_mu * np.power(float(p), np.maximum(ks, 0.0) * s)
    if j_min <= 0:
        ball_w = float(p) ** j_min
    else:
        inner = np.arange(1, j_min + 1, dtype=float)
        ball_w = 1.0 + math.fsum(
            np.power(float(p), inner) * (p - 1) / p * np.power(float(p), inner * s)
        )
    return np.concatenate(([ball_w], shell_w))


def norm_sobolev(f: RadialField, s: float) -> float:
    """||f||_s with ||f||_s^2 = integral of [xi]_p^s |F f(xi)|^2."""
    if not math.isfinite(s):
        raise InvalidArgument("Sobolev index must be finite")
    fh = fourier(f.to_float())
    vals = fh.values
    w = sobolev_weights(f.p, fh.j_min, fh.j_max, s)
    return math.sqrt(fsum_safe(w * vals * vals))


def embedding_constant_A(p: int, s: float) -> float:
    """A(1, s) with A^2 = integral of [xi]_p^(-s), so ||F f||_1 <= A ||f||_s."""
    check_prime(p)
    if s <= 1:
        raise DivergentConstant(f"A(1, s) diverges for s <= 1 (got s={s})")
    r = float(p) ** (1.0 - s)
    return math.sqrt(1.0 + (1.0 - 1.0 / p) * r / (1.0 - r))


def retruncate(f: RadialField, j_min: int, j_max: int) -> tuple[RadialField, float]:
    """Restrict ``f`` to a new window and report the L2 norm of what is lost.

    Coarsening the inner ball replaces f there by its mean (the L2
    projection); shells above ``j_max`` are dropped.
    """
    if j_min > j_max:
        raise InvalidWindow(f"j_min={j_min} > j_max={j_max}")
    lo, hi = min(j_min, f.j_min), max(j_max, f.j_max)
    full = f if (lo, hi) == (f.j_min, f.j_max) else f.extended(lo, hi)
    vals = full.values.astype(float)
    mu = full.measures().astype(float)
    inner = slice(0, j_min - lo + 1)
    outer = slice(j_max - lo + 1, None)
    inner_mass = fsum_safe(vals[inner] * mu[inner])
    ball = inner_mass / float(f.p) ** j_min
    lost = fsum_safe(((vals[inner] - ball) ** 2) * mu[inner]) + fsum_safe(
        vals[outer] ** 2 * mu[outer]
    )
    kept = vals[j_min - lo + 1: j_max - lo + 1]
    out = RadialField(f.p, j_min, j_max, ball, kept)
    return out, math.sqrt(max(lost, 0.0))
