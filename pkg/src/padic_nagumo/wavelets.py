"""Kozyrev wavelets, the blow-up weight and the scalar comparison ODE.

Psi_{r,n,j}(x) = p^{-r/2} chi_p(p^{-1} j (p^r x - n)) Omega(|p^r x - n|_p)
is supported on the ball |x - p^{-r} n|_p <= p^r and is an eigenfunction of
every radial multiplier m(|xi|) with eigenvalue m at |xi|_p = p^{1-r}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import InvalidArgument, Unsupported
from .padic import (
    PadicPoint,
    char_eval,
    char_shell_integral,
    check_prime,
    fractional_part,
    rational_valuation,
    shell_measure,
)
from .radial import RadialField, fsum_safe


@dataclass(frozen=True)
class WaveletIndex:
    """Address (r, n, j) of Psi_{rnj}.

    ``n`` is a representative of Q_p / Z_p, i.e. a rational in [0, 1) whose
    denominator is a power of p.
    """

    p: int
    r: int
    n: Fraction
    j: int

    def __post_init__(self):
        check_prime(self.p)
        if not 1 <= self.j <= self.p - 1:
            raise InvalidArgument(f"j must lie in 1..{self.p - 1}")
        n = Fraction(self.n)
        if fractional_part(n, self.p) != n:
            raise InvalidArgument("n must have negative-power digits only")
        object.__setattr__(self, "n", n)


def _point(x, p: int) -> Fraction:
    if isinstance(x, PadicPoint):
        return x.to_fraction()
    return Fraction(x)


def wavelet_eval(idx: WaveletIndex, x) -> complex:
    p = idx.p
    z = Fraction(p) ** idx.r * _point(x, p) - idx.n
    if rational_valuation(z, p) < 0:
        return 0j
    amp = float(p) ** (-idx.r / 2.0)
    return amp * char_eval(p, Fraction(idx.j, p) * z)


def multiplier_eigenvalue(m: Callable[[np.ndarray], np.ndarray], r: int) -> float:
    """Eigenvalue of the radial multiplier on Psi_{r n j}: m at Fourier shell 1 - r."""
    return float(np.asarray(m(np.array([1 - r])), dtype=float)[0])


@dataclass(frozen=True)
class BlowupWeight:
    """Radial shell integrals of the weight paired against the solution.

    ``kind == "signed"``: w = Re(Psi_{r,0,1}^2) = p^{-r} cos(2 pi {2 p^{r-1} x}_p)
    on B_r, the eigenfunction used for G(t). ``kind == "modulus"``:
    |Psi_{r,0,1}|^2 = p^{-r} 1_{B_r}, a probability density but not an
    eigenfunction.
    """

    p: int
    r: int
    alpha: float
    kind: str = "signed"

    def __post_init__(self):
        if self.kind not in ("signed", "modulus"):
            raise InvalidArgument(f"unknown weight kind {self.kind!r}")

    @property
    def eigenvalue_alpha(self) -> float:
        return float(self.p) ** ((1 - self.r) * self.alpha)

    def shell_integral(self, k: int) -> Fraction:
        """Integral of w over S_k."""
        if k > self.r:
            return Fraction(0)
        amp = Fraction(self.p) ** (-self.r)
        if self.kind == "modulus":
            return amp * shell_measure(self.p, k)
        # frequency a = 2 p^{r-1}: |a|_p = p^{1-r} for odd p
        return amp * char_shell_integral(self.p, 1 - self.r, k)

    def ball_integral(self, k: int) -> Fraction:
        """Integral of w over B_k."""
        amp = Fraction(self.p) ** (-self.r)
        if self.kind == "modulus":
            return amp * Fraction(self.p) ** min(k, self.r)
        if k <= self.r - 1:
            return amp * Fraction(self.p) ** k
        return Fraction(0)

    def shell_integrals(self, k_lo: int, k_hi: int) -> dict[int, Fraction]:
        return {k: self.shell_integral(k) for k in range(k_lo, k_hi + 1)}

    def __call__(self, x) -> float:
        """Pointwise value of w."""
        x = Fraction(x)
        if rational_valuation(x, self.p) < -self.r:
            return 0.0
        amp = float(self.p) ** (-self.r)
        if self.kind == "modulus":
            return amp
        return amp * char_eval(self.p, 2 * Fraction(self.p) ** (self.r - 1) * x).real


def blowup_weight_build(p: int, r: int, alpha: float, kind: str = "signed") -> BlowupWeight:
    check_prime(p)
    if p == 2:
        raise Unsupported("the weight needs j = 2 <= p - 1, so p >= 3")
    if r > 0:
        raise InvalidArgument("the comparison argument needs r <= 0")
    return BlowupWeight(p, r, alpha, kind)


def pairing_G(u: RadialField, w: BlowupWeight) -> float:
    """G = integral of u w, exact given the shell-integral tables."""
    if u.p != w.p:
        raise InvalidArgument("field and weight use different primes")
    terms = [float(w.ball_integral(u.j_min)) * u.ball_value]
    hi = min(u.j_max, w.r)
    for k in range(u.j_min + 1, hi + 1):
        terms.append(float(w.shell_integral(k)) * float(u.shell_values[k - u.j_min - 1]))
    return float(fsum_safe(np.array(terms, dtype=float)))


@dataclass(frozen=True)
class ComparisonODE:
    """H(y) = -gamma p^{(1-r) alpha} y + F(y) + p^{(1-r) alpha1} y^3,
    with F(y) = -y^3 + (beta + 1) y^2 - beta y."""

    p: int
    gamma: float
    alpha: float
    alpha1: float
    beta: float
    r: int

    @property
    def _lin(self) -> float:
        return self.gamma * float(self.p) ** ((1 - self.r) * self.alpha)

    @property
    def _cub(self) -> float:
        return float(self.p) ** ((1 - self.r) * self.alpha1)

    def H(self, y: float) -> float:
        return (self._cub - 1.0) * y**3 + (self.beta + 1.0) * y**2 - (self.beta + self._lin) * y

    def H_prime(self, y: float) -> float:
        return 3.0 * (self._cub - 1.0) * y**2 + 2.0 * (self.beta + 1.0) * y - (self.beta + self._lin)

    def H_second(self, y: float) -> float:
        return 6.0 * y * (self._cub - 1.0) + 2.0 * (self.beta + 1.0)


def comparison_H(y, gamma, alpha, alpha1, beta, r, p) -> float:
    return ComparisonODE(p, gamma, alpha, alpha1, beta, r).H(y)


def H_second(y, gamma, alpha, alpha1, beta, r, p) -> float:
    return ComparisonODE(p, gamma, alpha, alpha1, beta, r).H_second(y)


def _rk4(h: Callable[[float], float], g: float, dt: float) -> float:
    k1 = h(g)
    k2 = h(g + 0.5 * dt * k1)
    k3 = h(g + 0.5 * dt * k2)
    k4 = h(g + dt * k3)
    return g + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def ode_blowup_time(
    g0: float,
    ode: ComparisonODE,
    threshold: float,
    dt0: float = 1e-2,
    t_max: float = 1e4,
) -> float:
    """First time g' = H(g), g(0) = g0 reaches ``threshold``; inf if it never does.

    Classical RK4 with step halving while |H(g)| dt > 0.1 |g|. Settling on a
    stable root of H (|H| < 1e-12 with H' < 0) returns inf, as does running
    past ``t_max``.
    """
    if threshold <= g0:
        raise InvalidArgument("threshold must exceed g0")
    g, t = float(g0), 0.0
    while t < t_max:
        hg = ode.H(g)
        if abs(hg) < 1e-12 and ode.H_prime(g) < 0:
            return math.inf
        dt = dt0
        while abs(hg) * dt > 0.1 * max(abs(g), 1e-300) and dt > 1e-300:
            dt *= 0.5
        g_new = _rk4(ode.H, g, dt)
        if not math.isfinite(g_new) or g_new >= threshold:
            return t + _crossing_offset(ode.H, g, dt, threshold)
        g, t = g_new, t + dt
    return math.inf


def _crossing_offset(h, g: float, dt: float, threshold: float) -> float:
    lo, hi = 0.0, dt
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        val = _rk4(h, g, mid)
        if math.isfinite(val) and val < threshold:
            lo = mid
        else:
            hi = mid
    return hi
