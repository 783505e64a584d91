"""Exact p-adic arithmetic on the rationals, for n = 1.

Measures and character integrals are returned as :class:`fractions.Fraction`
so identities between them can be checked bit-exactly. Conversion to float
happens in the callers.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import InvalidArgument

MAX_DIGITS = 64


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    for d in range(3, math.isqrt(n) + 1, 2):
        if n % d == 0:
            return False
    return True


def check_prime(p: int) -> int:
    """Return ``p`` unchanged if it is a prime integer, else raise."""
    if isinstance(p, bool) or not isinstance(p, int) or not is_prime(p):
        raise InvalidArgument(f"p must be a prime integer, got {p!r}")
    return p


def _int_valuation(n: int, p: int) -> int:
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def valuation(numerator: int, denominator: int, p: int) -> float | int:
    """p-adic order of ``numerator / denominator``.

    Returns ``math.inf`` for a zero numerator, so that |0|_p = p^-inf = 0.

    >>> valuation(1, 3, 3)
    -1
    >>> valuation(9, 1, 3)
    2
    """
    check_prime(p)
    if denominator == 0:
        raise InvalidArgument("zero denominator")
    if numerator == 0:
        return math.inf
    return _int_valuation(numerator, p) - _int_valuation(denominator, p)


def rational_valuation(q: Fraction, p: int) -> float | int:
    q = Fraction(q)
    return valuation(q.numerator, q.denominator, p)


def norm(q: Fraction, p: int) -> Fraction:
    """|q|_p as an exact rational."""
    v = rational_valuation(q, p)
    if v == math.inf:
        return Fraction(0)
    return Fraction(p) ** (-v)


def ball_measure(p: int, k: int) -> Fraction:
    """Haar measure of B_k = {|x|_p <= p^k}, normalized so Z_p has measure 1."""
    return Fraction(p) ** k


def shell_measure(p: int, k: int) -> Fraction:
    """Haar measure of the sphere S_k = {|x|_p = p^k}: p^k (1 - 1/p)."""
    check_prime(p)
    return Fraction(p) ** k * Fraction(p - 1, p)


@dataclass(frozen=True)
class PadicPoint:
    """x = p^v * sum(digits[i] * p^i) with a nonzero leading digit.

    An empty digit tuple is the point 0 (``v`` is then ignored).
    """

    p: int
    v: int
    digits: tuple[int, ...]

    def __post_init__(self):
        check_prime(self.p)
        digits = tuple(int(d) for d in self.digits)
        if len(digits) > MAX_DIGITS:
            raise InvalidArgument(
                f"{len(digits)} digits exceeds the cap of {MAX_DIGITS}"
            )
        if any(d < 0 or d >= self.p for d in digits):
            raise InvalidArgument(f"digits must lie in 0..{self.p - 1}")
        if digits and digits[0] == 0:
            raise InvalidArgument("leading digit must be nonzero")
        object.__setattr__(self, "digits", digits)

    @classmethod
    def zero(cls, p: int) -> PadicPoint:
        return cls(p, 0, ())

    @classmethod
    def from_fraction(cls, q: Fraction, p: int, precision: int = MAX_DIGITS) -> PadicPoint:
        """Expansion of ``q`` to ``precision`` digits past its leading one.

        Rationals whose denominator is a power of p and which are
        nonnegative have finite expansions; those are returned exactly
        (trailing zero digits are dropped). Anything else is represented
        modulo p^(ord(q) + precision).
        """
        check_prime(p)
        q = Fraction(q)
        if q == 0:
            return cls.zero(p)
        v = rational_valuation(q, p)
        unit = q / Fraction(p) ** v
        modulus = p**precision
        residue = (unit.numerator * pow(unit.denominator, -1, modulus)) % modulus
        digits = []
        while residue and len(digits) < precision:
            residue, d = divmod(residue, p)
            digits.append(d)
        while digits and digits[-1] == 0:
            digits.pop()
        return cls(p, v, tuple(digits))

    @property
    def is_zero(self) -> bool:
        return not self.digits

    def order(self) -> float | int:
        return math.inf if self.is_zero else self.v

    def to_fraction(self) -> Fraction:
        total = sum(d * self.p**i for i, d in enumerate(self.digits))
        return Fraction(total) * Fraction(self.p) ** self.v


def fractional_part(q: Fraction, p: int) -> Fraction:
    """{q}_p in [0, 1): the part of the p-adic expansion with negative powers."""
    q = Fraction(q)
    v = rational_valuation(q, p)
    if v == math.inf or v >= 0:
        return Fraction(0)
    k = -v
    modulus = p**k
    scaled = q * modulus  # a p-adic unit (or integral), denominator prime to p
    residue = (scaled.numerator * pow(scaled.denominator, -1, modulus)) % modulus
    return Fraction(residue, modulus)


def _as_fraction(x, p: int) -> Fraction:
    if isinstance(x, PadicPoint):
        if x.p != p:
            raise InvalidArgument("point and character use different primes")
        return x.to_fraction()
    return Fraction(x)


def char_eval(p: int, x) -> complex:
    """Additive character chi_p(x) = exp(2 pi i {x}_p).

    ``x`` may be a :class:`PadicPoint` or any rational.
    """
    check_prime(p)
    frac = fractional_part(_as_fraction(x, p), p)
    if frac == 0:
        return complex(1.0, 0.0)
    # exact quarter-turns avoid cos(pi/2) ~ 6e-17 noise
    turns = frac * 4
    if turns.denominator == 1:
        return complex((1, 1j, -1, -1j)[int(turns)])
    return cmath.exp(2j * math.pi * float(frac))


def char_shell_integral(p: int, v: int, k: int) -> Fraction:
    """Integral of chi_p(a x) over S_k for a frequency with |a|_p = p^v.

    Three regimes: the character is identically 1 on S_k (v <= -k), it
    averages to -1/(p-1) of the shell (v = 1 - k), or it integrates to 0.
    """
    check_prime(p)
    if v <= -k:
        return shell_measure(p, k)
    if v == 1 - k:
        return -(Fraction(p) ** (k - 1))
    return Fraction(0)


def bracket_weight(p: int, k: int, s: float) -> float:
    """[xi]_p^s = max(1, |xi|_p)^s on the shell S_k."""
    if k <= 0:
        return 1.0
    return float(p) ** (k * s)
