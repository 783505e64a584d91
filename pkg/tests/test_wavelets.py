import math
from fractions import Fraction

import numpy as np
import pytest

from padic_nagumo.errors import InvalidArgument, Unsupported
from padic_nagumo.operators import TailPolicy, semigroup_apply, taibleson_spectral
from padic_nagumo.padic import char_eval, rational_valuation
from padic_nagumo.radial import RadialField, ball_indicator, linear_combine, scale
from padic_nagumo.wavelets import (
    ComparisonODE,
    H_second,
    WaveletIndex,
    blowup_weight_build,
    comparison_H,
    multiplier_eigenvalue,
    ode_blowup_time,
    pairing_G,
    wavelet_eval,
)

TAIL = TailPolicy(40)


def cosets(p, top, fine):
    """Representatives of B_top modulo B_fine."""
    n = top - fine
    base = Fraction(p) ** (-top)
    return [base * d for d in range(p**n)]


def sample_points(rng, p, r, n):
    out = []
    for _ in range(n):
        x = Fraction(int(rng.integers(0, p**6))) * Fraction(p) ** (-r - 2)
        out.append(-x if rng.random() < 0.5 else x)
    return out


class TestWavelet:
    def test_origin(self):
        assert wavelet_eval(WaveletIndex(3, 0, Fraction(0), 1), 0) == 1

    def test_index_validation(self):
        with pytest.raises(InvalidArgument):
            WaveletIndex(3, 0, Fraction(0), 3)
        with pytest.raises(InvalidArgument):
            WaveletIndex(3, 0, Fraction(1), 1)
        WaveletIndex(3, 0, Fraction(2, 9), 1)

    @pytest.mark.parametrize("r", [-2, 0, 1])
    def test_modulus_and_support(self, r):
        p = 5
        idx = WaveletIndex(p, r, Fraction(0), 2)
        rng = np.random.default_rng(r + 10)
        for x in sample_points(rng, p, r, 100):
            val = wavelet_eval(idx, x)
            inside = rational_valuation(x, p) >= -r
            assert abs(abs(val) - (p ** (-r / 2) if inside else 0.0)) < 1e-14

    def test_translated_support(self):
        idx = WaveletIndex(3, 0, Fraction(1, 3), 1)
        assert wavelet_eval(idx, Fraction(1, 3)) == 1
        assert wavelet_eval(idx, 0) == 0

    @pytest.mark.parametrize("r", [-1, 0])
    def test_orthonormal(self, r):
        p = 3
        cell = float(p) ** (r - 1)
        pts = cosets(p, r, r - 1)
        psi = {j: np.array([wavelet_eval(WaveletIndex(p, r, Fraction(0), j), x) for x in pts]) for j in (1, 2)}
        assert abs(np.sum(psi[1] * np.conj(psi[2])) * cell) < 1e-14
        assert abs(np.sum(np.abs(psi[1]) ** 2) * cell - 1.0) < 1e-14

    @pytest.mark.parametrize("p", [3, 5, 7])
    @pytest.mark.parametrize("r", [-2, -1, 0])
    def test_square_identity(self, p, r):
        rng = np.random.default_rng(p * 10 - r)
        one, two = WaveletIndex(p, r, Fraction(0), 1), WaveletIndex(p, r, Fraction(0), 2)
        for x in sample_points(rng, p, r, 200):
            lhs = wavelet_eval(one, x) ** 2
            assert abs(lhs - p ** (-r / 2) * wavelet_eval(two, x)) < 1e-13

    @pytest.mark.parametrize("r", [0, -1])
    def test_fourier_support(self, r):
        # F Psi(xi) = integral of Psi(x) chi(xi x) over B_r, by coset sums
        p, j = 3, 1
        idx = WaveletIndex(p, r, Fraction(0), j)
        for m in range(-r - 1, -r + 4):
            fine = min(r - 1, -m - 1)
            pts = cosets(p, r, fine)
            vals = [wavelet_eval(idx, x) for x in pts]
            hits = 0
            for d in (d for d in range(1, p**2) if d % p):
                xi = Fraction(p) ** (-m) * d
                ft = sum(v * char_eval(p, xi * x) for v, x in zip(vals, pts)) * float(p) ** fine
                on_set = rational_valuation(xi + j * Fraction(p) ** (r - 1), p) >= r
                if on_set:
                    hits += 1
                    assert m == 1 - r
                    assert abs(ft) == pytest.approx(float(p) ** (r / 2), rel=1e-12)
                else:
                    assert abs(ft) < 1e-12
            assert (hits > 0) == (m == 1 - r)


class TestEigen:
    def test_multiplier_eigenvalue(self):
        p, a = 3, 0.4
        assert multiplier_eigenvalue(lambda k: float(p) ** (a * k), 0) == pytest.approx(p**a)
        g, b, t, r = 1.3, 0.2, 0.5, -1
        m = lambda k: np.exp(-(g * float(p) ** (a * np.asarray(k, float)) + b) * t)
        assert multiplier_eigenvalue(m, r) == pytest.approx(math.exp(-(g * p ** ((1 - r) * a) + b) * t))
        assert multiplier_eigenvalue(lambda k: np.ones(len(k)), 5) == 1.0


class TestWeight:
    def test_build_errors(self):
        with pytest.raises(Unsupported):
            blowup_weight_build(2, 0, 0.5)
        with pytest.raises(InvalidArgument):
            blowup_weight_build(3, 1, 0.5)
        with pytest.raises(InvalidArgument):
            blowup_weight_build(3, 0, 0.5, kind="other")

    @pytest.mark.parametrize("p", [3, 5])
    @pytest.mark.parametrize("r", [-1, 0])
    def test_shell_integrals_coset_oracle(self, p, r):
        w = blowup_weight_build(p, r, 0.5)
        fine = r - 1  # w is constant on cosets of B_{r-1}
        for k in range(r - 3, r + 3):
            if k <= fine:
                brute = float(w(Fraction(p) ** (-k))) * float(p) ** k * (1 - 1 / p)
            else:
                pts = [x for x in cosets(p, k, fine) if rational_valuation(x, p) == -k]
                brute = sum(w(x) for x in pts) * float(p) ** fine
            assert brute == pytest.approx(float(w.shell_integral(k)), abs=1e-12)

    @pytest.mark.parametrize("p", [3, 5, 7])
    @pytest.mark.parametrize("r", [-2, -1, 0])
    def test_total_integral(self, p, r):
        signed = blowup_weight_build(p, r, 0.5)
        total = signed.ball_integral(r - 30) + sum(signed.shell_integral(k) for k in range(r - 29, r + 5))
        assert total == 0
        modulus = blowup_weight_build(p, r, 0.5, "modulus")
        total = modulus.ball_integral(r - 30) + sum(modulus.shell_integral(k) for k in range(r - 29, r + 5))
        assert total == 1

    def test_support_vanishing(self):
        w = blowup_weight_build(3, -1, 0.5)
        assert all(w.shell_integral(k) == 0 for k in range(0, 6))
        assert w.shell_integral(-1) == Fraction(-1, 3)

    def test_eigenvalue(self):
        assert blowup_weight_build(5, -1, 0.3).eigenvalue_alpha == pytest.approx(5**0.6)


def random_u(rng, p):
    return RadialField.from_values(p, -5, rng.normal(size=9))


class TestPairing:
    def test_omega(self):
        w = blowup_weight_build(3, 0, 0.5)
        assert pairing_G(ball_indicator(3, 0), w) == 0.0
        assert pairing_G(RadialField.zero(3, -2, 2), w) == 0.0

    def test_prime_mismatch(self):
        with pytest.raises(InvalidArgument):
            pairing_G(ball_indicator(5, 0), blowup_weight_build(3, 0, 0.5))

    def test_linear(self):
        rng = np.random.default_rng(1)
        w = blowup_weight_build(3, -1, 0.5)
        for _ in range(20):
            u1, u2 = random_u(rng, 3), random_u(rng, 3)
            a, b = rng.normal(size=2)
            lhs = pairing_G(linear_combine(a, u1, b, u2), w)
            rhs = a * pairing_G(u1, w) + b * pairing_G(u2, w)
            assert lhs == pytest.approx(rhs, abs=1e-13 * (1 + abs(lhs)))

    def test_pointwise_oracle(self):
        # exact shell tables against a coset sum of u(x) w(x)
        p, r = 3, 0
        w = blowup_weight_build(p, r, 0.5)
        u = RadialField.from_values(p, -3, [1.0, 2.0, -1.0, 0.5, 3.0])
        pts = cosets(p, r, -3)
        brute = sum(u(x) * w(x) for x in pts) * float(p) ** -3
        assert pairing_G(u, w) == pytest.approx(brute, abs=1e-13)

    @pytest.mark.parametrize("r", [-2, -1, 0])
    def test_self_adjoint(self, r):
        rng = np.random.default_rng(5 - r)
        a = 0.7
        w = blowup_weight_build(3, r, a)
        for _ in range(20):
            u = random_u(rng, 3)
            du, err = taibleson_spectral(u, a, TAIL)
            assert pairing_G(du, w) == pytest.approx(w.eigenvalue_alpha * pairing_G(u, w), abs=1e-12 + err)

    def test_semigroup(self):
        rng = np.random.default_rng(8)
        g, a, b, t, r = 1.1, 0.6, 0.3, 0.4, -1
        w = blowup_weight_build(5, r, a)
        for _ in range(20):
            u = random_u(rng, 5)
            vu, err = semigroup_apply(u, t, g, a, b, TAIL)
            factor = math.exp(-(g * 5 ** ((1 - r) * a) + b) * t)
            assert pairing_G(vu, w) == pytest.approx(factor * pairing_G(u, w), abs=err + 1e-12)


class TestComparison:
    def test_H(self):
        assert comparison_H(0.0, 1.0, 0.2, 0.1, 0.7, 0, 3) == 0.0
        assert H_second(0.0, 1.0, 0.2, 0.1, 0.7, 0, 3) == pytest.approx(3.4)

    def test_matches_definition(self):
        p, g, a, a1, b, r = 3, 1.2, 0.3, 0.15, 0.4, -1
        for y in np.linspace(-2, 5, 15):
            F = -(y**3) + (b + 1) * y**2 - b * y
            want = -g * p ** ((1 - r) * a) * y + F + p ** ((1 - r) * a1) * y**3
            assert comparison_H(y, g, a, a1, b, r, p) == pytest.approx(want, rel=1e-13, abs=1e-13)

    def test_convex_for_r_nonpositive(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            ode = ComparisonODE(int(rng.choice([3, 5, 7])), float(rng.uniform(0.1, 3)), float(rng.uniform(0.1, 2)),
                                float(rng.uniform(0, 2)), float(rng.uniform(0, 1)), int(rng.integers(-4, 1)))
            assert all(ode.H_second(y) >= 0 for y in np.linspace(0, 50, 30))

    def test_stable_root(self):
        ode = ComparisonODE(3, 50.0, 0.2, 0.1, 0.7, 0)
        assert ode_blowup_time(2.0, ode, 1e6) == math.inf

    def test_cubic_bound(self):
        ode = ComparisonODE(3, 0.01, 0.2, 0.5, 0.0, 0)
        c, g0 = 3**0.5 - 1, 1.0
        assert all(ode.H(y) >= c * y**3 for y in np.linspace(g0, 100, 200))
        t = ode_blowup_time(g0, ode, 1e6)
        assert 0 < t <= 1 / (2 * c * g0**2)

    def test_near_threshold(self):
        ode = ComparisonODE(3, 0.01, 0.2, 0.5, 0.0, 0)
        times = [ode_blowup_time(1e3 - eps, ode, 1e3) for eps in (1.0, 1e-3, 1e-6)]
        assert times[0] > times[1] > times[2] and times[2] < 1e-9

    def test_threshold_guard(self):
        with pytest.raises(InvalidArgument):
            ode_blowup_time(5.0, ComparisonODE(3, 1, 0.2, 0.1, 0.7, 0), 5.0)
