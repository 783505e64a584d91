"""Seeded property checks shared by ``check-invariants`` and the acceptance tests.

Each ``check_*`` function takes a numpy Generator and a case count and
returns a :class:`CheckResult`. Failures carry a short description of the
offending case.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .operators import (
    PDTerms,
    TailPolicy,
    apply_PD,
    kochubei_pointwise,
    semigroup_apply,
    smoothing_bound,
    taibleson_kochubei,
    taibleson_spectral,
)
from .padic import ball_measure, char_shell_integral, shell_measure
from .radial import (
    RadialField,
    ball_indicator,
    embedding_constant_A,
    fourier,
    linear_combine,
    multiply,
    norm_L2,
    norm_L2_squared,
    norm_sobolev,
)
from .solver import (
    ModelParams,
    SolverConfig,
    continuous_dependence_check,
    lipschitz_L,
    mild_nonlinearity,
)
from .wavelets import WaveletIndex, blowup_weight_build, wavelet_eval

PRIMES = (2, 3, 5, 7)
ABS_SLACK = 1e-9


@dataclass
class CheckResult:
    name: str
    cases: int = 0
    worst: float = 0.0
    failures: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def line(self) -> str:
        status = "PASS" if self.ok else "FAIL"
        return (
            f"{status} {self.name}: {self.cases} cases, worst={self.worst:.3e}, "
            f"{len(self.failures)} violations, {self.seconds:.2f}s"
        )


def random_field(rng, p=None, lo=-8, hi=8, scale=1.0) -> RadialField:
    p = int(rng.choice(PRIMES)) if p is None else p
    a, b = sorted(int(x) for x in rng.integers(lo, hi + 1, size=2))
    vals = rng.normal(scale=scale, size=b - a + 1)
    return RadialField.from_values(p, a, vals)


def random_exact_field(rng, p, lo=-8, hi=8) -> RadialField:
    a, b = sorted(int(x) for x in rng.integers(lo, hi + 1, size=2))
    vals = [Fraction(int(n), int(d)) for n, d in zip(rng.integers(-50, 50, b - a + 1),
                                                     rng.integers(1, 20, b - a + 1))]
    return RadialField.from_values(p, a, np.array(vals, dtype=object))


def _timed(fn):
    def wrapper(rng, n, *args, **kw):
        t0 = time.perf_counter()
        res = fn(rng, n, *args, **kw)
        res.seconds = time.perf_counter() - t0
        return res

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _record(res: CheckResult, err: float, limit: float, what: str):
    res.cases += 1
    res.worst = max(res.worst, err)
    if not err <= limit:
        res.failures.append(f"{what}: {err:.3e} > {limit:.1e}")


@_timed
def check_exactness(rng, n=500, tol=1e-12) -> CheckResult:
    """Fourier involution, Parseval, ball transforms and Haar identities."""
    res = CheckResult("exactness")
    for i in range(n):
        f = random_field(rng)
        scale = float(np.max(np.abs(f.values))) or 1.0
        back = fourier(fourier(f))
        inv = float(np.max(np.abs(back.values - f.values))) / scale
        _record(res, inv, tol, f"involution #{i}")
        l2 = norm_L2(f)
        _record(res, abs(norm_L2(fourier(f)) - l2) / l2, tol, f"parseval #{i}")
    for p in PRIMES:
        for j in range(-8, 9):
            fb = fourier(ball_indicator(p, j))
            want = float(p) ** j
            err = abs(fb.ball_value - want) / want if (fb.j_min, fb.j_max) == (-j, -j) else 1.0
            _record(res, err, tol, f"F[1_B{j}] p={p}")
            partial = ball_measure(p, -20) + sum(shell_measure(p, k) for k in range(-19, j + 1))
            _record(res, float(abs(partial - ball_measure(p, j))), 0.0, f"haar p={p} k={j}")
            for v in range(-10, 11):
                # integral over B_j of chi(a x) is p^j [v <= -j]
                total = ball_measure(p, -30) * (1 if v <= 30 else 0) + sum(
                    char_shell_integral(p, v, k) for k in range(-29, j + 1)
                )
                want = ball_measure(p, j) if v <= -j else Fraction(0)
                _record(res, float(abs(total - want)), 0.0, f"char ball p={p} v={v} K={j}")
        for _ in range(5):
            g = random_exact_field(rng, p)
            same = all(a == b for a, b in zip(fourier(fourier(g)).values, g.values))
            parse = norm_L2_squared(g) == norm_L2_squared(fourier(g))
            _record(res, 0.0 if (same and parse) else 1.0, 0.0, f"exact involution p={p}")
    return res


@_timed
def check_operator_equivalence(rng, n=100, tol=1e-8, alphas=(0.2, 0.5, 1.0, 2.0)) -> CheckResult:
    """Spectral vs hypersingular Taibleson operator, relative L2 difference."""
    res = CheckResult("operator equivalence")
    tail = TailPolicy(40)
    for i in range(n):
        f = random_field(rng)
        for a in alphas:
            spectral, _ = taibleson_spectral(f, a, tail)
            koch = taibleson_kochubei(f, a, tail)
            ref = norm_L2(koch)
            if ref == 0.0:
                continue
            rel = norm_L2(linear_combine(1.0, spectral, -1.0, koch)) / ref
            _record(res, rel, tol, f"field #{i} p={f.p} alpha={a}")
    return res


def _sample_point(rng, p, r) -> Fraction:
    # |x|_p <= p^(r+2): up to two shells outside the support ball B_r,
    # resolved down to p^(r-3), finer than the local-constancy scale p^(r-1)
    digits = int(rng.integers(0, p**5))
    x = Fraction(digits, 1) * Fraction(p) ** (-r - 2)
    return -x if rng.random() < 0.5 else x


@_timed
def check_wavelet_eigen(rng, n=50, tol=1e-8, primes=(3, 5), rs=(-2, -1, 0), alpha=0.7) -> CheckResult:
    """Pointwise hypersingular D^alpha on Psi_{r,0,j} and on w is p^{(1-r) alpha} times the value."""
    res = CheckResult("wavelet eigenrelation")
    for p in primes:
        for r in rs:
            lam = float(p) ** ((1 - r) * alpha)
            w = blowup_weight_build(p, r, alpha)
            psis = [WaveletIndex(p, r, 0, j) for j in range(1, p)]
            for _ in range(n):
                x = _sample_point(rng, p, r)
                for idx in psis:
                    val = kochubei_pointwise(lambda z: wavelet_eval(idx, z), x, p, alpha, r - 1, r)
                    _record(res, abs(val - lam * wavelet_eval(idx, x)), tol,
                            f"Psi p={p} r={r} j={idx.j} x={x}")
                val = kochubei_pointwise(lambda z: complex(w(z)), x, p, alpha, r - 1, r)
                _record(res, abs(val - lam * w(x)), tol, f"w p={p} r={r} x={x}")
    return res


def _random_semigroup(rng):
    return dict(
        gamma=float(rng.uniform(0.1, 2.0)),
        alpha=float(rng.uniform(0.1, 2.0)),
        beta=float(rng.uniform(0.0, 1.0)),
    )


@_timed
def check_contraction(rng, n=1000) -> CheckResult:
    """||V(t) f||_s <= exp(-beta t) ||f||_s."""
    res = CheckResult("semigroup contraction")
    for i in range(n):
        f = random_field(rng)
        k = _random_semigroup(rng)
        t = float(rng.uniform(0.0, 2.0))
        s = float(rng.choice([0.0, 2.0, 4.0]))
        vf, _ = semigroup_apply(f, t, k["gamma"], k["alpha"], k["beta"])
        lhs = norm_sobolev(vf, s)
        rhs = math.exp(-k["beta"] * t) * norm_sobolev(f, s)
        _record(res, max(lhs - rhs, 0.0), ABS_SLACK, f"case #{i}")
    return res


@_timed
def check_smoothing(rng, n=1000) -> CheckResult:
    """||V(t) f||_{s+lam} <= smoothing_bound * ||f||_s for lam in {alpha, 2 delta}."""
    res = CheckResult("smoothing bound")
    for i in range(n):
        f = random_field(rng)
        k = _random_semigroup(rng)
        t = float(10 ** rng.uniform(-3, 0))
        s = float(rng.uniform(0.0, 4.0))
        delta = float(rng.uniform(0.0, k["alpha"]))
        lam = k["alpha"] if i % 2 == 0 else 2.0 * delta
        vf, _ = semigroup_apply(f, t, k["gamma"], k["alpha"], k["beta"])
        lhs = norm_sobolev(vf, s + lam)
        rhs = smoothing_bound(s, lam, t, k["gamma"], k["alpha"], k["beta"]) * norm_sobolev(f, s)
        _record(res, max(lhs - rhs, 0.0), ABS_SLACK, f"case #{i} lam={lam:.3f}")
    return res


@_timed
def check_interpolation(rng, n=1000) -> CheckResult:
    """||f||_s <= ||f||_{s1}^theta ||f||_{s2}^(1-theta) at s = theta s1 + (1-theta) s2."""
    res = CheckResult("Sobolev interpolation")
    for i in range(n):
        f = random_field(rng)
        s1, s2 = sorted(float(x) for x in rng.uniform(0.0, 6.0, size=2))
        th = float(rng.uniform())
        s = th * s1 + (1 - th) * s2
        lhs = norm_sobolev(f, s)
        rhs = norm_sobolev(f, s1) ** th * norm_sobolev(f, s2) ** (1 - th)
        _record(res, max(lhs - rhs, 0.0), 1e-10 * max(rhs, 1.0), f"case #{i}")
    return res


@_timed
def check_banach_algebra(rng, n=1000) -> CheckResult:
    """||f g||_s <= 2 A(1, s) ||f||_s ||g||_s for s > 1."""
    res = CheckResult("Banach algebra")
    for i in range(n):
        p = int(rng.choice(PRIMES))
        f, g = random_field(rng, p), random_field(rng, p)
        s = float(rng.uniform(1.05, 6.0))
        lhs = norm_sobolev(multiply(f, g), s)
        rhs = 2.0 * embedding_constant_A(p, s) * norm_sobolev(f, s) * norm_sobolev(g, s)
        _record(res, max(lhs - rhs, 0.0), ABS_SLACK, f"case #{i} p={p} s={s:.3f}")
    return res


def random_pd(rng, delta_max: float, k_max: int = 3) -> PDTerms:
    k = int(rng.integers(0, k_max + 1))
    if k == 0:
        return PDTerms()
    exps = np.sort(rng.uniform(0.0, delta_max, size=k))
    if rng.random() < 0.5:
        exps[0] = 0.0
    exps = np.unique(exps)
    return PDTerms(tuple((float(rng.normal()), float(e)) for e in exps))


def random_params(rng, p=None) -> ModelParams:
    p = int(rng.choice(PRIMES)) if p is None else p
    alpha = float(rng.uniform(0.2, 1.5))
    s = float(rng.uniform(1.6, 4.0))
    delta_max = min(0.95 * alpha, (s - 1.05) / 2.0)
    return ModelParams(
        p=p,
        gamma=float(rng.uniform(0.2, 2.0)),
        alpha=alpha,
        beta=float(rng.uniform(0.0, 1.0)),
        m=int(rng.integers(1, 4)),
        pd=random_pd(rng, delta_max),
        s=s,
    )


@_timed
def check_lipschitz(rng, n=1000) -> CheckResult:
    """||N(u) - N(w)||_{s-2 delta} <= L(||u||_s, ||w||_s) ||u - w||_s."""
    res = CheckResult("Lipschitz domination")
    tail = TailPolicy(40)
    for i in range(n):
        params = random_params(rng)
        u = random_field(rng, params.p, scale=float(10 ** rng.uniform(-1, 0.5)))
        w = random_field(rng, params.p, scale=float(10 ** rng.uniform(-1, 0.5)))
        s_low = params.s - 2.0 * params.delta
        nu, _ = mild_nonlinearity(u, params, tail)
        nw, _ = mild_nonlinearity(w, params, tail)
        lhs = norm_sobolev(linear_combine(1.0, nu, -1.0, nw), s_low)
        rhs = lipschitz_L(norm_sobolev(u, params.s), norm_sobolev(w, params.s), params) * norm_sobolev(
            linear_combine(1.0, u, -1.0, w), params.s
        )
        _record(res, max(lhs - rhs, 0.0), ABS_SLACK, f"case #{i}")
    return res


@_timed
def check_pd_product(rng, n=1000) -> CheckResult:
    """||P(D)(f g)||_s <= (sum |C_j|) 2 A(1, s+2 delta) ||f||_{s+2 delta} ||g||_{s+2 delta}."""
    res = CheckResult("P(D) product bound")
    tail = TailPolicy(40)
    for i in range(n):
        p = int(rng.choice(PRIMES))
        s = float(rng.uniform(1.05, 4.0))
        pd = random_pd(rng, 1.5, k_max=3)
        if not pd:
            pd = PDTerms(((1.0, 0.5),))
        f, g = random_field(rng, p), random_field(rng, p)
        out, _ = apply_PD(multiply(f, g), pd, tail)
        lhs = norm_sobolev(out, s)
        s_hi = s + 2.0 * pd.degree
        rhs = (pd.abs_coefficient_sum * 2.0 * embedding_constant_A(p, s_hi)
               * norm_sobolev(f, s_hi) * norm_sobolev(g, s_hi))
        _record(res, max(lhs - rhs, 0.0), ABS_SLACK, f"case #{i} p={p}")
    return res


@_timed
def check_gronwall(rng, n=1000, steps=4) -> CheckResult:
    """Euler runs from nearby data stay inside exp(L(W, W) t) ||f0 - f1||_s."""
    res = CheckResult("Gronwall envelope")
    for i in range(n):
        params = random_params(rng)
        # keep explicit Euler's linear factor 1 - dt (gamma |xi|^alpha + beta) in [0, 1]
        # on the top Fourier shell |xi| = p^3; otherwise the scheme, not the
        # equation, is what amplifies the difference
        stiff = params.gamma * float(params.p) ** (3 * params.alpha) + params.beta
        dt = min(1e-3, 0.5 / stiff)
        cfg = SolverConfig(j_min=-3, j_max=3, dt=dt, t_end=steps * dt,
                           tail=TailPolicy(8), method="euler-spectral")
        f0 = random_field(rng, params.p, -3, 3, scale=0.5)
        eps = float(10 ** rng.uniform(-6, -1))
        f1 = linear_combine(1.0, f0, eps, random_field(rng, params.p, -3, 3))
        rep = continuous_dependence_check(f0, f1, params, cfg, slack=ABS_SLACK)
        excess = float(np.max(rep.distance - rep.envelope + ABS_SLACK))
        _record(res, max(excess, 0.0), ABS_SLACK, f"case #{i}")
    return res


SUITE = (
    (check_exactness, 500),
    (check_operator_equivalence, 100),
    (check_wavelet_eigen, 50),
    (check_contraction, 1000),
    (check_smoothing, 1000),
    (check_interpolation, 1000),
    (check_banach_algebra, 1000),
    (check_lipschitz, 1000),
    (check_pd_product, 1000),
    (check_gronwall, 1000),
)


def run_suite(seed: int = 0, fraction: float = 1.0) -> list[CheckResult]:
    """Run every check with its full case count scaled by ``fraction``."""
    out = []
    for i, (check, n) in enumerate(SUITE):
        rng = np.random.default_rng([seed, i])
        out.append(check(rng, max(1, int(round(n * fraction)))))
    return out
