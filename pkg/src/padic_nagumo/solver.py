"""Time integration of u_t = -gamma D^alpha u + F(u) + P(D)(u^m).

F(u) = -u^3 + (beta+1) u^2 - beta u is applied pointwise. Two schemes are
provided: forward Euler on the differential form, and Picard iteration of
the mild (Duhamel) form u(t) = V(t) f0 + int_0^t V(t - tau) N(u(tau)) dtau
where V(t) carries the linear part -gamma D^alpha - beta and
N(u) = (beta+1) u^2 - u^3 + P(D)(u^m).

States live on a fixed window [j_min, j_max + tail_depth]. Whatever an
operator pushes beyond that window is dropped and charged to the
trajectory's error budget, which bounds both the L2 and the mass defect.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import EstimateFailed, InvalidArgument, IterationDiverged
from .padic import check_prime
from .operators import (
    PDTerms,
    TailPolicy,
    apply_PD,
    kochubei_far_field,
    semigroup_apply,
    taibleson_kochubei,
    taibleson_spectral,
)
from .radial import (
    RadialField,
    embedding_constant_A,
    integral,
    linear_combine,
    norm_L2,
    norm_sobolev,
    norm_sup,
    pointwise_map,
    retruncate,
)
from .wavelets import BlowupWeight, ComparisonODE, pairing_G

log = logging.getLogger(__name__)

METHODS = ("euler-kochubei", "euler-spectral", "picard")


@dataclass(frozen=True)
class ModelParams:
    p: int
    gamma: float
    alpha: float
    beta: float = 0.0
    m: int = 3
    pd: PDTerms = field(default_factory=PDTerms)
    s: float = 2.0
    reaction: bool = True

    def __post_init__(self):
        check_prime(self.p)
        if self.gamma <= 0:
            raise InvalidArgument("gamma must be > 0")
        if self.alpha <= 0:
            raise InvalidArgument("alpha must be > 0")
        if self.beta < 0:
            raise InvalidArgument("beta must be >= 0")
        if int(self.m) != self.m or self.m < 1:
            raise InvalidArgument("m must be a positive integer")
        if not isinstance(self.pd, PDTerms):
            object.__setattr__(self, "pd", PDTerms(tuple(self.pd)))
        if self.s - 2.0 * self.delta <= 0.5:
            raise InvalidArgument(
                f"need s - 2 delta > 1/2, got s={self.s}, delta={self.delta}"
            )

    @property
    def delta(self) -> float:
        return self.pd.degree

    @classmethod
    def nagumo_blowup(cls, p, gamma, alpha, alpha1, beta, s=2.0) -> ModelParams:
        """The instance u_t = -gamma D^alpha u + F(u) + D^alpha1 (u^3)."""
        return cls(p, gamma, alpha, beta, 3, PDTerms(((1.0, alpha1),)), s)

    def comparison_ode(self, r: int) -> ComparisonODE:
        """Comparison ODE for the single-term cubic P(D) = D^alpha1."""
        if self.m != 3 or len(self.pd.terms) != 1 or self.pd.terms[0][0] != 1.0:
            raise InvalidArgument("comparison ODE needs P(D) = D^alpha1 and m = 3")
        return ComparisonODE(self.p, self.gamma, self.alpha, self.pd.terms[0][1], self.beta, r)


@dataclass(frozen=True)
class SolverConfig:
    j_min: int = -20
    j_max: int = 20
    dt: float = 1e-3
    t_end: float = 0.3
    save_every: int = 1
    tail: TailPolicy = field(default_factory=TailPolicy)
    blowup_threshold: float = 1e6
    max_picard_iters: int = 100
    picard_tol: float = 1e-8
    method: str = "euler-kochubei"

    def __post_init__(self):
        if self.j_min > self.j_max:
            raise InvalidArgument("j_min > j_max")
        if self.dt <= 0:
            raise InvalidArgument("dt must be > 0")
        if self.t_end < 0:
            raise InvalidArgument("t_end must be >= 0")
        if self.save_every < 1:
            raise InvalidArgument("save_every must be >= 1")
        if self.method not in METHODS:
            raise InvalidArgument(f"method must be one of {METHODS}")

    @property
    def state_window(self) -> tuple[int, int]:
        return self.j_min, self.j_max + int(self.tail.tail_depth)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def route(self) -> str:
        return "kochubei" if self.method == "euler-kochubei" else "spectral"


@dataclass
class Trajectory:
    times: np.ndarray
    snapshots: list
    sup_norm: np.ndarray
    l2_norm: np.ndarray
    hs_norm: np.ndarray
    mass: np.ndarray
    G_value: np.ndarray
    blowup: Optional[tuple[float, float]] = None
    blowup_sup: Optional[tuple[float, float]] = None
    error_budget: float = 0.0


class _Recorder:
    def __init__(self, s: float, weight: Optional[BlowupWeight]):
        self.s = s
        self.weight = weight
        self.rows = []
        self.snapshots = []

    def add(self, t: float, u: RadialField):
        g = pairing_G(u, self.weight) if self.weight is not None else math.nan
        # frames just below the blow-up threshold can overflow when squared
        with np.errstate(over="ignore"):
            row = (t, norm_sup(u), norm_L2(u), norm_sobolev(u, self.s), integral(u), g)
        self.rows.append(row)
        self.snapshots.append(u)

    def finish(self, **kw) -> Trajectory:
        cols = np.array(self.rows, dtype=float).reshape(-1, 6).T
        return Trajectory(cols[0], self.snapshots, *cols[1:], **kw)


def _reaction(params: ModelParams) -> Callable:
    b = params.beta
    if params.reaction:
        return lambda y: -(y**3) + (b + 1.0) * y**2 - b * y
    return lambda y: -b * y


def _taibleson(u, alpha, tail, route):
    """D^alpha u and an error bound covering both its L2 and mass defects."""
    if route == "kochubei":
        out = taibleson_kochubei(u, alpha, tail)
        l2, l1 = kochubei_far_field(u, alpha, out.j_max)
        return out, l2 + abs(l1)
    return taibleson_spectral(u, alpha, tail)


def _pd_power(u, params, tail, route):
    """P(D)(u^m) with the same error convention as :func:`_taibleson`."""
    if not params.pd:
        return None, 0.0
    um = pointwise_map(u, lambda y: y ** params.m)
    out, err = apply_PD(um, params.pd, tail, route)
    if route == "kochubei":
        for c, d in params.pd.terms:
            if d > 0:
                l2, l1 = kochubei_far_field(um, d, out.j_max)
                err += abs(c) * (l2 + abs(l1))
    return out, err


def rhs(
    u: RadialField, params: ModelParams, tail: TailPolicy, route: str = "kochubei"
) -> tuple[RadialField, float]:
    """-gamma D^alpha u + F(u) + P(D)(u^m) and its accumulated operator error."""
    diff, err = _taibleson(u, params.alpha, tail, route)
    out = linear_combine(-params.gamma, diff, 1.0, pointwise_map(u, _reaction(params)))
    err *= params.gamma
    pd, pd_err = _pd_power(u, params, tail, route)
    if pd is not None:
        out = linear_combine(1.0, out, 1.0, pd)
        err += pd_err
    return out, err


def mild_nonlinearity(
    u: RadialField, params: ModelParams, tail: TailPolicy, route: str = "spectral"
) -> tuple[RadialField, float]:
    """N(u) = (beta+1) u^2 - u^3 + P(D)(u^m), the part outside V(t)."""
    b = params.beta
    if params.reaction:
        out = pointwise_map(u, lambda y: (b + 1.0) * y**2 - y**3)
    else:
        out = RadialField.zero(u.p, u.j_min, u.j_max)
    pd, err = _pd_power(u, params, tail, route)
    if pd is not None:
        out = linear_combine(1.0, out, 1.0, pd)
    return out, err


def _fit(f: RadialField, window: tuple[int, int]) -> tuple[RadialField, float]:
    """Retruncate to ``window``; the cost covers dropped L2 norm and mass."""
    kept, lost = retruncate(f, *window)
    mass_lost = abs(integral(f) - integral(kept))
    return kept, lost + mass_lost


def _sup_or_inf(u: RadialField) -> float:
    s = norm_sup(u)
    return s if math.isfinite(s) else math.inf


def euler_run(
    f0: RadialField,
    params: ModelParams,
    cfg: SolverConfig,
    weight: Optional[BlowupWeight] = None,
) -> Trajectory:
    """Forward Euler, u_{k+1} = u_k + dt * rhs(u_k), with blow-up bracketing."""
    if f0.p != params.p:
        raise InvalidArgument("initial datum and parameters use different primes")
    if f0.j_min < cfg.j_min or f0.j_max > cfg.j_max:
        raise InvalidArgument("initial datum window must lie within the solver window")
    window = cfg.state_window
    route = cfg.route if cfg.method != "picard" else "spectral"
    u = f0.to_float().extended(*window)
    budget = 0.0

    def step(state: RadialField, h: float) -> tuple[RadialField, float]:
        with np.errstate(all="ignore"):
            d, err = rhs(state, params, cfg.tail, route)
            d, cost = _fit(d, window)
            return linear_combine(1.0, state, h, d), h * (err + cost)

    rec = _Recorder(params.s, weight)
    rec.add(0.0, u)
    blowup = blowup_sup = None
    for k in range(cfg.n_steps):
        t = k * cfg.dt
        nxt, cost = step(u, cfg.dt)
        sup_next = _sup_or_inf(nxt)
        if sup_next >= cfg.blowup_threshold:
            blowup, blowup_sup, extra = _bracket(step, u, t, cfg.dt, sup_next, cfg.blowup_threshold)
            budget += extra
            log.info("blow-up bracketed in [%g, %g]", *blowup)
            break
        u, budget = nxt, budget + cost
        if (k + 1) % cfg.save_every == 0:
            rec.add((k + 1) * cfg.dt, u)
    return rec.finish(blowup=blowup, blowup_sup=blowup_sup, error_budget=budget)


def _bracket(step, u, t, dt, sup_hi, threshold):
    """Bisect the threshold crossing inside [t, t + dt] with halved Euler steps."""
    lo, h, budget = t, dt, 0.0
    sup_lo = norm_sup(u)
    while h > dt * 2.0**-10:
        h *= 0.5
        cand, cost = step(u, h)
        s = _sup_or_inf(cand)
        if s >= threshold:
            sup_hi = s
        else:
            u, lo, sup_lo, budget = cand, lo + h, s, budget + cost
    return (lo, lo + h), (sup_lo, sup_hi), budget


def _duhamel_sweep(u_grid, f0_part, params, cfg, tail, window):
    """One application of the mild map on the uniform grid.

    S_{n+1} = V(dt) S_n + dt V(dt/2) N((u_n + u_{n+1}) / 2) is the midpoint
    rule for int_0^{t_n} V(t_n - tau) N(u(tau)) dtau with the kernel exact.
    """
    dt = cfg.dt
    g, a, b = params.gamma, params.alpha, params.beta
    acc = RadialField.zero(params.p, *window)
    out = [f0_part[0]]
    budget = 0.0
    for n in range(len(u_grid) - 1):
        mid = linear_combine(0.5, u_grid[n], 0.5, u_grid[n + 1])
        nl, e1 = mild_nonlinearity(mid, params, tail)
        nl, c1 = _fit(nl, window)
        prop, e2 = semigroup_apply(acc, dt, g, a, b, tail)
        prop, c2 = _fit(prop, window)
        kick, e3 = semigroup_apply(nl, 0.5 * dt, g, a, b, tail)
        kick, c3 = _fit(kick, window)
        acc = linear_combine(1.0, prop, dt, kick)
        budget += e2 + c2 + dt * (e1 + c1 + e3 + c3)
        out.append(linear_combine(1.0, f0_part[n + 1], 1.0, acc))
    return out, budget


def picard_iterates(
    f0: RadialField, params: ModelParams, cfg: SolverConfig
) -> tuple[list[RadialField], list[float], float]:
    """Run the Picard iteration; return the final grid, residual history and budget.

    Residuals are sup_n ||u^(i+1)(t_n) - u^(i)(t_n)||_s.
    """
    if params.delta >= params.alpha:
        raise InvalidArgument("mild solver needs delta < alpha")
    window = cfg.state_window
    tail = cfg.tail
    u0 = f0.to_float().extended(*window)
    n = cfg.n_steps
    base = []
    budget = 0.0
    for i in range(n + 1):
        v, e = semigroup_apply(u0, i * cfg.dt, params.gamma, params.alpha, params.beta, tail)
        v, c = _fit(v, window)
        budget += e + c
        base.append(v)
    grid = list(base)
    residuals = []
    with np.errstate(all="ignore"):
        for _ in range(cfg.max_picard_iters):
            new, sweep_budget = _duhamel_sweep(grid, base, params, cfg, tail, window)
            res = max(
                norm_sobolev(linear_combine(1.0, a, -1.0, b), params.s)
                for a, b in zip(new, grid)
            )
            residuals.append(res)
            grid = new
            if not math.isfinite(res):
                break
            if res <= cfg.picard_tol:
                return grid, residuals, budget + sweep_budget
    raise IterationDiverged(
        f"Picard iteration did not reach tol={cfg.picard_tol} in {len(residuals)} sweeps",
        residuals,
    )


def picard_solve(
    f0: RadialField,
    params: ModelParams,
    cfg: SolverConfig,
    weight: Optional[BlowupWeight] = None,
) -> Trajectory:
    grid, residuals, budget = picard_iterates(f0, params, cfg)
    rec = _Recorder(params.s, weight)
    for i, u in enumerate(grid):
        if i % cfg.save_every == 0:
            rec.add(i * cfg.dt, u)
    traj = rec.finish(error_budget=budget)
    traj.residuals = residuals
    return traj


def solve(f0, params, cfg, weight=None) -> Trajectory:
    if cfg.method == "picard":
        return picard_solve(f0, params, cfg, weight)
    return euler_run(f0, params, cfg, weight)


def lipschitz_constant_C(params: ModelParams) -> float:
    """C = (1 + sum |C_j|) * 2 A(1, s - 2 delta)."""
    return (1.0 + params.pd.abs_coefficient_sum) * 2.0 * embedding_constant_A(
        params.p, params.s - 2.0 * params.delta
    )


def lipschitz_L(a: float, b: float, params: ModelParams) -> float:
    """L(a, b) with ||N(u) - N(w)||_{s-2 delta} <= L(||u||_s, ||w||_s) ||u - w||_s."""
    if a < 0 or b < 0:
        raise InvalidArgument("norms must be >= 0")
    c = lipschitz_constant_C(params)
    m = int(params.m)
    poly = math.fsum(a**k * b ** (m - 1 - k) for k in range(m))
    return c * (params.beta + 1.0) * (a + b) + c**2 * (a * a + a * b + b * b) + c ** (m + 1) * poly


@dataclass(frozen=True)
class ExistenceEstimate:
    T: float
    M: float
    L_at_boundary: float
    contraction_constant: float


def kernel_integral(T: float, params: ModelParams) -> float:
    """Integral over [0, T] of the H_{s-2 delta} -> H_s smoothing factor (beta dropped)."""
    q = params.delta / params.alpha
    if q == 0.0:
        return 2.0 * T
    c = math.exp(-q) * (params.delta / (params.alpha * params.gamma)) ** q
    return T + c * T ** (1.0 - q) / (1.0 - q)


def existence_time(f0_norm: float, M: float, params: ModelParams) -> ExistenceEstimate:
    """Largest T (by bisection) for which the mild map keeps the M-ball and contracts."""
    if M <= 0:
        raise InvalidArgument("M must be > 0")
    if params.delta >= params.alpha:
        raise InvalidArgument("existence estimate needs delta < alpha")
    R = M + f0_norm
    l_self = lipschitz_L(R, 0.0, params)
    l_pair = lipschitz_L(R, R, params)

    def ok(T):
        k = kernel_integral(T, params)
        return l_self * R * k <= M and l_pair * k < 1.0

    # bracket geometrically first: the horizon can be far below 1 when the
    # constants are large, and linear bisection from [0, 1] would miss it
    lo, hi = 0.0, 1.0
    if ok(hi):
        while ok(2.0 * hi) and hi < 1e12:
            hi *= 2.0
        lo, hi = hi, 2.0 * hi
    else:
        t = 0.5
        while t > 0.0 and not ok(t):
            t *= 0.5
        if t == 0.0:
            raise EstimateFailed("no positive horizon satisfies both inequalities")
        lo, hi = t, 2.0 * t
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if ok(mid):
            lo = mid
        else:
            hi = mid
    if not ok(lo):
        raise EstimateFailed("no positive horizon satisfies both inequalities")
    return ExistenceEstimate(lo, M, l_pair, l_pair * kernel_integral(lo, params))


@dataclass
class DependenceReport:
    times: np.ndarray
    distance: np.ndarray
    envelope: np.ndarray
    W: float
    L: float
    ok: bool

    @property
    def slack(self) -> float:
        """Smallest envelope / distance ratio over frames with nonzero distance."""
        mask = self.distance > 0
        if not mask.any():
            return math.inf
        return float(np.min(self.envelope[mask] / self.distance[mask]))


def continuous_dependence_check(
    f0: RadialField, f1: RadialField, params: ModelParams, cfg: SolverConfig, slack: float = 1e-9
) -> DependenceReport:
    """Compare two runs against exp(L(W, W) t) ||f0 - f1||_s plus scheme error."""
    u = solve(f0, params, cfg)
    v = solve(f1, params, cfg)
    n = min(len(u.times), len(v.times))
    W = float(max(u.hs_norm[:n].max(), v.hs_norm[:n].max()))
    L = lipschitz_L(W, W, params)
    d0 = norm_sobolev(linear_combine(1.0, f0, -1.0, f1), params.s)
    dist = np.array(
        [norm_sobolev(linear_combine(1.0, a, -1.0, b), params.s)
         for a, b in zip(u.snapshots[:n], v.snapshots[:n])]
    )
    times = u.times[:n]
    with np.errstate(over="ignore"):
        env = np.exp(L * times) * d0 + u.error_budget + v.error_budget + slack
    return DependenceReport(times, dist, env, W, L, bool(np.all(dist <= env)))


def monitor_G(traj: Trajectory, ode: ComparisonODE) -> dict:
    """Centered-difference dG/dt against H(G) at interior frames.

    A frame is flagged when dG/dt < H(G) by more than 10 dt max|G''|.
    Returned as a diagnostic; nothing is asserted.
    """
    t, g = traj.times, traj.G_value
    if len(t) < 3:
        return {"times": [], "dGdt": [], "H": [], "defect": [], "violations": 0, "tolerance": 0.0}
    dt = np.diff(t)
    dgdt = (g[2:] - g[:-2]) / (t[2:] - t[:-2])
    second = np.abs(np.diff(g, 2)) / (dt[1:] * dt[:-1])
    tol = float(10.0 * dt.max() * (second.max() if second.size else 0.0))
    H = np.array([ode.H(x) for x in g[1:-1]])
    defect = dgdt - H
    return {
        "times": t[1:-1],
        "dGdt": dgdt,
        "H": H,
        "defect": defect,
        "violations": int(np.sum(defect < -tol)),
        "tolerance": tol,
    }
