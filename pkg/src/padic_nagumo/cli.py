"""Command line front end: config files, runs, and CSV/PNG/JSON export.

Config files hold one ``key = value`` per line; ``#`` starts a comment.
Example (the diffusion-only panel)::

    p = 3
    gamma = 1
    alpha = 0.2
    reaction = false
    initial = gauss:4:100
    dt = 0.01
    t_end = 3
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from .errors import ConfigError, EstimateFailed, InvalidArgument, IterationDiverged
from .invariants import run_suite
from .operators import PDTerms, TailPolicy
from .radial import RadialField, ball_indicator, from_profile, gaussian_profile, norm_sobolev
from .solver import (
    METHODS,
    ExistenceEstimate,
    ModelParams,
    SolverConfig,
    Trajectory,
    existence_time,
    monitor_G,
    solve,
)
from .wavelets import blowup_weight_build, ode_blowup_time, pairing_G

DEFAULT_SEED = 20240917


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_pd_terms(text: str) -> tuple[tuple[float, float], ...]:
    """``"1:0.1; 0.5:0.3"`` -> ((1.0, 0.1), (0.5, 0.3)); empty text means no terms."""
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        coef, expo = chunk.split(":")
        out.append((float(coef), float(expo)))
    return tuple(out)


def format_pd_terms(terms) -> str:
    return ";".join(f"{c!r}:{d!r}" for c, d in terms)


def _check_initial(text: str) -> str:
    kind, *args = text.strip().split(":")
    if kind == "gauss" and len(args) == 2:
        amp, width = float(args[0]), float(args[1])
        if width <= 0:
            raise ValueError("gauss width must be > 0")
        return f"gauss:{amp!r}:{width!r}"
    if kind == "ball" and len(args) == 1:
        return f"ball:{int(args[0])}"
    raise ValueError(f"initial must be gauss:A:B or ball:k, got {text!r}")


@dataclass
class RunConfig:
    p: int
    gamma: float
    alpha: float
    initial: str
    beta: float = 0.0
    m: int = 3
    pd_terms: tuple = ()
    s: float = 2.0
    reaction: bool = True
    j_min: int = -20
    j_max: int = 20
    dt: float = 1e-3
    t_end: float = 0.3
    save_every: int = 1
    tail_depth: int = 40
    blowup_threshold: float = 1e6
    method: str = "euler-kochubei"
    max_picard_iters: int = 100
    picard_tol: float = 1e-8
    weight_r: int = 0
    weight_kind: str = "signed"
    png_scale: int = 8
    out_dir: str = "out"

    def model_params(self) -> ModelParams:
        return ModelParams(
            self.p, self.gamma, self.alpha, self.beta, self.m,
            PDTerms(self.pd_terms), self.s, self.reaction,
        )

    def solver_config(self) -> SolverConfig:
        return SolverConfig(
            self.j_min, self.j_max, self.dt, self.t_end, self.save_every,
            TailPolicy(self.tail_depth), self.blowup_threshold,
            self.max_picard_iters, self.picard_tol, self.method,
        )

    def initial_field(self) -> RadialField:
        kind, *args = self.initial.split(":")
        if kind == "gauss":
            prof = gaussian_profile(self.p, float(args[0]), float(args[1]))
            return from_profile(self.p, self.j_min, self.j_max, prof)
        k = int(args[0])
        return ball_indicator(self.p, k).extended(min(k, self.j_min), max(k, self.j_max))

    def serialize(self) -> str:
        lines = []
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name == "pd_terms":
                text = format_pd_terms(val)
            elif isinstance(val, bool):
                text = "true" if val else "false"
            elif isinstance(val, float):
                text = repr(val)
            else:
                text = str(val)
            lines.append(f"{f.name} = {text}")
        return "\n".join(lines) + "\n"


_REQUIRED = ("p", "gamma", "alpha", "initial")

_PARSERS = {
    "p": int,
    "gamma": float,
    "alpha": float,
    "beta": float,
    "m": int,
    "pd_terms": parse_pd_terms,
    "s": float,
    "reaction": _parse_bool,
    "j_min": int,
    "j_max": int,
    "dt": float,
    "t_end": float,
    "save_every": int,
    "tail_depth": int,
    "blowup_threshold": float,
    "method": str,
    "max_picard_iters": int,
    "picard_tol": float,
    "weight_r": int,
    "weight_kind": str,
    "png_scale": int,
    "out_dir": str,
    "initial": _check_initial,
}


def parse_config(text: str) -> RunConfig:
    """Parse and validate a config file body; errors name the offending line."""
    values, where = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} (first on line {where[key]})")
        try:
            values[key] = _PARSERS[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
        where[key] = lineno
    missing = [k for k in _REQUIRED if k not in values]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    cfg = RunConfig(**values)
    _validate(cfg, where)
    return cfg


def _validate(cfg: RunConfig, where: dict):
    def fail(key, msg):
        at = f"line {where[key]}: " if key in where else ""
        raise ConfigError(f"{at}{key}: {msg}")

    if cfg.method not in METHODS:
        fail("method", f"must be one of {', '.join(METHODS)}")
    if cfg.weight_kind not in ("signed", "modulus"):
        fail("weight_kind", "must be signed or modulus")
    if cfg.png_scale < 1:
        fail("png_scale", "must be >= 1")
    if cfg.weight_r > 0:
        fail("weight_r", "must be <= 0")
    if cfg.blowup_threshold <= 0:
        fail("blowup_threshold", "must be > 0")
    if cfg.picard_tol <= 0 or cfg.max_picard_iters < 1:
        fail("picard_tol" if cfg.picard_tol <= 0 else "max_picard_iters", "must be positive")
    # the domain types own the remaining range checks; map their errors to keys
    checks = (
        ("p", lambda: cfg.model_params()),
        ("j_min", lambda: cfg.solver_config()),
        ("tail_depth", lambda: TailPolicy(cfg.tail_depth)),
    )
    for key, build in checks:
        try:
            build()
        except InvalidArgument as exc:
            named = (k for k in where if re.search(rf"\b{k}\b", str(exc)))
            culprit = next(named, key)
            fail(culprit, str(exc))
    if cfg.initial.startswith("gauss"):
        return
    k = int(cfg.initial.split(":")[1])
    if not cfg.j_min <= k <= cfg.j_max:
        fail("initial", f"ball radius {k} outside the window [{cfg.j_min}, {cfg.j_max}]")


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return parse_config(text)


PANELS = {
    "left": RunConfig(
        p=3, gamma=1.0, alpha=0.2, beta=0.0, m=3, pd_terms=(), reaction=False,
        initial="gauss:4.0:100.0", dt=1e-2, t_end=3.0, out_dir="panel-left",
    ),
    "right": RunConfig(
        p=3, gamma=1.0, alpha=0.2, beta=0.7, m=3, pd_terms=((1.0, 0.1),),
        initial="gauss:4.0:100.0", dt=1e-3, t_end=0.3, out_dir="panel-right",
    ),
}


@dataclass
class HeatMap:
    """u(p^{-ord}, t): rows are ord ascending, columns are saved times."""

    ord_axis: np.ndarray
    time_axis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.ord_axis = np.asarray(self.ord_axis, dtype=int)
        self.time_axis = np.asarray(self.time_axis, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.ord_axis), len(self.time_axis)):
            raise InvalidArgument(
                f"matrix {self.values.shape} does not match axes "
                f"({len(self.ord_axis)}, {len(self.time_axis)})"
            )


def heatmap_from(traj: Trajectory, j_min: int, j_max: int, skip_initial: bool = True) -> HeatMap:
    """Shell j goes to row ord = -j; the t = 0 frame is dropped by default."""
    ords = np.arange(-j_max, -j_min + 1)
    start = 1 if skip_initial and len(traj.times) > 1 else 0
    frames = traj.snapshots[start:]
    vals = np.array([[u.value_on_shell(int(-o)) for u in frames] for o in ords], dtype=float)
    return HeatMap(ords, traj.times[start:], vals.reshape(len(ords), len(frames)))


def export_csv(hm: HeatMap, path) -> None:
    header = "ord," + ",".join(f"t={float(t)!r}" for t in hm.time_axis)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for o, row in zip(hm.ord_axis, hm.values):
            fh.write(f"{o}," + ",".join("%.16e" % v for v in row) + "\n")


def read_csv(path) -> HeatMap:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    times = [float(h[2:]) for h in header[1:]]
    ords = [int(r[0]) for r in rows]
    vals = np.array([[float(x) for x in r[1:]] for r in rows], dtype=float)
    return HeatMap(ords, times, vals.reshape(len(ords), len(times)))


def export_png(hm: HeatMap, path, threshold: float = 1e6, scale: int = 8) -> None:
    """8-bit grayscale, linear from 0 to min(max value, threshold)."""
    vals = np.nan_to_num(hm.values, nan=threshold, posinf=threshold, neginf=0.0)
    top = min(float(vals.max()) if vals.size else 0.0, threshold)
    if top > 0:
        img = np.clip(vals / top, 0.0, 1.0) * 255.0
    else:
        img = np.zeros_like(vals)
    img = np.rint(img).astype(np.uint8)
    if img.size == 0:
        img = np.zeros((max(len(hm.ord_axis), 1), 1), dtype=np.uint8)
    img = np.repeat(np.repeat(img, scale, axis=0), scale, axis=1)
    Image.fromarray(img, mode="L").save(path, format="PNG")


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


def export_json(traj: Trajectory, estimate: Optional[ExistenceEstimate], path,
                params: Optional[dict] = None, extra: Optional[dict] = None) -> dict:
    """Write summary.json; non-finite numbers become null."""
    summary = {
        "times": traj.times,
        "sup_norm": traj.sup_norm,
        "l2_norm": traj.l2_norm,
        "hs_norm": traj.hs_norm,
        "mass": traj.mass,
        "G_value": traj.G_value,
        "blowup": None if traj.blowup is None
        else {"t_lo": traj.blowup[0], "t_hi": traj.blowup[1]},
        "error_budget": traj.error_budget,
        "params": params or {},
        "existence_estimate": None if estimate is None else asdict(estimate),
    }
    summary.update(extra or {})
    summary = _jsonable(summary)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=1, allow_nan=False)
    return summary


def comparison_times(cfg: RunConfig, f0: RadialField) -> dict:
    """Blow-up times of g' = H(g) seeded with both weights; needs P(D) = D^alpha1, m = 3."""
    params = cfg.model_params()
    try:
        ode = params.comparison_ode(cfg.weight_r)
        out = {"weight_r": cfg.weight_r}
        for kind in ("modulus", "signed"):
            g0 = pairing_G(f0, blowup_weight_build(cfg.p, cfg.weight_r, cfg.alpha, kind))
            t = ode_blowup_time(g0, ode, cfg.blowup_threshold) if g0 < cfg.blowup_threshold else 0.0
            out[kind] = {"g0": g0, "t_blowup": t}
        return out
    except InvalidArgument as exc:
        return {"unavailable": str(exc)}


def simulate(cfg: RunConfig, out_dir=None) -> dict:
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    params, scfg = cfg.model_params(), cfg.solver_config()
    f0 = cfg.initial_field()
    weight = None
    if cfg.p > 2:
        weight = blowup_weight_build(cfg.p, cfg.weight_r, cfg.alpha, cfg.weight_kind)
    t0 = time.perf_counter()
    traj = solve(f0, params, scfg, weight)
    elapsed = time.perf_counter() - t0

    s0 = norm_sobolev(f0, params.s)
    estimate = None
    if params.delta < params.alpha:
        try:
            estimate = existence_time(s0, max(s0, 1.0), params)
        except EstimateFailed:
            pass
    extra = {"runtime_s": elapsed, "ode_blowup": comparison_times(cfg, f0)}
    if weight is not None and cfg.p > 2 and params.pd and len(params.pd.terms) == 1 and params.m == 3:
        try:
            mon = monitor_G(traj, params.comparison_ode(cfg.weight_r))
            extra["monitor_G"] = {
                "violations": mon["violations"],
                "tolerance": mon["tolerance"],
                "frames": len(mon["times"]),
                "min_defect": float(np.min(mon["defect"])) if len(mon["defect"]) else None,
            }
        except InvalidArgument:
            pass
    export_csv(heatmap_from(traj, cfg.j_min, cfg.j_max), out / "heatmap.csv")
    export_png(heatmap_from(traj, cfg.j_min, cfg.j_max), out / "heatmap.png",
               cfg.blowup_threshold, cfg.png_scale)
    echo = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    echo["pd_terms"] = [list(t) for t in cfg.pd_terms]
    return export_json(traj, estimate, out / "summary.json", echo, extra)


def _threads() -> int:
    # kernels are single threaded; the variable is accepted and clamped
    try:
        return max(1, int(os.environ.get("NAGUMO_THREADS", "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="padic-nagumo", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    p = sub.add_parser("simulate", help="run a config and write heatmap.csv/png and summary.json")
    p.add_argument("config")
    p.add_argument("--out", help="override out_dir")
    p = sub.add_parser("reproduce-fig1", help="run one of the two canonical panels")
    p.add_argument("panel", choices=sorted(PANELS))
    p.add_argument("--out", help="override out_dir")
    p = sub.add_parser("estimate-existence", help="print the local existence horizon")
    p.add_argument("config")
    p.add_argument("--M", type=float, default=None, help="ball radius (default max(||f0||_s, 1))")
    p = sub.add_parser("check-invariants", help="run the randomized property suite")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--fraction", type=float, default=1.0, help="scale every case count")
    return ap


def _brief(summary: dict) -> str:
    sup = [x for x in summary["sup_norm"] if x is not None]
    lines = [f"frames: {len(summary['times'])}",
             f"sup norm: {sup[0]:.6g} -> {sup[-1]:.6g}" if sup else "sup norm: n/a",
             f"error budget: {summary['error_budget']:.3e}"]
    b = summary["blowup"]
    lines.append("blow-up: none" if b is None else f"blow-up: [{b['t_lo']:.6f}, {b['t_hi']:.6f}]")
    ode = summary.get("ode_blowup", {})
    if "modulus" in ode:
        lines.append(f"comparison ODE blow-up (modulus weight): {ode['modulus']['t_blowup']}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _threads()
    try:
        if args.cmd == "simulate":
            summary = simulate(load_config(args.config), args.out)
            print(_brief(summary))
        elif args.cmd == "reproduce-fig1":
            summary = simulate(PANELS[args.panel], args.out)
            print(_brief(summary))
        elif args.cmd == "estimate-existence":
            cfg = load_config(args.config)
            params = cfg.model_params()
            s0 = norm_sobolev(cfg.initial_field(), params.s)
            est = existence_time(s0, args.M if args.M is not None else max(s0, 1.0), params)
            print(f"||f0||_s = {s0:.10g}")
            for k, v in asdict(est).items():
                print(f"{k} = {v:.10g}")
        else:
            results = run_suite(args.seed, args.fraction)
            bad = False
            for r in results:
                print(r.line())
                for msg in r.failures[:20]:
                    print(f"    {msg}")
                bad |= not r.ok
            return 1 if bad else 0
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (InvalidArgument, EstimateFailed, IterationDiverged) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
