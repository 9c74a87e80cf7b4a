"""Command-line front-end.

Subcommands: invariants | verify-symbols | ball-trace | weyl | moments.
Configuration is a plain-text file of key = value lines grouped in sections
(see README for the grammar).  Exit codes: 0 success, 2 tolerance breach,
3 configuration error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import ball_spectrum as bs
from .dtn_factorization import closed_form_r, compute_r, compute_s, verify_jm_split
from .geometry_jets import (
    Geometry,
    PotentialSpec,
    build_operator_coeffs,
    curvature_data,
    jm_jets,
)
from .heat_invariants import (
    DivergentTermError,
    MomentTable,
    closed_form_coefficient,
    heat_coefficients,
)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    m: int = 1
    n: int = 2
    geometry_type: str = "ball"
    radius: float = 1.0
    q0: float = 0.0
    dq_normal: float = 0.0
    dq_tangential: tuple = ()
    max_l: int = 2
    jet_order: int | None = None
    depth: int = 3
    t_min: float = 0.002
    t_max: float = 0.01
    t_points: int = 50
    k_max: int = 30000
    tolerance: float = 1e-8
    lambdas: tuple = (50.0, 100.0, 150.0, 200.0)
    out_format: str = "csv"
    out_path: str | None = None
    warnings: list = field(default_factory=list)

    def geometry(self) -> Geometry:
        if self.geometry_type == "ball":
            return Geometry.ball(self.n, self.radius)
        if self.geometry_type == "flat":
            return Geometry.flat(self.n)
        raise ConfigError(f"unsupported geometry type {self.geometry_type!r}")

    def potential(self) -> PotentialSpec:
        return PotentialSpec(self.q0, self.dq_normal, self.dq_tangential)


def _parse_config(path: str | None, overrides) -> RunConfig:
    cfg = RunConfig()
    parser = configparser.ConfigParser()
    if path is not None:
        read = parser.read(path)
        if not read:
            raise ConfigError(f"cannot read config file {path!r}")
    try:
        if parser.has_section("problem"):
            cfg.m = parser.getint("problem", "m", fallback=cfg.m)
            cfg.n = parser.getint("problem", "n", fallback=cfg.n)
        if parser.has_section("geometry"):
            cfg.geometry_type = parser.get("geometry", "type",
                                           fallback=cfg.geometry_type)
            cfg.radius = parser.getfloat("geometry", "radius",
                                         fallback=cfg.radius)
        if parser.has_section("potential"):
            cfg.q0 = parser.getfloat("potential", "q0", fallback=cfg.q0)
            cfg.dq_normal = parser.getfloat("potential", "dq_normal",
                                            fallback=cfg.dq_normal)
            raw = parser.get("potential", "dq_tangential", fallback="")
            if raw.strip():
                cfg.dq_tangential = tuple(float(v) for v in raw.split(","))
        if parser.has_section("compute"):
            cfg.max_l = parser.getint("compute", "max_l", fallback=cfg.max_l)
            if parser.get("compute", "jet_order", fallback=""):
                cfg.jet_order = parser.getint("compute", "jet_order")
            cfg.depth = parser.getint("compute", "depth", fallback=cfg.depth)
        if parser.has_section("verify"):
            cfg.t_min = parser.getfloat("verify", "t_min", fallback=cfg.t_min)
            cfg.t_max = parser.getfloat("verify", "t_max", fallback=cfg.t_max)
            cfg.t_points = parser.getint("verify", "t_points",
                                         fallback=cfg.t_points)
            cfg.k_max = parser.getint("verify", "k_max", fallback=cfg.k_max)
            cfg.tolerance = parser.getfloat("verify", "tolerance",
                                            fallback=cfg.tolerance)
            raw = parser.get("verify", "lambdas", fallback="")
            if raw.strip():
                cfg.lambdas = tuple(float(v) for v in raw.split(","))
        if parser.has_section("output"):
            cfg.out_format = parser.get("output", "format",
                                        fallback=cfg.out_format)
            cfg.out_path = parser.get("output", "path", fallback=cfg.out_path)
    except ValueError as err:
        raise ConfigError(f"bad config value: {err}") from None

    if overrides.format:
        cfg.out_format = overrides.format
    if overrides.out:
        cfg.out_path = overrides.out

    if cfg.m < 1:
        raise ConfigError("m must be >= 1")
    if cfg.n < 1:
        raise ConfigError("n must be >= 1")
    if cfg.n < 2 * cfg.m:
        cfg.warnings.append(
            f"n = {cfg.n} < 2m = {2 * cfg.m}: outside the standing solvability "
            "hypothesis; the symbolic pipeline proceeds anyway"
        )
    if cfg.jet_order is not None and cfg.jet_order < cfg.max_l:
        raise ConfigError("jet_order must be at least max_l")
    if cfg.max_l > cfg.n + 1:
        raise ConfigError(
            f"max_l = {cfg.max_l} exceeds n + 1 = {cfg.n + 1}; the expansion "
            "beyond that order is not locally computable"
        )
    if cfg.out_format not in ("csv", "json"):
        raise ConfigError(f"unknown output format {cfg.out_format!r}")
    return cfg


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _emit(cfg: RunConfig, header, rows, json_payload):
    if cfg.out_format == "json":
        text = json.dumps(json_payload, indent=2, sort_keys=True) + "\n"
    else:
        lines = [",".join(header)]
        for row in rows:
            lines.append(
                ",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row)
            )
        text = "\n".join(lines) + "\n"
    if cfg.out_path:
        with open(cfg.out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------ commands


def cmd_invariants(cfg: RunConfig, seed: int) -> int:
    geom = cfg.geometry()
    pot = cfg.potential()
    data = curvature_data(geom, pot)
    rows = []
    records = []
    worst = 0.0
    for l in range(cfg.max_l + 1):
        try:
            rec = heat_coefficients(geom, pot, cfg.m, l, cfg.jet_order)[-1]
        except DivergentTermError:
            rec = None
        try:
            clo = closed_form_coefficient(data, cfg.m, cfg.n, l)
        except (DivergentTermError, ValueError):
            clo = None
        if rec is None and clo is None:
            # both paths report the same divergence; that is agreement
            rows.append((l, -1, -1, "divergent", 0.0, 0.0, 0.0))
            continue
        if clo is None:
            if l <= 3:
                worst = max(worst, float("inf"))
            records.append(rec.to_record(cfg.geometry_type, f"q0={cfg.q0}"))
            for i in range(cfg.m):
                for j in range(cfg.m):
                    rows.append((l, i, j, "recursion",
                                 rec.value[i, j], 0.0, 0.0))
            continue
        if rec is None:
            worst = max(worst, float("inf"))
            rows.append((l, -1, -1, "divergent", 0.0, 0.0, 0.0))
            continue
        records.append(rec.to_record(cfg.geometry_type, f"q0={cfg.q0}"))
        records.append(clo.to_record(cfg.geometry_type, f"q0={cfg.q0}"))
        for i in range(cfg.m):
            for j in range(cfg.m):
                a, b = rec.value[i, j], clo.value[i, j]
                diff = abs(a - b)
                scale = max(1.0, abs(a), abs(b))
                worst = max(worst, diff / scale)
                rows.append((l, i, j, "recursion|closed_form", a, b, diff))
    header = ("l", "row", "col", "provenance", "recursion_value",
              "closed_form_value", "abs_diff")
    _emit(cfg, header, rows, {"records": records, "worst_rel_diff": worst})
    return 0 if worst <= cfg.tolerance else 2


def cmd_verify_symbols(cfg: RunConfig, seed: int) -> int:
    geom = cfg.geometry()
    pot = cfg.potential()
    order = max(cfg.depth, 3)
    coeffs = build_operator_coeffs(geom.metric_jets(order))
    jm = jm_jets(cfg.m, pot, cfg.n, order)
    r = compute_r(coeffs, jm, cfg.depth)

    rng = np.random.default_rng(seed)
    points = []
    for _ in range(8):
        xi = rng.normal(size=cfg.n)
        xi /= np.linalg.norm(xi)
        xi *= rng.uniform(1.0, 2.0)
        points.append(xi)

    rows = []
    worst = 0.0
    for level in (1, 0, -1, -2):
        if level < 1 - cfg.depth:
            continue
        display = closed_form_r(coeffs, jm, level)
        diff = 0.0
        for xi in points:
            a = r.levels[level].evaluate(xi, -1.0)
            b = display.evaluate(xi, -1.0)
            scale = max(1.0, float(np.max(np.abs(b))))
            diff = max(diff, float(np.max(np.abs(a - b))) / scale)
        rows.append((f"r_{level}", "recursion|closed_form", diff))
        worst = max(worst, diff)

    split = verify_jm_split(coeffs, jm, depth=min(cfg.depth, 3),
                            tol=cfg.tolerance)
    for level, err in split["levels"].items():
        rows.append((f"s_{level}_jpart", "recursion|closed_form", err))
        worst = max(worst, err)

    header = ("check", "provenance", "max_rel_diff")
    _emit(cfg, header, rows,
          {"checks": [{"check": c, "max_rel_diff": d} for c, _, d in rows],
           "worst": worst})
    return 0 if worst <= max(cfg.tolerance, 1e-10) else 2


def cmd_ball_trace(cfg: RunConfig, seed: int) -> int:
    if cfg.geometry_type != "ball":
        raise ConfigError("ball-trace requires geometry type = ball")
    if cfg.q0 or cfg.dq_normal or any(cfg.dq_tangential):
        raise ConfigError("ball-trace requires q = 0 (exact spectra only)")
    geom = cfg.geometry()
    pot = PotentialSpec()
    n, m, R = cfg.n, cfg.m, cfg.radius

    table = bs.spectrum(m, n, R, cfg.k_max)
    ts = np.geomspace(cfg.t_min, cfg.t_max, cfg.t_points)
    samples = [(float(t), bs.exact_heat_trace(table, float(t))) for t in ts]

    max_l = min(cfg.max_l, n + 1)
    invariants = []
    for l in range(max_l + 1):
        try:
            invariants.append(heat_coefficients(geom, pot, m, l, cfg.jet_order)[-1])
        except DivergentTermError:
            break
    area = bs.boundary_area(n, R)
    predicted = [area * float(np.trace(inv.value)) for inv in invariants]

    M = min(len(predicted), n + 1)
    fitted, diag = bs.extract_coefficients(samples, n, M,
                                           extra_powers=(M, M + 1))

    rows = []
    for t, z in samples:
        asym = sum(p * t ** (l - n) for l, p in enumerate(predicted))
        rows.append(("trace", t, z, asym, z - asym, "exact_spectrum"))
    worst = 0.0
    for l in range(M):
        diff = abs(fitted[l] - predicted[l]) / max(1.0, abs(predicted[l]))
        worst = max(worst, diff)
        rows.append(("coefficient", float(l), float(fitted[l]),
                     predicted[l], diff, "fitted|recursion"))
    header = ("kind", "t_or_l", "exact_or_fitted", "asymptotic_or_predicted",
              "residual", "provenance")
    _emit(cfg, header, rows, {
        "fitted": [float(c) for c in fitted],
        "predicted": predicted,
        "diagnostics": diag,
        "worst_rel_diff": worst,
    })
    return 0 if worst <= max(cfg.tolerance, 1e-3) else 2


def cmd_weyl(cfg: RunConfig, seed: int) -> int:
    if cfg.geometry_type != "ball":
        raise ConfigError("weyl requires geometry type = ball")
    n, m, R = cfg.n, cfg.m, cfg.radius
    k_needed = int(2 * max(cfg.lambdas) * R) + 2 * m + 10
    table = bs.spectrum(m, n, R, max(cfg.k_max, k_needed))
    rows = []
    for lam in cfg.lambdas:
        ratio = bs.weyl_ratio(table, lam)
        rows.append((lam, bs.counting_function(table, lam), ratio,
                     "exact_spectrum"))
    header = ("lambda", "count", "weyl_ratio", "provenance")
    _emit(cfg, header, rows, {
        "ratios": [{"lambda": r[0], "count": r[1], "ratio": r[2]} for r in rows],
        "apparent_limit": rows[-1][2],
    })
    return 0


def cmd_moments(cfg: RunConfig, seed: int) -> int:
    table = MomentTable(cfg.n)
    rows = []
    from .symbol_algebra import multi_indices

    for total in range(0, 5):
        for alpha in multi_indices(cfg.n, total):
            val = table.sphere_moment_value(alpha)
            label = "S[" + " ".join(str(a) for a in alpha) + "]"
            rows.append((label, val, "closed_form"))
    header = ("moment", "value", "provenance")
    _emit(cfg, header, rows,
          {"moments": [{"alpha": a, "value": v} for a, v, _ in rows]})
    return 0


COMMANDS = {
    "invariants": cmd_invariants,
    "verify-symbols": cmd_verify_symbols,
    "ball-trace": cmd_ball_trace,
    "weyl": cmd_weyl,
    "moments": cmd_moments,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="steklovheat",
        description="Heat invariants of perturbed polyharmonic boundary operators",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", default=None, help="key-value config file")
    parser.add_argument("--out", default=None, help="output path (default stdout)")
    parser.add_argument("--format", default=None, choices=("csv", "json"))
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    try:
        cfg = _parse_config(args.config, args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 3
    for warning in cfg.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    try:
        return COMMANDS[args.command](cfg, args.seed)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
