"""Factorization and parametrix recursions for the boundary operator symbols.

The interior recursion solves, degree by degree, the symbol identity obtained
from factoring the second-order system operator into first-order factors:

    sum_{j+k-|alpha|=l} (1/alpha!) d_xi^alpha rt_j . D_x^alpha rt_k
      - E rt_{l} + d_t rt_{l}  =  RHS_l,

with RHS_2 = Q2 I, RHS_1 = Q1 I, RHS_0 = J_m, RHS_l = 0 below, and
rt_1 = -w I (principal symbol of the decaying factor).  The boundary ladder
stores the symbols of -Lambda_m:  r_j = -rt_j restricted to x_{n+1} = 0, so
r_1 = +w I and the heat semigroup decays.

The resolvent parametrix ladder solves (r - tau) o s = I:

    s_{-1}   = (r_1 - tau I)^{-1} = u I,
    s_{-1-l} = -u * sum_{|alpha|=l+j+k, -l<=k<=1, -l<=j<=-1}
                   (1/alpha!) d_xi^alpha r_k . D_x^alpha s_j.

Closed-form levels r_1, r_0, r_-1, r_-2 are built by a separate, hand-written
code path and cross-checked numerically against the generic recursion.  The
published displays for the levels carry a sign slip in their odd-order parts
(verifiable against the exact flat half-space symbol sqrt(|xi|^2 + q)); the
closed forms here are solved directly from the factorization identity and
agree with the exact model operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from gmpy2 import mpq

from .geometry_jets import JmJets, OperatorCoeffs, jm_symbol
from .symbol_algebra import (
    SymbolExpr,
    factorial_multi,
    identity_symbol,
    multi_indices,
    u_symbol,
    w_symbol,
)


@dataclass
class RLadder:
    """Symbols r_1 .. r_{1-L} of -Lambda_m, restricted to the boundary."""

    coeffs: OperatorCoeffs
    jm: JmJets
    L: int
    levels: dict  # degree -> SymbolExpr (restricted context)
    interior: dict = field(repr=False, default_factory=dict)  # degree -> rt level

    @property
    def m(self) -> int:
        return self.jm.m


@dataclass
class SLadder:
    """Resolvent parametrix symbols s_{-1} .. s_{-1-L}."""

    r: RLadder
    L: int
    levels: dict  # degree -> SymbolExpr


def _apply_xi(sym: SymbolExpr, alpha) -> SymbolExpr:
    out = sym
    for i, a in enumerate(alpha):
        for _ in range(a):
            out = out.deriv_xi(i + 1)
    return out


def _apply_dx(sym: SymbolExpr, alpha) -> SymbolExpr:
    out = sym
    for i, a in enumerate(alpha):
        for _ in range(a):
            out = out.dx(i + 1)
    return out


class _DerivCache:
    """Memoized d_xi^alpha / D_x^alpha applications on ladder levels."""

    def __init__(self):
        self._xi = {}
        self._dx = {}

    def xi(self, level_id, sym, alpha):
        key = (level_id, alpha)
        if key not in self._xi:
            self._xi[key] = _apply_xi(sym, alpha)
        return self._xi[key]

    def dx(self, level_id, sym, alpha):
        key = (level_id, alpha)
        if key not in self._dx:
            self._dx[key] = _apply_dx(sym, alpha)
        return self._dx[key]


def compute_r(coeffs: OperatorCoeffs, jm: JmJets, L: int) -> RLadder:
    """Run the interior factorization recursion to depth L and restrict."""
    if L < 0:
        raise ValueError("depth must be >= 0")
    if L > coeffs.jet_order:
        raise ValueError(
            f"depth {L} needs more x-derivatives than jet order {coeffs.jet_order} retains"
        )
    ctx = coeffs.ctx
    n = ctx.n
    m = jm.m
    cache = _DerivCache()

    def promote(scalar: SymbolExpr) -> SymbolExpr:
        # scalar (1x1) expression times I_m
        out = SymbolExpr.zero(ctx, m)
        for key, jet in scalar.entries[0][0].items():
            for i in range(m):
                out.entries[i][i][key] = jet
        return out

    rt = {1: w_symbol(ctx, m).scale_rat(-1)}
    jmat = jm_symbol(ctx, jm)

    for l in range(1, L + 1):
        deg = 2 - l
        acc = SymbolExpr.zero(ctx, m)
        known = sorted(rt, reverse=True)
        for j in known:
            for k in known:
                a = j + k - deg
                if a < 0:
                    continue
                for alpha in multi_indices(n, a):
                    term = cache.xi(j, rt[j], alpha) * cache.dx(k, rt[k], alpha)
                    if a > 0:
                        term = term.scale_rat(mpq(1, factorial_multi(alpha)))
                    acc = acc + term
        prev = rt[deg]
        acc = acc + prev.scale_jet(-coeffs.E) + prev.deriv_x(n + 1)

        if l == 1:
            rhs = promote(coeffs.Q1)
        elif l == 2:
            rhs = jmat
        else:
            rhs = SymbolExpr.zero(ctx, m)

        # divide by 2 rt_1 = -2w I
        rt[1 - l] = (rhs - acc).shift_w(-1).scale_rat(mpq(-1, 2))

    levels = {d: (-sym).restrict_boundary() for d, sym in rt.items()}
    return RLadder(coeffs, jm, L, levels, interior=rt)


def closed_form_r(coeffs: OperatorCoeffs, jm: JmJets, level: int) -> SymbolExpr:
    """Displayed per-level formulas for r_1, r_0, r_-1, r_-2 (independent path)."""
    if level not in (1, 0, -1, -2):
        raise ValueError("closed forms exist for levels 1, 0, -1, -2 only")
    ctx = coeffs.ctx
    n = ctx.n
    m = jm.m
    half = mpq(1, 2)

    def promote(scalar: SymbolExpr) -> SymbolExpr:
        out = SymbolExpr.zero(ctx, m)
        for key, jet in scalar.entries[0][0].items():
            for i in range(m):
                out.entries[i][i][key] = jet
        return out

    def sum_xi_dx(pairs, order):
        acc = SymbolExpr.zero(ctx, m)
        for a, b in pairs:
            for alpha in multi_indices(n, order):
                term = _apply_xi(a, alpha) * _apply_dx(b, alpha)
                acc = acc + term.scale_rat(mpq(1, factorial_multi(alpha)))
        return acc

    r1 = w_symbol(ctx, m)
    if level == 1:
        return r1.restrict_boundary()

    # r_0 = (1/2) w^-1 [ Q1 I - sum d_xi r1 . D_x r1 - E r1 + d_t r1 ]
    bracket0 = (
        promote(coeffs.Q1)
        - sum_xi_dx([(r1, r1)], 1)
        - r1.scale_jet(coeffs.E)
        + r1.deriv_x(n + 1)
    )
    r0 = bracket0.shift_w(-1).scale_rat(half)
    if level == 0:
        return r0.restrict_boundary()

    # r_-1 = (1/2) w^-1 [ J_m - r0^2 - sum_1 (d r1.D r0 + d r0.D r1)
    #                     - sum_2 (1/a!) d r1.D r1 - E r0 + d_t r0 ]
    jmat = jm_symbol(ctx, jm)
    bracket1 = (
        jmat
        - r0 * r0
        - sum_xi_dx([(r1, r0), (r0, r1)], 1)
        - sum_xi_dx([(r1, r1)], 2)
        - r0.scale_jet(coeffs.E)
        + r0.deriv_x(n + 1)
    )
    rm1 = bracket1.shift_w(-1).scale_rat(half)
    if level == -1:
        return rm1.restrict_boundary()

    # r_-2 = -(1/2) w^-1 [ 2 r_-1 r0 + sum_1 (d r0.D r0 + d r1.D r_-1 + d r_-1.D r1)
    #                      + sum_2 (1/a!)(d r0.D r1 + d r1.D r0)
    #                      + sum_3 (1/a!) d r1.D r1 + E r_-1 - d_t r_-1 ]
    bracket2 = (
        (rm1 * r0).scale_rat(2)
        + sum_xi_dx([(r0, r0), (r1, rm1), (rm1, r1)], 1)
        + sum_xi_dx([(r0, r1), (r1, r0)], 2)
        + sum_xi_dx([(r1, r1)], 3)
        + rm1.scale_jet(coeffs.E)
        - rm1.deriv_x(n + 1)
    )
    rm2 = bracket2.shift_w(-1).scale_rat(-half)
    return rm2.restrict_boundary()


def compute_s(r: RLadder, L: int) -> SLadder:
    """Resolvent parametrix recursion to depth L (levels -1 .. -1-L)."""
    if L > r.L:
        raise ValueError(f"parametrix depth {L} exceeds r-ladder depth {r.L}")
    ctx0 = next(iter(r.levels.values())).ctx
    m = r.m
    n = ctx0.n
    cache = _DerivCache()

    s = {-1: u_symbol(ctx0, m)}
    for l in range(1, L + 1):
        acc = SymbolExpr.zero(ctx0, m)
        for j in range(-1, -l - 1, -1):
            for k in range(1, -l, -1):
                a = l + j + k
                if a < 0:
                    continue
                for alpha in multi_indices(n, a):
                    term = cache.xi(("r", k), r.levels[k], alpha) * cache.dx(
                        ("s", j), s[j], alpha
                    )
                    if a > 0:
                        term = term.scale_rat(mpq(1, factorial_multi(alpha)))
                    acc = acc + term
        s[-1 - l] = acc.shift_u(1).scale_rat(-1)
    return SLadder(r, L, s)


def parametrix_defect(r: RLadder, s: SLadder) -> SymbolExpr:
    """Truncated composition (r - tau) o s minus the identity.

    All terms of degree > -L-2 cancel by construction; the returned expression
    collects the uncancelled remainder, which must decay like |xi|^(-L-1)
    along rays (checked numerically by the caller).
    """
    ctx0 = next(iter(r.levels.values())).ctx
    m = r.m
    n = ctx0.n
    acc = SymbolExpr.zero(ctx0, m)
    for k, rk in r.levels.items():
        for j, sj in s.levels.items():
            max_a = r.L + 2  # everything the finite ladders can produce
            for a in range(0, max_a + 1):
                for alpha in multi_indices(n, a):
                    term = _apply_xi(rk, alpha) * _apply_dx(sj, alpha)
                    if a > 0:
                        term = term.scale_rat(mpq(1, factorial_multi(alpha)))
                    acc = acc + term
    for j, sj in s.levels.items():
        acc = acc - sj.mul_tau()
    return acc - identity_symbol(ctx0, m)


def verify_jm_split(coeffs: OperatorCoeffs, jm: JmJets, *, depth: int = 3,
                    points=None, tol: float = 1e-10) -> dict:
    """Check the potential-dependent part of the s-ladder against closed forms.

    Splits each s-level into its J_m part (difference against the q = 0 run)
    and compares the levels s_-3, s_-4 with the explicit pole-series forms at
    sample points.  Returns a report dict; raises nothing, callers inspect
    ``report["ok"]``.
    """
    from .geometry_jets import JmJets as _Jm
    from .jets import JetPoly

    n = coeffs.n
    if points is None:
        rng = np.random.default_rng(7)
        points = []
        for _ in range(6):
            xi = rng.normal(size=n)
            xi /= np.linalg.norm(xi)
            xi *= rng.uniform(1.0, 2.0)
            points.append((xi, complex(-rng.uniform(0.5, 2.0), rng.uniform(-1, 1))))

    jm0 = _Jm(jm.m, JetPoly.zero(coeffs.n + 1, coeffs.jet_order))
    r_full = compute_r(coeffs, jm, depth)
    r_zero = compute_r(coeffs, jm0, depth)
    s_full = compute_s(r_full, depth)
    s_zero = compute_s(r_zero, depth)

    ctx0 = coeffs.ctx.restricted()
    kappa = [
        -0.5 * float(coeffs.metric.jets[(j, j)].deriv(n).const()[0])
        for j in range(n)
    ]
    q0 = complex(float(jm.q_jets.const()[0]), float(jm.q_jets.const()[1]))
    dqn = jm.q_jets.deriv(n).const()
    dqn = complex(float(dqn[0]), float(dqn[1]))
    dqt = []
    for l in range(n):
        c = jm.q_jets.deriv(l).const()
        dqt.append(complex(float(c[0]), float(c[1])))

    def jpattern(q_entry: complex) -> np.ndarray:
        # dJ/dq pattern: only the (m,1) slot carries the potential
        m = jm.m
        out = np.zeros((m, m), dtype=complex)
        out[m - 1, 0] = q_entry
        return out

    report = {"ok": True, "levels": {}, "tol": tol}
    for level in (-3, -4):
        if -1 - depth > level:
            continue
        worst = 0.0
        for xi, tau in points:
            full = s_full.levels[level].evaluate(xi, tau)
            zero = s_zero.levels[level].evaluate(xi, tau)
            jpart = full - zero
            w = float(np.linalg.norm(xi))
            u = 1.0 / (w - tau)
            rho = sum(k * x**2 for k, x in zip(kappa, xi)) / (2 * w**2) - 0.5 * sum(
                kappa
            )
            if level == -3:
                expected = jpattern(-q0 / (2 * w) * u**2)
            else:
                dq_dir = sum(-1j * g * x for g, x in zip(dqt, xi))
                kxi2 = sum(k * x**2 for k, x in zip(kappa, xi))
                scale = (
                    q0 * (u**3 / w * rho + u**2 * kxi2 / (2 * w**4))
                    - dqn * u**2 / (4 * w**2)
                    + dq_dir * (u**2 / (4 * w**3) + u**3 / (2 * w**2))
                )
                expected = jpattern(scale)
            diff = float(np.max(np.abs(jpart - expected)))
            ref = max(1.0, float(np.max(np.abs(expected))))
            worst = max(worst, diff / ref)
        report["levels"][level] = worst
        if worst > tol:
            report["ok"] = False
    return report
