"""Graded term algebra for matrix-valued, parameter-dependent boundary symbols.

A symbol is a finite sum of terms ``jet(x) * xi^alpha * w^p * u^q`` per matrix
entry, where

* ``xi`` are the n cotangent variables,
* ``w`` stands for sqrt(sum_jk hinv_jk(x) xi_j xi_k)  (the principal square root),
* ``u`` stands for (w - tau)^(-1)  (the resolvent pole),
* the jet is a truncated Taylor polynomial in (x_1..x_n, x_{n+1}).

The homogeneity degree of a term is |alpha| + p - q (tau carries weight 1).
The relation w^2 = sum hinv xi xi is *not* rewritten into a canonical form;
equalities between expressions are asserted numerically through `evaluate`.

Derivative rules (Leibniz over the three factors):

    d_{xi_i} xi^alpha = alpha_i xi^(alpha - e_i)
    d_{xi_i} w^p      = p w^(p-2) sum_k hinv_ik xi_k
    d_{xi_i} u^q      = -q u^(q+1) w^(-1) sum_k hinv_ik xi_k
    d_{x_i}  w^p      = (p/2) w^(p-2) sum_jk (d_i hinv_jk) xi_j xi_k
    d_{x_i}  u^q      = -(q/2) u^(q+1) w^(-1) sum_jk (d_i hinv_jk) xi_j xi_k

with the inverse-metric jets supplied once through a SymbolContext.  All
values are immutable after construction; every operation is a pure function.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from gmpy2 import mpq

from .exactnum import (
    GR_MINUS_I,
    GR_ONE,
    GR_ZERO,
    GaussRat,
    gr_is_zero,
    gr_mul,
    gr_neg,
    gr_scale,
    gr_to_complex,
)
from .jets import JetPoly


class TermKey(NamedTuple):
    xi: tuple  # exponents of xi_1..xi_n
    wp: int    # power of w (may be negative)
    up: int    # power of u = (w - tau)^(-1), nonnegative

    @property
    def degree(self) -> int:
        return sum(self.xi) + self.wp - self.up


class SymbolContext:
    """Shared geometric data for a family of symbols.

    Holds the inverse-metric jets hinv_jk(x, x_{n+1}) that drive the w/u
    derivative rules, plus caches for their x-derivatives, the restriction to
    the boundary, and the numeric value at the base point.
    """

    def __init__(self, n: int, order: int, hinv: dict):
        self.n = n
        self.nx = n + 1
        self.order = order
        self.hinv = hinv  # (j, k) 0-based -> JetPoly in n+1 vars
        self._dhinv = {}
        self._restricted = None
        h0 = np.zeros((n, n))
        for (j, k), jet in hinv.items():
            c = jet.const()
            h0[j, k] = float(c[0])
        self.h0 = h0

    def dhinv(self, i: int, j: int, k: int) -> JetPoly:
        key = (i, j, k)
        if key not in self._dhinv:
            self._dhinv[key] = self.hinv[(j, k)].deriv(i)
        return self._dhinv[key]

    def restricted(self) -> "SymbolContext":
        """Context with all jets restricted to x_{n+1} = 0."""
        if self._restricted is None:
            hinv0 = {jk: jet.restrict_last() for jk, jet in self.hinv.items()}
            self._restricted = SymbolContext(self.n, self.order, hinv0)
        return self._restricted

    def w_value(self, xi) -> float:
        xi = np.asarray(xi, dtype=float)
        return math.sqrt(float(xi @ self.h0 @ xi))


class SymbolExpr:
    __slots__ = ("ctx", "m", "entries")

    def __init__(self, ctx: SymbolContext, m: int, entries=None):
        self.ctx = ctx
        self.m = m
        if entries is None:
            entries = [[{} for _ in range(m)] for _ in range(m)]
        self.entries = entries

    # ---------------------------------------------------------------- setup

    @classmethod
    def zero(cls, ctx: SymbolContext, m: int) -> "SymbolExpr":
        return cls(ctx, m)

    @classmethod
    def scalar_term(cls, ctx: SymbolContext, m: int, key: TermKey,
                    jet: JetPoly) -> "SymbolExpr":
        """jet * xi^alpha * w^p * u^q times the identity matrix."""
        out = cls(ctx, m)
        if not jet.is_zero():
            for i in range(m):
                out.entries[i][i][key] = jet
        return out

    @classmethod
    def from_entry_jets(cls, ctx: SymbolContext, m: int, jets: dict,
                        key: TermKey | None = None) -> "SymbolExpr":
        """Matrix with given jets at positions (i, j), all under one term key."""
        key = key or TermKey((0,) * ctx.n, 0, 0)
        out = cls(ctx, m)
        for (i, j), jet in jets.items():
            if not jet.is_zero():
                out.entries[i][j][key] = jet
        return out

    def _blank_jet(self) -> JetPoly:
        return JetPoly.zero(self.ctx.nx, self.ctx.order)

    def _check(self, other: "SymbolExpr"):
        if self.ctx is not other.ctx:
            raise ValueError("symbols built over different contexts")
        if self.ctx.n != other.ctx.n:
            raise ValueError("cotangent dimension mismatch")

    # ------------------------------------------------------------- identity

    def is_zero(self) -> bool:
        return all(not cell for row in self.entries for cell in row)

    def degrees(self) -> set:
        return {
            key.degree for row in self.entries for cell in row for key in cell
        }

    def num_terms(self) -> int:
        return sum(len(cell) for row in self.entries for cell in row)

    # ------------------------------------------------------------ ring ops

    def __add__(self, other: "SymbolExpr") -> "SymbolExpr":
        self._check(other)
        if self.m != other.m:
            raise ValueError(f"matrix dimension mismatch: {self.m} vs {other.m}")
        out = SymbolExpr(self.ctx, self.m)
        for i in range(self.m):
            for j in range(self.m):
                cell = dict(self.entries[i][j])
                for key, jet in other.entries[i][j].items():
                    if key in cell:
                        s = cell[key] + jet
                        if s.is_zero():
                            del cell[key]
                        else:
                            cell[key] = s
                    else:
                        cell[key] = jet
                out.entries[i][j] = cell
        return out

    def __neg__(self) -> "SymbolExpr":
        out = SymbolExpr(self.ctx, self.m)
        for i in range(self.m):
            for j in range(self.m):
                out.entries[i][j] = {k: -jet for k, jet in self.entries[i][j].items()}
        return out

    def __sub__(self, other: "SymbolExpr") -> "SymbolExpr":
        return self + (-other)

    def __mul__(self, other: "SymbolExpr") -> "SymbolExpr":
        """Matrix product with termwise key addition and jet products."""
        self._check(other)
        if self.m != other.m:
            raise ValueError(f"matrix dimension mismatch: {self.m} vs {other.m}")
        m = self.m
        out = SymbolExpr(self.ctx, m)
        for i in range(m):
            row = self.entries[i]
            for j in range(m):
                acc = {}
                for k in range(m):
                    left = row[k]
                    right = other.entries[k][j]
                    if not left or not right:
                        continue
                    for k1, jet1 in left.items():
                        for k2, jet2 in right.items():
                            prod = jet1 * jet2
                            if prod.is_zero():
                                continue
                            key = TermKey(
                                tuple(a + b for a, b in zip(k1.xi, k2.xi)),
                                k1.wp + k2.wp,
                                k1.up + k2.up,
                            )
                            if key in acc:
                                s = acc[key] + prod
                                if s.is_zero():
                                    del acc[key]
                                else:
                                    acc[key] = s
                            else:
                                acc[key] = prod
                out.entries[i][j] = acc
        return out

    def scale(self, coeff: GaussRat) -> "SymbolExpr":
        out = SymbolExpr(self.ctx, self.m)
        if gr_is_zero(coeff):
            return out
        for i in range(self.m):
            for j in range(self.m):
                out.entries[i][j] = {
                    k: jet.scale(coeff) for k, jet in self.entries[i][j].items()
                }
        return out

    def scale_rat(self, s) -> "SymbolExpr":
        out = SymbolExpr(self.ctx, self.m)
        for i in range(self.m):
            for j in range(self.m):
                out.entries[i][j] = {
                    k: jet.scale_rat(s) for k, jet in self.entries[i][j].items()
                }
        return out

    def scale_jet(self, jet: JetPoly) -> "SymbolExpr":
        """Multiply every term's jet by a scalar jet (e.g. a coefficient E(x))."""
        out = SymbolExpr(self.ctx, self.m)
        for i in range(self.m):
            for j in range(self.m):
                cell = {}
                for k, j0 in self.entries[i][j].items():
                    p = j0 * jet
                    if not p.is_zero():
                        cell[k] = p
                out.entries[i][j] = cell
        return out

    def shift_w(self, p: int) -> "SymbolExpr":
        """Multiply by the scalar w^p (pure key shift)."""
        out = SymbolExpr(self.ctx, self.m)
        for i in range(self.m):
            for j in range(self.m):
                out.entries[i][j] = {
                    TermKey(k.xi, k.wp + p, k.up): jet
                    for k, jet in self.entries[i][j].items()
                }
        return out

    def shift_u(self, q: int) -> "SymbolExpr":
        """Multiply by the scalar u^q (pure key shift)."""
        out = SymbolExpr(self.ctx, self.m)
        for i in range(self.m):
            for j in range(self.m):
                out.entries[i][j] = {
                    TermKey(k.xi, k.wp, k.up + q): jet
                    for k, jet in self.entries[i][j].items()
                }
        return out

    def mul_tau(self) -> "SymbolExpr":
        """Multiply by the scalar tau, using tau = w - u^(-1)."""
        out = SymbolExpr(self.ctx, self.m)
        for i in range(self.m):
            for j in range(self.m):
                cell = {}
                for k, jet in self.entries[i][j].items():
                    for key in (
                        TermKey(k.xi, k.wp + 1, k.up),
                        TermKey(k.xi, k.wp, k.up - 1),
                    ):
                        if key.up < 0:
                            raise ValueError("mul_tau on a pole-free term")
                        add = jet if key.wp == k.wp + 1 else -jet
                        if key in cell:
                            s = cell[key] + add
                            if s.is_zero():
                                del cell[key]
                            else:
                                cell[key] = s
                        else:
                            cell[key] = add
                out.entries[i][j] = cell
        return out

    # ---------------------------------------------------------- derivatives

    def _map_terms(self, fn) -> "SymbolExpr":
        out = SymbolExpr(self.ctx, self.m)
        for i in range(self.m):
            for j in range(self.m):
                acc = {}
                for key, jet in self.entries[i][j].items():
                    for nkey, njet in fn(key, jet):
                        if njet.is_zero():
                            continue
                        if nkey in acc:
                            s = acc[nkey] + njet
                            if s.is_zero():
                                del acc[nkey]
                            else:
                                acc[nkey] = s
                        else:
                            acc[nkey] = njet
                out.entries[i][j] = acc
        return out

    def deriv_xi(self, i: int) -> "SymbolExpr":
        """d/d xi_i (i is 1-based)."""
        n = self.ctx.n
        if not 1 <= i <= n:
            raise ValueError(f"xi index {i} out of range 1..{n}")
        ii = i - 1
        ctx = self.ctx

        def rule(key: TermKey, jet: JetPoly):
            alpha, p, q = key
            if alpha[ii] > 0:
                lowered = alpha[:ii] + (alpha[ii] - 1,) + alpha[ii + 1 :]
                yield TermKey(lowered, p, q), jet.scale_rat(alpha[ii])
            if p != 0:
                for k in range(n):
                    h = ctx.hinv[(ii, k)]
                    if h.is_zero():
                        continue
                    raised = alpha[:k] + (alpha[k] + 1,) + alpha[k + 1 :]
                    yield TermKey(raised, p - 2, q), (jet * h).scale_rat(p)
            if q != 0:
                for k in range(n):
                    h = ctx.hinv[(ii, k)]
                    if h.is_zero():
                        continue
                    raised = alpha[:k] + (alpha[k] + 1,) + alpha[k + 1 :]
                    yield TermKey(raised, p - 1, q + 1), (jet * h).scale_rat(-q)

        return self._map_terms(rule)

    def deriv_x(self, i: int) -> "SymbolExpr":
        """d/d x_i (1-based; i = n+1 is the normal direction)."""
        n = self.ctx.n
        if not 1 <= i <= n + 1:
            raise ValueError(f"x index {i} out of range 1..{n + 1}")
        ii = i - 1
        ctx = self.ctx

        def rule(key: TermKey, jet: JetPoly):
            alpha, p, q = key
            dj = jet.deriv(ii)
            if not dj.is_zero():
                yield key, dj
            if p == 0 and q == 0:
                return
            for j in range(n):
                for k in range(n):
                    dh = ctx.dhinv(ii, j, k)
                    if dh.is_zero():
                        continue
                    raised = list(alpha)
                    raised[j] += 1
                    raised[k] += 1
                    raised = tuple(raised)
                    prod = jet * dh
                    if p != 0:
                        yield TermKey(raised, p - 2, q), prod.scale_rat(mpq_half(p))
                    if q != 0:
                        yield TermKey(raised, p - 1, q + 1), prod.scale_rat(
                            mpq_half(-q)
                        )

        return self._map_terms(rule)

    def dx(self, i: int) -> "SymbolExpr":
        """D_{x_i} = -i d/d x_i."""
        return self.deriv_x(i).scale(GR_MINUS_I)

    def homogeneous_part(self, d: int) -> "SymbolExpr":
        out = SymbolExpr(self.ctx, self.m)
        for i in range(self.m):
            for j in range(self.m):
                out.entries[i][j] = {
                    k: jet for k, jet in self.entries[i][j].items() if k.degree == d
                }
        return out

    # ------------------------------------------------------------- numerics

    def evaluate(self, xi, tau: complex, pole_tol: float = 1e-9) -> np.ndarray:
        """Numeric value at the base point x = x0 (jets contribute constants)."""
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (self.ctx.n,):
            raise ValueError(f"xi must have length {self.ctx.n}")
        w = self.ctx.w_value(xi)
        if abs(w - tau) < pole_tol:
            raise ValueError(f"evaluation point too close to the pole: |w - tau| = "
                             f"{abs(w - tau):.3g}")
        u = 1.0 / (w - tau)
        out = np.zeros((self.m, self.m), dtype=complex)
        for i in range(self.m):
            for j in range(self.m):
                total = 0j
                for key, jet in self.entries[i][j].items():
                    c = jet.const()
                    if gr_is_zero(c):
                        continue
                    val = gr_to_complex(c)
                    for x, e in zip(xi, key.xi):
                        if e:
                            val *= x**e
                    if key.wp:
                        val *= w**key.wp
                    if key.up:
                        val *= u**key.up
                    total += val
                out[i, j] = total
        return out

    def restrict_boundary(self) -> "SymbolExpr":
        """Restriction to x_{n+1} = 0, re-homed into the restricted context."""
        ctx0 = self.ctx.restricted()
        out = SymbolExpr(ctx0, self.m)
        for i in range(self.m):
            for j in range(self.m):
                cell = {}
                for key, jet in self.entries[i][j].items():
                    r = jet.restrict_last()
                    if not r.is_zero():
                        cell[key] = r
                out.entries[i][j] = cell
        return out

    def point_terms(self):
        """Constant-jet terms at the base point: yields (i, j, key, GaussRat)."""
        for i in range(self.m):
            for j in range(self.m):
                for key, jet in self.entries[i][j].items():
                    c = jet.const()
                    if not gr_is_zero(c):
                        yield i, j, key, c

    def dump(self) -> str:
        """Sorted plain-text rendering for golden tests."""
        lines = []
        for i in range(self.m):
            for j in range(self.m):
                for key in sorted(self.entries[i][j]):
                    jet = self.entries[i][j][key]
                    lines.append(
                        f"({i},{j}) | xi={key.xi} | w^{key.wp} | u^{key.up} | {jet!r}"
                    )
        return "\n".join(lines)


def mpq_half(p: int):
    return mpq(p, 2)


def w_symbol(ctx: SymbolContext, m: int) -> SymbolExpr:
    """w * I_m."""
    jet = JetPoly.constant(ctx.nx, ctx.order, GR_ONE)
    return SymbolExpr.scalar_term(ctx, m, TermKey((0,) * ctx.n, 1, 0), jet)


def u_symbol(ctx: SymbolContext, m: int) -> SymbolExpr:
    """u * I_m = (w - tau)^(-1) I_m."""
    jet = JetPoly.constant(ctx.nx, ctx.order, GR_ONE)
    return SymbolExpr.scalar_term(ctx, m, TermKey((0,) * ctx.n, 0, 1), jet)


def identity_symbol(ctx: SymbolContext, m: int) -> SymbolExpr:
    jet = JetPoly.constant(ctx.nx, ctx.order, GR_ONE)
    return SymbolExpr.scalar_term(ctx, m, TermKey((0,) * ctx.n, 0, 0), jet)


def multi_indices(n: int, total: int):
    """All multi-indices over n variables with |alpha| == total."""
    if n == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in multi_indices(n - 1, total - first):
            yield (first,) + rest


def factorial_multi(alpha) -> int:
    out = 1
    for a in alpha:
        out *= math.factorial(a)
    return out
