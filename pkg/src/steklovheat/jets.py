"""Truncated multivariate Taylor polynomials with exact coefficients.

A JetPoly carries the x-dependence of metric coefficients and potentials near
a base point: a map from multi-index (total degree <= order) to a Gaussian
rational.  Addition and multiplication truncate at the retained order, which
is exactly the right semantics for jet calculus: a discarded degree-(d) term
can only influence results after d derivatives, more than any computation
retaining order >= d will ever apply.
"""

from __future__ import annotations

from .exactnum import (
    GR_ZERO,
    GaussRat,
    gr,
    gr_add,
    gr_is_zero,
    gr_mul,
    gr_neg,
    gr_scale,
    gr_to_complex,
)


class JetPoly:
    __slots__ = ("nvars", "order", "coeffs")

    def __init__(self, nvars: int, order: int, coeffs=None):
        self.nvars = nvars
        self.order = order
        self.coeffs = {}
        if coeffs:
            for k, c in coeffs.items():
                if sum(k) <= order and not gr_is_zero(c):
                    self.coeffs[k] = c

    @classmethod
    def zero(cls, nvars: int, order: int) -> "JetPoly":
        return cls(nvars, order)

    @classmethod
    def constant(cls, nvars: int, order: int, value) -> "JetPoly":
        c = value if isinstance(value, tuple) else gr(value)
        return cls(nvars, order, {(0,) * nvars: c})

    @classmethod
    def monomial(cls, nvars: int, order: int, exponents, value=1) -> "JetPoly":
        c = value if isinstance(value, tuple) else gr(value)
        return cls(nvars, order, {tuple(exponents): c})

    def is_zero(self) -> bool:
        return not self.coeffs

    def const(self) -> GaussRat:
        return self.coeffs.get((0,) * self.nvars, GR_ZERO)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, JetPoly)
            and self.nvars == other.nvars
            and self.coeffs == other.coeffs
        )

    def __hash__(self):
        return hash((self.nvars, frozenset(self.coeffs.items())))

    def _check(self, other: "JetPoly"):
        if self.nvars != other.nvars or self.order != other.order:
            raise ValueError(
                f"jet mismatch: {self.nvars} vars order {self.order} vs "
                f"{other.nvars} vars order {other.order}"
            )

    def __add__(self, other: "JetPoly") -> "JetPoly":
        self._check(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            s = gr_add(out.get(k, GR_ZERO), c)
            if gr_is_zero(s):
                out.pop(k, None)
            else:
                out[k] = s
        res = JetPoly(self.nvars, self.order)
        res.coeffs = out
        return res

    def __neg__(self) -> "JetPoly":
        res = JetPoly(self.nvars, self.order)
        res.coeffs = {k: gr_neg(c) for k, c in self.coeffs.items()}
        return res

    def __sub__(self, other: "JetPoly") -> "JetPoly":
        return self + (-other)

    def __mul__(self, other: "JetPoly") -> "JetPoly":
        self._check(other)
        order = self.order
        out = {}
        for k1, c1 in self.coeffs.items():
            d1 = sum(k1)
            for k2, c2 in other.coeffs.items():
                if d1 + sum(k2) > order:
                    continue
                key = tuple(a + b for a, b in zip(k1, k2))
                prod = gr_mul(c1, c2)
                if key in out:
                    s = gr_add(out[key], prod)
                    if gr_is_zero(s):
                        del out[key]
                    else:
                        out[key] = s
                elif not gr_is_zero(prod):
                    out[key] = prod
        res = JetPoly(self.nvars, order)
        res.coeffs = out
        return res

    def scale(self, coeff: GaussRat) -> "JetPoly":
        if gr_is_zero(coeff):
            return JetPoly(self.nvars, self.order)
        res = JetPoly(self.nvars, self.order)
        res.coeffs = {k: gr_mul(c, coeff) for k, c in self.coeffs.items()}
        return res

    def scale_rat(self, s) -> "JetPoly":
        res = JetPoly(self.nvars, self.order)
        res.coeffs = {k: gr_scale(c, s) for k, c in self.coeffs.items()}
        return res

    def deriv(self, i: int) -> "JetPoly":
        """Partial derivative in variable i (0-based)."""
        if not 0 <= i < self.nvars:
            raise ValueError(f"variable index {i} out of range for {self.nvars} vars")
        out = {}
        for k, c in self.coeffs.items():
            e = k[i]
            if e == 0:
                continue
            key = k[:i] + (e - 1,) + k[i + 1 :]
            out[key] = gr_scale(c, e)
        res = JetPoly(self.nvars, self.order)
        res.coeffs = out
        return res

    def restrict_last(self) -> "JetPoly":
        """Set the last variable to zero (restriction to the boundary)."""
        res = JetPoly(self.nvars, self.order)
        res.coeffs = {k: c for k, c in self.coeffs.items() if k[-1] == 0}
        return res

    def eval(self, point) -> complex:
        """Numeric value at a point (floats); used by finite-difference oracles."""
        total = 0j
        for k, c in self.coeffs.items():
            mono = 1.0
            for x, e in zip(point, k):
                if e:
                    mono *= x**e
            total += gr_to_complex(c) * mono
        return total

    def __repr__(self):
        if not self.coeffs:
            return "JetPoly(0)"
        parts = [f"{k}:{float(c[0])}{'+' if float(c[1]) >= 0 else ''}{float(c[1])}i"
                 for k, c in sorted(self.coeffs.items())]
        return "JetPoly(" + ", ".join(parts) + ")"
