"""Exact coefficient arithmetic: Gaussian rationals and half-integer gamma values.

Coefficients throughout the symbol calculus are Gaussian rationals,
represented as plain ``(re, im)`` tuples of ``gmpy2.mpq``.  Tuples plus
module-level functions keep the hot loops free of method dispatch.
Conversion to floating point happens only at evaluation / integration time.
"""

from __future__ import annotations

import math

from gmpy2 import mpq

GaussRat = tuple  # (mpq, mpq)

_Q0 = mpq(0)
_Q1 = mpq(1)

GR_ZERO: GaussRat = (_Q0, _Q0)
GR_ONE: GaussRat = (_Q1, _Q0)
GR_I: GaussRat = (_Q0, _Q1)
GR_MINUS_I: GaussRat = (_Q0, -_Q1)


def gr(re, im=0) -> GaussRat:
    """Build a Gaussian rational from anything mpq accepts."""
    return (mpq(re), mpq(im))


def gr_add(a: GaussRat, b: GaussRat) -> GaussRat:
    return (a[0] + b[0], a[1] + b[1])


def gr_sub(a: GaussRat, b: GaussRat) -> GaussRat:
    return (a[0] - b[0], a[1] - b[1])


def gr_neg(a: GaussRat) -> GaussRat:
    return (-a[0], -a[1])


def gr_mul(a: GaussRat, b: GaussRat) -> GaussRat:
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def gr_scale(a: GaussRat, s) -> GaussRat:
    """Multiply by a plain rational scalar."""
    return (a[0] * s, a[1] * s)


def gr_is_zero(a: GaussRat) -> bool:
    return not a[0] and not a[1]


def gr_to_complex(a: GaussRat) -> complex:
    return complex(float(a[0]), float(a[1]))


def gamma_half(num2: int) -> tuple:
    """Exact Gamma(num2/2) for positive num2, as (rational, pi_half_power).

    The returned pair ``(c, p)`` means ``c * pi**(p/2)``; p is 0 for integer
    arguments and 1 for half-integer ones (Gamma(k+1/2) = (2k)!/(4^k k!) sqrt(pi)).
    """
    if num2 <= 0:
        raise ValueError(f"gamma_half needs a positive argument, got {num2}/2")
    if num2 % 2 == 0:
        return (mpq(math.factorial(num2 // 2 - 1)), 0)
    k = (num2 - 1) // 2
    return (mpq(math.factorial(2 * k), 4**k * math.factorial(k)), 1)


class PiValue:
    """Exact sum of Gaussian-rational multiples of half-integer powers of pi.

    Stored as a map from twice-the-exponent to a Gaussian rational, so the
    value is ``sum_k coeff[k] * pi**(k/2)``.  Heat invariants live here until
    the final conversion to floating point.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = dict(terms) if terms else {}

    @classmethod
    def of(cls, coeff: GaussRat, pi2: int = 0) -> "PiValue":
        if gr_is_zero(coeff):
            return cls()
        return cls({pi2: coeff})

    def __add__(self, other: "PiValue") -> "PiValue":
        out = dict(self.terms)
        for p, c in other.terms.items():
            s = gr_add(out.get(p, GR_ZERO), c)
            if gr_is_zero(s):
                out.pop(p, None)
            else:
                out[p] = s
        return PiValue(out)

    def scaled(self, coeff: GaussRat, pi2: int = 0) -> "PiValue":
        if gr_is_zero(coeff):
            return PiValue()
        return PiValue({p + pi2: gr_mul(c, coeff) for p, c in self.terms.items()})

    def to_complex(self) -> complex:
        total = 0j
        for p, c in sorted(self.terms.items()):
            total += gr_to_complex(c) * math.pi ** (p / 2)
        return total

    def is_zero(self) -> bool:
        return not self.terms

    def __repr__(self):
        return f"PiValue({self.terms!r})"
