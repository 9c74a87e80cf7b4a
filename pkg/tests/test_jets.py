"""Jet arithmetic against direct polynomial evaluation."""

import math

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from steklovheat.exactnum import GR_ONE, gamma_half, gr
from steklovheat.jets import JetPoly


def _random_jet(rng, nvars, order, nterms=5):
    out = JetPoly.zero(nvars, order)
    for _ in range(nterms):
        exps = tuple(int(rng.integers(0, order + 1)) for _ in range(nvars))
        if sum(exps) > order:
            continue
        num = int(rng.integers(-6, 7))
        den = int(rng.integers(1, 5))
        out = out + JetPoly.monomial(nvars, order, exps, gr(mpq(num, den)))
    return out


def test_constant_and_monomial_roundtrip():
    j = JetPoly.constant(3, 4, gr(mpq(5, 3)))
    assert j.const() == (mpq(5, 3), mpq(0))
    m = JetPoly.monomial(3, 4, (1, 0, 2), GR_ONE)
    assert m.eval([2.0, 0.0, 3.0]) == pytest.approx(18.0)


def test_truncation_drops_high_degree():
    j = JetPoly.monomial(2, 2, (1, 1), GR_ONE)
    sq = j * j
    # degree 4 exceeds the retained order 2
    assert sq.is_zero()


def test_add_mul_match_evaluation():
    rng = np.random.default_rng(11)
    for _ in range(30):
        a = _random_jet(rng, 3, 3)
        b = _random_jet(rng, 3, 3)
        pt = rng.uniform(-0.3, 0.3, size=3)
        assert complex((a + b).eval(pt)) == pytest.approx(
            a.eval(pt) + b.eval(pt), abs=1e-12
        )
        # the product truncates at order 3; compare against the truncated sum
        full = (a * b).eval(pt)
        direct = sum(
            ca[0] * cb[0] * np.prod(pt ** np.array(
                [x + y for x, y in zip(ka, kb)]))
            for ka, ca in a.coeffs.items()
            for kb, cb in b.coeffs.items()
            if sum(ka) + sum(kb) <= 3
        )
        assert complex(full) == pytest.approx(complex(direct), abs=1e-12)


def test_deriv_matches_finite_difference():
    rng = np.random.default_rng(5)
    j = _random_jet(rng, 3, 4, nterms=8)
    pt = np.array([0.07, -0.11, 0.05])
    h = 1e-6
    for i in range(3):
        step = np.zeros(3)
        step[i] = h
        fd = (j.eval(pt + step) - j.eval(pt - step)) / (2 * h)
        assert j.deriv(i).eval(pt) == pytest.approx(fd, rel=1e-6, abs=1e-6)


def test_restrict_last():
    j = JetPoly.monomial(2, 3, (1, 1), GR_ONE) + JetPoly.monomial(
        2, 3, (2, 0), gr(3)
    )
    r = j.restrict_last()
    assert r.eval([2.0, 99.0]) == pytest.approx(12.0)


@given(
    st.lists(st.integers(-5, 5), min_size=2, max_size=2),
    st.lists(st.integers(-5, 5), min_size=2, max_size=2),
)
@settings(max_examples=60, deadline=None)
def test_ring_laws(av, bv):
    a = JetPoly.constant(2, 3, gr(av[0])) + JetPoly.monomial(
        2, 3, (1, 0), gr(av[1])
    )
    b = JetPoly.constant(2, 3, gr(bv[0])) + JetPoly.monomial(
        2, 3, (0, 1), gr(bv[1])
    )
    assert a + b == b + a
    assert a * b == b * a
    assert (a - a).is_zero()


def test_gamma_half_values():
    assert gamma_half(2) == (mpq(1), 0)
    assert gamma_half(8) == (mpq(6), 0)
    c, p = gamma_half(1)
    assert p == 1 and c == 1  # Gamma(1/2) = sqrt(pi)
    c, p = gamma_half(5)
    assert p == 1 and c == mpq(3, 4)  # Gamma(5/2) = (3/4) sqrt(pi)
    val = float(c) * math.sqrt(math.pi)
    assert val == pytest.approx(math.gamma(2.5), rel=1e-15)
