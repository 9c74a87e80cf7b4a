"""Metric jets and operator coefficients against analytic ball geometry."""

import math

import numpy as np
import pytest
from gmpy2 import mpq

from steklovheat.geometry_jets import (
    Geometry,
    PotentialSpec,
    ball_jets,
    build_operator_coeffs,
    curvature_data,
    flat_jets,
    jm_jets,
    jm_symbol,
    weingarten_from_jets,
)


def _sphere_metric_exact(n, R, x):
    """Round radius-R sphere in geodesic normal coordinates at x = 0."""
    rho = np.linalg.norm(x)
    if rho < 1e-14:
        return np.eye(n)
    s = rho / R
    g = np.outer(x, x) / rho**2
    return g + (math.sin(s) / s) ** 2 * (np.eye(n) - g)


@pytest.mark.parametrize("n,R", [(2, 1.0), (2, 2.0), (3, 1.5)])
def test_ball_jets_match_exact_sphere_metric(n, R):
    jets = ball_jets(n, mpq(R), 6)
    rng = np.random.default_rng(4)
    for _ in range(5):
        x = rng.uniform(-0.05, 0.05, size=n)
        t = rng.uniform(0.0, 0.05)
        exact = ((R - t) / R) ** 2 * _sphere_metric_exact(n, R, x)
        got = jets.eval_block(x, t)
        assert np.max(np.abs(got - exact)) < 1e-9


def test_weingarten_flat_and_ball():
    assert np.allclose(weingarten_from_jets(flat_jets(3, 2)), 0.0)
    for R in (1.0, 2.0):
        kappa = weingarten_from_jets(ball_jets(3, mpq(R), 2))
        assert np.allclose(kappa, 1.0 / R, atol=1e-14)


def test_mean_curvature_coefficient():
    """E = -(1/2) h^{jk} dh_{jk}/dt equals -n kappa at the boundary point."""
    n, R = 3, 2.0
    coeffs = build_operator_coeffs(ball_jets(n, mpq(2), 3))
    e0 = coeffs.E.restrict_last().const()
    assert float(e0[0]) == pytest.approx(n / R, rel=1e-14)
    flat = build_operator_coeffs(flat_jets(n, 3))
    assert flat.E.is_zero()
    assert flat.Q1.is_zero()


def test_q2_is_principal_symbol():
    """Q2 evaluates to xi . hinv xi."""
    coeffs = build_operator_coeffs(ball_jets(2, 1, 3))
    xi = np.array([0.3, -1.2])
    val = coeffs.Q2.restrict_boundary().evaluate(xi, -1.0)[0, 0]
    assert val == pytest.approx(float(xi @ xi), rel=1e-12)


def test_potential_jet_and_jm_symbol():
    pot = PotentialSpec(q0=0.5, dq_normal=0.25, dq_tangential=(0.125, 0.0))
    n, order = 2, 3
    jet = pot.jet(n, order)
    assert float(jet.const()[0]) == 0.5
    assert float(jet.deriv(n).const()[0]) == 0.25
    assert float(jet.deriv(0).const()[0]) == 0.125

    jm = jm_jets(3, pot, n, order)
    coeffs = build_operator_coeffs(flat_jets(n, order))
    mat = jm_symbol(coeffs.ctx, jm).evaluate(np.array([1.0, 0.0]), -1.0)
    expected = np.zeros((3, 3), dtype=complex)
    expected[0, 1] = expected[1, 2] = -1.0
    expected[2, 0] = 0.5
    assert np.max(np.abs(mat - expected)) < 1e-14

    # m = 1 companion matrix is just [q]
    jm1 = jm_jets(1, pot, n, order)
    mat1 = jm_symbol(coeffs.ctx, jm1).evaluate(np.array([1.0, 0.0]), -1.0)
    assert mat1[0, 0] == pytest.approx(0.5)


def test_curvature_data_models():
    ball = curvature_data(Geometry.ball(3, 2), PotentialSpec(q0=0.7))
    assert ball.kappa == (0.5, 0.5, 0.5)
    assert ball.R_boundary == pytest.approx(6 / 4)
    assert ball.q0 == 0.7
    flat = curvature_data(Geometry.flat(4))
    assert flat.sum_kappa() == 0.0
    assert flat.R_boundary == 0.0


def test_metric_positivity_enforced():
    import steklovheat.geometry_jets as gj
    from steklovheat.exactnum import gr
    from steklovheat.jets import JetPoly

    bad = {
        (0, 0): JetPoly.constant(3, 2, gr(-1)),
        (0, 1): JetPoly.zero(3, 2),
        (1, 0): JetPoly.zero(3, 2),
        (1, 1): JetPoly.constant(3, 2, gr(1)),
    }
    with pytest.raises(ValueError):
        gj.MetricJets(2, 2, bad)
