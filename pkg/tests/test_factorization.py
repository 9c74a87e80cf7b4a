"""Factorization ladder and resolvent parametrix against independent oracles."""

import numpy as np
import pytest
from gmpy2 import mpq

from steklovheat.dtn_factorization import (
    closed_form_r,
    compute_r,
    compute_s,
    parametrix_defect,
    verify_jm_split,
)
from steklovheat.geometry_jets import (
    PotentialSpec,
    ball_jets,
    build_operator_coeffs,
    flat_jets,
    jm_jets,
)


def _setup(n, m, depth, geometry="ball", R=1, pot=None, order=None):
    order = order if order is not None else max(depth, 2)
    metric = flat_jets(n, order) if geometry == "flat" else ball_jets(n, R, order)
    coeffs = build_operator_coeffs(metric)
    jm = jm_jets(m, pot or PotentialSpec(), n, order)
    return coeffs, jm


def _rays(rng, n, k=5):
    out = []
    for _ in range(k):
        xi = rng.normal(size=n)
        xi /= np.linalg.norm(xi)
        out.append(xi)
    return out


def test_flat_constant_q_matches_sqrt_expansion():
    """Flat half-space, m = 1, q const: the exact symbol is sqrt(|xi|^2 + q).

    Expansion in homogeneity: w + q/(2w) - q^2/(8 w^3) + q^3/(16 w^5) - ...,
    so r_0 = r_-2 = r_-4 = 0 and the odd levels carry the series.
    """
    q = mpq(2, 5)
    coeffs, jm = _setup(3, 1, 5, geometry="flat", pot=PotentialSpec(q0=q))
    r = compute_r(coeffs, jm, 5)
    qf = float(q)
    rng = np.random.default_rng(1)
    for xi in _rays(rng, 3):
        w = float(np.linalg.norm(xi))
        expect = {
            1: w,
            0: 0.0,
            -1: qf / (2 * w),
            -2: 0.0,
            -3: -qf**2 / (8 * w**3),
            -4: 0.0,
        }
        for level, val in expect.items():
            got = r.levels[level].evaluate(xi, -1.0)[0, 0]
            assert got == pytest.approx(val, abs=1e-13)


@pytest.mark.parametrize(
    "n,m,geometry",
    [(2, 1, "flat"), (2, 1, "ball"), (3, 1, "ball"), (2, 2, "ball")],
)
def test_closed_form_r_matches_recursion(n, m, geometry):
    pot = PotentialSpec(q0=mpq(1, 2), dq_normal=mpq(3, 10),
                        dq_tangential=(mpq(1, 5),) + (0,) * (n - 1))
    coeffs, jm = _setup(n, m, 3, geometry=geometry, pot=pot)
    r = compute_r(coeffs, jm, 3)
    rng = np.random.default_rng(6)
    rays = _rays(rng, n)
    for level in (1, 0, -1, -2):
        display = closed_form_r(coeffs, jm, level)
        for xi in rays:
            a = r.levels[level].evaluate(xi, -1.0)
            b = display.evaluate(xi, -1.0)
            scale = max(1.0, float(np.max(np.abs(b))))
            assert float(np.max(np.abs(a - b))) <= 1e-12 * scale


def test_parametrix_solves_resolvent_numerically():
    """Truncated sum of s-levels approximates (r - tau)^{-1} along a ray.

    With constant coefficients (flat metric, constant q) the symbol
    composition is the pointwise product, so the residual must vanish to
    the full ladder order along the scaled ray.
    """
    coeffs, jm = _setup(2, 1, 3, geometry="flat", pot=PotentialSpec(q0=mpq(1, 3)))
    r = compute_r(coeffs, jm, 3)
    s = compute_s(r, 3)
    xi0 = np.array([0.6, 0.8])
    tau0 = complex(-0.9, 0.4)
    scales = np.array([8.0, 16.0, 32.0])
    resids = []
    for scale in scales:
        xi, tau = xi0 * scale, tau0 * scale
        r_val = sum(lvl.evaluate(xi, tau) for lvl in r.levels.values())
        s_val = sum(lvl.evaluate(xi, tau) for lvl in s.levels.values())
        resids.append(abs((r_val[0, 0] - tau) * s_val[0, 0] - 1.0))
    assert resids[0] < 1e-3
    slope = np.polyfit(np.log(scales), np.log(resids), 1)[0]
    assert -slope >= 4 - 0.2, f"residual decay order {-slope} too small"


@pytest.mark.parametrize("n,m,geometry", [(2, 1, "ball"), (2, 2, "ball"),
                                          (3, 1, "flat")])
def test_parametrix_defect_decay(n, m, geometry):
    """Defect of the depth-L ladder decays with order >= L + 1 - 0.2."""
    L = 2
    pot = PotentialSpec(q0=mpq(1, 4), dq_normal=mpq(1, 10))
    coeffs, jm = _setup(n, m, L, geometry=geometry, pot=pot)
    r = compute_r(coeffs, jm, L)
    s = compute_s(r, L)
    defect = parametrix_defect(r, s)
    rng = np.random.default_rng(13)
    scales = np.array([8.0, 16.0, 32.0, 64.0])
    for xi in _rays(rng, n, 3):
        tau0 = complex(-1.1, 0.6)
        norms = []
        for c in scales:
            val = defect.evaluate(xi * c, tau0 * c)
            norms.append(float(np.max(np.abs(val))))
        slope = np.polyfit(np.log(scales), np.log(norms), 1)[0]
        assert -slope >= L + 1 - 0.2, f"decay order {-slope} too small"


def test_verify_jm_split_passes_on_models():
    for n, m in ((2, 2), (3, 1)):
        pot = PotentialSpec(q0=mpq(1, 2), dq_normal=mpq(3, 10),
                            dq_tangential=(mpq(1, 5),) + (0,) * (n - 1))
        coeffs, jm = _setup(n, m, 3, geometry="ball", pot=pot)
        report = verify_jm_split(coeffs, jm, depth=3, tol=1e-12)
        assert report["ok"], report


def test_verify_jm_split_detects_corruption(monkeypatch):
    """Negative control: a tampered ladder must fail the split check."""
    import steklovheat.dtn_factorization as df

    real = df.compute_s

    def tampered(r, L):
        s = real(r, L)
        s.levels[-3] = s.levels[-3].scale_rat(mpq(1001, 1000))
        return s

    monkeypatch.setattr(df, "compute_s", tampered)
    coeffs, jm = _setup(2, 1, 3, geometry="ball",
                        pot=PotentialSpec(q0=mpq(1, 2)))
    report = df.verify_jm_split(coeffs, jm, depth=3, tol=1e-12)
    assert not report["ok"]


def test_depth_exceeding_jet_order_rejected():
    coeffs, jm = _setup(2, 1, 2, order=2)
    with pytest.raises(ValueError):
        compute_r(coeffs, jm, 3)
