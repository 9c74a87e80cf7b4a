"""Boundary-normal metric jets, operator coefficients and curvature data.

Model geometries: the Euclidean half-space (flat) and the Euclidean ball of
radius R.  For the ball the tangential metric in boundary normal coordinates
is ((R - t)/R)^2 h^(sphere)_{jk}(x) with the round radius-R sphere written in
geodesic normal coordinates at the base point; the sphere expansion uses the
exact constant-curvature series sin^2(s)/s^2.

Conventions at the base point x0 (normal coordinates on the boundary):
h_{jk}(x0, 0) = delta_{jk}, first tangential derivatives vanish, and
-(1/2) dh_{jk}/dt (x0, 0) is the Weingarten map whose eigenvalues are the
principal curvatures.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from gmpy2 import mpq

from .exactnum import GR_MINUS_I, GR_ONE, gr, gr_to_complex
from .jets import JetPoly
from .symbol_algebra import SymbolContext, SymbolExpr, TermKey


def _rat(x) -> "mpq":
    if isinstance(x, float):
        return mpq(Fraction(x))
    return mpq(x)


@dataclass(frozen=True)
class MetricJets:
    """Tangential metric block h_{jk} as jets in (x_1..x_n, x_{n+1})."""

    n: int
    jet_order: int
    jets: dict  # (j, k) 0-based, symmetric -> JetPoly in n+1 vars

    def __post_init__(self):
        nv = self.n + 1
        for (j, k), jet in self.jets.items():
            if jet.nvars != nv:
                raise ValueError("metric jets must live in n+1 variables")
        h0 = self.constant_block()
        if np.linalg.eigvalsh(h0).min() <= 0:
            raise ValueError("metric constant term is not positive definite")

    def constant_block(self) -> np.ndarray:
        h0 = np.zeros((self.n, self.n))
        for (j, k), jet in self.jets.items():
            h0[j, k] = float(jet.const()[0])
        return h0

    def eval_block(self, x, t) -> np.ndarray:
        point = list(x) + [t]
        out = np.zeros((self.n, self.n))
        for (j, k), jet in self.jets.items():
            out[j, k] = jet.eval(point).real
        return out


def flat_jets(n: int, jet_order: int) -> MetricJets:
    """Euclidean half-space: h_{jk} = delta_{jk} identically."""
    nv = n + 1
    jets = {}
    for j in range(n):
        for k in range(n):
            if j == k:
                jets[(j, k)] = JetPoly.constant(nv, jet_order, GR_ONE)
            else:
                jets[(j, k)] = JetPoly.zero(nv, jet_order)
    return MetricJets(n, jet_order, jets)


def _sphere_normal_jets(n: int, curv: "mpq", nv: int, order: int) -> dict:
    """Round metric of constant sectional curvature `curv` in normal coords.

    h_{jk}(x) = delta_{jk} + curv * g(curv * rho^2) * (rho^2 delta_{jk} - x_j x_k)
    with g(z) = (sin^2(sqrt z)/z - 1)/z = sum_{k>=2} (-1)^(k+1) 2^(2k-1) z^(k-2) / (2k)!.
    """
    rho2 = JetPoly.zero(nv, order)
    for j in range(n):
        e = [0] * nv
        e[j] = 2
        rho2 = rho2 + JetPoly.monomial(nv, order, e, GR_ONE)

    # g(curv * rho^2) as a jet, enough terms for the retained order
    gz = JetPoly.zero(nv, order)
    z = JetPoly.constant(nv, order, gr(curv)) * rho2
    zpow = JetPoly.constant(nv, order, GR_ONE)
    for k in range(2, order // 2 + 3):
        coeff = mpq((-1) ** (k + 1) * 2 ** (2 * k - 1), math.factorial(2 * k))
        gz = gz + zpow.scale_rat(coeff)
        zpow = zpow * z
        if zpow.is_zero():
            break

    jets = {}
    for j in range(n):
        for k in range(n):
            ejk = [0] * nv
            ejk[j] += 1
            ejk[k] += 1
            xjxk = JetPoly.monomial(nv, order, ejk, GR_ONE)
            bracket = (rho2 if j == k else JetPoly.zero(nv, order)) - xjxk
            jet = gz * bracket
            jet = jet.scale_rat(curv)
            if j == k:
                jet = jet + JetPoly.constant(nv, order, GR_ONE)
            jets[(j, k)] = jet
    return jets


def ball_jets(n: int, R, jet_order: int) -> MetricJets:
    """Boundary-normal metric jets of the radius-R Euclidean ball."""
    if n < 1:
        raise ValueError("boundary dimension must be >= 1")
    Rq = _rat(R)
    if Rq <= 0:
        raise ValueError("radius must be positive")
    nv = n + 1
    curv = 1 / (Rq * Rq)
    sphere = _sphere_normal_jets(n, curv, nv, jet_order)

    # ((R - t)/R)^2 = 1 - 2t/R + t^2/R^2
    t1 = [0] * nv
    t1[n] = 1
    t2 = [0] * nv
    t2[n] = 2
    profile = (
        JetPoly.constant(nv, jet_order, GR_ONE)
        + JetPoly.monomial(nv, jet_order, t1, gr(-2 / Rq))
        + JetPoly.monomial(nv, jet_order, t2, gr(curv))
    )
    jets = {jk: profile * jet for jk, jet in sphere.items()}
    return MetricJets(n, jet_order, jets)


# ---------------------------------------------------------------- coefficients


def _mat_mul(a, b, n):
    return {
        (i, j): _jet_sum(a[(i, k)] * b[(k, j)] for k in range(n))
        for i in range(n)
        for j in range(n)
    }


def _jet_sum(jets):
    out = None
    for j in jets:
        out = j if out is None else out + j
    return out


def _invert_jet_matrix(h: dict, n: int, nv: int, order: int) -> dict:
    """Exact inverse of a jet matrix by Neumann series around its constant term."""
    h0 = [[h[(j, k)].const() for k in range(n)] for j in range(n)]
    for row in h0:
        for c in row:
            if c[1] != 0:
                raise ValueError("metric constant term must be real")
    # exact rational inverse of the constant block
    aug = [[h0[i][j][0] for j in range(n)] + [mpq(i == j) for j in range(n)]
           for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ValueError("metric constant term is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    c_inv = {
        (i, j): JetPoly.constant(nv, order, gr(aug[i][j + n]))
        for i in range(n)
        for j in range(n)
    }

    # A = h - h0 has no constant term; h^-1 = sum (-c_inv A)^k c_inv
    a = {
        (i, j): h[(i, j)] - JetPoly.constant(nv, order, h0[i][j])
        for i in range(n)
        for j in range(n)
    }
    neg_ca = {k: -jet for k, jet in _mat_mul(c_inv, a, n).items()}
    term = c_inv
    total = dict(c_inv)
    for _ in range(order):
        term = _mat_mul(neg_ca, term, n)
        if all(jet.is_zero() for jet in term.values()):
            break
        total = {k: total[k] + term[k] for k in total}
    return total


def _det_jet(h: dict, n: int, nv: int, order: int) -> JetPoly:
    out = JetPoly.zero(nv, order)
    for perm in itertools.permutations(range(n)):
        sign = GR_ONE
        inv = sum(
            1
            for i in range(n)
            for j in range(i + 1, n)
            if perm[i] > perm[j]
        )
        prod = JetPoly.constant(nv, order, gr((-1) ** inv))
        for i in range(n):
            prod = prod * h[(i, perm[i])]
        out = out + prod
    return out


@dataclass
class OperatorCoeffs:
    """Coefficients of -Delta_g = D_t^2 + iE D_t + Q in boundary normal coords."""

    n: int
    jet_order: int
    metric: MetricJets
    ctx: SymbolContext
    hinv: dict
    logdet: JetPoly  # log(|h| / |h|(x0)); only derivatives are ever used
    E: JetPoly
    Q2: SymbolExpr  # scalar (1x1), degree 2
    Q1: SymbolExpr  # scalar (1x1), degree 1


def build_operator_coeffs(metric: MetricJets) -> OperatorCoeffs:
    n, order = metric.n, metric.jet_order
    nv = n + 1
    h = metric.jets
    hinv = _invert_jet_matrix(h, n, nv, order)

    det = _det_jet(h, n, nv, order)
    d0 = det.const()
    eps = det.scale_rat(1 / d0[0]) - JetPoly.constant(nv, order, GR_ONE)
    logdet = JetPoly.zero(nv, order)
    pw = eps
    for k in range(1, order + 1):
        logdet = logdet + pw.scale_rat(mpq((-1) ** (k + 1), k))
        pw = pw * eps
        if pw.is_zero():
            break

    e_jet = JetPoly.zero(nv, order)
    for j in range(n):
        for k in range(n):
            e_jet = e_jet + hinv[(j, k)] * h[(j, k)].deriv(n)
    e_jet = e_jet.scale_rat(mpq(-1, 2))

    ctx = SymbolContext(n, order, hinv)

    q2 = SymbolExpr.zero(ctx, 1)
    for j in range(n):
        for k in range(n):
            if hinv[(j, k)].is_zero():
                continue
            alpha = [0] * n
            alpha[j] += 1
            alpha[k] += 1
            q2 = q2 + SymbolExpr.scalar_term(
                ctx, 1, TermKey(tuple(alpha), 0, 0), hinv[(j, k)]
            )

    q1 = SymbolExpr.zero(ctx, 1)
    for k in range(n):
        coeff = JetPoly.zero(nv, order)
        for j in range(n):
            coeff = coeff + hinv[(j, k)].scale_rat(mpq(1, 2)) * logdet.deriv(j)
            coeff = coeff + hinv[(j, k)].deriv(j)
        if coeff.is_zero():
            continue
        alpha = [0] * n
        alpha[k] = 1
        q1 = q1 + SymbolExpr.scalar_term(
            ctx, 1, TermKey(tuple(alpha), 0, 0), coeff.scale(GR_MINUS_I)
        )

    return OperatorCoeffs(n, order, metric, ctx, hinv, logdet, e_jet, q2, q1)


def weingarten_from_jets(metric: MetricJets) -> np.ndarray:
    """Principal curvatures: eigenvalues of -(1/2) dh/dt at the base point."""
    n = metric.n
    w = np.zeros((n, n))
    for (j, k), jet in metric.jets.items():
        w[j, k] = -0.5 * float(jet.deriv(n).const()[0])
    if not np.allclose(w, w.T, atol=1e-12):
        raise ValueError("second fundamental form block is not symmetric")
    return np.sort(np.linalg.eigvalsh(w))[::-1]


# ----------------------------------------------------------------- potentials


@dataclass(frozen=True)
class PotentialSpec:
    """Jet of the potential q at the base point: value, gradient, higher terms."""

    q0: float = 0.0
    dq_normal: float = 0.0
    dq_tangential: tuple = ()
    higher: tuple = ()  # ((multi-index over n+1 vars, value), ...)

    def jet(self, n: int, order: int) -> JetPoly:
        nv = n + 1
        out = JetPoly.constant(nv, order, gr(_rat(self.q0)))
        if self.dq_normal:
            e = [0] * nv
            e[n] = 1
            out = out + JetPoly.monomial(nv, order, e, gr(_rat(self.dq_normal)))
        for l, v in enumerate(self.dq_tangential):
            if l >= n:
                raise ValueError("tangential gradient longer than dimension")
            if v:
                e = [0] * nv
                e[l] = 1
                out = out + JetPoly.monomial(nv, order, e, gr(_rat(v)))
        for idx, v in self.higher:
            out = out + JetPoly.monomial(nv, order, tuple(idx), gr(_rat(v)))
        return out

    def is_zero(self) -> bool:
        return (
            not self.q0
            and not self.dq_normal
            and not any(self.dq_tangential)
            and not self.higher
        )


@dataclass(frozen=True)
class JmJets:
    """Order m and the q-jet that fill the companion matrix J_m."""

    m: int
    q_jets: JetPoly


def jm_jets(m: int, potential: PotentialSpec, n: int, order: int) -> JmJets:
    if m < 1:
        raise ValueError("m must be >= 1")
    return JmJets(m, potential.jet(n, order))


def jm_symbol(ctx: SymbolContext, jm: JmJets) -> SymbolExpr:
    """J_m: -1 on the superdiagonal, q(x) at position (m, 1); J_1 = [q]."""
    m = jm.m
    entries = {}
    minus_one = JetPoly.constant(ctx.nx, ctx.order, gr(-1))
    for i in range(m - 1):
        entries[(i, i + 1)] = minus_one
    entries[(m - 1, 0)] = jm.q_jets
    if m == 1:
        entries = {(0, 0): jm.q_jets}
    return SymbolExpr.from_entry_jets(ctx, m, entries)


# ------------------------------------------------------------------- geometry


@dataclass(frozen=True)
class Geometry:
    """Descriptor for a model geometry or direct jet input."""

    kind: str  # "ball" | "flat" | "direct"
    n: int
    radius: object = None
    direct_jets: object = None
    direct_curvature: object = None

    @classmethod
    def ball(cls, n: int, radius) -> "Geometry":
        return cls("ball", n, radius=radius)

    @classmethod
    def flat(cls, n: int) -> "Geometry":
        return cls("flat", n)

    @classmethod
    def direct(cls, jets: MetricJets, curvature: "CurvatureData") -> "Geometry":
        return cls("direct", jets.n, direct_jets=jets, direct_curvature=curvature)

    def metric_jets(self, jet_order: int) -> MetricJets:
        if self.kind == "flat":
            return flat_jets(self.n, jet_order)
        if self.kind == "ball":
            return ball_jets(self.n, self.radius, jet_order)
        if self.kind == "direct":
            return self.direct_jets
        raise ValueError(f"unknown geometry kind {self.kind!r}")


@dataclass(frozen=True)
class CurvatureData:
    """Pointwise curvature inputs of the closed-form heat invariants."""

    n: int
    kappa: tuple
    R_boundary: float
    R_omega: float
    ricci_boundary: tuple
    ricci_omega: tuple
    cov_deriv_term: float
    q0: float = 0.0
    dq_normal: float = 0.0
    dq_tangential: tuple = ()

    def __post_init__(self):
        for name in ("kappa", "ricci_boundary", "ricci_omega"):
            if len(getattr(self, name)) != self.n:
                raise ValueError(f"{name} must have length n = {self.n}")

    def sum_kappa(self) -> float:
        return float(sum(self.kappa))

    def sum_kappa_sq(self) -> float:
        return float(sum(k**2 for k in self.kappa))

    def sum_kappa_cu(self) -> float:
        return float(sum(k**3 for k in self.kappa))


def curvature_data(geometry: Geometry,
                   potential: PotentialSpec = PotentialSpec()) -> CurvatureData:
    """Analytic curvature data for model geometries, pass-through for direct."""
    n = geometry.n
    if geometry.kind == "flat":
        data = CurvatureData(
            n=n,
            kappa=(0.0,) * n,
            R_boundary=0.0,
            R_omega=0.0,
            ricci_boundary=(0.0,) * n,
            ricci_omega=(0.0,) * n,
            cov_deriv_term=0.0,
            q0=potential.q0,
            dq_normal=potential.dq_normal,
            dq_tangential=tuple(potential.dq_tangential),
        )
    elif geometry.kind == "ball":
        R = float(_rat(geometry.radius))
        data = CurvatureData(
            n=n,
            kappa=(1.0 / R,) * n,
            R_boundary=n * (n - 1) / R**2,
            R_omega=0.0,
            ricci_boundary=((n - 1) / R**2,) * n,
            ricci_omega=(0.0,) * n,
            cov_deriv_term=0.0,
            q0=potential.q0,
            dq_normal=potential.dq_normal,
            dq_tangential=tuple(potential.dq_tangential),
        )
    elif geometry.kind == "direct":
        data = geometry.direct_curvature
        if len(data.kappa) != n:
            raise ValueError("direct curvature data has wrong dimension")
    else:
        raise ValueError(f"unknown geometry kind {geometry.kind!r}")

    if geometry.kind in ("flat", "ball"):
        kappa_jets = weingarten_from_jets(geometry.metric_jets(2))
        if np.max(np.abs(kappa_jets - np.sort(data.kappa)[::-1])) > 1e-12:
            raise AssertionError("analytic curvatures disagree with the jets")
    return data
