"""Exact Steklov spectra of polyharmonic operators on Euclidean balls.

Separation of variables: on the ball of radius R in R^{n+1}, solutions of
(-Delta)^m u = 0 within a fixed spherical-harmonic degree k are spanned by
r^{k+2i} Y_k for 0 <= i <= m-1, and the boundary operator acts on the
coefficient vector through a small dense block per degree.  The resulting
spectra feed the exact heat traces and Weyl counts used as ground truth for
the symbolic invariants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .heat_invariants import MomentTable


def harmonic_dim(n: int, k: int) -> int:
    """dim H_k(S^n) = (2k+n-1)(k+n-2)! / (k!(n-1)!); 1 at degree 0.

    Evaluated as C(k+n, n) - C(k+n-2, n), which keeps the integers small
    for large degrees.
    """
    if k < 0:
        raise ValueError("degree must be >= 0")
    if k == 0:
        return 1
    return math.comb(k + n, n) - math.comb(k + n - 2, n)


@dataclass
class DegreeBlock:
    """DtN action on the degree-k coefficient vector."""

    k: int
    matrix: np.ndarray

    def eigenvalues(self) -> np.ndarray:
        vals = np.linalg.eigvals(self.matrix)
        if np.max(np.abs(vals.imag)) > 1e-10 * max(1.0, np.max(np.abs(vals))):
            raise AssertionError(
                f"degree {self.k} block has non-real eigenvalues: {vals}"
            )
        return np.sort(vals.real)


@dataclass
class SpectrumTable:
    """Eigenvalues with multiplicities, sorted ascending."""

    entries: list  # [(eigenvalue, multiplicity)]
    k_max: int
    m: int
    n: int
    R: float


def _mu(a: int, k: int, n: int) -> int:
    """Delta(r^a Y_k) = mu * r^(a-2) Y_k in R^(n+1)."""
    return a * (a + n - 1) - k * (k + n - 1)


def degree_matrix(m: int, n: int, R: float, k: int) -> DegreeBlock:
    """Build -M_gammatilde M_gamma^{-1} on span{r^{k+2i} Y_k}.

    gamma collects (u, (-Delta)u, ..., (-Delta)^{m-1}u) at r = R and
    gammatilde the inward-normal derivatives -d/dr of the same iterates;
    with the eigenproblem sign convention the reported block is
    -M_gammatilde M_gamma^{-1}, whose m = 1 case is k/R.
    """
    if m < 1 or k < 0 or R <= 0:
        raise ValueError("need m >= 1, k >= 0, R > 0")
    mg = np.zeros((m, m))
    mgt = np.zeros((m, m))
    for i in range(m):
        # iterated Laplacians of r^{k+2i} Y_k: coefficient and power ladder
        c = 1.0
        a = k + 2 * i
        for j in range(m):
            mg[j, i] = c * R**a
            mgt[j, i] = -c * a * R ** (a - 1) if a else 0.0
            c *= -_mu(a, k, n)
            a -= 2
            if c == 0.0:
                break
    if abs(np.linalg.det(mg)) < 1e-300:
        raise ValueError(f"singular trace matrix at degree {k}")
    return DegreeBlock(k, -mgt @ np.linalg.inv(mg))


def spectrum(m: int, n: int, R: float, k_max: int) -> SpectrumTable:
    entries = []
    for k in range(k_max + 1):
        mult = harmonic_dim(n, k)
        for lam in degree_matrix(m, n, R, k).eigenvalues():
            entries.append((float(lam), mult))
    entries.sort()
    return SpectrumTable(entries, k_max, m, n, R)


def exact_heat_trace(table: SpectrumTable, t: float) -> float:
    """Sum of mult * exp(-t lambda), with a geometric tail-bound check."""
    if t <= 0:
        raise ValueError("t must be positive")
    lams = np.array([lam for lam, _ in table.entries])
    mults = np.array([mult for _, mult in table.entries], dtype=float)
    terms = mults * np.exp(-t * lams)
    total = float(np.sum(terms[::-1]))  # ascending magnitude for determinism
    # degrees beyond k_max contribute like a geometric series with ratio
    # exp(-t/R) and polynomially growing multiplicities; bound it crudely
    lam_top = table.k_max / table.R
    ratio = math.exp(-t / table.R)
    mult_top = harmonic_dim(table.n, table.k_max + 1) * table.m
    tail = mult_top * math.exp(-t * lam_top) * ratio / (1 - ratio) ** (table.n + 1)
    if tail > 1e-14 * max(total, 1.0):
        need = int(math.ceil(50.0 * table.R / t))
        raise ValueError(
            f"k_max={table.k_max} too small for t={t}: tail bound {tail:.3g}; "
            f"suggest k_max >= {need}"
        )
    return total


def extract_coefficients(trace_samples, n: int, M: int,
                         with_log: bool | None = None,
                         extra_powers: tuple = ()):
    """Least-squares fit Z(t) ~ sum_{l<M} c_l t^{l-n} on the given samples.

    A t log t regressor is added when M-1 = n (the marginal order where the
    expansion may pick up a logarithm).  Returns (coefficients, diagnostics);
    diagnostics carries the residual norm, the design condition number and
    the fitted log coefficient when present.
    """
    if M < 1:
        raise ValueError("need at least one coefficient")
    if M - 1 > n:
        raise ValueError("M-1 may not exceed n (beyond the local expansion)")
    ts = np.array([t for t, _ in trace_samples], dtype=float)
    zs = np.array([z for _, z in trace_samples], dtype=float)
    if with_log is None:
        with_log = M - 1 == n
    cols = [ts ** (l - n) for l in range(M)]
    if with_log:
        cols.append(ts * np.log(ts))
    for p in extra_powers:
        # nuisance regressors beyond the fitted window, absorbing tail bias
        cols.append(ts ** (p - n))
    design = np.vstack(cols).T
    scale = np.linalg.norm(design, axis=0)
    coeffs, res, rank, sing = np.linalg.lstsq(design / scale, zs, rcond=None)
    coeffs = coeffs / scale
    cond = float(sing[0] / sing[-1]) if sing[-1] > 0 else math.inf
    fit = design @ coeffs
    diagnostics = {
        "residual": float(np.linalg.norm(zs - fit)),
        "condition": cond,
        "rank": int(rank),
        "log_coefficient": float(coeffs[M]) if with_log else None,
    }
    if cond > 1e14:
        diagnostics["warning"] = "ill-conditioned design matrix"
    return coeffs[:M], diagnostics


def counting_function(table: SpectrumTable, lam: float) -> int:
    """N(lambda): eigenvalues <= lambda counted with multiplicity."""
    return sum(mult for v, mult in table.entries if v <= lam)


def boundary_area(n: int, R: float) -> float:
    """Area of the n-sphere of radius R (the boundary of the ball)."""
    return MomentTable(n + 1).vol_sphere() * R**n


def weyl_ratio(table: SpectrumTable, lam: float) -> float:
    """N(lambda) (2 pi)^n / (omega_n vol(boundary) lambda^n).

    Tends to m along the ball data; reported rather than asserted.
    """
    if lam <= 0:
        return 0.0
    if lam > table.k_max / table.R / 2:
        raise ValueError("lambda beyond the reliable range for this k_max")
    n = table.n
    omega = MomentTable(n).vol_unit_ball()
    area = boundary_area(n, table.R)
    return counting_function(table, lam) * (2 * math.pi) ** n / (
        omega * area * lam**n
    )
