"""Exact ball spectra, heat traces and Weyl counts."""

import math

import numpy as np
import pytest

from steklovheat import ball_spectrum as bs


def test_harmonic_dim_known_values():
    # S^1: 1, 2, 2, 2, ...
    assert [bs.harmonic_dim(1, k) for k in range(4)] == [1, 2, 2, 2]
    # S^2: 2k + 1
    assert [bs.harmonic_dim(2, k) for k in range(5)] == [1, 3, 5, 7, 9]
    # S^3: (k + 1)^2
    assert [bs.harmonic_dim(3, k) for k in range(5)] == [1, 4, 9, 16, 25]
    assert bs.harmonic_dim(2, 10000) == 20001  # no large-factorial blowup


def test_m1_blocks_are_k_over_R():
    for n in (1, 2, 3):
        for R in (1.0, 2.5):
            for k in (0, 1, 7):
                block = bs.degree_matrix(1, n, R, k)
                assert block.matrix.shape == (1, 1)
                assert block.eigenvalues()[0] == pytest.approx(k / R, abs=1e-12)


def test_m2_k0_block_is_nilpotent():
    """Degree 0, m = 2: r^0 and r^2 both have zero normal data combination
    that annihilates the block twice; the double zero eigenvalue is genuine."""
    block = bs.degree_matrix(2, 2, 1.0, 0)
    vals = np.sort(np.abs(np.linalg.eigvals(block.matrix)))
    assert np.max(vals) < 1e-12
    assert np.max(np.abs(block.matrix)) > 0  # nilpotent, not zero


def test_spectrum_dilation_covariance():
    """Steklov eigenvalues scale like 1/R."""
    t1 = bs.spectrum(2, 2, 1.0, 12)
    t2 = bs.spectrum(2, 2, 2.0, 12)
    v1 = np.array([v for v, _ in t1.entries])
    v2 = np.array([v for v, _ in t2.entries])
    assert np.max(np.abs(v1 - 2 * v2)) < 1e-9


def test_disk_exact_trace_matches_geometric_series():
    """Disk, m = 1: Z(t) = 1 + 2 sum_{k>=1} e^{-tk} = 1 + 2/(e^t - 1)."""
    table = bs.spectrum(1, 1, 1.0, 4000)
    for t in (0.05, 0.1, 0.3):
        expect = 1.0 + 2.0 / (math.exp(t) - 1.0)
        assert bs.exact_heat_trace(table, t) == pytest.approx(expect, rel=1e-12)


def test_tail_bound_raises_when_truncated():
    table = bs.spectrum(1, 2, 1.0, 50)
    with pytest.raises(ValueError, match="k_max"):
        bs.exact_heat_trace(table, 0.01)


def test_extract_coefficients_on_synthetic_data():
    n = 2
    ts = np.geomspace(1e-3, 1e-2, 40)
    zs = 3.0 / ts**2 + 0.5 / ts - 0.25
    coeffs, diag = bs.extract_coefficients(list(zip(ts, zs)), n, 3,
                                           with_log=False)
    assert np.allclose(coeffs, [3.0, 0.5, -0.25], atol=1e-8)
    assert diag["residual"] < 1e-6


def test_extract_coefficients_recovers_log_term():
    n = 2
    ts = np.geomspace(1e-3, 1e-2, 60)
    zs = 2.0 / ts**2 + 1.0 / ts + 0.3 + 0.7 * ts * np.log(ts)
    coeffs, diag = bs.extract_coefficients(list(zip(ts, zs)), n, 3)
    assert np.allclose(coeffs, [2.0, 1.0, 0.3], atol=1e-6)
    assert diag["log_coefficient"] == pytest.approx(0.7, abs=1e-4)


def test_counting_and_weyl_disk():
    table = bs.spectrum(1, 1, 1.0, 600)
    # N(lambda) = 1 + 2 floor(lambda) on the disk
    assert bs.counting_function(table, 100.5) == 201
    assert bs.weyl_ratio(table, 100.5) == pytest.approx(201 / 201.0, abs=5e-3)
    with pytest.raises(ValueError):
        bs.weyl_ratio(table, 10000.0)


def test_boundary_area():
    assert bs.boundary_area(1, 1.0) == pytest.approx(2 * math.pi)
    assert bs.boundary_area(2, 1.0) == pytest.approx(4 * math.pi)
    assert bs.boundary_area(2, 2.0) == pytest.approx(16 * math.pi)
    assert bs.boundary_area(3, 1.0) == pytest.approx(2 * math.pi**2)
