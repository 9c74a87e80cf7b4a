"""Heat-trace invariants of perturbed polyharmonic Steklov-type operators.

Symbolic factorization of the boundary operator, exact resolvent-parametrix
recursion, closed-form curvature invariants, and exact ball spectra for
cross-validation.
"""

from .ball_spectrum import (
    SpectrumTable,
    boundary_area,
    counting_function,
    degree_matrix,
    exact_heat_trace,
    extract_coefficients,
    harmonic_dim,
    spectrum,
    weyl_ratio,
)
from .dtn_factorization import (
    closed_form_r,
    compute_r,
    compute_s,
    parametrix_defect,
    verify_jm_split,
)
from .geometry_jets import (
    CurvatureData,
    Geometry,
    MetricJets,
    PotentialSpec,
    build_operator_coeffs,
    curvature_data,
    jm_jets,
)
from .heat_invariants import (
    DivergentTermError,
    HeatInvariant,
    MomentTable,
    asymptotic_trace,
    cauchy_integrate,
    closed_form_coefficient,
    comparison_rows,
    heat_coefficient,
    heat_coefficients,
    invariants_to_json,
    xi_integrate,
)

__version__ = "0.1.0"

__all__ = [
    "CurvatureData",
    "DivergentTermError",
    "Geometry",
    "HeatInvariant",
    "MetricJets",
    "MomentTable",
    "PotentialSpec",
    "SpectrumTable",
    "asymptotic_trace",
    "boundary_area",
    "build_operator_coeffs",
    "cauchy_integrate",
    "closed_form_coefficient",
    "closed_form_r",
    "comparison_rows",
    "compute_r",
    "compute_s",
    "counting_function",
    "curvature_data",
    "degree_matrix",
    "exact_heat_trace",
    "extract_coefficients",
    "harmonic_dim",
    "heat_coefficient",
    "heat_coefficients",
    "invariants_to_json",
    "jm_jets",
    "parametrix_defect",
    "spectrum",
    "verify_jm_split",
    "weyl_ratio",
    "xi_integrate",
]
