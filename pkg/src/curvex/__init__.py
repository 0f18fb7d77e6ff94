"""curvex: a numerical lab for curvature functionals on model geometries.

Dense-tensor curvature algebra, geodesic normal charts, Gaussian-weighted
quadrature of entropy-type functionals, small-time series extraction,
isoperimetric comparison by radial symmetrization, and decision rules that
test metrics against constant-curvature rigidity.
"""

from .tensor_core import (
    AlgebraicCurvature,
    CurvatureData,
    Sym2,
    Tensor4,
    e_functional,
    kulkarni_nomizu,
    norm_sq,
    space_form_curvature,
    v_tensor,
    weyl_decompose,
)
from .moments import GaussianWeight, sphere_area, sphere_monomial, wick_moment
from .charts import (
    Box,
    MetricChart,
    ModelSpec,
    NormalChart,
    Perturbation,
    build_normal_chart,
    curvature_at,
    density_series,
    make_chart,
    scalar_curvature_batch,
)
from .functionals import (
    QuadratureSpec,
    TestFunction,
    ball_volume,
    bishop_gromov_ratio,
    build_test_function,
    eval_components,
    eval_L,
    eval_L_normalized,
    eval_W,
    eval_W_normalized,
    gaussian_integral,
)
from .expansion import (
    ExpansionResult,
    SeriesFit,
    SeriesPrediction,
    extract_series,
    fit_volume_series,
    make_tgrid,
    predict_L,
    predict_scalar_term,
    predict_volume,
    predict_W,
    run_expansion,
)
from .isoperimetry import (
    RadialProfile,
    SymmetrizationResult,
    iso_profile,
    iso_profile_radius,
    symmetrize,
)
from .mu_solver import (
    MuBoundReport,
    MuResult,
    RadialDomain,
    mu_ball,
    mu_bound_report,
    mu_curve,
    rm_bound_from_mu,
)
from .rigidity import (
    RigidityCheck,
    RigidityReport,
    assess_rigidity,
    isoperimetric_probe,
    scalar_bound_margin,
    space_form_residuals,
)
from . import errors

__version__ = "0.1.0"

__all__ = [
    "AlgebraicCurvature",
    "Box",
    "CurvatureData",
    "ExpansionResult",
    "GaussianWeight",
    "MetricChart",
    "ModelSpec",
    "MuBoundReport",
    "MuResult",
    "NormalChart",
    "Perturbation",
    "QuadratureSpec",
    "RadialDomain",
    "RadialProfile",
    "RigidityCheck",
    "RigidityReport",
    "SeriesFit",
    "SeriesPrediction",
    "Sym2",
    "SymmetrizationResult",
    "Tensor4",
    "TestFunction",
    "assess_rigidity",
    "ball_volume",
    "bishop_gromov_ratio",
    "build_normal_chart",
    "build_test_function",
    "curvature_at",
    "density_series",
    "e_functional",
    "errors",
    "eval_L",
    "eval_L_normalized",
    "eval_W",
    "eval_W_normalized",
    "eval_components",
    "extract_series",
    "fit_volume_series",
    "gaussian_integral",
    "iso_profile",
    "iso_profile_radius",
    "isoperimetric_probe",
    "kulkarni_nomizu",
    "make_chart",
    "make_tgrid",
    "mu_ball",
    "mu_bound_report",
    "mu_curve",
    "norm_sq",
    "predict_L",
    "predict_W",
    "predict_scalar_term",
    "predict_volume",
    "rm_bound_from_mu",
    "run_expansion",
    "scalar_bound_margin",
    "scalar_curvature_batch",
    "space_form_curvature",
    "space_form_residuals",
    "sphere_area",
    "sphere_monomial",
    "symmetrize",
    "v_tensor",
    "weyl_decompose",
    "wick_moment",
    "__version__",
]
