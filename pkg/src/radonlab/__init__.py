"""radonlab: measured decay exponents and rank conditions for averaged Radon operators.

The package provides surface charts carrying weighted measures, oscillatory
quadrature for their Fourier transforms, spherical and family averages with
log-log slope fits, gridded convolution / generalized Radon application, and
numerical rank checks for the nondegeneracy conditions that govern the
operators' mapping properties.
"""

__version__ = "0.1.0"

from .geometry import (
    SurfaceChart,
    make_builtin_surface,
    rotate_chart,
    apply_family,
)
from .families import (
    TransformFamily,
    RotationSampler,
    rotation_family,
    translation_family,
    shear_family,
    identity_family,
    inverse_family,
    sphere_directions,
)
from .oscillatory import (
    FrequencyGrid,
    QuadratureError,
    mu_hat,
    mu_hat_batch,
    chart_mass,
    mu_hat_polygon_exact,
    mu_hat_beta_dyadic,
    lemma1_envelope,
)
from .decay import (
    DecayReport,
    spherical_average,
    decay_sweep,
    fit_decay_exponent,
    predicted_slope,
    family_average_decay,
    family_decay_sweep,
)
from .radon import (
    GridField,
    DiscreteMeasure,
    AveragedField,
    discretize_measure,
    convolve,
    convolve_adjoint,
    apply_averaged,
    apply_generalized,
)
from .probes import (
    NormProbeReport,
    lp_norm,
    mixed_norm,
    knapp_probe,
    exponent_table,
)
from .nondegeneracy import (
    RankReport,
    DiffeoFamily,
    gamma_pullback,
    check_condition_14,
    check_condition_41,
    check_condition_56,
    check_condition_58,
    check_condition_59,
    check_christ_condition,
    delta_s,
    run_builtin_check,
)

__all__ = [
    "SurfaceChart", "make_builtin_surface", "rotate_chart", "apply_family",
    "TransformFamily", "RotationSampler", "rotation_family",
    "translation_family", "shear_family", "identity_family", "inverse_family",
    "sphere_directions",
    "FrequencyGrid", "QuadratureError", "mu_hat", "mu_hat_batch", "chart_mass",
    "mu_hat_polygon_exact", "mu_hat_beta_dyadic", "lemma1_envelope",
    "DecayReport", "spherical_average", "decay_sweep", "fit_decay_exponent",
    "predicted_slope", "family_average_decay", "family_decay_sweep",
    "GridField", "DiscreteMeasure", "AveragedField", "discretize_measure",
    "convolve", "convolve_adjoint", "apply_averaged", "apply_generalized",
    "NormProbeReport", "lp_norm", "mixed_norm", "knapp_probe", "exponent_table",
    "RankReport", "DiffeoFamily", "gamma_pullback", "check_condition_14",
    "check_condition_41", "check_condition_56", "check_condition_58",
    "check_condition_59", "check_christ_condition", "delta_s",
    "run_builtin_check",
]
