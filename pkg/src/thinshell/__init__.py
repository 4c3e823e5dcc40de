"""Numerical laboratory for spherical thin-shell concentration of convex measures.

The package builds heavy-tailed rotationally structured probability models
(power-law families, their linear images, explicit convex-profile
densities), computes their norm and projection moments by exact closed
forms, adaptive quadrature, and seeded Monte Carlo, and verifies the
concentration statements tying them together: thin-shell width bounds,
moment-transform log-concavity, Khinchine-type comparisons, moment-body
geometry, and rotation-averaged marginal moment identities.  Empirical
constants are pinned by the ``calibrate`` subcommand and stored with the
package; every check reports pass/fail against frozen tolerances.
"""

from .bodies import (CenterPeakReport, ConvexBody, ConvexityReport,
                     DistanceReport, EccentricityReport, IdentityReport,
                     SandwichReport, SlabSandwichReport, StarBody,
                     ball_directions, box_body, center_to_peak_check,
                     density_body_identity, dist_to_ball,
                     eccentricity_comparison, interval_body, moment_body,
                     moment_body_convexity, moment_body_radius,
                     moment_body_sandwich, one_sided_ball_ratio,
                     one_sided_body, one_sided_support, polygon_body,
                     projection_moment_mc, sample_body_uniform,
                     slab_support_sandwich, sup_density)
from .calibrate import (fit_beta_root_band, fit_eccentricity_constant,
                        fit_log_lipschitz_constant, fit_one_sided_growth,
                        fit_reverse_holder_constant, fit_theorem_constant,
                        isotropized_convex_model, run_calibration)
from .concavity import (HProfile, KhinchineReport, LogConcavityReport,
                        g_transform, h_transform, khinchine_check,
                        khinchine_extremal_gap, khinchine_logconcavity,
                        khinchine_rhs, logconcavity_test, positive_moment,
                        two_scale_profile)
from .measures import (ConcavityReport, IsotropyMap, MeasureModel,
                       RadialProfile, check_concavity, density, isotropize,
                       log_density, make_affine, make_explicit, make_fnr,
                       make_random_convex_density, marginal_density,
                       marginal_model, marginal_profile, model_from_json,
                       model_to_json, ray_log_density)
from .moments import (BoundValue, CalibConstants, CalibrationMissing,
                      MomentEstimate, ThinShellEstimate, alpha_limit,
                      alpha_p, calibration_path, chebyshev_epsilon,
                      chebyshev_link, epsilon_thin_shell, exact_moment_fnr,
                      gaussian_cdf, kolmogorov_distance, load_calibration,
                      mc_moment, paley_zygmund_lower, save_calibration,
                      theorem_bound, wilson_interval)
from .rotations import (PolarIdentityReport, ReverseHolderReport,
                        RotationMomentContext, log_lipschitz_estimate,
                        polar_identity_check, reverse_holder_check,
                        rotated_moment, rotated_moment_logconcavity,
                        rotated_moment_mean, second_difference_max)
from .sampling import (MAX_BATCH_BYTES, RngStream, SampleBatch, haar_rotation,
                       sample_beta, sample_fnr, sample_fnr_radii,
                       sample_model, sample_projection, sample_sphere)
from .specfun import (LogScalar, beta_ratio_log, beta_root, beta_slope,
                      digamma, log_beta, log_gamma, log_half_direction_moment,
                      log_sphere_area, sphere_area, tetragamma, trigamma)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # specfun
    "LogScalar", "log_gamma", "digamma", "trigamma", "tetragamma",
    "log_beta", "beta_root", "beta_ratio_log", "beta_slope", "sphere_area",
    "log_sphere_area", "log_half_direction_moment",
    # sampling
    "RngStream", "SampleBatch", "sample_sphere", "sample_beta",
    "sample_fnr_radii", "sample_fnr", "sample_model", "sample_projection",
    "haar_rotation", "MAX_BATCH_BYTES",
    # measures
    "RadialProfile", "MeasureModel", "IsotropyMap", "ConcavityReport",
    "make_fnr", "make_affine", "make_explicit", "make_random_convex_density",
    "density", "log_density", "ray_log_density", "marginal_density",
    "marginal_profile", "marginal_model", "check_concavity", "isotropize",
    "model_to_json", "model_from_json",
    # moments
    "MomentEstimate", "ThinShellEstimate", "BoundValue", "CalibConstants",
    "CalibrationMissing", "exact_moment_fnr", "mc_moment", "alpha_p",
    "alpha_limit", "theorem_bound", "epsilon_thin_shell", "chebyshev_link",
    "chebyshev_epsilon", "paley_zygmund_lower", "gaussian_cdf",
    "kolmogorov_distance", "wilson_interval", "calibration_path",
    "load_calibration", "save_calibration",
    # concavity
    "HProfile", "LogConcavityReport", "KhinchineReport", "h_transform",
    "g_transform", "logconcavity_test", "two_scale_profile",
    "positive_moment", "khinchine_rhs", "khinchine_extremal_gap",
    "khinchine_check", "khinchine_logconcavity",
    # bodies
    "StarBody", "ConvexBody", "ConvexityReport", "SandwichReport",
    "DistanceReport", "IdentityReport", "SlabSandwichReport",
    "EccentricityReport", "CenterPeakReport", "moment_body_radius",
    "moment_body", "moment_body_convexity", "moment_body_sandwich",
    "one_sided_support", "one_sided_body", "one_sided_ball_ratio",
    "projection_moment_mc", "ball_directions", "dist_to_ball",
    "sample_body_uniform", "density_body_identity", "interval_body",
    "polygon_body", "box_body", "slab_support_sandwich",
    "eccentricity_comparison", "center_to_peak_check", "sup_density",
    # rotations
    "RotationMomentContext", "PolarIdentityReport", "ReverseHolderReport",
    "rotated_moment", "rotated_moment_mean", "polar_identity_check",
    "rotated_moment_logconcavity", "second_difference_max",
    "reverse_holder_check", "log_lipschitz_estimate",
    # calibrate
    "isotropized_convex_model", "fit_theorem_constant", "fit_beta_root_band",
    "fit_log_lipschitz_constant", "fit_reverse_holder_constant",
    "fit_eccentricity_constant", "fit_one_sided_growth", "run_calibration",
]
