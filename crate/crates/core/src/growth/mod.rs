//! Homogeneous Jacobi fields, the weighted growth functional and its
//! three-scale convexity, threshold searches and radial ODE checks.

pub mod closed_form;
pub mod discriminant;
pub mod field;
pub mod radial_ode;
pub mod rate;

pub use closed_form::{closed_form_i, closed_form_i_log, three_scale_form};
pub use discriminant::{
    discriminant_log, discriminant_power, discriminant_power_direct, discriminant_profile,
    find_threshold_k, relative_discriminant_log, relative_discriminant_power, Branch, GridSpec,
    Range, ThresholdReport,
};
pub use field::{
    asymptotic_rate, evaluate_radial, exponent_distance, gamma_admissible, growth_functional,
    is_slower_growth, snap_rate, three_scale_check, GrowthWindow, JacobiCoefficients, ModeTerm,
    SnappedRate, ThreeScale,
};
pub use radial_ode::{
    perturbed_convexity_check, solve_radial_jacobi, solve_radial_jacobi_with, ConvexityOutcome,
    PerturbedRadialProblem, Profile, RadialProfile, SolverOptions,
};
pub use rate::{estimate_rate_from_samples, geometric_radii};
