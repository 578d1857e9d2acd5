//! Flat-model graph geometry: scale-weighted norms, the graph area density,
//! the discrete minimal surface operator and its linearization.

pub mod grid;
pub mod model;
pub mod operator;

pub use grid::{ck_star_norm, Grid2, WeightedField};
pub use model::{proximity_ratio, DensityJet, FlatModel, MetricFn, ScalarFn};
pub use operator::{
    area_functional, bump, conformal_coefficient, conformal_coefficient_extrapolated,
    conformal_probe, conformal_study, cutoff, graph_regime_check, grid_inner, interior_sup,
    linearization_report, linearization_residual, loglog_slope, minimal_surface_operator,
    sine_direction, test_direction, u_perturbation_study, LinearizationRow, Residual, GRAPH_LIMIT,
    SHEAR,
};
