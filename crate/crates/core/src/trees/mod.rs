//! Cone-decomposition trees, covering cells, density ladders and SCAP.

pub mod cover;
pub mod random;
pub mod scap;
pub mod tree;

pub use cover::{
    covering_cell_type1, covering_cell_type2, interval_bounds, interval_index, rho_base,
    type1_ball_radius, type1_r_base, type2_ball_radius, type2_base, BallCover, ConeNet,
    CoverScheme, RhoSlot, Type1Cell, Type1Params, Type2Cell,
};
pub use scap::{
    density_ladder, scap_cone, scap_surface, scap_usc_check, ConeClass, DegenerationDag,
    DensityLadder, ScapTable, Scenario,
};
pub use tree::{
    coarse_tree, gamma_close, gamma_close_large_scale, node_inequalities, registry, validate_tree,
    CloseFailure, Closeness, CoarseLabel, CoarseTree, ConeMetric, InnerBall, LargeScaleTree,
    ModelRegistry, NodeKind, RootMeta, SmoothModelMeta, TreeNode, Violation, CLOSE_SLACK,
};
