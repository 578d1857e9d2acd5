use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty ladder: no eigenvalue at or below mu_max = {mu_max}")]
    EmptyLadder { mu_max: f64 },

    #[error("spectrum not strictly sorted at entry {index}")]
    SpectrumNotSorted { index: usize },

    #[error("invalid cone descriptor: {0}")]
    InvalidCone(String),

    #[error("unstable cone: complex indicial roots (mu = {mu} < {bound})")]
    UnstableCone { mu: f64, bound: f64 },

    #[error("density unavailable for cone '{0}'")]
    DensityUnavailable(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("use log branch: alpha == beta ({0})")]
    UseLogBranch(f64),

    #[error("threshold beyond grid: no ladder value certifies sigma = {sigma}")]
    ThresholdBeyondGrid { sigma: f64 },

    #[error("inadmissible gamma {gamma}: distance {distance} to the exponent set is below sigma = {sigma}")]
    InadmissibleGamma {
        gamma: f64,
        distance: f64,
        sigma: f64,
    },

    #[error("widen gamma_window: [{lo}, {hi}] does not cover [{need_lo}, {need_hi}]")]
    WindowTooSmall {
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("ladder has fewer than two distinct gamma_plus values")]
    NoSecondExponent,

    #[error("blow-up: solution left floating-point range below r = {last_good_r}")]
    BlowUp { last_good_r: f64 },

    #[error("profile does not cover [{need_lo}, {need_hi}] (has [{lo}, {hi}])")]
    ProfileCoverage {
        lo: f64,
        hi: f64,
        need_lo: f64,
        need_hi: f64,
    },

    #[error("degenerate graph metric at {0}")]
    DegenerateMetric(String),

    #[error("graph regime violated at grid point {index:?}: C1* size {size} > {limit}")]
    GraphRegime {
        index: Vec<usize>,
        size: f64,
        limit: f64,
    },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("cover defect: point {point:?} lies in no ball of cell level {level}")]
    CoverDefect { point: Vec<f64>, level: i64 },

    #[error("cone net defect: cone class '{0}' is not within the net radius of any net element")]
    ConeNetDefect(String),

    #[error("unknown id '{0}'")]
    UnknownId(String),

    #[error("invalid degeneration dag: {0}")]
    InvalidDag(String),

    #[error("cycle detected through cone '{0}'")]
    Cycle(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable snake-case name of the variant, used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyLadder { .. } => "empty_ladder",
            Error::SpectrumNotSorted { .. } => "spectrum_not_sorted",
            Error::InvalidCone(_) => "invalid_cone",
            Error::UnstableCone { .. } => "unstable_cone",
            Error::DensityUnavailable(_) => "density_unavailable",
            Error::Domain(_) => "domain",
            Error::UseLogBranch(_) => "use_log_branch",
            Error::ThresholdBeyondGrid { .. } => "threshold_beyond_grid",
            Error::InadmissibleGamma { .. } => "inadmissible_gamma",
            Error::WindowTooSmall { .. } => "window_too_small",
            Error::NoSecondExponent => "no_second_exponent",
            Error::BlowUp { .. } => "blow_up",
            Error::ProfileCoverage { .. } => "profile_coverage",
            Error::DegenerateMetric(_) => "degenerate_metric",
            Error::GraphRegime { .. } => "graph_regime",
            Error::InvalidModel(_) => "invalid_model",
            Error::CoverDefect { .. } => "cover_defect",
            Error::ConeNetDefect(_) => "cone_net_defect",
            Error::UnknownId(_) => "unknown_id",
            Error::InvalidDag(_) => "invalid_dag",
            Error::Cycle(_) => "cycle",
            Error::Invalid(_) => "invalid",
            Error::Parse(_) => "parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
