use thiserror::Error;

/// Errors surfaced by grid construction, special-function evaluation,
/// transforms and the scenario runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid space multiplicities: m_gamma={m_gamma}, m_2gamma={m_2gamma} ({reason})")]
    InvalidSpace {
        m_gamma: i64,
        m_2gamma: i64,
        reason: &'static str,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid cannot resolve oscillation: {needed} nodes needed for lambda_max*t_max = {product:.1} (got {got})")]
    NyquistViolation {
        needed: usize,
        got: usize,
        product: f64,
    },

    #[error("mismatched container lengths: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("tail-dominated integral: last node carries {fraction:.2e} of the total (cutoff too small)")]
    TailDominated { fraction: f64 },

    #[error("spectral cutoff dominates: top decade of lambda nodes carries {fraction:.2e} of the inversion")]
    SpectralCutoffDominated { fraction: f64 },

    #[error("degenerate recursion denominator at k={k} for lambda={lambda}")]
    DegenerateDenominator { k: usize, lambda: String },

    #[error("coefficient overflow at k={k}: |Gamma_k| = {magnitude:.3e}")]
    CoefficientOverflow { k: usize, magnitude: f64 },

    #[error("coefficient growth guard failed at k={k}: |Gamma_k| = {magnitude:.3e} exceeds polynomial bound")]
    CoefficientGrowth { k: usize, magnitude: f64 },

    #[error("series truncation did not converge by K={k_max} at t={t}")]
    TruncationNotConverged { k_max: usize, t: f64 },

    #[error("series requested at t={t} below t_switch={t_switch}")]
    BelowSwitchRadius { t: f64, t_switch: f64 },

    #[error("ill-conditioned asymptotic fit for lambda={lambda}: |sin(lambda dt)| = {sine:.2e} at every candidate radius")]
    IllConditionedFit { lambda: String, sine: f64 },

    #[error("c-function extraction unsupported at lambda={0}")]
    UnsupportedLambda(String),

    #[error("ODE step failure at t={t}: {reason}")]
    OdeFailure { t: f64, reason: &'static str },

    #[error("operation requires m_2gamma = 0, space has m_2gamma = {0}")]
    RequiresRealHyperbolic(u32),

    #[error("decay precondition violated: {0}")]
    InsufficientDecay(String),

    #[error("heat time s={s} too small for the spectral cutoff (tail fraction {fraction:.2e})")]
    HeatTimeTooSmall { s: f64, fraction: f64 },

    #[error("Poisson kernel calibration failed for mode m={m}: mismatch {mismatch:.2e}")]
    CalibrationFailure { m: i32, mismatch: f64 },

    #[error("boundary function needs Fourier modes beyond |m|={max_m} (coefficient {coeff:.2e} at m={m})")]
    BoundaryModesUnresolved { m: i32, max_m: i32, coeff: f64 },

    #[error("spectral band [{beta}, {alpha}] unresolved: {in_band} grid nodes in band, need at least {needed}")]
    BandUnresolved {
        beta: f64,
        alpha: f64,
        in_band: usize,
        needed: usize,
    },

    #[error("finite-difference resolution check failed: {0}")]
    ResolutionCheck(String),

    #[error("sequence relation Delta f_k = f_(k+1) violated at k={k}: relative mismatch {mismatch:.2e}")]
    RelationViolation { k: i64, mismatch: f64 },

    #[error("norm sequence entry n={n} is degenerate ({reason})")]
    DegenerateSequenceEntry { n: i64, reason: String },

    #[error("limit estimation failed: {0}")]
    LimitEstimation(String),

    #[error("limits outside admissible range: c1={c1:.6e}, c2={c2:.6e}, rho^2={rho_sq:.6e}")]
    InadmissibleLimits { c1: f64, c2: f64, rho_sq: f64 },

    #[error("unsupported request: {0}")]
    Unsupported(String),

    #[error("invalid config field `{field}`: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("scenario `{scenario}` failed at stage `{stage}`: {source}")]
    Scenario {
        scenario: String,
        stage: String,
        #[source]
        source: Box<Error>,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl Error {
    /// Wraps an error with the scenario and pipeline stage it occurred in.
    pub fn in_stage(self, scenario: &str, stage: &str) -> Error {
        Error::Scenario {
            scenario: scenario.to_string(),
            stage: stage.to_string(),
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
