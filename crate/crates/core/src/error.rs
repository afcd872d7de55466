use thiserror::Error;

/// Everything that can go wrong while building grids, assembling operators,
/// integrating the transfer ODE, or solving for scattered coefficients.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A constructor argument was out of range (non-positive width, too few
    /// nodes, cutoff below the wavenumber, ...).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Pointwise evaluation was requested at the singular coordinate of a
    /// distributional family (a delta line or delta slab).
    #[error("{family} is distributional at {coordinate} = {value}; pointwise evaluation is undefined there")]
    DistributionalEvaluation {
        family: &'static str,
        coordinate: &'static str,
        value: f64,
    },

    /// An incidence angle fell outside the open interval valid for its side.
    #[error("incidence angle {theta0} rad is outside the open interval {interval} for {side} incidence")]
    ThetaOutOfRange {
        side: &'static str,
        theta0: f64,
        interval: &'static str,
    },

    /// The requested incidence momentum is not a node of the grid. Grids must
    /// be built with the incidence angle in their insertion list.
    #[error("incidence momentum p0 = {p0} does not coincide with any propagating node; rebuild the grid with this angle inserted")]
    IncidenceNodeMissing { p0: f64 },

    /// An operation that needs evanescent channels ran on a grid built
    /// without them.
    #[error("operation requires an evanescent extension but the grid has only propagating channels")]
    NoEvanescentExtension,

    /// Two operands were built on different grids.
    #[error("operands were built on different momentum grids")]
    GridMismatch,

    /// Two block operators live in different channel modes.
    #[error("mode mismatch: expected {expected}, found {found}")]
    ModeMismatch {
        expected: &'static str,
        found: &'static str,
    },

    /// Transfer matrices composed over non-adjacent intervals.
    #[error("interval mismatch: left factor ends at x = {left_end} but right factor starts at x = {right_start}")]
    IntervalMismatch { left_end: f64, right_start: f64 },

    /// An operation was applied to the wrong interaction family.
    #[error("wrong family: operation requires {expected}, found {found}")]
    WrongFamily {
        expected: &'static str,
        found: &'static str,
    },

    /// Evanescent channels grow like exp(|w| dx); the requested slab is too
    /// thick for the requested cutoff. Split the slab into thinner sections
    /// with `compose`, or lower the cutoff.
    #[error("evanescent stiffness: cutoff * interval = {severity:.3} exceeds the guard {guard} ({detail}); split the slab into thinner sections or lower the cutoff")]
    EvanescentStiffness {
        severity: f64,
        guard: f64,
        detail: &'static str,
    },

    /// The linear system for the scattered coefficients is numerically
    /// singular.
    #[error("singular linear system while solving for scattered coefficients")]
    SingularSystem,

    /// The right-to-left transmission block is too ill-conditioned to trust.
    #[error("ill-conditioned solve: cond(M22) = {cond:.3e} exceeds the threshold {threshold:.3e}")]
    IllConditioned { cond: f64, threshold: f64 },

    /// Reflection mapping requires a grid symmetric under p -> -p.
    #[error("grid is not symmetric under p -> -p; build it with mirrored incidence angles")]
    AsymmetricGrid,

    /// The requested check is not defined for this family.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// True for errors caused by invalid user-facing configuration rather
    /// than by numerical breakdown at run time.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter(_)
                | Error::ThetaOutOfRange { .. }
                | Error::WrongFamily { .. }
                | Error::Unsupported(_)
        )
    }
}
