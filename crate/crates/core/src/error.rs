use thiserror::Error;

/// Everything that can go wrong while evaluating the model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a special function.
    #[error("{function}: argument {x} is outside the domain")]
    Domain { function: &'static str, x: f64 },

    /// Adaptive quadrature ran out of subdivision depth.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error_bound:e}")]
    Convergence { estimate: f64, error_bound: f64 },

    /// A far-zone formula was used too close to the source.
    #[error("far-zone formula requires k0*r > 100, got {k0r}")]
    FarZone { k0r: f64 },

    #[error("main lobe fills half-space (beamwidth argument {argument} > 1)")]
    BeamFillsHalfSpace { argument: f64 },

    /// The slit half-width is electrically too large for the flux integral.
    #[error("unsupported regime: k0*a = {k0a} must be below pi")]
    UnsupportedRegime { k0a: f64 },

    #[error("evaluation point coincides with the source")]
    SingularPoint,

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Every problem found while validating a sweep or configuration.
    #[error("invalid configuration: {}", .0.join("; "))]
    Validation(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;
