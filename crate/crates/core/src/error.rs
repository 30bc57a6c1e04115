use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Inconsistent or out-of-range configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A numerical procedure failed to reach its tolerance.
    #[error("{what} (residual estimate {residual:.3e})")]
    Numeric { what: String, residual: f64 },

    /// The Talbot contour failed the analyticity / stability checks.
    #[error("contour validation failed: {0}")]
    Validation(String),

    /// The time integrator left its stability envelope.
    #[error("numerical blow-up at step {step} (t = {time:.6}, max|q| = {magnitude:.3e})")]
    BlowUp { step: usize, time: f64, magnitude: f64 },
}
