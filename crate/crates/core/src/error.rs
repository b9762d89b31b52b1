use thiserror::Error;

use crate::scene::Endpoint;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid scene: {0}")]
    InvalidScene(String),

    /// The endpoint lies in the array plane (Ψ = 0), so the projected aperture vanishes.
    #[error("degenerate scene: {endpoint} lies in the array plane (psi = {psi:e})")]
    DegenerateScene { endpoint: Endpoint, psi: f64 },

    #[error("quadrature did not converge after {levels} refinement levels (last relative change {rel_change:e})")]
    NonConvergence { levels: u32, rel_change: f64 },

    /// The interior Pareto weights are undefined because the two channels are parallel.
    #[error("degenerate channels: interior Pareto denominator {denominator:e} is not positive")]
    DegenerateChannels { denominator: f64 },

    #[error("invalid subspace geometry: {0}")]
    InvalidGeometry(String),

    #[error("aperture too small for a discrete array: {0}")]
    EmptyArray(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error: {0}")]
    Config(String),
}
