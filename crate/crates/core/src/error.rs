use thiserror::Error;

use crate::C64;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evaluation at the origin is undefined")]
    Origin,

    #[error("point {z} lies on a logarithmic singularity at {at}")]
    Singular { z: C64, at: C64 },

    #[error("point {z} lies inside the excluded disk around marked point {at}")]
    ExcludedDisk { z: C64, at: C64 },

    #[error("point {0} lies on the branch cut")]
    BranchCut(C64),

    #[error("finite-difference stencil around {0} crosses the logarithm cut")]
    StencilCrossesCut(C64),

    #[error("finite-difference stencil around {0} straddles the field interface")]
    StencilCrossesInterface(C64),

    #[error("resonance: mode {mode} has magnitude {magnitude:e}")]
    Resonance { mode: i64, magnitude: f64 },

    #[error("mean field level is zero; sign-definiteness criterion does not apply")]
    ZeroMean,

    #[error("point {0} lies outside the map domain")]
    Domain(C64),

    #[error("search failed: {0}")]
    SearchFailed(String),

    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
