//! Numerical constructions around zero modes of the two-dimensional Pauli
//! operator with a sign-changing, radially homogeneous magnetic field.
//!
//! The crate is organised bottom-up:
//!
//! * [`field`] – sector and homogeneous field configurations.
//! * [`potential`] – solutions of `ΔF = B` (explicit sector potential, circle ODE
//!   for non-resonant homogeneous profiles).
//! * [`cells`] – the area-σ² partition of a narrow sector with centroid marks.
//! * [`entire`] – the subharmonic lattice sum `V_ε`, its integral model `W_ε`
//!   and the log-modulus of the associated Weierstrass product.
//! * [`zeromode`] – candidate zero modes and their weighted log-density.
//! * [`quad`] – annular shell quadrature and the convergence verdict.
//! * [`conformal`] – log-power maps, univalence probes and sector lower bounds.
//! * [`plot`] – marching squares, SVG and CSV helpers used by the CLI.

pub mod cells;
pub mod conformal;
pub mod entire;
pub mod error;
pub mod field;
pub mod numeric;
pub mod plot;
pub mod potential;
pub mod quad;
pub mod zeromode;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
