//! Whispering-gallery-mode optical parametric oscillator modeling.
//!
//! Mode eigenfrequencies of spheroidal lithium niobate resonators, natural phase
//! matching of pump/signal/idler triplets over temperature, OPO threshold and
//! output formulas, continuous-tuning composition and photon correlation fits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlation;
pub mod dispersion;
pub mod error;
pub mod material;
pub mod opo;
pub mod phasematch;
mod roots;
pub mod tuning;

pub use error::{Error, Result};

/// Vacuum speed of light, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
