//! Numerical laboratory for hypoelliptic regularization of kinetic equations:
//! an exact spectral solver for the fractional Kolmogorov equation, an entropy
//! functional with admissible constants, and pointwise/matrix checks of the
//! symbol calculus behind the linearized Boltzmann estimates.

pub mod carleman;
pub mod commutators;
pub mod error;
pub mod kolmogorov;
pub mod lyapunov;
pub mod numerics;
pub mod quantization;
pub mod report;
pub mod spectral;
pub mod weights;

pub use error::{Error, Result};
