//! Tropical spectral theory of real square matrices and the asymptotics of the
//! Perron eigenvector of their Hadamard powers `exp(kA)`.
//!
//! Tropical computations are exact over [`Rational`]; Perron numerics run in `f64`
//! log coordinates.

pub mod conjectures;
pub mod perron;
pub mod scalar;
pub mod schur;
pub mod spectral;
pub mod tropical;

pub use scalar::{Rational, Scalar};
pub use tropical::{ProjectivePoint, Semiring, TropError, TropicalMatrix};

pub type RatMatrix = TropicalMatrix<Rational>;
pub type RatPoint = ProjectivePoint<Rational>;
pub type FloatMatrix = TropicalMatrix<f64>;
pub type FloatPoint = ProjectivePoint<f64>;
