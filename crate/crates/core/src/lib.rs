//! Numerical harmonic analysis on rank-one hyperbolic spaces.
//!
//! The crate evaluates elementary spherical functions, the spherical Fourier
//! transform and its relatives (heat kernel, Abel transform, Poisson
//! transform), Lorentz quasi-norms on the radial measure, and uses them to
//! estimate the spectral support annulus of a function from the growth rates
//! of weak-L2 norms of positive and negative Laplacian powers.

pub mod annulus;
pub mod error;
pub mod norms;
pub mod numerics;
pub mod poisson;
pub mod scenario;
pub mod space;
pub mod spherical;
pub mod transforms;

pub mod acceptance;

pub use error::{Error, Result};
pub use space::{GridScheme, RadialFunction, RadialGrid, SpaceParams, SpectralFunction, SpectralGrid};
