//! Numerical laboratory for the higher-order mean-field equation
//! `(-Δ)^m u = ρ e^{2mu} / ∫ e^{2mu}` on balls of ℝ^{2m} with Dirichlet data.

pub mod analyzer;
pub mod constants;
pub mod error;
pub mod green;
pub mod io;
pub mod pohozaev;
pub mod polynomial;
pub mod radial;
pub mod solver;

pub use constants::{constants_for, Bubble, Dimension, GeometricConstants};
pub use error::{Error, Result};
pub use green::{build_green, FundamentalSolution, GreenFunctionBall, LogPowerSeries};
pub use polynomial::Polynomial;
pub use radial::{LaplacianStack, Parity, RadialField, RadialGrid, RadialMap};
