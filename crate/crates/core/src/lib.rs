//! Spectral toolkit for the Sturm-Liouville operator
//! `-y'' + q(x) y = mu y` on `[0, pi]` with separated boundary conditions
//! `y(0) cos(alpha) + y'(0) sin(alpha) = 0`,
//! `y(pi) cos(beta) + y'(pi) sin(beta) = 0`, for piecewise-constant `q`.
//!
//! Eigenvalues are written `mu_n = lambda_n^2`.

pub mod angle;
pub mod asymptotics;
pub mod corpus;
pub mod delta;
pub mod error;
pub mod expansion;
pub mod greens;
pub mod ivp;
pub mod numeric;
pub mod potential;
pub mod roots;
pub mod spectrum;
pub mod validation;

pub use error::{Error, Result};
pub use ivp::BoundaryParams;
pub use potential::{Piece, Potential, Trig};
