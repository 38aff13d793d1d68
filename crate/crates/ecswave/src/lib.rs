//! Construction and machine verification of compact quotients of standard
//! ECS plane waves: pseudo-Riemannian plane-wave geometry with parallel Weyl
//! curvature, its isometry group, the symplectic solution space of the
//! associated linear ODE, and executable certificates for the compactness
//! criterion, cross-checked against independent numerical oracles.

pub mod construct;
pub mod curvature;
pub mod error;
pub mod intlinalg;
pub mod isometry;
pub mod ode;
pub mod planewave;
pub mod profile;
pub mod pseudo;
pub mod quotient;
pub mod report;
pub mod symplectic;
#[cfg(test)]
mod testutil;
pub mod tol;

pub use error::{Error, Result};
