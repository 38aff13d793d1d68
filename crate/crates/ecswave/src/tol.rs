//! Central tolerances. `ECS_TOL_SCALE` multiplies every tolerance (default 1).

use std::sync::OnceLock;

/// Relative tolerance for exact algebraic identities on double inputs.
pub const ALGEBRAIC: f64 = 1e-12;
/// Relative tolerance for rank decisions (singular values).
pub const RANK: f64 = 1e-10;
/// Group-law and action-consistency residuals.
pub const GROUP: f64 = 1e-9;
/// Metric pullback, Wronskian constancy, lattice projection residuals.
pub const ACTION: f64 = 1e-8;
/// Riccati residuals, eigenvalue matches, determinant cross-checks.
pub const SPECTRAL: f64 = 1e-6;
/// Finite-difference curvature residuals.
pub const CURVATURE: f64 = 1e-5;
/// Local error target for the adaptive ODE integrator.
pub const ODE: f64 = 1e-10;

static SCALE: OnceLock<f64> = OnceLock::new();

/// Global tolerance multiplier from `ECS_TOL_SCALE`, read once.
pub fn scale() -> f64 {
    *SCALE.get_or_init(|| {
        std::env::var("ECS_TOL_SCALE")
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|s| s.is_finite() && *s > 0.0)
            .unwrap_or(1.0)
    })
}

pub fn scaled(base: f64) -> f64 {
    base * scale()
}
