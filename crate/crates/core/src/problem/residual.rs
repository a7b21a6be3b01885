use nalgebra::DVector;

use super::set::{ConeComponent, GroundSet};
use crate::error::{check_dim, Result};

/// Tolerance for residual-based "is a solution" checks.
pub const SOLUTION_TOL: f64 = 1e-8;

/// `‖x − Π_K(x − F)‖₂`; zero exactly at solutions of `VI(K, F)`.
pub fn natural_residual(set: &GroundSet, x: &DVector<f64>, fx: &DVector<f64>) -> Result<f64> {
    check_dim("natural_residual", x.len(), fx.len())?;
    let p = set.project(&(x - fx))?;
    Ok((x - p).norm())
}

/// Fischer–Burmeister function `√(a² + b²) − (a + b)`.
///
/// Evaluated in the cancellation-free form when `a + b > 0`.
pub fn phi_fb(a: f64, b: f64) -> f64 {
    let r = a.hypot(b);
    let s = a + b;
    if s > 0.0 {
        -2.0 * a * b / (r + s)
    } else {
        r - s
    }
}

/// Smoothed Fischer–Burmeister function `√(a² + b² + μ²) − (a + b)`.
pub fn phi_fb_smoothed(a: f64, b: f64, mu: f64) -> f64 {
    let r = (a * a + b * b + mu * mu).sqrt();
    let s = a + b;
    if s > 0.0 {
        (mu * mu - 2.0 * a * b) / (r + s)
    } else {
        r - s
    }
}

/// Componentwise `Φ_FB(x, F)`.
pub fn fb_residual(x: &DVector<f64>, fx: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim("fb_residual", x.len(), fx.len())?;
    Ok(x.zip_map(fx, phi_fb))
}

/// Residual of a (mixed) complementarity system: `Φ_FB` on sign-constrained
/// coordinates, the raw equation `F_i` on free ones.
pub fn fb_system(components: &[ConeComponent], x: &DVector<f64>, fx: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(
        x.len(),
        components.iter().enumerate().map(|(i, c)| match c {
            ConeComponent::Nonneg => phi_fb(x[i], fx[i]),
            ConeComponent::Free => fx[i],
        }),
    )
}

/// Natural residual of a VI with an interval-valued map, using for each
/// component the endpoint selection (or interior point) that minimizes it.
/// The projection onto a box is separable, so the best selection can be
/// chosen coordinate by coordinate.
pub fn best_selection_residual(
    set: &GroundSet,
    x: &DVector<f64>,
    lower: &DVector<f64>,
    upper: &DVector<f64>,
) -> Result<f64> {
    check_dim("best_selection_residual", x.len(), lower.len())?;
    check_dim("best_selection_residual", x.len(), upper.len())?;
    let (lo, hi) = set.bounds();
    let r = |i: usize, w: f64| x[i] - (x[i] - w).max(lo[i]).min(hi[i]);
    let mut total = 0.0;
    for i in 0..x.len() {
        // r(w) is nondecreasing in w
        let at_lo = r(i, lower[i]);
        let at_hi = r(i, upper[i]);
        let best = if at_lo >= 0.0 {
            at_lo
        } else if at_hi <= 0.0 {
            at_hi
        } else {
            0.0
        };
        total += best * best;
    }
    Ok(total.sqrt())
}
