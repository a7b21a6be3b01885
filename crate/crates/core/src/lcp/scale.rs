use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Spectral norm `‖M‖₂`.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Returns `(βM, β)` with `β = 1/‖M‖₂`, so that `‖βM‖₂ = 1`.
pub fn normalize_scale(m: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    let norm = spectral_norm(m);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroMatrix);
    }
    let beta = 1.0 / norm;
    Ok((m * beta, beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scaled_identity() {
        let (mb, beta) = normalize_scale(&(DMatrix::identity(2, 2) * 2.0)).unwrap();
        assert_eq!(beta, 0.5);
        assert_eq!(mb, DMatrix::identity(2, 2));
    }

    #[test]
    fn symmetric_two_by_two() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        let (mb, beta) = normalize_scale(&m).unwrap();
        assert!((beta - 1.0 / 3.0).abs() < 1e-15);
        assert!((spectral_norm(&mb) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_rejected() {
        assert!(matches!(
            normalize_scale(&DMatrix::zeros(2, 2)),
            Err(Error::ZeroMatrix)
        ));
    }
}
