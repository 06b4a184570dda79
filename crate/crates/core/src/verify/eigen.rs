use nalgebra::{DMatrix, SymmetricEigen};

use super::VerifyError;
use crate::suite::StructuredQuadratic;

/// Largest dimension for the dense eigensolve.
pub const EIGEN_MAX_DIM: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenStats {
    pub negative: usize,
    pub positive: usize,
    pub zero: usize,
    pub min: f64,
    pub max: f64,
}

/// Inertia and extreme eigenvalues of the Hessian `QᵀDQ`. Eigenvalues within
/// `1e-10·max|λ|` of zero count as zero.
pub fn eigen_stats(f: &StructuredQuadratic) -> Result<EigenStats, VerifyError> {
    let n = f.matrix().cols();
    if n > EIGEN_MAX_DIM {
        return Err(VerifyError::Setup(format!("eigen statistics limited to n ≤ {EIGEN_MAX_DIM}, got {n}")));
    }
    let h = f.dense_hessian();
    let h = DMatrix::from_fn(n, n, |i, j| 0.5 * (h[i][j] + h[j][i]));
    let values = SymmetricEigen::new(h).eigenvalues;
    let scale = values.amax();
    let cut = 1e-10 * scale;
    let mut s = EigenStats { negative: 0, positive: 0, zero: 0, min: f64::INFINITY, max: f64::NEG_INFINITY };
    for &v in values.iter() {
        if v > cut {
            s.positive += 1;
        } else if v < -cut {
            s.negative += 1;
        } else {
            s.zero += 1;
        }
        s.min = s.min.min(v);
        s.max = s.max.max(v);
    }
    Ok(s)
}
