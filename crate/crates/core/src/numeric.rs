//! Small shared numerical helpers.

use nalgebra::DMatrix;

/// Relative cutoff under which a singular value counts as zero.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Numerical rank: the number of singular values above `RANK_TOLERANCE`
/// times the largest one.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let sv = m.singular_values();
    let largest = sv.max();
    if !(largest > 0.0) {
        return 0;
    }
    sv.iter().filter(|&&s| s > RANK_TOLERANCE * largest).count()
}
