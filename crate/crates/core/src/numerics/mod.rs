//! Dense complex linear algebra: just enough for THP filter synthesis.

mod lq;
mod matrix;
mod triangular;

pub use lq::{lq_decompose, Lq, RANK_TOL};
pub use matrix::CMatrix;
pub use triangular::{lower_triangular_inverse, lower_triangular_solve, DIAG_TOL};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Right pseudo-inverse `Aᴴ(AAᴴ)⁻¹` of a full-row-rank matrix, evaluated as
/// `Qᴴ·L⁻¹` from the LQ factors.
pub fn pseudo_inverse<T: Real>(a: &CMatrix<T>) -> Result<CMatrix<T>> {
    let Lq { l, q } = lq_decompose(a)?;
    let l_inv = lower_triangular_inverse(&l)?;
    Ok(&q.adjoint() * &l_inv)
}

/// `√(Σ_{i≠j} |a_ij|²)` of a square matrix.
pub fn off_diagonal_frobenius<T: Real>(a: &CMatrix<T>) -> Result<T> {
    if !a.is_square() {
        return Err(Error::NonSquare { rows: a.rows(), cols: a.cols() });
    }
    let n = a.rows();
    let mut acc = T::zero();
    for i in 0..n {
        for (j, z) in a.row(i).iter().enumerate() {
            if i != j {
                acc += z.norm_sqr();
            }
        }
    }
    Ok(acc.sqrt())
}
