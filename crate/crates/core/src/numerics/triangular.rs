use num_complex::Complex;

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Smallest admissible diagonal modulus for forward substitution.
pub const DIAG_TOL: f64 = 1e-12;

fn check_lower<T: Real>(b: &CMatrix<T>) -> Result<()> {
    if !b.is_square() {
        return Err(Error::NonSquare { rows: b.rows(), cols: b.cols() });
    }
    let tol = T::lit(DIAG_TOL);
    match (0..b.rows()).find(|&i| !(b[(i, i)].norm() > tol)) {
        Some(index) => Err(Error::SingularDiagonal { index }),
        None => Ok(()),
    }
}

/// Solves `B·x = v` by forward substitution. Entries of `B` above the
/// diagonal are ignored.
pub fn lower_triangular_solve<T: Real>(b: &CMatrix<T>, v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    check_lower(b)?;
    if v.len() != b.rows() {
        return Err(Error::DimensionMismatch(format!(
            "rhs length {} for {}x{} system",
            v.len(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(forward_substitute(b, v))
}

fn forward_substitute<T: Real>(b: &CMatrix<T>, v: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut x: Vec<Complex<T>> = Vec::with_capacity(v.len());
    for (i, &vi) in v.iter().enumerate() {
        let row = b.row(i);
        let acc = row[..i]
            .iter()
            .zip(&x)
            .fold(vi, |acc, (&bij, &xj)| acc - bij * xj);
        x.push(acc / row[i]);
    }
    x
}

/// Inverse of a lower triangular matrix, one forward substitution per column.
pub fn lower_triangular_inverse<T: Real>(b: &CMatrix<T>) -> Result<CMatrix<T>> {
    check_lower(b)?;
    let n = b.rows();
    let mut inv = CMatrix::zeros(n, n);
    let mut e = vec![Complex::new(T::zero(), T::zero()); n];
    for j in 0..n {
        e[j] = Complex::new(T::one(), T::zero());
        let col = forward_substitute(b, &e);
        for (i, z) in col.into_iter().enumerate() {
            inv[(i, j)] = z;
        }
        e[j] = Complex::new(T::zero(), T::zero());
    }
    Ok(inv)
}
