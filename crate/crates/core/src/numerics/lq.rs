use num_complex::Complex;

use super::CMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Relative pivot tolerance: a pivot below `RANK_TOL · ‖A‖_F` means the rows
/// of `A` are (numerically) linearly dependent.
pub const RANK_TOL: f64 = 1e-12;

/// Factors `A = L·Q` for an `m x n` matrix with `m ≤ n`.
#[derive(Clone, Debug)]
pub struct Lq<T> {
    /// `m x m` lower triangular, real non-negative diagonal.
    pub l: CMatrix<T>,
    /// `m x n` with orthonormal rows.
    pub q: CMatrix<T>,
}

/// LQ decomposition of a full-row-rank matrix.
///
/// Computed as a Householder QR of `Aᴴ` followed by a phase pass that makes
/// every `l_ii` real and non-negative, so the factorization is unique.
pub fn lq_decompose<T: Real>(a: &CMatrix<T>) -> Result<Lq<T>> {
    let (m, n) = a.shape();
    if m > n {
        return Err(Error::DimensionMismatch(format!(
            "LQ needs rows <= cols, got {m}x{n}"
        )));
    }
    let tol = T::lit(RANK_TOL) * a.frobenius_norm();
    let zero = Complex::new(T::zero(), T::zero());
    let two = T::lit(2.0);

    // Work on X = Aᴴ (n x m); X = Q_h R with R upper triangular.
    let mut x = a.adjoint();
    let mut reflectors: Vec<Vec<Complex<T>>> = Vec::with_capacity(m);
    for k in 0..m {
        let mut v: Vec<Complex<T>> = (k..n).map(|i| x[(i, k)]).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if !(norm > tol) {
            return Err(Error::RankDeficient {
                pivot: k,
                norm: norm.to_f64().unwrap_or(f64::NAN),
            });
        }
        let head = v[0];
        let phase = if head.norm() > T::zero() {
            head / head.norm()
        } else {
            Complex::new(T::one(), T::zero())
        };
        let alpha = -phase * norm;
        v[0] -= alpha;
        let vnorm_sq = v.iter().map(|z| z.norm_sqr()).sum::<T>();

        // X[k.., k..] <- (I - 2vvᴴ/‖v‖²) X[k.., k..]
        for j in k..m {
            let w = v
                .iter()
                .enumerate()
                .fold(zero, |acc, (i, vi)| acc + vi.conj() * x[(k + i, j)]);
            let coef = w * (two / vnorm_sq);
            for (i, vi) in v.iter().enumerate() {
                x[(k + i, j)] -= *vi * coef;
            }
        }
        // Normalize so the reflector is I - 2vvᴴ.
        let vn = vnorm_sq.sqrt();
        for vi in v.iter_mut() {
            *vi /= vn;
        }
        reflectors.push(v);
    }

    // Thin Q_h (n x m): apply reflectors to the first m columns of I_n.
    let mut qh = CMatrix::<T>::from_fn(n, m, |i, j| {
        if i == j {
            Complex::new(T::one(), T::zero())
        } else {
            zero
        }
    });
    for (k, v) in reflectors.iter().enumerate().rev() {
        for j in 0..m {
            let w = v
                .iter()
                .enumerate()
                .fold(zero, |acc, (i, vi)| acc + vi.conj() * qh[(k + i, j)]);
            let coef = w * two;
            for (i, vi) in v.iter().enumerate() {
                qh[(k + i, j)] -= *vi * coef;
            }
        }
    }

    // A = Rᴴ Q_hᴴ
    let mut l = CMatrix::<T>::from_fn(m, m, |i, j| if j <= i { x[(j, i)].conj() } else { zero });
    let mut q = qh.adjoint();

    for i in 0..m {
        let lii = l[(i, i)];
        let mag = lii.norm();
        if mag == T::zero() {
            continue;
        }
        let d = lii / mag;
        for r in i..m {
            l[(r, i)] *= d.conj();
        }
        l[(i, i)] = Complex::new(mag, T::zero());
        for z in q.row_mut(i) {
            *z *= d;
        }
    }

    Ok(Lq { l, q })
}
