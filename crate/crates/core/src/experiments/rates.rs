//! Gaussian-input rates of the parallel channels each scheme creates, and a
//! full-cooperation reference bound.
//!
//! Modulo and shaping losses are ignored, so THP rates are slightly
//! optimistic at low SNR.

use num_complex::Complex;

use crate::error::Result;
use crate::numerics::{lq_decompose, CMatrix};

/// dTHP: stream `i` sees `v_i + g_ii·n_i`.
pub fn dthp_sum_rate(scaling: &[f64], sigma_s_sq: f64, sigma_n_sq: f64) -> f64 {
    scaling
        .iter()
        .map(|g| (1.0 + sigma_s_sq / (g * g * sigma_n_sq)).log2())
        .sum()
}

/// cTHP: every stream sees `v_i + β·n_i`.
pub fn cthp_sum_rate(beta: f64, streams: usize, sigma_s_sq: f64, sigma_n_sq: f64) -> f64 {
    streams as f64 * (1.0 + sigma_s_sq / (beta * beta * sigma_n_sq)).log2()
}

/// Linear precoding with effective channel `A = H_e·P_e`: the diagonal is
/// signal, the rest of each row is interference.
pub fn linear_sum_rate(effective: &CMatrix<f64>, sigma_s_sq: f64, sigma_n_sq: f64) -> f64 {
    (0..effective.rows())
        .map(|i| {
            let row = effective.row(i);
            let signal = row[i].norm_sqr() * sigma_s_sq;
            let interference: f64 = row
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, z)| z.norm_sqr() * sigma_s_sq)
                .sum();
            (1.0 + signal / (interference + sigma_n_sq)).log2()
        })
        .sum()
}

/// `log2 det(I + ξ/(N_t σ_n²)·H·Hᴴ)`: capacity with full receiver
/// cooperation and uniform transmit power. An upper reference, not the
/// broadcast (DPC) capacity.
pub fn cooperative_bound(h: &CMatrix<f64>, xi: f64, sigma_n_sq: f64) -> Result<f64> {
    let (n_r, n_t) = h.shape();
    let c = (xi / (n_t as f64 * sigma_n_sq)).sqrt();
    // [I | c·H]·[I | c·H]ᴴ = I + c²HHᴴ = LLᴴ
    let stacked = CMatrix::from_fn(n_r, n_r + n_t, |i, j| {
        if j < n_r {
            Complex::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        } else {
            h[(i, j - n_r)] * c
        }
    });
    let l = lq_decompose(&stacked)?.l;
    Ok(2.0 * (0..n_r).map(|i| l[(i, i)].re.log2()).sum::<f64>())
}
