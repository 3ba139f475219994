//! Tomlinson-Harashima precoding on an equivalent channel `H_e = L·Q`.
//!
//! Filters: `F = Qᴴ`, `G = diag(L)⁻¹`, and the unit-diagonal feedback filter
//! `B = G·L` (decentralized) or `B = L·G` (centralized). The decentralized
//! structure applies `G` at the receivers; the centralized one applies it at
//! the transmitter together with the power normalization `1/β`.
//!
//! With noiseless transmission through `H_e` both chains deliver
//! `v = s + d`, where `d` is the lattice perturbation introduced by the
//! modulo; receivers remove `d` by folding again before slicing.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{lower_triangular_inverse, lq_decompose, CMatrix, Lq};
use crate::scalar::Real;
use crate::sigproc::{modulo_reduce, Constellation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ThpVariant {
    /// `G` at the transmitter (cTHP).
    Centralized,
    /// `G` at the receivers (dTHP).
    Decentralized,
}

impl fmt::Display for ThpVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThpVariant::Centralized => "cTHP",
            ThpVariant::Decentralized => "dTHP",
        })
    }
}

impl FromStr for ThpVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cthp" => Ok(ThpVariant::Centralized),
            "dthp" => Ok(ThpVariant::Decentralized),
            other => Err(Error::Config(format!("unknown THP variant '{other}'"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ThpFilters<T> {
    /// `F = Qᴴ`, `N_t x r` with orthonormal columns.
    pub feedforward: CMatrix<T>,
    /// Diagonal of `G`: `g_ii = 1 / l_ii`.
    pub scaling: Vec<T>,
    /// Unit-diagonal lower triangular feedback filter.
    pub feedback: CMatrix<T>,
    /// LQ factor the filters were built from.
    pub lower: CMatrix<T>,
    pub beta: T,
    pub variant: ThpVariant,
}

impl<T: Real> ThpFilters<T> {
    pub fn streams(&self) -> usize {
        self.scaling.len()
    }

    pub fn scaling_matrix(&self) -> CMatrix<T> {
        let d: Vec<_> = self.scaling.iter().map(|&g| Complex::new(g, T::zero())).collect();
        CMatrix::from_diag(&d)
    }

    /// Linear map from `v = s + d` to the transmit signal:
    /// `F·G·B⁻¹` for cTHP and `F·B⁻¹` for dTHP (power scaling excluded).
    pub fn composite_precoder(&self) -> Result<CMatrix<T>> {
        let b_inv = lower_triangular_inverse(&self.feedback)?;
        Ok(match self.variant {
            ThpVariant::Centralized => &(&self.feedforward * &self.scaling_matrix()) * &b_inv,
            ThpVariant::Decentralized => &self.feedforward * &b_inv,
        })
    }
}

/// Builds `F`, `G`, `B` and `β` for the equivalent channel `h_e` (`r x N_t`).
///
/// `β = √(σ_s² Σ g_ii² / ξ)` for cTHP (modulo loss ignored); dTHP uses `β = 1`.
pub fn synthesize_filters<T: Real>(
    h_e: &CMatrix<T>,
    variant: ThpVariant,
    xi: T,
    sigma_s_sq: T,
) -> Result<ThpFilters<T>> {
    if !(xi > T::zero()) {
        return Err(Error::Config(format!("transmit power must be positive, got {xi}")));
    }
    let Lq { l, q } = lq_decompose(h_e)?;
    let r = l.rows();
    let scaling: Vec<T> = (0..r).map(|i| T::one() / l[(i, i)].re).collect();
    let mut feedback = CMatrix::from_fn(r, r, |i, j| {
        if j > i {
            return Complex::new(T::zero(), T::zero());
        }
        match variant {
            ThpVariant::Decentralized => l[(i, j)] * scaling[i],
            ThpVariant::Centralized => l[(i, j)] * scaling[j],
        }
    });
    for i in 0..r {
        feedback[(i, i)] = Complex::new(T::one(), T::zero());
    }
    let beta = match variant {
        ThpVariant::Centralized => (sigma_s_sq * scaling.iter().map(|&g| g * g).sum::<T>() / xi).sqrt(),
        ThpVariant::Decentralized => T::one(),
    };
    Ok(ThpFilters {
        feedforward: q.adjoint(),
        scaling,
        feedback,
        lower: l,
        beta,
        variant,
    })
}

/// Encoder output for one symbol vector.
#[derive(Clone, Debug, PartialEq)]
pub struct TxFrame<T> {
    /// Post-feedback symbols, each inside the fundamental modulo region.
    pub x: Vec<Complex<T>>,
    /// Antenna-domain signal.
    pub x_tilde: Vec<Complex<T>>,
    /// Lattice perturbation with `B·x = s + d`. Never transmitted.
    pub d: Vec<Complex<T>>,
}

/// Successive modulo encoding `x_i = M(s_i − Σ_{j<i} b_ij x_j)` in natural
/// stream order, followed by the variant's feedforward stage.
pub fn thp_encode<T: Real>(
    s: &[Complex<T>],
    filters: &ThpFilters<T>,
    constellation: &Constellation<T>,
) -> Result<TxFrame<T>> {
    let r = filters.streams();
    if s.len() != r {
        return Err(Error::DimensionMismatch(format!("{} symbols for {r} streams", s.len())));
    }
    let tau = constellation.tau();
    let b = &filters.feedback;
    let mut x: Vec<Complex<T>> = Vec::with_capacity(r);
    for (i, &si) in s.iter().enumerate() {
        let interference = b.row(i)[..i]
            .iter()
            .zip(&x)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&bij, &xj)| acc + bij * xj);
        x.push(modulo_reduce(si - interference, tau));
    }

    let d = b
        .mul_vec(&x)
        .iter()
        .zip(s)
        .map(|(&bx, &si)| {
            let e = bx - si;
            Complex::new((e.re / tau).round() * tau, (e.im / tau).round() * tau)
        })
        .collect();

    let x_tilde = match filters.variant {
        ThpVariant::Decentralized => filters.feedforward.mul_vec(&x),
        ThpVariant::Centralized => {
            let inv_beta = T::one() / filters.beta;
            let gx: Vec<_> = x.iter().zip(&filters.scaling).map(|(&xi, &g)| xi * (g * inv_beta)).collect();
            filters.feedforward.mul_vec(&gx)
        }
    };
    Ok(TxFrame { x, x_tilde, d })
}

/// Receive-side scaling: `β·y` for cTHP, `G·y` for dTHP.
///
/// `y_raw` is the stacked per-stream output of the receive filters. The
/// combined diagonal `G` is applied; each user only ever touches its own
/// diagonal block, so this is the same as per-user scaling.
pub fn receive<T: Real>(y_raw: &[Complex<T>], filters: &ThpFilters<T>) -> Result<Vec<Complex<T>>> {
    if y_raw.len() != filters.streams() {
        return Err(Error::DimensionMismatch(format!(
            "{} received samples for {} streams",
            y_raw.len(),
            filters.streams()
        )));
    }
    Ok(match filters.variant {
        ThpVariant::Centralized => y_raw.iter().map(|&y| y * filters.beta).collect(),
        ThpVariant::Decentralized => y_raw.iter().zip(&filters.scaling).map(|(&y, &g)| y * g).collect(),
    })
}

/// Empirical power normalization `√(mean ‖F·G·x‖² / ξ)` over encoded frames.
///
/// Unlike the analytic `β` this includes the modulo power increase.
pub fn estimate_beta<'a, T: Real>(
    filters: &ThpFilters<T>,
    frames: impl IntoIterator<Item = &'a TxFrame<T>>,
    xi: T,
) -> T {
    let fg = &filters.feedforward * &filters.scaling_matrix();
    let (sum, count) = frames.into_iter().fold((T::zero(), 0usize), |(acc, n), f| {
        let e: T = fg.mul_vec(&f.x).iter().map(|z| z.norm_sqr()).sum();
        (acc + e, n + 1)
    });
    (sum / T::lit(count.max(1) as f64) / xi).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sigproc::{generate_channel, Modulation, RngStream};

    type M = CMatrix<f64>;
    type C = Complex<f64>;

    const VARIANTS: [ThpVariant; 2] = [ThpVariant::Centralized, ThpVariant::Decentralized];

    fn qpsk() -> Constellation<f64> {
        Constellation::new(Modulation::Qpsk)
    }

    fn check_invariants(f: &ThpFilters<f64>) {
        let r = f.streams();
        let ff = &f.feedforward.adjoint() * &f.feedforward;
        assert!((&ff - &M::identity(r)).frobenius_norm() < 1e-10);
        for (i, &g) in f.scaling.iter().enumerate() {
            assert!(g > 0.0);
            assert!((g * f.lower[(i, i)].re - 1.0).abs() < 1e-12);
            assert_eq!(f.feedback[(i, i)], C::new(1.0, 0.0));
            for j in i + 1..r {
                assert_eq!(f.feedback[(i, j)], C::new(0.0, 0.0));
            }
        }
        assert!(f.beta > 0.0);
    }

    #[test]
    fn identity_channel() {
        for v in VARIANTS {
            let f = synthesize_filters(&M::identity(4), v, 4.0, 1.0).unwrap();
            assert!((&f.feedforward - &M::identity(4)).max_abs() < 1e-15);
            assert!((&f.feedback - &M::identity(4)).max_abs() < 1e-15);
            assert!(f.scaling.iter().all(|&g| (g - 1.0).abs() < 1e-15));
            assert!((f.beta - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn diagonal_channel() {
        let h = M::from_real_rows(&[&[2.0, 0.0], &[0.0, 4.0]]).unwrap();
        for v in VARIANTS {
            let f = synthesize_filters(&h, v, 2.0, 1.0).unwrap();
            assert!((f.scaling[0] - 0.5).abs() < 1e-15 && (f.scaling[1] - 0.25).abs() < 1e-15);
            assert!((&f.feedback - &M::identity(2)).max_abs() < 1e-15);
        }
        let c = synthesize_filters(&h, ThpVariant::Centralized, 2.0, 1.0).unwrap();
        assert!((c.beta - ((0.25 + 0.0625) / 2.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn seeded_filters_hold_invariants() {
        let h = generate_channel::<f64>(4, 8, &RngStream::new(21, 0));
        for v in VARIANTS {
            check_invariants(&synthesize_filters(&h, v, 4.0, 1.0).unwrap());
        }
    }

    #[test]
    fn rank_deficiency_propagates() {
        let h = M::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        assert!(matches!(
            synthesize_filters(&h, ThpVariant::Decentralized, 2.0, 1.0),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn encode_without_feedback_is_identity() {
        let f = synthesize_filters(&M::identity(2), ThpVariant::Decentralized, 2.0, 1.0).unwrap();
        let s = qpsk().map_bits(&[false, true, true, true]).unwrap().symbols;
        let tx = thp_encode(&s, &f, &qpsk()).unwrap();
        assert_eq!(tx.x, s);
        assert!(tx.d.iter().all(|z| z.norm() == 0.0));
    }

    fn with_feedback(b21: f64) -> ThpFilters<f64> {
        let mut f = synthesize_filters(&M::identity(2), ThpVariant::Decentralized, 2.0, 1.0).unwrap();
        f.feedback[(1, 0)] = C::new(b21, 0.0);
        f
    }

    #[test]
    fn small_feedback_no_wrap() {
        let a = 1.0 / 2f64.sqrt();
        let s = vec![C::new(a, a); 2];
        let tx = thp_encode(&s, &with_feedback(0.1), &qpsk()).unwrap();
        assert_eq!(tx.x[0], s[0]);
        assert!((tx.x[1] - (s[1] - tx.x[0] * 0.1)).norm() < 1e-15);
        assert!(tx.d.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn large_feedback_wraps() {
        let a = 1.0 / 2f64.sqrt();
        let s = vec![C::new(a, a), C::new(-a, -a)];
        let f = with_feedback(3.0);
        let tx = thp_encode(&s, &f, &qpsk()).unwrap();
        let tau = qpsk().tau();
        let raw = s[1] - tx.x[0] * 3.0;
        assert!(raw.re.abs() >= tau / 2.0);
        assert!(tx.x.iter().all(|z| z.re.abs() < tau / 2.0 && z.im.abs() < tau / 2.0));
        // B·x ≡ s modulo the τ lattice, and d is a nonzero lattice point
        let bx = f.feedback.mul_vec(&tx.x);
        for i in 0..2 {
            assert!((bx[i] - s[i] - tx.d[i]).norm() < 1e-12);
        }
        assert!(tx.d[1].norm() > 0.0);
    }

    #[test]
    fn square_noiseless_loopback() {
        let h = generate_channel::<f64>(4, 4, &RngStream::new(8, 0));
        let c = qpsk();
        let bits: Vec<bool> = (0..8).map(|i| i % 3 == 0).collect();
        let frame = c.map_bits(&bits).unwrap();
        for v in VARIANTS {
            let f = synthesize_filters(&h, v, 4.0, 1.0).unwrap();
            let tx = thp_encode(&frame.symbols, &f, &c).unwrap();
            let y = receive(&h.mul_vec(&tx.x_tilde), &f).unwrap();
            for ((yi, si), di) in y.iter().zip(&frame.symbols).zip(&tx.d) {
                assert!((yi - (si + di)).norm() < 1e-10);
            }
            assert_eq!(c.detect_symbols(&y).bits, bits);
        }
    }

    #[test]
    fn centralized_receive_scales_noise_by_beta() {
        let mut f = synthesize_filters(&M::identity(2), ThpVariant::Centralized, 2.0, 1.0).unwrap();
        f.beta = 2.0;
        let n = vec![C::new(0.1, -0.2), C::new(-0.3, 0.05)];
        let y = receive(&n, &f).unwrap();
        assert_eq!(y, vec![n[0] * 2.0, n[1] * 2.0]);
    }

    #[test]
    fn composite_precoder_matches_encoder() {
        let h = generate_channel::<f64>(3, 5, &RngStream::new(12, 0));
        let c = qpsk();
        let s = c.map_bits(&[true, false, false, false, true, true]).unwrap().symbols;
        for v in VARIANTS {
            let f = synthesize_filters(&h, v, 3.0, 1.0).unwrap();
            let tx = thp_encode(&s, &f, &c).unwrap();
            let vvec: Vec<_> = s.iter().zip(&tx.d).map(|(a, b)| a + b).collect();
            let mut expect = f.composite_precoder().unwrap().mul_vec(&vvec);
            if v == ThpVariant::Centralized {
                expect.iter_mut().for_each(|z| *z /= f.beta);
            }
            for (a, b) in expect.iter().zip(&tx.x_tilde) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn length_mismatch() {
        let f = synthesize_filters(&M::identity(2), ThpVariant::Decentralized, 2.0, 1.0).unwrap();
        assert!(thp_encode(&[C::new(0.0, 0.0)], &f, &qpsk()).is_err());
        assert!(receive(&[C::new(0.0, 0.0)], &f).is_err());
    }
}
