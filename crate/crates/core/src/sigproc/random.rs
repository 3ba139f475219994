use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use super::RngStream;
use crate::error::{Error, Result};
use crate::numerics::CMatrix;
use crate::scalar::Real;

/// Complex AWGN with total variance `sigma_n_sq` per complex entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel<T> {
    sigma_n_sq: T,
}

impl<T: Real> NoiseModel<T> {
    pub fn new(sigma_n_sq: T) -> Result<Self> {
        if !(sigma_n_sq > T::zero()) || !sigma_n_sq.is_finite() {
            return Err(Error::Config(format!(
                "noise variance must be positive and finite, got {sigma_n_sq}"
            )));
        }
        Ok(NoiseModel { sigma_n_sq })
    }

    pub fn sigma_n_sq(&self) -> T {
        self.sigma_n_sq
    }
}

/// One circularly-symmetric complex Gaussian sample with variance `var`.
#[inline]
pub fn complex_gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R, var: T) -> Complex<T> {
    let s = (var / T::lit(2.0)).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re) * s, T::lit(im) * s)
}

/// i.i.d. CN(0, 1) matrix drawn from an existing generator (row-major order).
pub fn channel_from_rng<T: Real, R: Rng + ?Sized>(rng: &mut R, n_r: usize, n_t: usize) -> CMatrix<T> {
    CMatrix::from_fn(n_r, n_t, |_, _| complex_gaussian(rng, T::one()))
}

/// i.i.d. CN(0, 1) `n_r x n_t` channel, deterministic in `stream`.
pub fn generate_channel<T: Real>(n_r: usize, n_t: usize, stream: &RngStream) -> CMatrix<T> {
    channel_from_rng(&mut stream.rng(), n_r, n_t)
}

pub fn noise_from_rng<T: Real, R: Rng + ?Sized>(rng: &mut R, n_dims: usize, noise: &NoiseModel<T>) -> Vec<Complex<T>> {
    (0..n_dims).map(|_| complex_gaussian(rng, noise.sigma_n_sq)).collect()
}

/// i.i.d. CN(0, σ_n²) vector, deterministic in `stream`.
pub fn generate_noise<T: Real>(n_dims: usize, noise: &NoiseModel<T>, stream: &RngStream) -> Vec<Complex<T>> {
    noise_from_rng(&mut stream.rng(), n_dims, noise)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_is_deterministic() {
        let s = RngStream::new(42, 7);
        assert_eq!(generate_channel::<f64>(3, 8, &s), generate_channel::<f64>(3, 8, &s));
    }

    #[test]
    fn channel_unit_power() {
        let h = generate_channel::<f64>(1000, 1000, &RngStream::new(1, 0));
        let mean = h.data().iter().map(|z| z.norm_sqr()).sum::<f64>() / 1e6;
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
        let re_var = h.data().iter().map(|z| z.re * z.re).sum::<f64>() / 1e6;
        assert!((re_var - 0.5).abs() < 0.01);
    }

    #[test]
    fn distinct_streams_uncorrelated() {
        let a = generate_channel::<f64>(1, 100_000, &RngStream::new(1, 10));
        let b = generate_channel::<f64>(1, 100_000, &RngStream::new(1, 11));
        let corr: Complex<f64> = a.data().iter().zip(b.data()).map(|(x, y)| x * y.conj()).sum::<Complex<f64>>() / 1e5;
        assert!(corr.norm() < 0.01, "{corr}");
    }

    #[test]
    fn noise_variance() {
        let nm = NoiseModel::new(0.3).unwrap();
        let n = generate_noise(1_000_000, &nm, &RngStream::new(2, 0));
        let var = n.iter().map(|z| z.norm_sqr()).sum::<f64>() / 1e6;
        assert!((var / 0.3 - 1.0).abs() < 0.01, "{var}");
        assert_eq!(n[..4], generate_noise(4, &nm, &RngStream::new(2, 0))[..]);
    }

    #[test]
    fn zero_noise_rejected() {
        assert!(NoiseModel::new(0.0f64).is_err());
        assert!(NoiseModel::new(-1.0f64).is_err());
        assert!(NoiseModel::new(f64::NAN).is_err());
    }
}
