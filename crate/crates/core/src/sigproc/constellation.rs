use std::fmt;
use std::str::FromStr;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Modulation {
    Qpsk,
    Qam16,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
        }
    }

    /// Modulo period for the unit-energy alphabet.
    pub fn default_tau(self) -> f64 {
        match self {
            Modulation::Qpsk => 2.0 * 2f64.sqrt(),
            Modulation::Qam16 => 8.0 / 10f64.sqrt(),
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Modulation::Qpsk => "qpsk",
            Modulation::Qam16 => "16qam",
        })
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(Modulation::Qpsk),
            "16qam" | "qam16" => Ok(Modulation::Qam16),
            other => Err(Error::Config(format!("unknown modulation '{other}'"))),
        }
    }
}

/// Element-wise modulo onto the fundamental square `[−τ/2, τ/2)²`.
pub fn modulo_reduce<T: Real>(x: Complex<T>, tau: T) -> Complex<T> {
    Complex::new(fold(x.re, tau), fold(x.im, tau))
}

#[inline]
fn fold<T: Real>(v: T, tau: T) -> T {
    let half = T::lit(0.5);
    let mut r = v - (v / tau + half).floor() * tau;
    // rounding in `v - kτ` can land exactly on the open edge
    if r >= tau * half {
        r -= tau;
    }
    r
}

/// A block of symbols together with the bits they carry.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolFrame<T> {
    pub symbols: Vec<Complex<T>>,
    pub bits: Vec<bool>,
}

/// Unit-energy Gray-mapped alphabet with its modulo period.
///
/// Point `i` carries the bit pattern whose big-endian value is `i`; the
/// mapping follows the 3GPP TS 36.211 QPSK / 16-QAM tables:
///
/// * QPSK: `((1−2b0) + j(1−2b1)) / √2`
/// * 16-QAM: `((1−2b0)(2−(1−2b2)) + j(1−2b1)(2−(1−2b3))) / √10`
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation<T> {
    modulation: Modulation,
    points: Vec<Complex<T>>,
    tau: T,
}

impl<T: Real> Constellation<T> {
    pub fn new(modulation: Modulation) -> Self {
        let pattern = |idx: usize, bit: usize, n: usize| -> f64 { ((idx >> (n - 1 - bit)) & 1) as f64 };
        let points = match modulation {
            Modulation::Qpsk => (0..4)
                .map(|i| {
                    let a = 1.0 / 2f64.sqrt();
                    Complex::new(
                        T::lit((1.0 - 2.0 * pattern(i, 0, 2)) * a),
                        T::lit((1.0 - 2.0 * pattern(i, 1, 2)) * a),
                    )
                })
                .collect(),
            Modulation::Qam16 => (0..16)
                .map(|i| {
                    let a = 1.0 / 10f64.sqrt();
                    let level = |s: usize, m: usize| {
                        (1.0 - 2.0 * pattern(i, s, 4)) * (2.0 - (1.0 - 2.0 * pattern(i, m, 4)))
                    };
                    Complex::new(T::lit(level(0, 2) * a), T::lit(level(1, 3) * a))
                })
                .collect(),
        };
        Constellation {
            modulation,
            points,
            tau: T::lit(modulation.default_tau()),
        }
    }

    /// Replaces the modulo period. Every point must stay strictly inside
    /// `(−τ/2, τ/2)` on both axes.
    pub fn with_tau(mut self, tau: T) -> Result<Self> {
        let half = tau / T::lit(2.0);
        let inside = self
            .points
            .iter()
            .all(|p| p.re.abs() < half && p.im.abs() < half);
        if !(tau > T::zero()) || !inside {
            return Err(Error::Config(format!(
                "tau {tau} does not enclose the {} alphabet",
                self.modulation
            )));
        }
        self.tau = tau;
        Ok(self)
    }

    pub fn modulation(&self) -> Modulation {
        self.modulation
    }

    pub fn points(&self) -> &[Complex<T>] {
        &self.points
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.modulation.bits_per_symbol()
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    /// Average symbol energy; 1 by construction.
    pub fn symbol_energy(&self) -> T {
        self.points.iter().map(|p| p.norm_sqr()).sum::<T>() / T::lit(self.points.len() as f64)
    }

    pub fn map_bits(&self, bits: &[bool]) -> Result<SymbolFrame<T>> {
        let n = self.bits_per_symbol();
        if !bits.len().is_multiple_of(n) {
            return Err(Error::LengthMismatch { len: bits.len(), bits_per_symbol: n });
        }
        let symbols = bits
            .chunks(n)
            .map(|chunk| self.points[chunk.iter().fold(0, |acc, &b| acc << 1 | b as usize)])
            .collect();
        Ok(SymbolFrame { symbols, bits: bits.to_vec() })
    }

    /// Index of the nearest point; ties go to the lower index.
    pub fn nearest(&self, z: Complex<T>) -> usize {
        let mut best = 0;
        let mut best_d = (z - self.points[0]).norm_sqr();
        for (i, p) in self.points.iter().enumerate().skip(1) {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    fn push_bits(&self, idx: usize, out: &mut Vec<bool>) {
        let n = self.bits_per_symbol();
        out.extend((0..n).map(|b| (idx >> (n - 1 - b)) & 1 == 1));
    }

    /// Nearest-point decisions without modulo folding (linear receivers).
    pub fn slice(&self, r: &[Complex<T>]) -> SymbolFrame<T> {
        let mut bits = Vec::with_capacity(r.len() * self.bits_per_symbol());
        let symbols = r
            .iter()
            .map(|&z| {
                let idx = self.nearest(z);
                self.push_bits(idx, &mut bits);
                self.points[idx]
            })
            .collect();
        SymbolFrame { symbols, bits }
    }

    /// Folds each sample back into the fundamental region, then slices.
    pub fn detect_symbols(&self, r: &[Complex<T>]) -> SymbolFrame<T> {
        let folded: Vec<_> = r.iter().map(|&z| modulo_reduce(z, self.tau)).collect();
        self.slice(&folded)
    }
}
