//! Iterative coordination of per-user receive filters `W_k` with the
//! transmit precoder, for systems with more receive antennas than transmit
//! antennas.
//!
//! Each iteration stacks `W_k·H_k` into the equivalent channel `H_e`,
//! synthesizes the precoder `P_e` on it, and re-derives every `W_k` from the
//! user's own diagonal block of `H·P_e`, orthonormalizing its rows. The
//! residual multi-user interference is the off-diagonal Frobenius norm of
//! `H_e'·P_e`, where `H_e'` is built from the updated filters. The loop stops
//! once it drops below `ε` or after `max_iters` iterations.
//!
//! The returned state pairs the precoder with the receive filters it was
//! designed for, so `H_e·P_e` is diagonal whether or not the loop
//! converged; the pending update is kept in [`CoordinateState::w_next`].

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{lq_decompose, off_diagonal_frobenius, pseudo_inverse, CMatrix};
use crate::scalar::Real;
use crate::sigproc::{channel_from_rng, noise_from_rng, Constellation, NoiseModel, SymbolFrame};
use crate::thp::{receive, synthesize_filters, thp_encode, ThpFilters, ThpVariant};

/// Antenna and stream layout: `N_t` transmit antennas and, per user, `N_k`
/// receive antennas carrying `r_k` streams.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    n_t: usize,
    rx_antennas: Vec<usize>,
    streams: Vec<usize>,
}

impl Topology {
    pub fn new(n_t: usize, rx_antennas: Vec<usize>, streams: Vec<usize>) -> Result<Self> {
        if n_t == 0 || rx_antennas.is_empty() {
            return Err(Error::Config("need at least one transmit antenna and one user".into()));
        }
        if rx_antennas.len() != streams.len() {
            return Err(Error::Config(format!(
                "{} users but {} stream counts",
                rx_antennas.len(),
                streams.len()
            )));
        }
        for (k, (&n_k, &r_k)) in rx_antennas.iter().zip(&streams).enumerate() {
            if n_k == 0 || r_k == 0 {
                return Err(Error::Config(format!("user {k} needs at least one antenna and one stream")));
            }
            if r_k > n_k {
                return Err(Error::Config(format!(
                    "user {k}: {r_k} streams exceed {n_k} receive antennas"
                )));
            }
        }
        let r: usize = streams.iter().sum();
        if r > n_t {
            return Err(Error::Config(format!(
                "{r} streams exceed {n_t} transmit antennas"
            )));
        }
        Ok(Topology { n_t, rx_antennas, streams })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn users(&self) -> usize {
        self.rx_antennas.len()
    }

    pub fn rx_antennas(&self) -> &[usize] {
        &self.rx_antennas
    }

    pub fn streams(&self) -> &[usize] {
        &self.streams
    }

    /// `N_r = Σ N_k`
    pub fn n_r(&self) -> usize {
        self.rx_antennas.iter().sum()
    }

    /// `r = Σ r_k`
    pub fn total_streams(&self) -> usize {
        self.streams.iter().sum()
    }

    fn row_offsets(&self) -> Vec<usize> {
        offsets(&self.rx_antennas)
    }

    fn stream_offsets(&self) -> Vec<usize> {
        offsets(&self.streams)
    }

    /// Draws one i.i.d. CN(0, 1) channel per user.
    pub fn draw_channels<T: Real, R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<CMatrix<T>> {
        self.rx_antennas.iter().map(|&n_k| channel_from_rng(rng, n_k, self.n_t)).collect()
    }

    fn check_channels<T: Real>(&self, channels: &[CMatrix<T>]) -> Result<()> {
        if channels.len() != self.users() {
            return Err(Error::DimensionMismatch(format!(
                "{} channel matrices for {} users",
                channels.len(),
                self.users()
            )));
        }
        for (k, (h, &n_k)) in channels.iter().zip(&self.rx_antennas).enumerate() {
            if h.shape() != (n_k, self.n_t) {
                return Err(Error::DimensionMismatch(format!(
                    "user {k} channel is {}x{}, expected {n_k}x{}",
                    h.rows(),
                    h.cols(),
                    self.n_t
                )));
            }
        }
        Ok(())
    }
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    let mut out = Vec::with_capacity(sizes.len() + 1);
    out.push(0);
    for &s in sizes {
        acc += s;
        out.push(acc);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitMode {
    /// i.i.d. complex Gaussian entries, rows orthonormalized per user.
    GaussianOrthonormal,
    /// First `r_k` rows of `I_{N_k}`.
    Identity,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordinateConfig {
    pub epsilon: f64,
    pub max_iters: usize,
    pub init: InitMode,
}

impl Default for CoordinateConfig {
    fn default() -> Self {
        CoordinateConfig {
            epsilon: 1e-5,
            max_iters: 50,
            init: InitMode::GaussianOrthonormal,
        }
    }
}

impl CoordinateConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

/// Transmit processing the loop is coordinated against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Thp(ThpVariant),
    /// Linear zero forcing (ZF-CBF).
    ZeroForcing,
}

#[derive(Clone, Debug)]
pub enum Precoding<T> {
    Thp(ThpFilters<T>),
    /// `P_e = gain · H_e⁺` with `gain` chosen so `σ_s²‖P_e‖_F² = ξ`.
    ZeroForcing { gain: T },
}

#[derive(Clone, Debug)]
pub struct CoordinateState<T> {
    pub scheme: Scheme,
    /// Receive filters the precoder was designed for, `r_k x N_k`, orthonormal rows.
    pub w: Vec<CMatrix<T>>,
    /// Equivalent channel `W·H`.
    pub h_e: CMatrix<T>,
    /// Updated filters derived from `H·P_e`; the next iteration starts here.
    pub w_next: Vec<CMatrix<T>>,
    pub precoding: Precoding<T>,
    /// Composite linear precoder `N_t x r`.
    pub p_e: CMatrix<T>,
    /// `‖off(W_next·H·P_e)‖_F`
    pub residual_mui: T,
    pub iterations_used: usize,
    pub converged: bool,
    /// Times the loop was restarted from a fresh random `W` after a rank failure.
    pub restarts: usize,
    pub xi: T,
    pub sigma_s_sq: T,
}

impl<T: Real> CoordinateState<T> {
    pub fn thp_filters(&self) -> Option<&ThpFilters<T>> {
        match &self.precoding {
            Precoding::Thp(f) => Some(f),
            Precoding::ZeroForcing { .. } => None,
        }
    }

    /// `H_e·P_e`: the effective channel seen by the streams.
    pub fn effective_channel(&self) -> CMatrix<T> {
        &self.h_e * &self.p_e
    }

    /// One further iteration starting from the current receive filters.
    pub fn step(&self, channels: &[CMatrix<T>], topology: &Topology) -> Result<CoordinateState<T>> {
        topology.check_channels(channels)?;
        let h = CMatrix::vstack(channels)?;
        let mut next = iteration(channels, &h, topology, &self.w_next, self.scheme, self.xi, self.sigma_s_sq)?;
        next.iterations_used = self.iterations_used + 1;
        next.restarts = self.restarts;
        Ok(next)
    }
}

/// Initial receive filters.
pub fn initial_filters<T: Real, R: Rng + ?Sized>(
    topology: &Topology,
    mode: InitMode,
    rng: &mut R,
) -> Result<Vec<CMatrix<T>>> {
    topology
        .rx_antennas
        .iter()
        .zip(&topology.streams)
        .map(|(&n_k, &r_k)| match mode {
            InitMode::Identity => Ok(CMatrix::from_fn(r_k, n_k, |i, j| {
                Complex::new(if i == j { T::one() } else { T::zero() }, T::zero())
            })),
            InitMode::GaussianOrthonormal => {
                let g: CMatrix<T> = channel_from_rng(rng, r_k, n_k);
                Ok(lq_decompose(&g)?.q)
            }
        })
        .collect()
}

fn equivalent_channel<T: Real>(channels: &[CMatrix<T>], w: &[CMatrix<T>]) -> Result<CMatrix<T>> {
    let blocks: Vec<_> = w.iter().zip(channels).map(|(wk, hk)| wk * hk).collect();
    CMatrix::vstack(&blocks)
}

fn iteration<T: Real>(
    channels: &[CMatrix<T>],
    h: &CMatrix<T>,
    topology: &Topology,
    w: &[CMatrix<T>],
    scheme: Scheme,
    xi: T,
    sigma_s_sq: T,
) -> Result<CoordinateState<T>> {
    let h_e = equivalent_channel(channels, w)?;
    let (precoding, p_e) = match scheme {
        Scheme::Thp(variant) => {
            let f = synthesize_filters(&h_e, variant, xi, sigma_s_sq)?;
            let p = f.composite_precoder()?;
            (Precoding::Thp(f), p)
        }
        Scheme::ZeroForcing => {
            let p = pseudo_inverse(&h_e)?;
            let gain = (xi / (sigma_s_sq * p.frobenius_norm().powi(2))).sqrt();
            (Precoding::ZeroForcing { gain }, p.scale(gain))
        }
    };

    // W_k ← orthonormalized rows of (user-k block of H·P_e)ᴴ
    let m = h * &p_e;
    let rows = topology.row_offsets();
    let cols = topology.stream_offsets();
    let w_next = (0..topology.users())
        .map(|k| {
            let block = m.block(rows[k], cols[k], rows[k + 1] - rows[k], cols[k + 1] - cols[k]);
            Ok(lq_decompose(&block.adjoint())?.q)
        })
        .collect::<Result<Vec<_>>>()?;

    let h_e_next = equivalent_channel(channels, &w_next)?;
    let residual_mui = off_diagonal_frobenius(&(&h_e_next * &p_e))?;
    Ok(CoordinateState {
        scheme,
        w: w.to_vec(),
        h_e,
        w_next,
        precoding,
        p_e,
        residual_mui,
        iterations_used: 1,
        converged: false,
        restarts: 0,
        xi,
        sigma_s_sq,
    })
}

fn coordinate<T: Real, R: Rng + ?Sized>(
    channels: &[CMatrix<T>],
    topology: &Topology,
    cfg: &CoordinateConfig,
    scheme: Scheme,
    xi: T,
    sigma_s_sq: T,
    rng: &mut R,
) -> Result<CoordinateState<T>> {
    cfg.validate()?;
    topology.check_channels(channels)?;
    let h = CMatrix::vstack(channels)?;
    let eps = T::lit(cfg.epsilon);

    let mut w = initial_filters(topology, cfg.init, rng)?;
    let mut restarts = 0;
    'restart: loop {
        let mut state: Option<CoordinateState<T>> = None;
        for p in 1..=cfg.max_iters {
            let current = state.as_ref().map_or(&w, |s| &s.w_next);
            match iteration(channels, &h, topology, current, scheme, xi, sigma_s_sq) {
                Ok(mut next) => {
                    next.iterations_used = p;
                    next.restarts = restarts;
                    next.converged = next.residual_mui < eps;
                    let done = next.converged;
                    state = Some(next);
                    if done {
                        break;
                    }
                }
                Err(Error::RankDeficient { .. }) if restarts == 0 => {
                    restarts += 1;
                    w = initial_filters(topology, InitMode::GaussianOrthonormal, rng)?;
                    continue 'restart;
                }
                Err(e) => return Err(e),
            }
        }
        return Ok(state.expect("max_iters >= 1"));
    }
}

/// Coordinated THP. Non-convergence is reported through
/// [`CoordinateState::converged`], not as an error.
pub fn run_coordination<T: Real, R: Rng + ?Sized>(
    channels: &[CMatrix<T>],
    topology: &Topology,
    cfg: &CoordinateConfig,
    variant: ThpVariant,
    xi: T,
    sigma_s_sq: T,
    rng: &mut R,
) -> Result<CoordinateState<T>> {
    coordinate(channels, topology, cfg, Scheme::Thp(variant), xi, sigma_s_sq, rng)
}

/// Coordinated linear zero-forcing beamforming baseline.
pub fn run_coordination_zf<T: Real, R: Rng + ?Sized>(
    channels: &[CMatrix<T>],
    topology: &Topology,
    cfg: &CoordinateConfig,
    xi: T,
    sigma_s_sq: T,
    rng: &mut R,
) -> Result<CoordinateState<T>> {
    coordinate(channels, topology, cfg, Scheme::ZeroForcing, xi, sigma_s_sq, rng)
}

/// Sends one symbol vector over the true channel and returns the receivers'
/// decisions. `noise = None` is a noiseless link.
///
/// User `k` observes `W_k(H_k·x̃ + n_k)`; THP receivers then scale (β or
/// `G`), fold and slice, the ZF receiver divides by the precoder gain and
/// slices.
pub fn end_to_end_transmit<T: Real, R: Rng + ?Sized>(
    state: &CoordinateState<T>,
    channels: &[CMatrix<T>],
    topology: &Topology,
    symbols: &[Complex<T>],
    constellation: &Constellation<T>,
    noise: Option<&NoiseModel<T>>,
    rng: &mut R,
) -> Result<SymbolFrame<T>> {
    topology.check_channels(channels)?;
    let x_tilde = match &state.precoding {
        Precoding::Thp(f) => thp_encode(symbols, f, constellation)?.x_tilde,
        Precoding::ZeroForcing { .. } => {
            if symbols.len() != state.p_e.cols() {
                return Err(Error::DimensionMismatch(format!(
                    "{} symbols for {} streams",
                    symbols.len(),
                    state.p_e.cols()
                )));
            }
            state.p_e.mul_vec(symbols)
        }
    };

    // W·H·x̃ equals the stacked per-user W_k·H_k·x̃
    let mut y = state.h_e.mul_vec(&x_tilde);
    if let Some(nm) = noise {
        let n = noise_from_rng(rng, topology.n_r(), nm);
        let rows = topology.row_offsets();
        let cols = topology.stream_offsets();
        for (k, wk) in state.w.iter().enumerate() {
            let wn = wk.mul_vec(&n[rows[k]..rows[k + 1]]);
            for (yi, z) in y[cols[k]..cols[k + 1]].iter_mut().zip(wn) {
                *yi += z;
            }
        }
    }

    Ok(match &state.precoding {
        Precoding::Thp(f) => constellation.detect_symbols(&receive(&y, f)?),
        Precoding::ZeroForcing { gain } => {
            let inv = T::one() / *gain;
            let z: Vec<_> = y.iter().map(|&v| v * inv).collect();
            constellation.slice(&z)
        }
    })
}
