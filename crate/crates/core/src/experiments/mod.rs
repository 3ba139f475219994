//! Monte Carlo BER and sum-rate sweeps over Eb/N0.
//!
//! Every work unit is identified by `(grid point, channel draw)` and draws
//! its channel, initial receive filters, payload bits and noise from
//! disjoint [`RngStream`]s derived from the sweep seed. The stream ids do not
//! depend on the algorithm, so all algorithms at a grid point see the same
//! channels and noise. Draws run in parallel and are merged in draw order,
//! so the output depends only on `(seed, configuration)`.

pub mod cli;
mod output;
pub mod rates;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coordinate::{
    end_to_end_transmit, run_coordination, run_coordination_zf, CoordinateConfig, CoordinateState, Precoding,
    Topology,
};
use crate::error::{Error, Result};
use crate::numerics::CMatrix;
use crate::sigproc::{Constellation, Modulation, NoiseModel, Purpose, RngStream};
use crate::thp::ThpVariant;

pub use output::{write_csv, write_json, CSV_HEADER};
pub use rates::{cooperative_bound, cthp_sum_rate, dthp_sum_rate, linear_sum_rate};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algo {
    #[serde(rename = "cTHP")]
    Cthp,
    #[serde(rename = "dTHP")]
    Dthp,
    #[serde(rename = "ZF-CBF")]
    ZfCbf,
}

impl Algo {
    pub const ALL: [Algo; 3] = [Algo::Dthp, Algo::Cthp, Algo::ZfCbf];
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algo::Cthp => "cTHP",
            Algo::Dthp => "dTHP",
            Algo::ZfCbf => "ZF-CBF",
        })
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cthp" => Ok(Algo::Cthp),
            "dthp" => Ok(Algo::Dthp),
            "zf" | "zf-cbf" | "zfcbf" => Ok(Algo::ZfCbf),
            other => Err(Error::Config(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Antenna topology plus modulation and power budget.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub topology: Topology,
    pub modulation: Modulation,
    pub tau_override: Option<f64>,
    /// Transmit power budget ξ.
    pub xi: f64,
    pub label: String,
}

impl ScenarioConfig {
    /// Parses `"3,3,3,3x8"` (per-user receive antennas, then `N_t`).
    ///
    /// Without explicit `streams`, each user gets `min(N_k, ⌊N_t / K⌋)`.
    /// ξ defaults to `r·σ_s²` with unit-energy symbols.
    pub fn parse(scenario: &str, streams: Option<&[usize]>, modulation: Modulation) -> Result<Self> {
        let bad = || Error::Config(format!("malformed scenario '{scenario}', expected e.g. 3,3,3,3x8"));
        let (users, n_t) = scenario.trim().split_once(['x', 'X']).ok_or_else(bad)?;
        let n_t: usize = n_t.trim().parse().map_err(|_| bad())?;
        let rx = parse_counts(users).map_err(|_| bad())?;
        let streams = match streams {
            Some(s) => s.to_vec(),
            None => {
                let per_user = n_t / rx.len().max(1);
                rx.iter().map(|&n_k| n_k.min(per_user)).collect()
            }
        };
        let topology = Topology::new(n_t, rx, streams)?;
        let xi = topology.total_streams() as f64;
        Ok(ScenarioConfig {
            label: format!("({})x{}", users.trim(), n_t),
            topology,
            modulation,
            tau_override: None,
            xi,
        })
    }

    pub fn constellation(&self) -> Result<Constellation<f64>> {
        let c = Constellation::new(self.modulation);
        match self.tau_override {
            Some(t) => c.with_tau(t),
            None => Ok(c),
        }
    }
}

/// Comma-separated positive counts, e.g. `"2,2,2,2"`.
pub fn parse_counts(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|p| match p.trim().parse::<usize>() {
            Ok(v) if v > 0 => Ok(v),
            _ => Err(Error::Config(format!("invalid count '{p}' in '{s}'"))),
        })
        .collect()
}

/// Inclusive `start:step:stop` grid in dB. A single number is a one-point grid.
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("malformed Eb/N0 grid '{s}', expected start:step:stop"));
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    if parts.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    match parts[..] {
        [v] => Ok(vec![v]),
        [start, step, stop] if step > 0.0 && stop >= start => {
            let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
            Ok((0..n).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(bad()),
    }
}

/// `σ_n² = N_r·E_s / (N_t·N·10^(Eb/N0 / 10))` with `N` information bits per symbol.
pub fn noise_variance(ebn0_db: f64, n_r: usize, n_t: usize, symbol_energy: f64, bits_per_symbol: usize) -> f64 {
    let ebn0 = 10f64.powf(ebn0_db / 10.0);
    n_r as f64 * symbol_energy / (n_t as f64 * bits_per_symbol as f64 * ebn0)
}

pub fn ebn0_to_noise_var(ebn0_db: f64, sc: &ScenarioConfig, c: &Constellation<f64>) -> Result<NoiseModel<f64>> {
    let t = &sc.topology;
    NoiseModel::new(noise_variance(ebn0_db, t.n_r(), t.n_t(), c.symbol_energy(), c.bits_per_symbol()))
}

#[derive(Clone, Debug)]
pub struct SweepConfig {
    pub ebn0_db: Vec<f64>,
    /// Channel draws per grid point.
    pub trials: usize,
    /// Symbol vectors per channel draw; 0 skips BER simulation.
    pub frames: usize,
    pub coordinate: CoordinateConfig,
    pub seed: u64,
}

impl SweepConfig {
    pub fn new(ebn0_db: Vec<f64>, trials: usize, frames: usize, seed: u64) -> Self {
        SweepConfig {
            ebn0_db,
            trials,
            frames,
            coordinate: CoordinateConfig::default(),
            seed,
        }
    }
}

/// One output row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub algo: Algo,
    pub ebn0_db: f64,
    /// NaN when no frames were simulated.
    pub ber: f64,
    pub sum_rate_bits: f64,
    pub avg_iterations: f64,
    pub convergence_rate: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Per-draw tallies.
#[derive(Clone, Copy, Debug, Default)]
struct DrawOutcome {
    bit_errors: u64,
    bits: u64,
    sum_rate: f64,
    iterations: usize,
    converged: bool,
}

/// Coordination for `algo` on one channel realization.
pub fn coordinate_for(
    algo: Algo,
    channels: &[CMatrix<f64>],
    sc: &ScenarioConfig,
    cfg: &CoordinateConfig,
    rng: &mut impl Rng,
) -> Result<CoordinateState<f64>> {
    let sigma_s_sq = 1.0;
    match algo {
        Algo::Dthp => run_coordination(channels, &sc.topology, cfg, ThpVariant::Decentralized, sc.xi, sigma_s_sq, rng),
        Algo::Cthp => run_coordination(channels, &sc.topology, cfg, ThpVariant::Centralized, sc.xi, sigma_s_sq, rng),
        Algo::ZfCbf => run_coordination_zf(channels, &sc.topology, cfg, sc.xi, sigma_s_sq, rng),
    }
}

/// Sum rate of a coordinated state at noise level `sigma_n_sq`.
pub fn state_sum_rate(state: &CoordinateState<f64>, sigma_n_sq: f64) -> f64 {
    let s2 = state.sigma_s_sq;
    match &state.precoding {
        Precoding::Thp(f) => match f.variant {
            ThpVariant::Decentralized => dthp_sum_rate(&f.scaling, s2, sigma_n_sq),
            ThpVariant::Centralized => cthp_sum_rate(f.beta, f.streams(), s2, sigma_n_sq),
        },
        Precoding::ZeroForcing { .. } => linear_sum_rate(&state.effective_channel(), s2, sigma_n_sq),
    }
}

fn simulate_draw(
    algo: Algo,
    sc: &ScenarioConfig,
    c: &Constellation<f64>,
    noise: &NoiseModel<f64>,
    cfg: &SweepConfig,
    point: u32,
    draw: u32,
) -> Result<DrawOutcome> {
    let topo = &sc.topology;
    let channels = topo.draw_channels(&mut RngStream::derive(cfg.seed, Purpose::Channel, point, draw).rng());
    let mut init_rng = RngStream::derive(cfg.seed, Purpose::FilterInit, point, draw).rng();
    let state = coordinate_for(algo, &channels, sc, &cfg.coordinate, &mut init_rng)?;

    let mut out = DrawOutcome {
        sum_rate: state_sum_rate(&state, noise.sigma_n_sq()),
        iterations: state.iterations_used,
        converged: state.converged,
        ..Default::default()
    };

    let mut bit_rng = RngStream::derive(cfg.seed, Purpose::Bits, point, draw).rng();
    let mut noise_rng = RngStream::derive(cfg.seed, Purpose::Noise, point, draw).rng();
    let n_bits = topo.total_streams() * c.bits_per_symbol();
    let mut bits = vec![false; n_bits];
    for _ in 0..cfg.frames {
        bits.iter_mut().for_each(|b| *b = bit_rng.random());
        let frame = c.map_bits(&bits)?;
        let detected = end_to_end_transmit(&state, &channels, topo, &frame.symbols, c, Some(noise), &mut noise_rng)?;
        out.bit_errors += detected.bits.iter().zip(&bits).filter(|(a, b)| a != b).count() as u64;
        out.bits += n_bits as u64;
    }
    Ok(out)
}

/// Runs `algo` over the grid; each row carries both BER and sum rate.
pub fn sweep(sc: &ScenarioConfig, algo: Algo, cfg: &SweepConfig) -> Result<Vec<SweepResult>> {
    if cfg.trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    if cfg.trials > u32::MAX as usize {
        return Err(Error::Config("too many trials".into()));
    }
    cfg.coordinate.validate()?;
    let c = sc.constellation()?;
    cfg.ebn0_db
        .iter()
        .enumerate()
        .map(|(point, &ebn0_db)| {
            let noise = ebn0_to_noise_var(ebn0_db, sc, &c)?;
            let draws = (0..cfg.trials as u32)
                .into_par_iter()
                .map(|d| simulate_draw(algo, sc, &c, &noise, cfg, point as u32, d))
                .collect::<Result<Vec<_>>>()?;
            let n = draws.len() as f64;
            let (errors, bits) = draws.iter().fold((0u64, 0u64), |(e, b), d| (e + d.bit_errors, b + d.bits));
            Ok(SweepResult {
                algo,
                ebn0_db,
                ber: if bits == 0 { f64::NAN } else { errors as f64 / bits as f64 },
                sum_rate_bits: draws.iter().map(|d| d.sum_rate).sum::<f64>() / n,
                avg_iterations: draws.iter().map(|d| d.iterations as f64).sum::<f64>() / n,
                convergence_rate: draws.iter().filter(|d| d.converged).count() as f64 / n,
                trials: cfg.trials,
                seed: cfg.seed,
            })
        })
        .collect()
}

/// BER sweep; requires at least one frame per draw.
pub fn ber_sweep(sc: &ScenarioConfig, algo: Algo, cfg: &SweepConfig) -> Result<Vec<SweepResult>> {
    if cfg.frames == 0 {
        return Err(Error::Config("BER sweep needs at least one frame per draw".into()));
    }
    sweep(sc, algo, cfg)
}

/// Sum-rate sweep without frame simulation (`ber` is NaN).
pub fn sumrate_sweep(sc: &ScenarioConfig, algo: Algo, cfg: &SweepConfig) -> Result<Vec<SweepResult>> {
    let cfg = SweepConfig { frames: 0, ..cfg.clone() };
    sweep(sc, algo, &cfg)
}

/// Average cooperative bound over the same channel draws a sweep uses.
pub fn cooperative_bound_sweep(sc: &ScenarioConfig, cfg: &SweepConfig) -> Result<Vec<f64>> {
    let c = sc.constellation()?;
    cfg.ebn0_db
        .iter()
        .enumerate()
        .map(|(point, &ebn0_db)| {
            let noise = ebn0_to_noise_var(ebn0_db, sc, &c)?;
            let bounds = (0..cfg.trials as u32)
                .into_par_iter()
                .map(|d| {
                    let mut rng = RngStream::derive(cfg.seed, Purpose::Channel, point as u32, d).rng();
                    let channels: Vec<CMatrix<f64>> = sc.topology.draw_channels(&mut rng);
                    cooperative_bound(&CMatrix::vstack(&channels)?, sc.xi, noise.sigma_n_sq())
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(bounds.iter().sum::<f64>() / bounds.len() as f64)
        })
        .collect()
}
