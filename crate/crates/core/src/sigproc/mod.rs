//! Constellations, modulo arithmetic and the random processes that drive the
//! Monte Carlo experiments.

mod constellation;
mod random;
mod rng;

pub use constellation::{modulo_reduce, Constellation, Modulation, SymbolFrame};
pub use random::{
    channel_from_rng, complex_gaussian, generate_channel, generate_noise, noise_from_rng, NoiseModel,
};
pub use rng::{Purpose, RngStream, RNG_ALGORITHM};
