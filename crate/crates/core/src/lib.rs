//! Coordinated Tomlinson-Harashima precoding (THP) for overloaded multi-user
//! MIMO broadcast channels.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: dense complex matrices, LQ decomposition, triangular
//!   solves and the pseudo-inverse.
//! * [`sigproc`]: constellations, the modulo lattice, seeded random streams,
//!   channel and noise generation.
//! * [`thp`]: THP filter synthesis, the successive modulo encoder and both
//!   receiver chains (centralized and decentralized).
//! * [`coordinate`]: the iterative receive-filter coordination loop that lets
//!   THP serve more receive antennas than transmit antennas, plus the linear
//!   zero-forcing coordinated beamforming baseline.
//! * [`experiments`]: Monte Carlo BER / sum-rate sweeps, reference bounds and
//!   the command line front end.
//!
//! The linear algebra and precoding layers are generic over the real scalar
//! type (`f32` or `f64`, see [`Real`]). The experiment layer and the aliases
//! below fix the scalar to `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coordinate;
pub mod error;
pub mod experiments;
pub mod numerics;
pub mod scalar;
pub mod sigproc;
pub mod thp;

pub use error::{Error, Result};
pub use scalar::Real;

/// Complex scalar used by the simulator.
pub type Complex = num_complex::Complex<f64>;
/// Dense complex matrix used by the simulator.
pub type Matrix = numerics::CMatrix<f64>;
/// Constellation over `f64`.
pub type Constellation = sigproc::Constellation<f64>;
/// THP filter set over `f64`.
pub type ThpFilters = thp::ThpFilters<f64>;
/// Coordination loop state over `f64`.
pub type CoordinateState = coordinate::CoordinateState<f64>;
