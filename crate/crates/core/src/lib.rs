//! Dual-domain ISAC simulation: OFDM data in the frequency-time grid with a
//! superposed delay-Doppler sensing impulse, plus the channel, receiver,
//! metric and power-allocation machinery around it.

pub mod channel;
pub mod cli;
pub mod dsp;
pub mod error;
pub mod grid;
pub mod metrics;
pub mod powalloc;
pub mod receiver;
pub mod rng;
pub mod units;
pub mod waveform;

pub use error::{Error, Result};
