//! Physical layer: AWGN channel, soft demapping, BP decoding and the
//! BICM-ID receive loop.
//!
//! LLRs follow `L = ln(P(bit = 0) / P(bit = 1))` throughout and are
//! saturated at [`LLR_LIMIT`].

mod ber;
mod bp;
mod demap;
mod receiver;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub use ber::{ber_experiment, BerConfig, BerPoint, StopRule};
pub use bp::{BpDecoder, BpOptions, BpOutput};
pub use demap::{maxlog_demap, Demapper};
pub use receiver::{bicm_id_receive, ReceiveOutput, Receiver, ReceiverOptions, Transmitter};

/// Saturation bound for every LLR exchanged between components.
pub const LLR_LIMIT: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub ebn0_db: f64,
    pub rate: f64,
    pub bits_per_symbol: usize,
    /// Noise variance per real dimension, with unit symbol energy.
    pub sigma2: f64,
}

impl ChannelParams {
    pub fn new(ebn0_db: f64, rate: f64, bits_per_symbol: usize) -> Self {
        let sigma2 = 1.0 / (2.0 * rate * bits_per_symbol as f64 * 10f64.powf(ebn0_db / 10.0));
        Self {
            ebn0_db,
            rate,
            bits_per_symbol,
            sigma2,
        }
    }

    pub fn esn0_db(&self) -> f64 {
        self.ebn0_db + 10.0 * (self.rate * self.bits_per_symbol as f64).log10()
    }
}

/// Adds complex white Gaussian noise of variance `sigma2` per dimension.
pub fn awgn<R: Rng + ?Sized>(symbols: &[Complex64], sigma2: f64, rng: &mut R) -> Vec<Complex64> {
    let sigma = sigma2.max(0.0).sqrt();
    symbols
        .iter()
        .map(|&x| {
            let nr: f64 = rng.sample(StandardNormal);
            let ni: f64 = rng.sample(StandardNormal);
            x + Complex64::new(nr, ni) * sigma
        })
        .collect()
}

#[inline]
pub(crate) fn clamp_llr(x: f64) -> f64 {
    x.clamp(-LLR_LIMIT, LLR_LIMIT)
}
