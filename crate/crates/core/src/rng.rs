//! Counter-based random streams.
//!
//! Every stream is a ChaCha8 generator keyed by (master seed, sweep point,
//! trial, purpose), so a trial's draws never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::C64;

pub type Stream = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purpose {
    Layout,
    Channels,
    /// Data bits; the payload separates transmissions sharing one trial.
    Data(u32),
    /// Receiver noise; the payload separates transmissions sharing one trial.
    Noise(u32),
    Test,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Layout => 1 << 32,
            Purpose::Channels => 2 << 32,
            Purpose::Data(s) => (3 << 32) | s as u64,
            Purpose::Noise(s) => (4 << 32) | s as u64,
            Purpose::Test => 5 << 32,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StreamKey {
    pub master: u64,
    pub point: u64,
    pub trial: u64,
}

impl StreamKey {
    pub fn new(master: u64, point: u64, trial: u64) -> Self {
        StreamKey { master, point, trial }
    }

    pub fn stream(&self, purpose: Purpose) -> Stream {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.master.to_le_bytes());
        seed[8..16].copy_from_slice(&self.point.to_le_bytes());
        seed[16..24].copy_from_slice(&self.trial.to_le_bytes());
        seed[24..].copy_from_slice(&purpose.tag().to_le_bytes());
        ChaCha8Rng::from_seed(seed)
    }
}

/// One stream from a bare seed, for tests and one-off draws.
pub fn seeded(seed: u64) -> Stream {
    StreamKey::new(seed, 0, 0).stream(Purpose::Test)
}

/// Circularly-symmetric complex Gaussian sample with variance `var`.
pub fn complex_normal<R: rand::Rng + ?Sized>(rng: &mut R, var: f64) -> C64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re * s, im * s)
}
