//! Seeded random streams.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream identified
//! by `(seed, domain, index)`. The domain separates independent uses of one
//! user seed (channel noise, PEG tie-breaks, training frames, ...) and the
//! index selects one of the 2^64 ChaCha streams, so per-frame streams can be
//! created in any order or on any worker with identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Name of the Gaussian generator, recorded in output headers.
pub const GAUSSIAN_GENERATOR: &str = "chacha8-stream/marsaglia-polar";

/// Stream domains.
pub mod domain {
    pub const CHANNEL: u64 = 0x01;
    pub const PEG: u64 = 0x02;
    pub const EXPANSION: u64 = 0x03;
    pub const TRAINING: u64 = 0x04;
    pub const PILOT: u64 = 0x05;
    pub const PAYLOAD: u64 = 0x06;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Creates the stream `(seed, domain, index)`.
pub fn substream(seed: u64, domain: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(domain)));
    rng.set_stream(index);
    rng
}

/// Packs an (outer, inner) pair such as (snr index, frame index) into a stream index.
pub fn pair_index(outer: u64, inner: u64) -> u64 {
    debug_assert!(inner < (1 << 40));
    (outer << 40) | inner
}

/// Standard normal samples by the Marsaglia polar method.
#[derive(Debug)]
pub struct PolarGaussian<R> {
    rng: R,
    spare: Option<f64>,
}

impl<R: Rng> PolarGaussian<R> {
    pub fn new(rng: R) -> Self {
        Self { rng, spare: None }
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.rng.random::<f64>() - 1.0;
            let v = 2.0 * self.rng.random::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let k = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * k);
                return u * k;
            }
        }
    }
}
