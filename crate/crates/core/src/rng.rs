use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::types::Vector;

/// Deterministic random stream: the same seed always yields the same draw
/// sequence, independent of platform and thread count. Parallel benchmark
/// runs derive one stream per run via [`RngStream::substream`].
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Derives an independent stream from this stream's seed and a tag,
    /// without consuming any draws from `self`.
    pub fn substream(seed: u64, tag: u64) -> Self {
        // SplitMix64 finalizer mixes seed and tag into a fresh well-spread seed.
        let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        Self::new(z ^ (z >> 31))
    }

    /// Uniform draw in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    /// Standard normal draw via Box–Muller.
    pub fn normal(&mut self) -> f64 {
        let u1: f64 = 1.0 - self.rng.gen::<f64>(); // (0, 1]
        let u2: f64 = self.rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Uniform sample from the closed unit ball in n dimensions: a normalized
/// Gaussian direction scaled by U^(1/n). The radius law makes the draw
/// uniform over the ball's volume, so E‖u‖ = n/(n+1).
pub fn unit_ball_sample(rng: &mut RngStream, n: usize) -> Vector {
    assert!(n >= 1, "ball sample needs n >= 1");
    loop {
        let g = Vector::from_fn(n, |_, _| rng.normal());
        let norm = g.norm();
        if norm > 1e-300 {
            let radius = rng.uniform().powf(1.0 / n as f64);
            return g * (radius / norm);
        }
        // A zero Gaussian vector has probability zero; redraw if it happens.
    }
}
