//! Seeded, splittable Gaussian streams.
//!
//! Each `(seed, stream_id)` pair addresses an independent ChaCha keystream,
//! so trials can run in any order or on any thread and still draw the same
//! numbers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Address of a reproducible random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeededStream {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeededStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        SeededStream { seed, stream_id }
    }

    /// Child stream keyed by a path of integers, e.g. `(curve, point, trial,
    /// object)`. Distinct paths give distinct stream ids.
    pub fn derive(&self, path: &[u64]) -> SeededStream {
        let id = path
            .iter()
            .fold(splitmix(self.stream_id), |acc, &k| splitmix(acc ^ splitmix(k)));
        SeededStream::new(self.seed, id)
    }

    pub fn gaussian(&self) -> GaussianSource {
        GaussianSource::new(*self)
    }
}

/// Standard normal sampler (Box–Muller) over a ChaCha stream.
#[derive(Debug, Clone)]
pub struct GaussianSource {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianSource {
    pub fn new(stream: SeededStream) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(stream.seed);
        rng.set_stream(stream.stream_id);
        GaussianSource { rng, spare: None }
    }

    /// Uniform on (0, 1].
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        self.spare = Some(r * s);
        r * c
    }

    pub fn normal(&mut self, std_dev: f64) -> f64 {
        std_dev * self.standard_normal()
    }

    pub fn fill_normal(&mut self, out: &mut [f64], std_dev: f64) {
        for v in out {
            *v = std_dev * self.standard_normal();
        }
    }
}
