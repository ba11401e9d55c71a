use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

/// Portable Gaussian source: ChaCha20 keyed by the run seed, one stream per noise source.
///
/// Each noise source in a circuit owns a distinct `substream`, so adding sources
/// never shifts the draws of existing ones.
pub struct NoiseStream {
    rng: ChaCha20Rng,
}

impl NoiseStream {
    pub fn new(seed: u64, substream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(substream);
        NoiseStream { rng }
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}
