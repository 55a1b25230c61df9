//! Counter-style random streams keyed by `(seed, entity index)`.
//!
//! Every independently generated unit (a trial, a graph row, a block of
//! hyperedges) draws from its own ChaCha8 stream, so results do not depend
//! on the order or the number of workers that produce them.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Below this edge probability, Bernoulli runs use geometric skips.
pub const SPARSE_THRESHOLD: f64 = 0.1;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable hash of `(master, index)` used for per-trial and per-system seeds.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Stream `stream` of the generator keyed by `seed`.
pub fn entity_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform in `(0, 1]`.
fn open_unit(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Decides, item by item, which members of a sequence are present when each
/// is kept independently with probability `p`.
///
/// Dense probabilities draw one 64-bit word per item; sparse ones draw one
/// geometric gap per success. Both consume the stream deterministically.
pub struct BernoulliSelector<R> {
    rng: R,
    mode: Mode,
}

enum Mode {
    Never,
    Always,
    Dense { threshold: u64 },
    Sparse { ln_q: f64, gap: u64 },
}

impl<R: RngCore> BernoulliSelector<R> {
    pub fn new(mut rng: R, p: f64) -> Self {
        let mode = if p <= 0.0 {
            Mode::Never
        } else if p >= 1.0 {
            Mode::Always
        } else if p < SPARSE_THRESHOLD {
            let ln_q = (-p).ln_1p();
            let gap = Self::draw_gap(&mut rng, ln_q);
            Mode::Sparse { ln_q, gap }
        } else {
            Mode::Dense {
                threshold: (p * 18_446_744_073_709_551_616.0) as u64,
            }
        };
        Self { rng, mode }
    }

    fn draw_gap(rng: &mut R, ln_q: f64) -> u64 {
        let g = (open_unit(rng).ln() / ln_q).floor();
        if g >= u64::MAX as f64 {
            u64::MAX
        } else {
            g as u64
        }
    }

    /// Whether the next item of the sequence is present.
    #[inline]
    pub fn hit(&mut self) -> bool {
        match &mut self.mode {
            Mode::Never => false,
            Mode::Always => true,
            Mode::Dense { threshold } => self.rng.next_u64() < *threshold,
            Mode::Sparse { ln_q, gap } => {
                if *gap == 0 {
                    let ln_q = *ln_q;
                    *gap = Self::draw_gap(&mut self.rng, ln_q);
                    true
                } else {
                    *gap -= 1;
                    false
                }
            }
        }
    }

    pub fn into_inner(self) -> R {
        self.rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let take = |seed, stream| {
            let mut r = entity_rng(seed, stream);
            (0..4).map(|_| r.next_u64()).collect::<Vec<_>>()
        };
        assert_eq!(take(7, 3), take(7, 3));
        assert_ne!(take(7, 3), take(7, 4));
        assert_ne!(derive_seed(1, 2), derive_seed(2, 1));
    }

    #[test]
    fn selector_frequencies() {
        for &p in &[0.02, 0.3, 0.5] {
            let mut sel = BernoulliSelector::new(entity_rng(11, 0), p);
            let m = 400_000;
            let hits = (0..m).filter(|_| sel.hit()).count() as f64;
            let sd = (p * (1.0 - p) / m as f64).sqrt();
            assert!((hits / m as f64 - p).abs() < 5.0 * sd, "p={p}: {}", hits / m as f64);
        }
        let mut all = BernoulliSelector::new(entity_rng(1, 0), 1.0);
        assert!((0..100).all(|_| all.hit()));
        let mut none = BernoulliSelector::new(entity_rng(1, 0), 0.0);
        assert!(!(0..100).any(|_| none.hit()));
    }
}
