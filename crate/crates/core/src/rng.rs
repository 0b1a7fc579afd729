//! Deterministic random streams.
//!
//! Every stream is keyed by the scenario seed plus a small tuple of
//! integers (CPI start, range bin, purpose), so results never depend on the
//! order in which CPIs or cells are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::Complex64;

/// Purpose tags that keep independent streams apart.
#[derive(Debug, Clone, Copy)]
#[repr(u64)]
pub enum Stream {
    CubeNoise = 1,
    Clutter = 2,
    CellNoise = 3,
    CellClutter = 4,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Build a ChaCha stream from a seed and a list of keys.
pub fn stream(seed: u64, kind: Stream, keys: &[u64]) -> ChaCha8Rng {
    let mut h = splitmix(seed ^ (kind as u64).rotate_left(48));
    for &k in keys {
        h = splitmix(h ^ k);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Integer key for a time instant, stable across platforms.
pub fn time_key(t: f64) -> u64 {
    // microsecond resolution is finer than any PRI used here
    (t * 1e6).round() as i64 as u64
}

/// Circular complex Gaussian sample with unit mean power.
#[inline]
pub fn complex_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}
