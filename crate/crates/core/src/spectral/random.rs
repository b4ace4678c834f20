//! Seeded random band-limited fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{perp_gradient, Grid, ScalarField, VectorField};

/// Deterministic generator for a `(seed, stream)` pair.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Random trigonometric polynomial with modes `0 < |xi| <= max_mode`.
///
/// Amplitudes are standard normal scaled by `|xi|^-decay`; the result has zero mean.
pub fn random_scalar<R: Rng>(grid: Grid, max_mode: f64, decay: f64, rng: &mut R) -> ScalarField {
    let kmax = max_mode.floor() as i64;
    let mut modes = Vec::new();
    // one representative of each +-xi pair
    for k1 in 0..=kmax {
        for k2 in -kmax..=kmax {
            if k1 == 0 && k2 <= 0 {
                continue;
            }
            let r2 = (k1 * k1 + k2 * k2) as f64;
            if r2.sqrt() > max_mode {
                continue;
            }
            let amp = r2.powf(-decay / 2.0);
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            modes.push((k1 as f64, k2 as f64, amp * a, amp * b));
        }
    }
    ScalarField::from_fn(grid, |x1, x2| {
        modes
            .iter()
            .map(|&(k1, k2, a, b)| {
                let ph = k1 * x1 + k2 * x2;
                a * ph.cos() + b * ph.sin()
            })
            .sum()
    })
}

/// Random divergence-free, zero-mean velocity `perp grad psi` with a random stream function.
pub fn random_solenoidal<R: Rng>(
    grid: Grid,
    max_mode: f64,
    decay: f64,
    rng: &mut R,
) -> VectorField {
    perp_gradient(&random_scalar(grid, max_mode, decay, rng))
}
