//! Named initial velocity fields.

use crate::error::{Error, Result};
use crate::spectral::{biot_savart, random, Grid, ScalarField, VectorField};

/// Seed of the `generic` field when none is given.
pub const GENERIC_SEED: u64 = 2024;

pub const NAMES: [&str; 6] = [
    "zero",
    "taylor-green",
    "shear",
    "mixed",
    "random",
    "generic",
];

/// Steady cellular flow with vorticity `2 sin x1 sin x2`.
pub fn taylor_green(grid: Grid) -> VectorField {
    biot_savart(&ScalarField::from_fn(grid, |x1, x2| {
        2.0 * x1.sin() * x2.sin()
    }))
    .expect("zero mean")
}

/// Steady shear `(-sin x2, 0)`, vorticity `cos x2`.
pub fn shear(grid: Grid) -> VectorField {
    VectorField::from_fn(grid, |_, x2| [-x2.sin(), 0.0])
}

/// Shear plus a weak cellular component; not steady.
pub fn mixed(grid: Grid) -> VectorField {
    biot_savart(&ScalarField::from_fn(grid, |x1, x2| {
        x2.cos() + 0.2 * x1.sin() * x2.sin()
    }))
    .expect("zero mean")
}

/// Band-limited random field, modes `|xi| <= max_mode`, rescaled to `max|u| = amplitude`.
pub fn random_band_limited(grid: Grid, max_mode: f64, amplitude: f64, seed: u64) -> VectorField {
    let u = random::random_solenoidal(grid, max_mode, 1.0, &mut random::rng(seed, 0));
    let m = u.max_norm();
    if m == 0.0 {
        u
    } else {
        u.scaled(amplitude / m)
    }
}

/// Smooth non-steady test data: modes `|xi| <= 4`, `max|u| = 1/2`.
pub fn generic(grid: Grid, seed: u64) -> VectorField {
    random_band_limited(grid, 4.0, 0.5, seed)
}

/// Looks up a field by name; `random` has modes `|xi| <= 8` and `max|u| = 1`.
pub fn builtin(name: &str, grid: Grid, seed: u64) -> Result<VectorField> {
    Ok(match name {
        "zero" => VectorField::zeros(grid),
        "taylor-green" => taylor_green(grid),
        "shear" => shear(grid),
        "mixed" => mixed(grid),
        "random" => random_band_limited(grid, 8.0, 1.0, seed),
        "generic" => generic(grid, seed),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown builtin field {other:?}; expected one of {}",
                NAMES.join(", ")
            )))
        }
    })
}
