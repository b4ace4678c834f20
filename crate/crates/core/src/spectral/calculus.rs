//! Fourier-multiplier calculus: derivatives, Poisson solves, Biot-Savart and Sobolev norms.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Grid, ScalarField, SobolevIndex, Spectrum, VectorField};
use crate::error::{Error, Result};

/// Relative tolerance on the mean for zero-mean preconditions.
pub const MEAN_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

/// `i xi` on one axis with the Nyquist mode zeroed.
fn derivative_symbol(grid: Grid, k: f64) -> Complex64 {
    if k.abs() == grid.nyquist() as f64 {
        Complex64::new(0.0, 0.0)
    } else {
        Complex64::new(0.0, k)
    }
}

pub(crate) fn derivative_spectrum(s: &Spectrum, axis: Axis) -> Spectrum {
    let grid = s.grid();
    match axis {
        Axis::X1 => s.apply(|k1, _| derivative_symbol(grid, k1)),
        Axis::X2 => s.apply(|_, k2| derivative_symbol(grid, k2)),
    }
}

/// `df/dx_axis` via the multiplier `i xi_axis`.
pub fn spectral_derivative(f: &ScalarField, axis: Axis) -> ScalarField {
    derivative_spectrum(&f.spectrum(), axis).to_field()
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let s = f.spectrum();
    VectorField::new(
        derivative_spectrum(&s, Axis::X1).to_field(),
        derivative_spectrum(&s, Axis::X2).to_field(),
    )
    .expect("components share a grid")
}

/// `(-d2 f, d1 f)`.
pub fn perp_gradient(f: &ScalarField) -> VectorField {
    let s = f.spectrum();
    let d1 = derivative_spectrum(&s, Axis::X1).to_field();
    let d2 = derivative_spectrum(&s, Axis::X2).to_field();
    VectorField::new(-&d2, d1).expect("components share a grid")
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    f.spectrum()
        .apply(|k1, k2| Complex64::new(-(k1 * k1 + k2 * k2), 0.0))
        .to_field()
}

pub fn divergence(u: &VectorField) -> ScalarField {
    let d1 = derivative_spectrum(&u.u1().spectrum(), Axis::X1);
    let d2 = derivative_spectrum(&u.u2().spectrum(), Axis::X2);
    let coeffs = d1.coeffs() + d2.coeffs();
    Spectrum::from_coeffs(u.grid(), coeffs)
        .expect("same grid")
        .to_field()
}

pub(crate) fn check_zero_mean(mean: f64, scale: f64) -> Result<()> {
    if mean.abs() > MEAN_TOLERANCE * scale {
        return Err(Error::NonZeroMean { mean, scale });
    }
    Ok(())
}

pub(crate) fn inverse_laplacian_spectrum(s: &Spectrum) -> Spectrum {
    s.apply(|k1, k2| {
        let k2sq = k1 * k1 + k2 * k2;
        if k2sq == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(-1.0 / k2sq, 0.0)
        }
    })
}

/// Zero-mean solution of `Lap f = g`.
///
/// Rejects `g` whose mean exceeds `1e-8` times its max-norm: the periodic
/// Poisson problem is only solvable for zero-mean data.
pub fn solve_poisson_zero_mean(g: &ScalarField) -> Result<ScalarField> {
    let s = g.spectrum();
    check_zero_mean(s.mean(), g.max_norm())?;
    Ok(inverse_laplacian_spectrum(&s).to_field())
}

/// Scalar curl `d1 u2 - d2 u1`.
pub fn vorticity_of(u: &VectorField) -> ScalarField {
    let d1u2 = derivative_spectrum(&u.u2().spectrum(), Axis::X1);
    let d2u1 = derivative_spectrum(&u.u1().spectrum(), Axis::X2);
    let coeffs = d1u2.coeffs() - d2u1.coeffs();
    Spectrum::from_coeffs(u.grid(), coeffs)
        .expect("same grid")
        .to_field()
}

/// Velocity spectra `(u1_hat, u2_hat)` from a vorticity spectrum, `u = perp grad Lap^-1 omega`.
pub(crate) fn biot_savart_spectra(omega: &Spectrum) -> (Spectrum, Spectrum) {
    let psi = inverse_laplacian_spectrum(omega);
    let d1 = derivative_spectrum(&psi, Axis::X1);
    let d2 = derivative_spectrum(&psi, Axis::X2);
    let u1 = Spectrum::from_coeffs(omega.grid(), d2.coeffs().mapv(|c| -c)).expect("same grid");
    (u1, d1)
}

/// Divergence-free, zero-mean velocity with the given vorticity.
pub fn biot_savart(omega: &ScalarField) -> Result<VectorField> {
    let s = omega.spectrum();
    check_zero_mean(s.mean(), omega.max_norm())?;
    let (u1, u2) = biot_savart_spectra(&s);
    VectorField::new(u1.to_field(), u2.to_field())
}

/// Sobolev norm from a spectrum.
pub(crate) fn sobolev_norm_spectrum(s: &Spectrum, index: SobolevIndex) -> f64 {
    let p = index.value();
    let sum = if p == 0.0 {
        s.weighted_energy(|_| 1.0)
    } else {
        s.weighted_energy(|k2sq| (1.0 + k2sq).powf(p))
    };
    2.0 * PI * sum.sqrt()
}

pub fn sobolev_norm_scalar(f: &ScalarField, index: SobolevIndex) -> f64 {
    sobolev_norm_spectrum(&f.spectrum(), index)
}

/// `||u||_{H^s}` of a vector field: root of the summed squared component norms.
pub fn sobolev_norm(u: &VectorField, index: SobolevIndex) -> f64 {
    sobolev_norm_scalar(u.u1(), index).hypot(sobolev_norm_scalar(u.u2(), index))
}

/// Relative spectral divergence `max|div u| / max|u|` (zero for the zero field).
pub fn relative_divergence(u: &VectorField) -> f64 {
    let scale = u.max_norm();
    if scale == 0.0 {
        return 0.0;
    }
    divergence(u).max_norm() / scale
}
