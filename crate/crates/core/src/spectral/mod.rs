//! Periodic fields on the torus `[0, 2 pi)^2` and their spectral calculus.
//!
//! Every field lives on a square [`Grid`] of `N x N` nodes `x = 2 pi (i, j) / N`.
//! Spectral coefficients use integer wavenumbers and the normalization
//! `f_hat(xi) = (2 pi)^-2 \int f e^{-i xi.x} dx`, so that the Sobolev norm
//! `||f||_{H^s}^2 = (2 pi)^2 sum_xi (1 + |xi|^2)^s |f_hat(xi)|^2` reduces to
//! the `L^2` norm at `s = 0`.

pub(crate) mod calculus;
mod fft;
mod field;
pub(crate) mod interp;
pub mod io;
pub mod random;

pub use calculus::{
    biot_savart, divergence, gradient, laplacian, perp_gradient, relative_divergence, sobolev_norm,
    sobolev_norm_scalar, solve_poisson_zero_mean, spectral_derivative, vorticity_of, Axis,
    MEAN_TOLERANCE,
};
pub use field::{ScalarField, Spectrum, VectorField};
pub use interp::{evaluate_offgrid, resample, resample_vector, Interpolant, DIRECT_SUM_MAX_POINTS};

use crate::error::{Error, Result};
use std::f64::consts::PI;

pub(crate) use fft::plan;

/// Square periodic grid on `[0, 2 pi)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct Grid {
    n: usize,
}

impl Grid {
    /// `n` must be even and at least 8.
    pub fn new(n: usize) -> Result<Self> {
        if n < 8 || n % 2 != 0 {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    /// Physical node `x_(i,j) = 2 pi (i, j) / N`.
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        let h = self.spacing();
        [h * i as f64, h * j as f64]
    }

    /// Signed wavenumber of FFT index `a` along a full axis, in `(-N/2, N/2]`.
    pub fn wavenumber(&self, a: usize) -> i64 {
        let n = self.n as i64;
        let a = a as i64;
        if a <= n / 2 {
            a
        } else {
            a - n
        }
    }

    /// Shape of the half spectrum `N x (N/2 + 1)`.
    pub fn spectral_dim(&self) -> (usize, usize) {
        (self.n, self.n / 2 + 1)
    }

    /// Number of times column `b` of the half spectrum is counted in full-spectrum sums.
    pub(crate) fn column_multiplicity(&self, b: usize) -> f64 {
        if b == 0 || b == self.n / 2 {
            1.0
        } else {
            2.0
        }
    }

    /// Wavenumbers along axis 0 (full) and axis 1 (half) as floats.
    pub(crate) fn wavenumber_tables(&self) -> (Vec<f64>, Vec<f64>) {
        let k1 = (0..self.n).map(|a| self.wavenumber(a) as f64).collect();
        let k2 = (0..=self.n / 2).map(|b| b as f64).collect();
        (k1, k2)
    }

    /// Nyquist index `N/2`.
    pub(crate) fn nyquist(&self) -> usize {
        self.n / 2
    }
}

/// Sobolev regularity index `s >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SobolevIndex(f64);

impl SobolevIndex {
    pub fn new(s: f64) -> Result<Self> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Sobolev index must be >= 0, got {s}"
            )));
        }
        Ok(Self(s))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// The index one lower, clamped at zero (vorticity lives one derivative down).
    pub fn minus_one(&self) -> Self {
        Self((self.0 - 1.0).max(0.0))
    }

    /// Whether the index is admissible as a solution-space index (`k > 2`).
    pub fn is_solution_index(&self) -> bool {
        self.0 > 2.0
    }
}

impl Default for SobolevIndex {
    fn default() -> Self {
        Self(3.0)
    }
}

/// Wrap a coordinate difference into `[-pi, pi)`.
pub fn wrap_difference(d: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let r = (d + PI).rem_euclid(two_pi) - PI;
    // rem_euclid may return exactly two_pi for tiny negative inputs
    if r >= PI {
        r - two_pi
    } else {
        r
    }
}

/// Distance on the torus: minimum over period shifts of the Euclidean distance.
pub fn torus_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d1 = wrap_difference(a[0] - b[0]);
    let d2 = wrap_difference(a[1] - b[1]);
    d1.hypot(d2)
}
