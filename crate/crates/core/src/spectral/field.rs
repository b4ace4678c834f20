use std::ops::{Add, Mul, Neg, Sub};

use ndarray::{Array2, Zip};
use num_complex::Complex64;

use super::{plan, Grid};
use crate::error::{Error, Result};

/// Real periodic scalar field sampled on the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Array2<f64>,
}

/// Half-spectrum Fourier coefficients of a real field.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    coeffs: Array2<Complex64>,
}

/// Two scalar components on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    u1: ScalarField,
    u2: ScalarField,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: Array2::zeros((grid.n(), grid.n())),
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            values: Array2::from_elem((grid.n(), grid.n()), c),
        }
    }

    /// Sample `f(x1, x2)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn((grid.n(), grid.n()), |(i, j)| {
            let [x1, x2] = grid.node(i, j);
            f(x1, x2)
        });
        Self { grid, values }
    }

    pub fn from_values(grid: Grid, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.n(), grid.n()) {
            return Err(Error::InvalidArgument(format!(
                "value array has shape {:?}, grid needs {}x{}",
                values.dim(),
                grid.n(),
                grid.n()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f64> {
        self.values
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.mean().unwrap_or(0.0)
    }

    /// `L^2` norm by the trapezoidal rule, exact for trigonometric polynomials.
    pub fn l2_norm_quadrature(&self) -> f64 {
        let h = self.grid.spacing();
        (self.values.iter().map(|v| v * v).sum::<f64>() * h * h).sqrt()
    }

    pub fn spectrum(&self) -> Spectrum {
        let coeffs = plan(self.grid.n()).forward(&self.values);
        Spectrum {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.mapv(f),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        check_grid(self.grid, other.grid)?;
        let mut values = self.values.clone();
        Zip::from(&mut values)
            .and(&other.values)
            .for_each(|a, &b| *a = f(*a, b));
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    /// Pointwise product.
    pub fn product(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }
}

impl Spectrum {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            coeffs: Array2::zeros(grid.spectral_dim()),
        }
    }

    pub fn from_coeffs(grid: Grid, coeffs: Array2<Complex64>) -> Result<Self> {
        if coeffs.dim() != grid.spectral_dim() {
            return Err(Error::InvalidArgument(format!(
                "coefficient array has shape {:?}, grid needs {:?}",
                coeffs.dim(),
                grid.spectral_dim()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &Array2<Complex64> {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Array2<Complex64> {
        self.coeffs
    }

    pub fn to_field(&self) -> ScalarField {
        let values = plan(self.grid.n()).inverse(&self.coeffs);
        ScalarField {
            grid: self.grid,
            values,
        }
    }

    /// Coefficient at signed wavenumber `(xi1, xi2)`, using Hermitian symmetry when needed.
    pub fn coefficient(&self, xi1: i64, xi2: i64) -> Complex64 {
        let n = self.grid.n() as i64;
        let idx = |k: i64| k.rem_euclid(n) as usize;
        if xi2 >= 0 && xi2 <= n / 2 {
            self.coeffs[[idx(xi1), xi2 as usize]]
        } else {
            self.coeffs[[idx(-xi1), idx(-xi2)]].conj()
        }
    }

    /// Apply a real-wavenumber multiplier `m(xi1, xi2)` to every coefficient.
    pub fn apply(&self, m: impl Fn(f64, f64) -> Complex64) -> Self {
        let (k1, k2) = self.grid.wavenumber_tables();
        let coeffs = Array2::from_shape_fn(self.grid.spectral_dim(), |(a, b)| {
            self.coeffs[[a, b]] * m(k1[a], k2[b])
        });
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// Full-spectrum sum `sum_xi w(xi) |f_hat(xi)|^2` with `w` depending on `|xi|^2`.
    pub fn weighted_energy(&self, w: impl Fn(f64) -> f64) -> f64 {
        let (k1, k2) = self.grid.wavenumber_tables();
        let mut sum = 0.0;
        for ((a, b), c) in self.coeffs.indexed_iter() {
            let k2sq = k1[a] * k1[a] + k2[b] * k2[b];
            sum += self.grid.column_multiplicity(b) * w(k2sq) * c.norm_sqr();
        }
        sum
    }

    /// Zero-mode coefficient, i.e. the spatial mean.
    pub fn mean(&self) -> f64 {
        self.coeffs[[0, 0]].re
    }
}

impl VectorField {
    pub fn new(u1: ScalarField, u2: ScalarField) -> Result<Self> {
        check_grid(u1.grid, u2.grid)?;
        Ok(Self { u1, u2 })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            u1: ScalarField::zeros(grid),
            u2: ScalarField::zeros(grid),
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let u1 = ScalarField::from_fn(grid, |x1, x2| f(x1, x2)[0]);
        let u2 = ScalarField::from_fn(grid, |x1, x2| f(x1, x2)[1]);
        Self { u1, u2 }
    }

    pub fn grid(&self) -> Grid {
        self.u1.grid
    }

    pub fn u1(&self) -> &ScalarField {
        &self.u1
    }

    pub fn u2(&self) -> &ScalarField {
        &self.u2
    }

    pub fn components(&self) -> [&ScalarField; 2] {
        [&self.u1, &self.u2]
    }

    pub fn into_components(self) -> (ScalarField, ScalarField) {
        (self.u1, self.u2)
    }

    /// Largest pointwise Euclidean magnitude.
    pub fn max_norm(&self) -> f64 {
        let mut m = 0.0_f64;
        Zip::from(self.u1.values())
            .and(self.u2.values())
            .for_each(|a, b| m = m.max(a.hypot(*b)));
        m
    }

    pub fn value_at_node(&self, i: usize, j: usize) -> [f64; 2] {
        [self.u1.values[[i, j]], self.u2.values[[i, j]]]
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            u1: self.u1.scaled(c),
            u2: self.u2.scaled(c),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.u1.is_zero() && self.u2.is_zero()
    }

    pub fn mean(&self) -> [f64; 2] {
        [self.u1.mean(), self.u2.mean()]
    }

    /// `L^2` norm by quadrature.
    pub fn l2_norm_quadrature(&self) -> f64 {
        self.u1
            .l2_norm_quadrature()
            .hypot(self.u2.l2_norm_quadrature())
    }
}

pub(crate) fn check_grid(a: Grid, b: Grid) -> Result<()> {
    if a != b {
        return Err(Error::GridMismatch(a.n(), b.n()));
    }
    Ok(())
}

macro_rules! field_ops {
    ($t:ty) => {
        impl Add for &$t {
            type Output = $t;
            fn add(self, rhs: Self) -> $t {
                self.try_add(rhs).expect("grid mismatch in field addition")
            }
        }
        impl Sub for &$t {
            type Output = $t;
            fn sub(self, rhs: Self) -> $t {
                self.try_sub(rhs)
                    .expect("grid mismatch in field subtraction")
            }
        }
        impl Mul<f64> for &$t {
            type Output = $t;
            fn mul(self, c: f64) -> $t {
                self.scaled(c)
            }
        }
        impl Neg for &$t {
            type Output = $t;
            fn neg(self) -> $t {
                self.scaled(-1.0)
            }
        }
    };
}

impl ScalarField {
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }
}

impl VectorField {
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            u1: self.u1.try_add(&other.u1)?,
            u2: self.u2.try_add(&other.u2)?,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            u1: self.u1.try_sub(&other.u1)?,
            u2: self.u2.try_sub(&other.u2)?,
        })
    }
}

field_ops!(ScalarField);
field_ops!(VectorField);

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trig_field(grid: Grid, coeffs: &[(i64, i64, f64, f64)]) -> ScalarField {
        ScalarField::from_fn(grid, |x1, x2| {
            coeffs
                .iter()
                .map(|&(k1, k2, a, b)| {
                    let ph = k1 as f64 * x1 + k2 as f64 * x2;
                    a * ph.cos() + b * ph.sin()
                })
                .sum()
        })
    }

    #[test]
    fn spectrum_of_sine_has_two_coefficients() {
        let g = Grid::new(16).unwrap();
        let f = ScalarField::from_fn(g, |x1, _| x1.sin());
        let s = f.spectrum();
        // sin x = (e^{ix} - e^{-ix}) / 2i
        let c = s.coefficient(1, 0);
        assert!((c - Complex64::new(0.0, -0.5)).norm() < 1e-14);
        let c = s.coefficient(-1, 0);
        assert!((c - Complex64::new(0.0, 0.5)).norm() < 1e-14);
        assert!(s.coefficient(2, 0).norm() < 1e-14);
    }

    #[test]
    fn hermitian_symmetry_of_real_fields() {
        let g = Grid::new(16).unwrap();
        let f = trig_field(g, &[(1, 2, 0.3, -1.2), (-3, 1, 0.7, 0.1), (0, 5, 1.0, 2.0)]);
        let s = f.spectrum();
        let scale = s.coeffs().iter().fold(0.0_f64, |m, c| m.max(c.norm()));
        for xi1 in -7..=7 {
            for xi2 in -7..=7 {
                let d = s.coefficient(xi1, xi2) - s.coefficient(-xi1, -xi2).conj();
                assert!(d.norm() <= 1e-12 * scale);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn round_trip_is_identity(seed in 0u64..10_000, half_n in 4usize..20) {
            let g = Grid::new(2 * half_n).unwrap();
            let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            };
            let values = Array2::from_shape_fn((g.n(), g.n()), |_| next());
            let f = ScalarField::from_values(g, values).unwrap();
            let back = f.spectrum().to_field();
            let err = (&back - &f).max_norm();
            prop_assert!(err <= 1e-12 * f.max_norm());
        }
    }
}
