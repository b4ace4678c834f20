//! Spectral resampling and off-grid evaluation of periodic fields.

use ndarray::Array2;
use num_complex::Complex64;

use super::{Grid, ScalarField, Spectrum, VectorField};

/// Point counts up to this use exact trigonometric summation.
pub const DIRECT_SUM_MAX_POINTS: usize = 64;

/// Oversampling factor used by [`Interpolant::new`] defaults.
pub const DEFAULT_OVERSAMPLE: usize = 2;

const STENCIL: usize = 8;

/// Change resolution by Fourier interpolation (refining) or truncation (coarsening).
///
/// Nyquist modes of the coarser grid are split evenly between `+-N/2` on
/// refinement and re-summed on coarsening, so refine-then-coarsen is exact.
pub fn resample(f: &ScalarField, target: Grid) -> ScalarField {
    if f.grid() == target {
        return f.clone();
    }
    resample_spectrum(&f.spectrum(), target).to_field()
}

pub fn resample_vector(u: &VectorField, target: Grid) -> VectorField {
    VectorField::new(resample(u.u1(), target), resample(u.u2(), target)).expect("same target grid")
}

pub(crate) fn resample_spectrum(s: &Spectrum, target: Grid) -> Spectrum {
    let src = s.grid();
    if src == target {
        return s.clone();
    }
    let (ns, nt) = (src.n() as i64, target.n() as i64);
    debug_assert!(ns >= 8);
    let mut out = Array2::<Complex64>::zeros(target.spectral_dim());
    let tidx = |k: i64| k.rem_euclid(nt) as usize;
    if nt > ns {
        let half = ns / 2;
        for ((a, b), &c) in s.coeffs().indexed_iter() {
            let k1 = src.wavenumber(a);
            let k2 = b as i64;
            let mut c = c;
            if k2 == half {
                c *= 0.5;
            }
            if k1 == half {
                out[[tidx(half), b]] += c * 0.5;
                out[[tidx(-half), b]] += c * 0.5;
            } else {
                out[[tidx(k1), b]] += c;
            }
        }
    } else {
        // Target Nyquist modes collect both +-N/2 source modes (they alias on the coarse grid).
        let half = nt / 2;
        let sources = |t: i64| {
            if t == half {
                vec![half, -half]
            } else {
                vec![t]
            }
        };
        for ((a, b), slot) in out.indexed_iter_mut() {
            let t1 = target.wavenumber(a);
            let t2 = b as i64;
            for &s1 in &sources(t1) {
                for &s2 in &sources(t2) {
                    *slot += s.coefficient(s1, s2);
                }
            }
        }
    }
    Spectrum::from_coeffs(target, out).expect("target shape")
}

/// Exact trigonometric-interpolant evaluation at arbitrary points.
pub(crate) fn direct_sum(s: &Spectrum, points: &[[f64; 2]]) -> Vec<f64> {
    let grid = s.grid();
    let n = grid.n();
    let half = n / 2;
    let coeffs = s.coeffs();
    points
        .iter()
        .map(|&[x1, x2]| {
            let e1: Vec<Complex64> = (0..n)
                .map(|a| {
                    let k = grid.wavenumber(a) as f64;
                    if a == half {
                        Complex64::new((k * x1).cos(), 0.0)
                    } else {
                        Complex64::from_polar(1.0, k * x1)
                    }
                })
                .collect();
            let mut total = 0.0;
            for b in 0..=half {
                let e2 = if b == half {
                    Complex64::new((b as f64 * x2).cos(), 0.0)
                } else {
                    Complex64::from_polar(1.0, b as f64 * x2)
                };
                let mut col = Complex64::new(0.0, 0.0);
                for a in 0..n {
                    col += coeffs[[a, b]] * e1[a];
                }
                total += grid.column_multiplicity(b) * (col * e2).re;
            }
            total
        })
        .collect()
}

/// Evaluate `f` at arbitrary (unwrapped) positions.
///
/// Up to [`DIRECT_SUM_MAX_POINTS`] points use the exact trigonometric interpolant;
/// larger batches use an 8-point periodic Lagrange stencil on a 2x Fourier-refined grid.
pub fn evaluate_offgrid(f: &ScalarField, points: &[[f64; 2]]) -> Vec<f64> {
    if points.len() <= DIRECT_SUM_MAX_POINTS {
        direct_sum(&f.spectrum(), points)
    } else {
        Interpolant::new(f, DEFAULT_OVERSAMPLE).eval_many(points)
    }
}

/// Local periodic Lagrange interpolation on a Fourier-refined copy of a field.
#[derive(Debug, Clone)]
pub struct Interpolant {
    m: usize,
    inv_h: f64,
    den: [f64; STENCIL],
    values: Array2<f64>,
}

fn lagrange_denominators() -> [f64; STENCIL] {
    let mut d = [1.0; STENCIL];
    for (k, dk) in d.iter_mut().enumerate() {
        for m in 0..STENCIL {
            if m != k {
                *dk *= k as f64 - m as f64;
            }
        }
    }
    d
}

impl Interpolant {
    pub fn new(f: &ScalarField, oversample: usize) -> Self {
        Self::from_spectrum(&f.spectrum(), oversample)
    }

    pub(crate) fn from_spectrum(s: &Spectrum, oversample: usize) -> Self {
        let fine = Grid::new(s.grid().n() * oversample.max(1)).expect("refined grid is valid");
        let values = resample_spectrum(s, fine).to_field().into_values();
        Self {
            m: fine.n(),
            inv_h: 1.0 / fine.spacing(),
            den: lagrange_denominators(),
            values,
        }
    }

    /// Stencil start index and weights for one coordinate.
    #[inline]
    fn weights(&self, x: f64) -> (i64, [f64; STENCIL]) {
        let s = x * self.inv_h;
        let base = s.floor();
        let t = s - base + (STENCIL / 2 - 1) as f64;
        let start = base as i64 - (STENCIL / 2 - 1) as i64;
        let den = &self.den;
        let mut w = [0.0; STENCIL];
        // w_k = prod_{m != k} (t - m) / prod_{m != k} (k - m)
        let mut prefix = [1.0; STENCIL];
        let mut suffix = [1.0; STENCIL];
        for k in 1..STENCIL {
            prefix[k] = prefix[k - 1] * (t - (k - 1) as f64);
        }
        for k in (0..STENCIL - 1).rev() {
            suffix[k] = suffix[k + 1] * (t - (k + 1) as f64);
        }
        for k in 0..STENCIL {
            w[k] = prefix[k] * suffix[k] / den[k];
        }
        (start, w)
    }

    pub fn eval(&self, p: [f64; 2]) -> f64 {
        let (s1, w1) = self.weights(p[0]);
        let (s2, w2) = self.weights(p[1]);
        let m = self.m as i64;
        let mut cols = [0usize; STENCIL];
        for (l, c) in cols.iter_mut().enumerate() {
            *c = (s2 + l as i64).rem_euclid(m) as usize;
        }
        let mut total = 0.0;
        for (k, wk) in w1.iter().enumerate() {
            let row = (s1 + k as i64).rem_euclid(m) as usize;
            let r = self.values.row(row);
            let mut acc = 0.0;
            for (l, wl) in w2.iter().enumerate() {
                acc += wl * r[cols[l]];
            }
            total += wk * acc;
        }
        total
    }

    pub fn eval_many(&self, points: &[[f64; 2]]) -> Vec<f64> {
        points.iter().map(|&p| self.eval(p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn band_limited(grid: Grid) -> ScalarField {
        ScalarField::from_fn(grid, |x1, x2| {
            (x1 + 2.0 * x2).sin() + 0.5 * (3.0 * x1 - x2).cos() + 0.2 * (4.0 * x2).sin() * x1.cos()
        })
    }

    fn analytic(x1: f64, x2: f64) -> f64 {
        (x1 + 2.0 * x2).sin() + 0.5 * (3.0 * x1 - x2).cos() + 0.2 * (4.0 * x2).sin() * x1.cos()
    }

    #[test]
    fn refine_sine_is_exact() {
        let f = ScalarField::from_fn(Grid::new(32).unwrap(), |x1, _| x1.sin());
        let g = resample(&f, Grid::new(64).unwrap());
        let exact = ScalarField::from_fn(Grid::new(64).unwrap(), |x1, _| x1.sin());
        assert!((&g - &exact).max_norm() <= 1e-12);
    }

    #[test]
    fn constants_survive_resampling() {
        let f = ScalarField::constant(Grid::new(16).unwrap(), 2.5);
        for n in [8, 16, 48, 64] {
            let g = resample(&f, Grid::new(n).unwrap());
            assert!(g.values().iter().all(|v| (v - 2.5).abs() < 1e-13));
        }
    }

    #[test]
    fn refine_then_coarsen_is_identity_including_nyquist() {
        let g16 = Grid::new(16).unwrap();
        let f = ScalarField::from_fn(g16, |x1, x2| {
            // includes the Nyquist mode cos(8 x) on both axes
            (8.0 * x1).cos() + (8.0 * x2).cos() * x1.sin() + (3.0 * x1 - 5.0 * x2).sin()
        });
        for n in [32, 48] {
            let up = resample(&f, Grid::new(n).unwrap());
            let back = resample(&up, g16);
            assert!((&back - &f).max_norm() <= 1e-12, "n = {n}");
        }
    }

    #[test]
    fn coarsening_truncates_high_modes() {
        let g = Grid::new(32).unwrap();
        let f = ScalarField::from_fn(g, |x1, x2| x1.sin() + (10.0 * x2).cos());
        let c = resample(&f, Grid::new(16).unwrap());
        let exact = ScalarField::from_fn(Grid::new(16).unwrap(), |x1, _| x1.sin());
        assert!((&c - &exact).max_norm() < 1e-12);
    }

    #[test]
    fn direct_sum_examples() {
        let g = Grid::new(32).unwrap();
        let f = ScalarField::from_fn(g, |x1, _| x1.sin());
        let v = evaluate_offgrid(&f, &[[PI / 2.0, 1.0], [PI / 2.0 + 2.0 * PI, 1.0]]);
        assert!((v[0] - 1.0).abs() < 1e-8);
        assert!((v[0] - v[1]).abs() < 1e-12);
    }

    #[test]
    fn grid_nodes_return_stored_values() {
        let g = Grid::new(16).unwrap();
        let f = ScalarField::from_fn(g, |x1, x2| (x1 * x2).sin());
        let pts: Vec<[f64; 2]> = (0..16).map(|i| g.node(i, (3 * i) % 16)).collect();
        for (k, v) in evaluate_offgrid(&f, &pts).iter().enumerate() {
            assert!((v - f.values()[[k, (3 * k) % 16]]).abs() < 1e-10);
        }
    }

    #[test]
    fn interpolant_accuracy_on_band_limited_field() {
        let g = Grid::new(128).unwrap();
        let f = band_limited(g);
        let pts: Vec<[f64; 2]> = (0..500)
            .map(|i| {
                let t = i as f64;
                [
                    (t * 0.7371).rem_euclid(7.0) - 0.3,
                    (t * 1.3119).rem_euclid(9.0) - 1.0,
                ]
            })
            .collect();
        let v = evaluate_offgrid(&f, &pts);
        let err = pts
            .iter()
            .zip(&v)
            .map(|(p, v)| (analytic(p[0], p[1]) - v).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-8, "err = {err:e}");
    }

    #[test]
    fn interpolant_matches_direct_sum() {
        let g = Grid::new(32).unwrap();
        let f = band_limited(g);
        let pts: Vec<[f64; 2]> = (0..40)
            .map(|i| [0.17 * i as f64, 0.31 * i as f64 - 2.0])
            .collect();
        let direct = evaluate_offgrid(&f, &pts);
        let interp = Interpolant::new(&f, 4).eval_many(&pts);
        for (a, b) in direct.iter().zip(&interp) {
            assert!((a - b).abs() < 1e-7);
        }
    }
}
