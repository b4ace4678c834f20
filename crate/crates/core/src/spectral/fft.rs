//! Two-dimensional real FFTs on square periodic grids.
//!
//! Physical arrays are `N x N` with axis 0 along `x1` and axis 1 along `x2`.
//! Spectral arrays keep the non-redundant half `N x (N/2 + 1)`: row `a` holds
//! `xi1 = a` for `a <= N/2` and `a - N` above, column `b` holds `xi2 = b`.
//! Coefficients follow `f_hat(xi) = (2 pi)^-2 \int f e^{-i xi.x} dx`, i.e. the
//! forward transform is divided by `N^2`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use ndarray::Array2;
use num_complex::Complex64;
use once_cell::sync::Lazy;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

pub(crate) struct Plan2 {
    n: usize,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

static PLANS: Lazy<Mutex<HashMap<usize, Arc<Plan2>>>> = Lazy::new(|| Mutex::new(HashMap::new()));

pub(crate) fn plan(n: usize) -> Arc<Plan2> {
    let mut plans = PLANS.lock().expect("fft plan cache poisoned");
    plans
        .entry(n)
        .or_insert_with(|| {
            let mut real = RealFftPlanner::<f64>::new();
            let mut cplx = FftPlanner::<f64>::new();
            Arc::new(Plan2 {
                n,
                r2c: real.plan_fft_forward(n),
                c2r: real.plan_fft_inverse(n),
                col_fwd: cplx.plan_fft_forward(n),
                col_inv: cplx.plan_fft_inverse(n),
            })
        })
        .clone()
}

impl Plan2 {
    pub(crate) fn forward(&self, values: &Array2<f64>) -> Array2<Complex64> {
        let n = self.n;
        let h = n / 2 + 1;
        debug_assert_eq!(values.dim(), (n, n));
        // Column-major staging buffer: h columns of length n, contiguous.
        let mut cols = vec![Complex64::new(0.0, 0.0); h * n];
        let mut row_in = vec![0.0; n];
        let mut row_out = vec![Complex64::new(0.0, 0.0); h];
        let mut scratch = self.r2c.make_scratch_vec();
        for i in 0..n {
            for (dst, src) in row_in.iter_mut().zip(values.row(i).iter()) {
                *dst = *src;
            }
            self.r2c
                .process_with_scratch(&mut row_in, &mut row_out, &mut scratch)
                .expect("r2c length mismatch");
            for b in 0..h {
                cols[b * n + i] = row_out[b];
            }
        }
        self.col_fwd.process(&mut cols);
        let scale = 1.0 / (n * n) as f64;
        Array2::from_shape_fn((n, h), |(a, b)| cols[b * n + a] * scale)
    }

    pub(crate) fn inverse(&self, coeffs: &Array2<Complex64>) -> Array2<f64> {
        let n = self.n;
        let h = n / 2 + 1;
        debug_assert_eq!(coeffs.dim(), (n, h));
        let mut cols = vec![Complex64::new(0.0, 0.0); h * n];
        for a in 0..n {
            for b in 0..h {
                cols[b * n + a] = coeffs[[a, b]];
            }
        }
        self.col_inv.process(&mut cols);
        let mut out = Array2::<f64>::zeros((n, n));
        let mut row_in = vec![Complex64::new(0.0, 0.0); h];
        let mut row_out = vec![0.0; n];
        let mut scratch = self.c2r.make_scratch_vec();
        for i in 0..n {
            for b in 0..h {
                row_in[b] = cols[b * n + i];
            }
            // Hermitian symmetry makes these real; drop round-off.
            row_in[0].im = 0.0;
            row_in[h - 1].im = 0.0;
            self.c2r
                .process_with_scratch(&mut row_in, &mut row_out, &mut scratch)
                .expect("c2r length mismatch");
            for (dst, src) in out.row_mut(i).iter_mut().zip(row_out.iter()) {
                *dst = *src;
            }
        }
        out
    }
}
