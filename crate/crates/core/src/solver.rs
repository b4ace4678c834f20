//! Pseudo-spectral integration of 2D Euler in vorticity form.
//!
//! The state is the half-spectrum of `omega`; each RK4 stage recovers
//! `u = perp grad Lap^-1 omega`, forms `u . grad omega` on the grid and
//! returns its negated, optionally 2/3-truncated, transform. Passive tracers
//! and Lagrangian particles can be advanced inside the same RK4 step.

use ndarray::{Array2, Zip};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::calculus::{
    biot_savart_spectra, check_zero_mean, derivative_spectrum, inverse_laplacian_spectrum,
    sobolev_norm_spectrum,
};
use crate::spectral::interp::{direct_sum, Interpolant, DEFAULT_OVERSAMPLE};
use crate::spectral::{
    relative_divergence, vorticity_of, Axis, Grid, ScalarField, SobolevIndex, Spectrum,
    VectorField, DIRECT_SUM_MAX_POINTS,
};

/// Largest accepted `max|div u| / max|u|` for initial velocities.
pub const DIVERGENCE_TOLERANCE: f64 = 1e-10;

/// Inflation of the initial `max|u|` used as the run-wide velocity estimate.
pub const VELOCITY_ESTIMATE_FACTOR: f64 = 1.25;

/// Default time-step policy `0.5 h / u_est`, `u_est = 1.25 max|u0|`, capped at `cap`.
pub fn policy_dt(grid: Grid, umax: f64, cap: f64) -> f64 {
    let est = VELOCITY_ESTIMATE_FACTOR * umax;
    if est > 0.0 {
        (0.5 * grid.spacing() / est).min(cap)
    } else {
        cap
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub grid: Grid,
    pub dt: f64,
    pub t_end: f64,
    /// 2/3-rule truncation of the nonlinear terms (and of the initial vorticity).
    pub dealias: bool,
    pub k: SobolevIndex,
    /// Largest admissible `dt max|u| / h`.
    pub cfl_limit: f64,
}

impl SolverConfig {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            dt: 1e-3,
            t_end: 1.0,
            dealias: true,
            k: SobolevIndex::default(),
            cfl_limit: 0.5,
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn with_dealias(mut self, dealias: bool) -> Self {
        self.dealias = dealias;
        self
    }

    pub fn with_k(mut self, k: SobolevIndex) -> Self {
        self.k = k;
        self
    }

    pub fn with_cfl_limit(mut self, limit: f64) -> Self {
        self.cfl_limit = limit;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.dt)
            || !positive(self.cfl_limit)
            || !(self.t_end.is_finite() && self.t_end >= 0.0)
        {
            return Err(Error::InvalidArgument(format!(
                "dt = {}, t_end = {}, cfl_limit = {} must be positive",
                self.dt, self.t_end, self.cfl_limit
            )));
        }
        Ok(())
    }

    /// Number of equal steps covering `[0, t_end]` with step at most `dt`
    /// (an integer ratio within round-off is honoured exactly).
    pub fn steps(&self) -> usize {
        let r = self.t_end / self.dt;
        let nearest = r.round();
        if (r - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest as usize
        } else {
            r.ceil() as usize
        }
    }

    pub fn effective_dt(&self) -> f64 {
        match self.steps() {
            0 => 0.0,
            s => self.t_end / s as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSnapshot {
    pub t: f64,
    pub omega: ScalarField,
    pub u: VectorField,
    pub energy: f64,
    pub enstrophy: f64,
}

/// One row of the solver diagnostics stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub t: f64,
    pub energy: f64,
    pub enstrophy: f64,
    /// `||u||_{H^k}` for the configured `k`.
    pub h3norm: f64,
    pub courant: f64,
}

impl Diagnostics {
    pub const CSV_HEADER: &'static str = "t,energy,enstrophy,h3norm,courant";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.t, self.energy, self.enstrophy, self.h3norm, self.courant
        )
    }
}

fn energy_of(u1: &Spectrum, u2: &Spectrum) -> f64 {
    let l2 = SobolevIndex::new(0.0).expect("0 is valid");
    sobolev_norm_spectrum(u1, l2).powi(2) + sobolev_norm_spectrum(u2, l2).powi(2)
}

/// Integrator state at one time level.
#[derive(Debug, Clone)]
pub struct Frame {
    pub t: f64,
    pub step: usize,
    /// Courant number measured at the start of the step that produced this frame.
    pub courant: f64,
    omega: Spectrum,
    particles: Vec<[f64; 2]>,
    tracers: Vec<Spectrum>,
}

impl Frame {
    pub fn vorticity_spectrum(&self) -> &Spectrum {
        &self.omega
    }

    pub fn vorticity(&self) -> ScalarField {
        self.omega.to_field()
    }

    pub fn velocity_spectra(&self) -> (Spectrum, Spectrum) {
        biot_savart_spectra(&self.omega)
    }

    pub fn velocity(&self) -> VectorField {
        let (u1, u2) = self.velocity_spectra();
        VectorField::new(u1.to_field(), u2.to_field()).expect("same grid")
    }

    /// Unwrapped particle positions.
    pub fn particles(&self) -> &[[f64; 2]] {
        &self.particles
    }

    pub fn tracer(&self, i: usize) -> ScalarField {
        self.tracers[i].to_field()
    }

    pub fn tracer_count(&self) -> usize {
        self.tracers.len()
    }

    pub fn energy(&self) -> f64 {
        let (u1, u2) = self.velocity_spectra();
        energy_of(&u1, &u2)
    }

    pub fn enstrophy(&self) -> f64 {
        sobolev_norm_spectrum(&self.omega, SobolevIndex::new(0.0).expect("0 is valid")).powi(2)
    }

    pub fn diagnostics(&self, k: SobolevIndex) -> Diagnostics {
        let (u1, u2) = self.velocity_spectra();
        Diagnostics {
            t: self.t,
            energy: energy_of(&u1, &u2),
            enstrophy: self.enstrophy(),
            h3norm: sobolev_norm_spectrum(&u1, k).hypot(sobolev_norm_spectrum(&u2, k)),
            courant: self.courant,
        }
    }

    pub fn snapshot(&self) -> SolutionSnapshot {
        let (u1, u2) = self.velocity_spectra();
        SolutionSnapshot {
            t: self.t,
            omega: self.vorticity(),
            u: VectorField::new(u1.to_field(), u2.to_field()).expect("same grid"),
            energy: energy_of(&u1, &u2),
            enstrophy: self.enstrophy(),
        }
    }
}

/// Time derivative of the joint state.
struct Rate {
    omega: Array2<Complex64>,
    tracers: Vec<Array2<Complex64>>,
    particles: Vec<[f64; 2]>,
}

struct Rhs {
    grid: Grid,
    mask: Option<Array2<f64>>,
}

impl Rhs {
    fn new(config: &SolverConfig) -> Self {
        let grid = config.grid;
        let mask = config.dealias.then(|| dealias_mask(grid));
        Self { grid, mask }
    }

    fn truncate(&self, coeffs: &mut Array2<Complex64>) {
        if let Some(m) = &self.mask {
            Zip::from(coeffs).and(m).for_each(|c, &m| *c *= m);
        }
    }

    /// `-P(u . grad theta)` for a scalar spectrum, given nodal velocity.
    fn advect(&self, theta: &Spectrum, u1: &Array2<f64>, u2: &Array2<f64>) -> Array2<Complex64> {
        let d1 = derivative_spectrum(theta, Axis::X1)
            .to_field()
            .into_values();
        let d2 = derivative_spectrum(theta, Axis::X2)
            .to_field()
            .into_values();
        let mut prod = Array2::<f64>::zeros(d1.dim());
        Zip::from(&mut prod)
            .and(u1)
            .and(&d1)
            .and(u2)
            .and(&d2)
            .for_each(|p, &a, &b, &c, &d| {
                *p = -(a * b + c * d);
            });
        let mut out = ScalarField::from_values(self.grid, prod)
            .expect("grid shape")
            .spectrum()
            .into_coeffs();
        self.truncate(&mut out);
        out
    }

    /// Evaluates the rate and returns it with `max|u|` over the nodes.
    fn eval(&self, omega: &Spectrum, tracers: &[Spectrum], particles: &[[f64; 2]]) -> (Rate, f64) {
        let (s1, s2) = biot_savart_spectra(omega);
        let u1 = s1.to_field().into_values();
        let u2 = s2.to_field().into_values();
        let umax = Zip::from(&u1)
            .and(&u2)
            .fold(0.0f64, |m, &a, &b| m.max(a.hypot(b)));
        let omega_rate = self.advect(omega, &u1, &u2);
        let tracer_rates = tracers.iter().map(|t| self.advect(t, &u1, &u2)).collect();
        let particle_rates = particle_velocity(&s1, &s2, particles);
        (
            Rate {
                omega: omega_rate,
                tracers: tracer_rates,
                particles: particle_rates,
            },
            umax,
        )
    }
}

/// Velocity at arbitrary points from velocity spectra.
pub(crate) fn particle_velocity(
    s1: &Spectrum,
    s2: &Spectrum,
    points: &[[f64; 2]],
) -> Vec<[f64; 2]> {
    if points.is_empty() {
        return Vec::new();
    }
    let (v1, v2) = if points.len() <= DIRECT_SUM_MAX_POINTS {
        (direct_sum(s1, points), direct_sum(s2, points))
    } else {
        (
            Interpolant::from_spectrum(s1, DEFAULT_OVERSAMPLE).eval_many(points),
            Interpolant::from_spectrum(s2, DEFAULT_OVERSAMPLE).eval_many(points),
        )
    };
    v1.into_iter().zip(v2).map(|(a, b)| [a, b]).collect()
}

/// 1 on retained modes `3|xi_i| <= N`, 0 elsewhere.
fn dealias_mask(grid: Grid) -> Array2<f64> {
    let (k1, k2) = grid.wavenumber_tables();
    let n = grid.n() as f64;
    Array2::from_shape_fn(grid.spectral_dim(), |(a, b)| {
        if 3.0 * k1[a].abs() <= n && 3.0 * k2[b].abs() <= n {
            1.0
        } else {
            0.0
        }
    })
}

fn combine(base: &Spectrum, rate: &Array2<Complex64>, h: f64) -> Spectrum {
    let mut c = base.coeffs().clone();
    c.scaled_add(Complex64::new(h, 0.0), rate);
    Spectrum::from_coeffs(base.grid(), c).expect("same grid")
}

fn advance_points(base: &[[f64; 2]], rate: &[[f64; 2]], h: f64) -> Vec<[f64; 2]> {
    base.iter()
        .zip(rate)
        .map(|(p, v)| [p[0] + h * v[0], p[1] + h * v[1]])
        .collect()
}

/// Checks the velocity preconditions and returns the vorticity spectrum.
pub(crate) fn initial_vorticity(u0: &VectorField) -> Result<Spectrum> {
    let div = relative_divergence(u0);
    if div > DIVERGENCE_TOLERANCE {
        return Err(Error::NotDivergenceFree(div));
    }
    let [m1, m2] = u0.mean();
    let scale = u0.max_norm();
    check_zero_mean(m1, scale)?;
    check_zero_mean(m2, scale)?;
    Ok(vorticity_of(u0).spectrum())
}

/// Joint RK4 integration of vorticity, passive tracers and particles.
#[derive(Debug, Clone)]
pub struct Evolution {
    config: SolverConfig,
    particles: Vec<[f64; 2]>,
    tracers: Vec<ScalarField>,
    stride: usize,
}

impl Evolution {
    pub fn new(config: SolverConfig) -> Self {
        Self {
            config,
            particles: Vec::new(),
            tracers: Vec::new(),
            stride: 1,
        }
    }

    pub fn with_particles(mut self, particles: Vec<[f64; 2]>) -> Self {
        self.particles = particles;
        self
    }

    pub fn with_tracers(mut self, tracers: Vec<ScalarField>) -> Self {
        self.tracers = tracers;
        self
    }

    /// Observer call interval in steps (the initial and final frames are always observed).
    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// Runs from `u0` without observation.
    pub fn run(&self, u0: &VectorField) -> Result<Frame> {
        self.run_observed(u0, |_| Ok(()))
    }

    pub fn run_observed(
        &self,
        u0: &VectorField,
        observer: impl FnMut(&Frame) -> Result<()>,
    ) -> Result<Frame> {
        self.config.validate()?;
        if u0.grid() != self.config.grid {
            return Err(Error::GridMismatch(u0.grid().n(), self.config.grid.n()));
        }
        self.run_from_vorticity(initial_vorticity(u0)?, observer)
    }

    pub(crate) fn run_from_vorticity(
        &self,
        omega0: Spectrum,
        mut observer: impl FnMut(&Frame) -> Result<()>,
    ) -> Result<Frame> {
        let cfg = &self.config;
        let grid = cfg.grid;
        let rhs = Rhs::new(cfg);
        let mut omega = omega0.into_coeffs();
        rhs.truncate(&mut omega);
        let mut tracers = Vec::with_capacity(self.tracers.len());
        for t in &self.tracers {
            if t.grid() != grid {
                return Err(Error::GridMismatch(t.grid().n(), grid.n()));
            }
            let mut c = t.spectrum().into_coeffs();
            rhs.truncate(&mut c);
            tracers.push(Spectrum::from_coeffs(grid, c).expect("same grid"));
        }
        let mut frame = Frame {
            t: 0.0,
            step: 0,
            courant: 0.0,
            omega: Spectrum::from_coeffs(grid, omega).expect("same grid"),
            particles: self.particles.clone(),
            tracers,
        };
        let steps = cfg.steps();
        let dt = cfg.effective_dt();
        let h = grid.spacing();
        let zero = frame.omega.coeffs().iter().all(|c| c.norm_sqr() == 0.0);
        if zero {
            // Nothing moves: skip integration so no round-off can accumulate.
            observer(&frame)?;
            frame.t = cfg.t_end;
            frame.step = steps;
            if steps > 0 {
                observer(&frame)?;
            }
            return Ok(frame);
        }
        for step in 0..steps {
            let t = step as f64 * dt;
            let (k1, umax) = rhs.eval(&frame.omega, &frame.tracers, &frame.particles);
            let courant = dt * umax / h;
            if step == 0 {
                frame.courant = courant;
                observer(&frame)?;
            }
            if courant > cfg.cfl_limit {
                return Err(Error::Cfl {
                    courant,
                    limit: cfg.cfl_limit,
                    t,
                });
            }
            let stage = |k: &Rate, c: f64| {
                let om = combine(&frame.omega, &k.omega, c * dt);
                let tr: Vec<Spectrum> = frame
                    .tracers
                    .iter()
                    .zip(&k.tracers)
                    .map(|(s, r)| combine(s, r, c * dt))
                    .collect();
                let pts = advance_points(&frame.particles, &k.particles, c * dt);
                rhs.eval(&om, &tr, &pts).0
            };
            let k2 = stage(&k1, 0.5);
            let k3 = stage(&k2, 0.5);
            let k4 = stage(&k3, 1.0);
            let sum = |a: &Array2<Complex64>,
                       b: &Array2<Complex64>,
                       c: &Array2<Complex64>,
                       d: &Array2<Complex64>| {
                let mut s = a.clone();
                Zip::from(&mut s)
                    .and(b)
                    .and(c)
                    .and(d)
                    .for_each(|s, &b, &c, &d| *s += 2.0 * (b + c) + d);
                s
            };
            frame.omega = combine(
                &frame.omega,
                &sum(&k1.omega, &k2.omega, &k3.omega, &k4.omega),
                dt / 6.0,
            );
            for (i, tr) in frame.tracers.iter_mut().enumerate() {
                *tr = combine(
                    tr,
                    &sum(
                        &k1.tracers[i],
                        &k2.tracers[i],
                        &k3.tracers[i],
                        &k4.tracers[i],
                    ),
                    dt / 6.0,
                );
            }
            for (i, p) in frame.particles.iter_mut().enumerate() {
                for d in 0..2 {
                    let dx = dt / 6.0
                        * (k1.particles[i][d]
                            + 2.0 * (k2.particles[i][d] + k3.particles[i][d])
                            + k4.particles[i][d]);
                    if dx.abs() > std::f64::consts::PI {
                        return Err(Error::TrajectoryStep { step: dx.abs() });
                    }
                    p[d] += dx;
                }
            }
            frame.step = step + 1;
            frame.t = if step + 1 == steps {
                cfg.t_end
            } else {
                (step + 1) as f64 * dt
            };
            frame.courant = courant;
            if frame.step % self.stride == 0 || frame.step == steps {
                observer(&frame)?;
            }
        }
        if steps == 0 {
            observer(&frame)?;
        }
        Ok(frame)
    }
}

/// One classical RK4 step of `omega_t = -u . grad omega`.
pub fn step_vorticity(omega: &ScalarField, dt: f64, config: &SolverConfig) -> Result<ScalarField> {
    let s = omega.spectrum();
    check_zero_mean(s.mean(), omega.max_norm())?;
    let cfg = config.with_dt(dt).with_t_end(dt);
    let frame = Evolution::new(cfg).run_from_vorticity(s, |_| Ok(()))?;
    Ok(frame.vorticity())
}

/// The discrete solution map `u0 -> u(t_end)`.
pub fn solve(u0: &VectorField, config: &SolverConfig) -> Result<SolutionSnapshot> {
    Ok(Evolution::new(*config).run(u0)?.snapshot())
}

/// Like [`solve`], also returning diagnostics every `stride` steps.
pub fn solve_with_diagnostics(
    u0: &VectorField,
    config: &SolverConfig,
    stride: usize,
) -> Result<(SolutionSnapshot, Vec<Diagnostics>)> {
    let mut rows = Vec::new();
    let frame = Evolution::new(*config)
        .with_stride(stride)
        .run_observed(u0, |f| {
            rows.push(f.diagnostics(config.k));
            Ok(())
        })?;
    Ok((frame.snapshot(), rows))
}

/// `Phi_T(u0) = (1/T) Phi_1(T u0)`.
pub fn apply_scaling_map(
    u0: &VectorField,
    t: f64,
    config: &SolverConfig,
) -> Result<SolutionSnapshot> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scaling time must be positive, got {t}"
        )));
    }
    let cfg = config.with_t_end(1.0);
    if t == 1.0 {
        return solve(u0, &cfg);
    }
    let s = solve(&u0.scaled(t), &cfg)?;
    let inv = 1.0 / t;
    Ok(SolutionSnapshot {
        t,
        omega: s.omega.scaled(inv),
        u: s.u.scaled(inv),
        energy: s.energy * inv * inv,
        enstrophy: s.enstrophy * inv * inv,
    })
}

/// Zero-mean pressure with `-Lap p = sum_ij d_i u_j d_j u_i`.
pub fn pressure_from_velocity(u: &VectorField) -> ScalarField {
    let source = pressure_source(u);
    let mut s = inverse_laplacian_spectrum(&source.spectrum()).into_coeffs();
    s.mapv_inplace(|c| -c);
    Spectrum::from_coeffs(u.grid(), s)
        .expect("same grid")
        .to_field()
}

/// `sum_ij d_i u_j d_j u_i` on the grid.
pub(crate) fn pressure_source(u: &VectorField) -> ScalarField {
    let s1 = u.u1().spectrum();
    let s2 = u.u2().spectrum();
    let d11 = derivative_spectrum(&s1, Axis::X1).to_field();
    let d21 = derivative_spectrum(&s1, Axis::X2).to_field();
    let d12 = derivative_spectrum(&s2, Axis::X1).to_field();
    let d22 = derivative_spectrum(&s2, Axis::X2).to_field();
    let mut out = Array2::<f64>::zeros((u.grid().n(), u.grid().n()));
    Zip::from(&mut out)
        .and(d11.values())
        .and(d21.values())
        .and(d12.values())
        .and(d22.values())
        .for_each(|o, &a, &b, &c, &d| *o = a * a + 2.0 * b * c + d * d);
    ScalarField::from_values(u.grid(), out).expect("grid shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{biot_savart, gradient, laplacian, sobolev_norm};

    fn grid(n: usize) -> Grid {
        Grid::new(n).unwrap()
    }

    fn h3() -> SobolevIndex {
        SobolevIndex::new(3.0).unwrap()
    }

    #[test]
    fn step_count_honours_integer_ratios() {
        let c = SolverConfig::new(grid(16));
        assert_eq!(c.steps(), 1000);
        assert_eq!(c.with_t_end(0.25).steps(), 250);
        assert_eq!(c.with_dt(0.3).steps(), 4);
        assert_eq!(c.with_t_end(0.0).steps(), 0);
    }

    #[test]
    fn steady_vorticities_survive_one_step() {
        let g = grid(32);
        let cfg = SolverConfig::new(g);
        for omega in [
            ScalarField::from_fn(g, |x1, x2| 2.0 * x1.sin() * x2.sin()),
            ScalarField::from_fn(g, |_, x2| x2.cos()),
        ] {
            let next = step_vorticity(&omega, 1e-3, &cfg).unwrap();
            assert!((&next - &omega).max_norm() <= 1e-10);
        }
        let z = ScalarField::zeros(g);
        assert!(step_vorticity(&z, 1e-3, &cfg).unwrap().is_zero());
    }

    #[test]
    fn step_rejects_nonzero_mean_and_cfl_violation() {
        let g = grid(16);
        let cfg = SolverConfig::new(g);
        let omega = ScalarField::from_fn(g, |x1, _| 1.0 + x1.sin());
        assert!(matches!(
            step_vorticity(&omega, 1e-3, &cfg),
            Err(Error::NonZeroMean { .. })
        ));
        let omega = ScalarField::from_fn(g, |x1, x2| 200.0 * (x1 + x2).sin());
        match step_vorticity(&omega, 0.1, &cfg) {
            Err(Error::Cfl { courant, .. }) => assert!(courant > 0.5),
            other => panic!("expected CFL error, got {other:?}"),
        }
    }

    #[test]
    fn solve_rejects_divergent_input() {
        let g = grid(16);
        let u = VectorField::from_fn(g, |x1, _| [x1.sin(), 0.0]);
        assert!(matches!(
            solve(&u, &SolverConfig::new(g)),
            Err(Error::NotDivergenceFree(_))
        ));
    }

    #[test]
    fn zero_field_stays_zero() {
        let g = grid(16);
        let s = solve(&VectorField::zeros(g), &SolverConfig::new(g)).unwrap();
        assert!(s.u.is_zero() && s.omega.is_zero());
        assert_eq!(s.t, 1.0);
    }

    #[test]
    fn shear_is_a_fixed_point() {
        let g = grid(32);
        let u0 = VectorField::from_fn(g, |_, x2| [-x2.sin(), 0.0]);
        let s = solve(&u0, &SolverConfig::new(g).with_dt(1e-2)).unwrap();
        assert!(sobolev_norm(&(&s.u - &u0), h3()) <= 1e-10);
    }

    #[test]
    fn pressure_examples() {
        let g = grid(32);
        let shear = VectorField::from_fn(g, |_, x2| [-x2.sin(), 0.0]);
        assert!(pressure_from_velocity(&shear).max_norm() < 1e-14);
        assert!(pressure_from_velocity(&VectorField::zeros(g)).is_zero());

        // steady Taylor-Green: (u . grad) u + grad p = 0
        let omega = ScalarField::from_fn(g, |x1, x2| 2.0 * x1.sin() * x2.sin());
        let u = biot_savart(&omega).unwrap();
        let p = pressure_from_velocity(&u);
        let gp = gradient(&p);
        let gu1 = gradient(u.u1());
        let gu2 = gradient(u.u2());
        let adv1 =
            &(&u.u1().product(gu1.u1()).unwrap() + &u.u2().product(gu1.u2()).unwrap()) + gp.u1();
        let adv2 =
            &(&u.u1().product(gu2.u1()).unwrap() + &u.u2().product(gu2.u2()).unwrap()) + gp.u2();
        assert!(adv1.max_norm().max(adv2.max_norm()) <= 1e-8);

        // Poisson identity residual
        let u = biot_savart(&ScalarField::from_fn(g, |x1, x2| {
            (x1 + 2.0 * x2).sin() + (3.0 * x1).cos()
        }))
        .unwrap();
        let p = pressure_from_velocity(&u);
        let src = pressure_source(&u);
        let res = &laplacian(&p) + &src;
        assert!(res.l2_norm_quadrature() <= 1e-8 * src.l2_norm_quadrature());
        assert!(p.mean().abs() < 1e-14);
    }

    #[test]
    fn scaling_map_with_unit_time_is_the_plain_solve() {
        let g = grid(16);
        let u0 = biot_savart(&ScalarField::from_fn(g, |x1, x2| {
            (x1 - x2).sin() + 0.5 * (2.0 * x1).cos()
        }))
        .unwrap();
        let cfg = SolverConfig::new(g).with_dt(0.01);
        assert_eq!(
            apply_scaling_map(&u0, 1.0, &cfg).unwrap(),
            solve(&u0, &cfg).unwrap()
        );
    }

    #[test]
    fn particles_follow_a_steady_shear() {
        let g = grid(16);
        let u0 = VectorField::from_fn(g, |_, x2| [-x2.sin(), 0.0]);
        let pts = vec![[0.3, 1.1], [2.0, -0.5]];
        let f = Evolution::new(SolverConfig::new(g).with_dt(0.01))
            .with_particles(pts.clone())
            .run(&u0)
            .unwrap();
        for (p, q) in pts.iter().zip(f.particles()) {
            assert!((q[0] - (p[0] - p[1].sin())).abs() < 1e-12);
            assert!((q[1] - p[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn diagnostics_rows_follow_stride() {
        let g = grid(16);
        let u0 = biot_savart(&ScalarField::from_fn(g, |x1, x2| {
            (x1 + x2).sin() + x1.cos()
        }))
        .unwrap();
        let (_, rows) = solve_with_diagnostics(&u0, &SolverConfig::new(g).with_dt(0.1), 3).unwrap();
        let ts: Vec<f64> = rows.iter().map(|r| r.t).collect();
        assert_eq!(ts.len(), 5);
        assert_eq!(ts[0], 0.0);
        assert!((ts[1] - 0.3).abs() < 1e-12);
        assert_eq!(*ts.last().unwrap(), 1.0);
        assert!(rows.iter().all(|r| r.courant > 0.0 && r.courant < 0.5));
    }
}
