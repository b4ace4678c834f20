//! Flow maps of the torus, the exponential map and the Lagrangian second-order ODE.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::solver::pressure_source;
use crate::solver::{initial_vorticity, particle_velocity, Evolution, SolverConfig};
use crate::spectral::calculus::{
    biot_savart_spectra, derivative_spectrum, inverse_laplacian_spectrum, sobolev_norm_spectrum,
};
use crate::spectral::interp::{direct_sum, Interpolant};
use crate::spectral::{
    evaluate_offgrid, Axis, Grid, ScalarField, SobolevIndex, Spectrum, VectorField,
    DIRECT_SUM_MAX_POINTS,
};

/// Newton tolerance on `max |phi(psi(x)) - x|`.
pub const INVERSION_TOLERANCE: f64 = 1e-9;
pub const INVERSION_MAX_ITERATIONS: usize = 50;

/// Oversampling used when a map is evaluated off-grid.
pub const MAP_OVERSAMPLE: usize = 3;

/// Default checkpoint times of the frozen-in vorticity residual.
pub const FROZEN_CHECKPOINTS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// Torus diffeomorphism `phi(x) = x + d(x)` with periodic displacement `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMap {
    disp: VectorField,
}

fn values_at(f: &Spectrum, points: &[[f64; 2]]) -> Vec<f64> {
    if points.len() <= DIRECT_SUM_MAX_POINTS {
        direct_sum(f, points)
    } else {
        Interpolant::from_spectrum(f, MAP_OVERSAMPLE).eval_many(points)
    }
}

/// Row-major node coordinates.
pub fn grid_nodes(grid: Grid) -> Vec<[f64; 2]> {
    let n = grid.n();
    (0..n * n).map(|k| grid.node(k / n, k % n)).collect()
}

fn field_from_vec(grid: Grid, v: Vec<f64>) -> ScalarField {
    let n = grid.n();
    ScalarField::from_values(grid, Array2::from_shape_vec((n, n), v).expect("n*n values"))
        .expect("grid shape")
}

impl FlowMap {
    pub fn identity(grid: Grid) -> Self {
        Self {
            disp: VectorField::zeros(grid),
        }
    }

    pub fn from_displacement(disp: VectorField) -> Self {
        Self { disp }
    }

    /// From unwrapped images of the nodes, in row-major order.
    pub fn from_positions(grid: Grid, positions: &[[f64; 2]]) -> Result<Self> {
        let n = grid.n();
        if positions.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "expected {} node images, got {}",
                n * n,
                positions.len()
            )));
        }
        let nodes = grid_nodes(grid);
        let d1 = positions
            .iter()
            .zip(&nodes)
            .map(|(p, x)| p[0] - x[0])
            .collect();
        let d2 = positions
            .iter()
            .zip(&nodes)
            .map(|(p, x)| p[1] - x[1])
            .collect();
        Ok(Self {
            disp: VectorField::new(field_from_vec(grid, d1), field_from_vec(grid, d2))?,
        })
    }

    pub fn grid(&self) -> Grid {
        self.disp.grid()
    }

    pub fn displacement(&self) -> &VectorField {
        &self.disp
    }

    pub fn into_displacement(self) -> VectorField {
        self.disp
    }

    /// Unwrapped images of the nodes, row-major.
    pub fn node_images(&self) -> Vec<[f64; 2]> {
        let n = self.grid().n();
        let (d1, d2) = (self.disp.u1().values(), self.disp.u2().values());
        grid_nodes(self.grid())
            .into_iter()
            .enumerate()
            .map(|(k, x)| [x[0] + d1[[k / n, k % n]], x[1] + d2[[k / n, k % n]]])
            .collect()
    }

    /// `phi` at arbitrary points (unwrapped).
    pub fn apply(&self, points: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let a = values_at(&self.disp.u1().spectrum(), points);
        let b = values_at(&self.disp.u2().spectrum(), points);
        points
            .iter()
            .zip(a.iter().zip(&b))
            .map(|(p, (a, b))| [p[0] + a, p[1] + b])
            .collect()
    }

    /// `self o other`.
    pub fn compose(&self, other: &FlowMap) -> Result<FlowMap> {
        if self.grid() != other.grid() {
            return Err(Error::GridMismatch(self.grid().n(), other.grid().n()));
        }
        let images = self.apply(&other.node_images());
        FlowMap::from_positions(self.grid(), &images)
    }

    /// `D phi = I + D d` as `[[d1 phi1, d2 phi1], [d1 phi2, d2 phi2]]`.
    pub fn jacobian(&self) -> [[ScalarField; 2]; 2] {
        let s1 = self.disp.u1().spectrum();
        let s2 = self.disp.u2().spectrum();
        let one = |f: ScalarField| f.map(|v| v + 1.0);
        [
            [
                one(derivative_spectrum(&s1, Axis::X1).to_field()),
                derivative_spectrum(&s1, Axis::X2).to_field(),
            ],
            [
                derivative_spectrum(&s2, Axis::X1).to_field(),
                one(derivative_spectrum(&s2, Axis::X2).to_field()),
            ],
        ]
    }

    pub fn jacobian_determinant(&self) -> ScalarField {
        let [[a, b], [c, d]] = self.jacobian();
        let ad = a.product(&d).expect("same grid");
        let bc = b.product(&c).expect("same grid");
        &ad - &bc
    }

    /// Largest operator 2-norm of `D phi` over the nodes.
    pub fn max_jacobian_norm(&self) -> f64 {
        let [[a, b], [c, d]] = self.jacobian();
        let mut m = 0.0f64;
        for (((a, b), c), d) in a
            .values()
            .iter()
            .zip(b.values())
            .zip(c.values())
            .zip(d.values())
        {
            m = m.max(spectral_norm_2x2(*a, *b, *c, *d));
        }
        m
    }

    pub fn max_displacement(&self) -> f64 {
        self.disp.max_norm()
    }

    /// Nodal max distance between the images of two maps.
    pub fn max_gap(&self, other: &FlowMap) -> Result<f64> {
        Ok(self.disp.try_sub(&other.disp)?.max_norm())
    }
}

/// Largest singular value of `[[a, b], [c, d]]`.
pub fn spectral_norm_2x2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    let s = a * a + b * b + c * c + d * d;
    let det = a * d - b * c;
    ((s + (s * s - 4.0 * det * det).max(0.0).sqrt()) / 2.0).sqrt()
}

/// Inverse map by damped Newton iteration on the displacement, starting from the identity.
pub fn invert_map(phi: &FlowMap) -> Result<FlowMap> {
    invert_map_from(phi, None)
}

pub(crate) fn invert_map_from(phi: &FlowMap, warm: Option<&FlowMap>) -> Result<FlowMap> {
    let grid = phi.grid();
    let det = phi.jacobian_determinant();
    let min_det = det.values().iter().cloned().fold(f64::INFINITY, f64::min);
    if min_det <= 0.0 {
        return Err(Error::NotInvertible(format!(
            "det D phi reaches {min_det:e}"
        )));
    }
    let dmax = phi.max_displacement();
    if dmax >= std::f64::consts::FRAC_PI_2 {
        return Err(Error::NotInvertible(format!(
            "displacement {dmax:.4} is not below pi/2"
        )));
    }
    if phi.disp.is_zero() {
        return Ok(FlowMap::identity(grid));
    }
    let d1 = Interpolant::new(phi.disp.u1(), MAP_OVERSAMPLE);
    let d2 = Interpolant::new(phi.disp.u2(), MAP_OVERSAMPLE);
    let [[a, b], [c, d]] = phi.jacobian();
    let ja = Interpolant::new(&a, MAP_OVERSAMPLE);
    let jb = Interpolant::new(&b, MAP_OVERSAMPLE);
    let jc = Interpolant::new(&c, MAP_OVERSAMPLE);
    let jd = Interpolant::new(&d, MAP_OVERSAMPLE);
    let nodes = grid_nodes(grid);
    // e = psi(x) - x
    let mut e: Vec<[f64; 2]> = match warm {
        Some(w) if w.grid() == grid => {
            let n = grid.n();
            (0..n * n)
                .map(|k| w.disp.value_at_node(k / n, k % n))
                .collect()
        }
        _ => vec![[0.0, 0.0]; nodes.len()],
    };
    let residual_at = |e: &[[f64; 2]]| -> Vec<[f64; 2]> {
        e.par_iter()
            .zip(nodes.par_iter())
            .map(|(e, x)| {
                let p = [x[0] + e[0], x[1] + e[1]];
                [e[0] + d1.eval(p), e[1] + d2.eval(p)]
            })
            .collect()
    };
    let max_of = |r: &[[f64; 2]]| r.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);
    let mut r = residual_at(&e);
    let mut res = max_of(&r);
    for _ in 0..INVERSION_MAX_ITERATIONS {
        if res <= INVERSION_TOLERANCE {
            let n = grid.n();
            let f1 = field_from_vec(grid, e.iter().map(|v| v[0]).collect());
            let f2 = field_from_vec(grid, e.iter().map(|v| v[1]).collect());
            debug_assert_eq!(f1.values().len(), n * n);
            return Ok(FlowMap::from_displacement(VectorField::new(f1, f2)?));
        }
        let step: Vec<[f64; 2]> = e
            .par_iter()
            .zip(nodes.par_iter())
            .zip(r.par_iter())
            .map(|((e, x), r)| {
                let p = [x[0] + e[0], x[1] + e[1]];
                let (a, b, c, d) = (ja.eval(p), jb.eval(p), jc.eval(p), jd.eval(p));
                let det = a * d - b * c;
                [(d * r[0] - b * r[1]) / det, (-c * r[0] + a * r[1]) / det]
            })
            .collect();
        // Backtracking on the max residual.
        let mut lambda = 1.0;
        loop {
            let trial: Vec<[f64; 2]> = e
                .iter()
                .zip(&step)
                .map(|(e, s)| [e[0] - lambda * s[0], e[1] - lambda * s[1]])
                .collect();
            let rt = residual_at(&trial);
            let rest = max_of(&rt);
            if rest < res || lambda < 1e-3 {
                e = trial;
                r = rt;
                res = rest;
                break;
            }
            lambda *= 0.5;
        }
    }
    Err(Error::InversionFailed {
        iterations: INVERSION_MAX_ITERATIONS,
        residual: res,
    })
}

/// Nodal values `f(phi(x_j))`.
pub fn compose_scalar_with_map(f: &ScalarField, phi: &FlowMap) -> Result<ScalarField> {
    if f.grid() != phi.grid() {
        return Err(Error::GridMismatch(f.grid().n(), phi.grid().n()));
    }
    if phi.disp.is_zero() {
        return Ok(f.clone());
    }
    let images = phi.node_images();
    let v = if images.len() <= DIRECT_SUM_MAX_POINTS {
        evaluate_offgrid(f, &images)
    } else {
        Interpolant::new(f, MAP_OVERSAMPLE).eval_many(&images)
    };
    Ok(field_from_vec(f.grid(), v))
}

pub fn compose_vector_with_map(u: &VectorField, phi: &FlowMap) -> Result<VectorField> {
    VectorField::new(
        compose_scalar_with_map(u.u1(), phi)?,
        compose_scalar_with_map(u.u2(), phi)?,
    )
}

/// Velocity available at arbitrary times in `[0, t_end]`.
pub trait VelocityPath {
    fn grid(&self) -> Grid;
    fn velocity_at(&self, t: f64, points: &[[f64; 2]]) -> Vec<[f64; 2]>;
}

/// Time-independent velocity.
#[derive(Debug, Clone)]
pub struct SteadyVelocity {
    s1: Spectrum,
    s2: Spectrum,
}

impl SteadyVelocity {
    pub fn new(u: &VectorField) -> Self {
        Self {
            s1: u.u1().spectrum(),
            s2: u.u2().spectrum(),
        }
    }
}

impl VelocityPath for SteadyVelocity {
    fn grid(&self) -> Grid {
        self.s1.grid()
    }

    fn velocity_at(&self, _t: f64, points: &[[f64; 2]]) -> Vec<[f64; 2]> {
        particle_velocity(&self.s1, &self.s2, points)
    }
}

/// Stored vorticity snapshots with cubic Lagrange interpolation in time.
#[derive(Debug, Clone)]
pub struct SnapshotPath {
    times: Vec<f64>,
    omegas: Vec<Spectrum>,
}

impl SnapshotPath {
    /// Solves Euler from `u0` and keeps a snapshot every `stride` steps.
    pub fn record(u0: &VectorField, config: &SolverConfig, stride: usize) -> Result<Self> {
        let mut times = Vec::new();
        let mut omegas = Vec::new();
        Evolution::new(*config)
            .with_stride(stride)
            .run_observed(u0, |f| {
                times.push(f.t);
                omegas.push(f.vorticity_spectrum().clone());
                Ok(())
            })?;
        Ok(Self { times, omegas })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Vorticity spectrum at time `t` (cubic in `t` through the four nearest snapshots).
    fn omega_at(&self, t: f64) -> Spectrum {
        let m = self.times.len();
        if m == 1 {
            return self.omegas[0].clone();
        }
        let i = match self.times.partition_point(|&s| s <= t) {
            0 => 0,
            k => k - 1,
        };
        let lo = i.saturating_sub(1).min(m.saturating_sub(4));
        let hi = (lo + 4).min(m);
        let idx: Vec<usize> = (lo..hi).collect();
        let mut acc = Array2::zeros(self.omegas[0].coeffs().dim());
        for &a in &idx {
            let mut w = 1.0;
            for &b in &idx {
                if a != b {
                    w *= (t - self.times[b]) / (self.times[a] - self.times[b]);
                }
            }
            acc.scaled_add(num_complex::Complex64::new(w, 0.0), self.omegas[a].coeffs());
        }
        Spectrum::from_coeffs(self.omegas[0].grid(), acc).expect("same grid")
    }
}

impl VelocityPath for SnapshotPath {
    fn grid(&self) -> Grid {
        self.omegas[0].grid()
    }

    fn velocity_at(&self, t: f64, points: &[[f64; 2]]) -> Vec<[f64; 2]> {
        let (s1, s2) = biot_savart_spectra(&self.omega_at(t));
        particle_velocity(&s1, &s2, points)
    }
}

/// RK4 integration of `phi_t = u(t, phi)`, `phi(0) = id`, over the grid nodes.
pub fn integrate_flow_map(path: &dyn VelocityPath, t_end: f64, dt: f64) -> Result<FlowMap> {
    let grid = path.grid();
    if !(dt > 0.0 && t_end >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dt = {dt}, t_end = {t_end}"
        )));
    }
    let steps = SolverConfig::new(grid)
        .with_dt(dt)
        .with_t_end(t_end)
        .steps();
    let h = if steps == 0 {
        0.0
    } else {
        t_end / steps as f64
    };
    let mut x = grid_nodes(grid);
    let shift = |x: &[[f64; 2]], k: &[[f64; 2]], c: f64| -> Vec<[f64; 2]> {
        x.iter()
            .zip(k)
            .map(|(p, v)| [p[0] + c * v[0], p[1] + c * v[1]])
            .collect()
    };
    for s in 0..steps {
        let t = s as f64 * h;
        let k1 = path.velocity_at(t, &x);
        let k2 = path.velocity_at(t + 0.5 * h, &shift(&x, &k1, 0.5 * h));
        let k3 = path.velocity_at(t + 0.5 * h, &shift(&x, &k2, 0.5 * h));
        let k4 = path.velocity_at(t + h, &shift(&x, &k3, h));
        for (i, p) in x.iter_mut().enumerate() {
            for d in 0..2 {
                let dx = h / 6.0 * (k1[i][d] + 2.0 * (k2[i][d] + k3[i][d]) + k4[i][d]);
                if dx.abs() > std::f64::consts::PI {
                    return Err(Error::TrajectoryStep { step: dx.abs() });
                }
                p[d] += dx;
            }
        }
    }
    FlowMap::from_positions(grid, &x)
}

/// `exp(u0) = phi(1)`, co-integrating every node with the Euler solve.
pub fn exp_map(u0: &VectorField, config: &SolverConfig) -> Result<FlowMap> {
    let cfg = config.with_t_end(1.0);
    let grid = cfg.grid;
    if u0.grid() != grid {
        return Err(Error::GridMismatch(u0.grid().n(), grid.n()));
    }
    let frame = Evolution::new(cfg)
        .with_particles(grid_nodes(grid))
        .run(u0)?;
    FlowMap::from_positions(grid, frame.particles())
}

/// `F(phi, phi_t) = (grad Lap^-1 sum_ij d_i u_j d_j u_i) o phi` with `u = phi_t o phi^-1`.
pub fn lagrangian_rhs(phi: &FlowMap, phi_t: &VectorField) -> Result<VectorField> {
    lagrangian_rhs_warm(phi, phi_t, None).map(|(f, _)| f)
}

fn lagrangian_rhs_warm(
    phi: &FlowMap,
    phi_t: &VectorField,
    warm: Option<&FlowMap>,
) -> Result<(VectorField, FlowMap)> {
    let grid = phi.grid();
    if phi_t.is_zero() {
        return Ok((
            VectorField::zeros(grid),
            warm.cloned().unwrap_or_else(|| FlowMap::identity(grid)),
        ));
    }
    let inv = invert_map_from(phi, warm)?;
    let u = compose_vector_with_map(phi_t, &inv)?;
    let source = pressure_source(&u).spectrum();
    let q = inverse_laplacian_spectrum(&source);
    let g1 = derivative_spectrum(&q, Axis::X1).to_field();
    let g2 = derivative_spectrum(&q, Axis::X2).to_field();
    let f = VectorField::new(
        compose_scalar_with_map(&g1, phi)?,
        compose_scalar_with_map(&g2, phi)?,
    )?;
    Ok((f, inv))
}

/// `exp(u0)` by RK4 on the first-order system `(phi, phi_t)` of the Lagrangian ODE.
pub fn exp_map_via_ode(u0: &VectorField, config: &SolverConfig) -> Result<FlowMap> {
    let cfg = config.with_t_end(1.0);
    cfg.validate()?;
    let grid = cfg.grid;
    initial_vorticity(u0)?;
    if u0.is_zero() {
        return Ok(FlowMap::identity(grid));
    }
    let steps = cfg.steps();
    let h = cfg.effective_dt();
    let mut d = VectorField::zeros(grid);
    let mut v = u0.clone();
    let mut warm: Option<FlowMap> = None;
    let axpy = |a: &VectorField, b: &VectorField, c: f64| a + &b.scaled(c);
    for _ in 0..steps {
        let (a1, w1) =
            lagrangian_rhs_warm(&FlowMap::from_displacement(d.clone()), &v, warm.as_ref())?;
        let v1 = v.clone();
        let (a2, w2) = lagrangian_rhs_warm(
            &FlowMap::from_displacement(axpy(&d, &v1, 0.5 * h)),
            &axpy(&v, &a1, 0.5 * h),
            Some(&w1),
        )?;
        let v2 = axpy(&v, &a1, 0.5 * h);
        let (a3, w3) = lagrangian_rhs_warm(
            &FlowMap::from_displacement(axpy(&d, &v2, 0.5 * h)),
            &axpy(&v, &a2, 0.5 * h),
            Some(&w2),
        )?;
        let v3 = axpy(&v, &a2, 0.5 * h);
        let (a4, _) = lagrangian_rhs_warm(
            &FlowMap::from_displacement(axpy(&d, &v3, h)),
            &axpy(&v, &a3, h),
            Some(&w3),
        )?;
        let v4 = axpy(&v, &a3, h);
        let dv = &(&(&a1 + &a2.scaled(2.0)) + &a3.scaled(2.0)) + &a4;
        let dd = &(&(&v1 + &v2.scaled(2.0)) + &v3.scaled(2.0)) + &v4;
        d = axpy(&d, &dd, h / 6.0);
        v = axpy(&v, &dv, h / 6.0);
        warm = Some(w1);
    }
    Ok(FlowMap::from_displacement(d))
}

/// `max_t ||omega(t) o phi(t) - omega_0||_{H^2} / ||omega_0||_{H^2}` over checkpoint times.
pub fn frozen_vorticity_residual(u0: &VectorField, config: &SolverConfig) -> Result<f64> {
    frozen_vorticity_residual_at(u0, config, &FROZEN_CHECKPOINTS)
}

pub fn frozen_vorticity_residual_at(
    u0: &VectorField,
    config: &SolverConfig,
    checkpoints: &[f64],
) -> Result<f64> {
    let grid = config.grid;
    let h2 = SobolevIndex::new(2.0).expect("valid index");
    let t_end = checkpoints.iter().cloned().fold(0.0, f64::max);
    let cfg = config.with_t_end(t_end);
    let half = cfg.effective_dt() / 2.0;
    let mut omega0: Option<(ScalarField, f64)> = None;
    let mut worst = 0.0f64;
    Evolution::new(cfg)
        .with_particles(grid_nodes(grid))
        .run_observed(u0, |f| {
            if f.step == 0 {
                let w = f.vorticity();
                let norm = sobolev_norm_spectrum(f.vorticity_spectrum(), h2);
                omega0 = Some((w, norm));
                return Ok(());
            }
            if !checkpoints.iter().any(|&c| (f.t - c).abs() <= half) {
                return Ok(());
            }
            let (w0, norm) = omega0.as_ref().expect("initial frame observed first");
            if *norm == 0.0 {
                return Ok(());
            }
            let pulled = field_from_vec(grid, values_at(f.vorticity_spectrum(), f.particles()));
            let r = crate::spectral::sobolev_norm_scalar(&(&pulled - w0), h2) / norm;
            worst = worst.max(r);
            Ok(())
        })?;
    Ok(worst)
}
