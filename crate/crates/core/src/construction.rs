//! Witness directions, estimated constants, compactly supported bumps and the
//! paired initial-data sequences.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lagrangian::{compose_scalar_with_map, exp_map, invert_map, FlowMap};
use crate::solver::{policy_dt, SolverConfig};
use crate::spectral::vorticity_of;
use crate::spectral::{
    perp_gradient, random, resample_vector, sobolev_norm, sobolev_norm_scalar, wrap_difference,
    Grid, ScalarField, SobolevIndex, VectorField,
};

/// Bumps must span at least this many grid spacings in radius.
pub const MIN_RADIUS_SPACINGS: f64 = 8.0;

/// Safety factor applied to empirical constants.
pub const SAFETY_FACTOR: f64 = 1.5;

/// Witness values below this are treated as degenerate.
pub const MIN_WITNESS_VALUE: f64 = 1e-6;

/// Largest accepted relative change of `m` when the difference step is halved.
pub const RICHARDSON_TOLERANCE: f64 = 0.2;

/// Solver settings for the exponential-map evaluations behind witnesses and constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapOptions {
    pub k: SobolevIndex,
    /// Upper bound on the policy time step.
    pub dt_cap: f64,
    pub seed: u64,
}

impl Default for MapOptions {
    fn default() -> Self {
        Self {
            k: SobolevIndex::default(),
            dt_cap: 0.02,
            seed: 0,
        }
    }
}

impl MapOptions {
    fn solver_config(&self, u: &VectorField) -> SolverConfig {
        let grid = u.grid();
        SolverConfig::new(grid)
            .with_k(self.k)
            .with_dt(policy_dt(grid, u.max_norm(), self.dt_cap))
    }

    /// `exp(u)` with the policy time step for `u`.
    pub fn exp(&self, u: &VectorField) -> Result<FlowMap> {
        exp_map(u, &self.solver_config(u))
    }
}

/// A direction `w*` whose image under `d exp` at `u_base` is nonzero at `x*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub u_base: VectorField,
    pub w_star: VectorField,
    pub x_star: [f64; 2],
    /// `|(d exp(w*))(x*)|`.
    pub m: f64,
    pub epsilon_fd: f64,
    /// The same quantity recomputed with `epsilon_fd / 2`.
    pub m_half: f64,
}

/// JSON-friendly digest of a [`Witness`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub m: f64,
    pub m_half: f64,
    pub x_star: [f64; 2],
    pub epsilon_fd: f64,
    pub w_star_norm: f64,
    pub u_base_norm: f64,
    pub n: usize,
}

impl Witness {
    pub fn grid(&self) -> Grid {
        self.w_star.grid()
    }

    /// `w* -> lambda w*`; `m` scales linearly.
    pub fn scaled(&self, lambda: f64) -> Witness {
        Witness {
            u_base: self.u_base.clone(),
            w_star: self.w_star.scaled(lambda),
            x_star: self.x_star,
            m: self.m * lambda.abs(),
            epsilon_fd: self.epsilon_fd,
            m_half: self.m_half * lambda.abs(),
        }
    }

    pub fn resampled(&self, grid: Grid) -> Witness {
        Witness {
            u_base: resample_vector(&self.u_base, grid),
            w_star: resample_vector(&self.w_star, grid),
            ..self.clone()
        }
    }

    pub fn summary(&self, k: SobolevIndex) -> WitnessSummary {
        WitnessSummary {
            m: self.m,
            m_half: self.m_half,
            x_star: self.x_star,
            epsilon_fd: self.epsilon_fd,
            w_star_norm: sobolev_norm(&self.w_star, k),
            u_base_norm: sobolev_norm(&self.u_base, k),
            n: self.grid().n(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatedConstants {
    pub c1: f64,
    pub c2: f64,
    /// Empirical maxima before the safety factor.
    pub c1_empirical: f64,
    pub c2_empirical: f64,
    pub sample_count: usize,
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub center: [f64; 2],
    pub radius: f64,
    pub target_hk_norm: f64,
    pub k: SobolevIndex,
    /// 0 gives a radial vortex; `s >= 1` multiplies the stream function by
    /// `cos(s pi (d.e) / (2 rho))` with `e` at angle `0.7 s`.
    pub mode_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequencePair {
    pub n: usize,
    pub u0: VectorField,
    pub u0_tilde: VectorField,
    pub r_n: f64,
    pub v_n: VectorField,
}

/// Smallest even `N` on which `radius` spans [`MIN_RADIUS_SPACINGS`] spacings.
pub fn min_resolvable_n(radius: f64) -> usize {
    if !(radius > 0.0) {
        return usize::MAX;
    }
    let exact = MIN_RADIUS_SPACINGS * 2.0 * std::f64::consts::PI / radius;
    let mut n = exact.ceil() as usize;
    n += n % 2;
    n.max(8)
}

fn check_resolvable(radius: f64, grid: Grid) -> Result<()> {
    if radius < MIN_RADIUS_SPACINGS * grid.spacing() {
        return Err(Error::UnderResolved {
            radius,
            n: grid.n(),
            min_n: min_resolvable_n(radius),
        });
    }
    Ok(())
}

fn bump_stream_function(spec: &BumpSpec, grid: Grid) -> ScalarField {
    let rho = spec.radius;
    let rho2 = rho * rho;
    let [c1, c2] = spec.center;
    let s = spec.mode_seed as f64;
    let (e1, e2) = ((0.7 * s).cos(), (0.7 * s).sin());
    ScalarField::from_fn(grid, |x1, x2| {
        let d1 = wrap_difference(x1 - c1);
        let d2 = wrap_difference(x2 - c2);
        let r2 = d1 * d1 + d2 * d2;
        if r2 >= rho2 {
            return 0.0;
        }
        let g = if spec.mode_seed == 0 {
            1.0
        } else {
            (s * std::f64::consts::PI * (d1 * e1 + d2 * e2) / (2.0 * rho)).cos()
        };
        (-rho2 / (rho2 - r2)).exp() * g
    })
}

/// Divergence-free bump `perp grad psi` with `psi` a mollifier supported in the ball.
pub fn make_bump(spec: &BumpSpec, grid: Grid) -> Result<VectorField> {
    if !(spec.radius > 0.0 && spec.radius < std::f64::consts::PI) {
        return Err(Error::InvalidArgument(format!(
            "bump radius {} must lie in (0, pi)",
            spec.radius
        )));
    }
    if !(spec.target_hk_norm >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "negative target norm {}",
            spec.target_hk_norm
        )));
    }
    check_resolvable(spec.radius, grid)?;
    if spec.target_hk_norm == 0.0 {
        return Ok(VectorField::zeros(grid));
    }
    let v = perp_gradient(&bump_stream_function(spec, grid));
    let norm = sobolev_norm(&v, spec.k);
    if norm == 0.0 {
        return Err(Error::InvalidArgument(
            "bump stream function vanishes on the grid".into(),
        ));
    }
    Ok(v.scaled(spec.target_hk_norm / norm))
}

/// Vorticity of a bump, the field tracked to test support disjointness.
pub fn bump_vorticity(spec: &BumpSpec, grid: Grid) -> Result<ScalarField> {
    Ok(vorticity_of(&make_bump(spec, grid)?))
}

/// Relative leakage `max_{outside} |v| / max |v|` of a field outside a ball.
pub fn leakage_outside(v: &VectorField, center: [f64; 2], radius: f64) -> f64 {
    let grid = v.grid();
    let n = grid.n();
    let total = v.max_norm();
    if total == 0.0 {
        return 0.0;
    }
    let mut outside = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let x = grid.node(i, j);
            let d1 = wrap_difference(x[0] - center[0]);
            let d2 = wrap_difference(x[1] - center[1]);
            if d1.hypot(d2) >= radius {
                let [a, b] = v.value_at_node(i, j);
                outside = outside.max(a.hypot(b));
            }
        }
    }
    outside / total
}

/// Steady low-mode candidates: random combinations of the modes on the shell
/// `|xi|^2 = 1` (even index) or `|xi|^2 = 2` (odd index), each normalized in `H^k`.
pub fn witness_candidates(
    grid: Grid,
    count: usize,
    seed: u64,
    k: SobolevIndex,
) -> Vec<VectorField> {
    (0..count)
        .map(|i| {
            let mut rng = random::rng(seed, i as u64);
            let modes: [[f64; 2]; 2] = if i % 2 == 0 {
                [[1.0, 0.0], [0.0, 1.0]]
            } else {
                [[1.0, 1.0], [1.0, -1.0]]
            };
            let coeffs: Vec<[f64; 2]> = (0..2)
                .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            let psi = ScalarField::from_fn(grid, |x1, x2| {
                modes
                    .iter()
                    .zip(&coeffs)
                    .map(|(m, c)| {
                        let ph = m[0] * x1 + m[1] * x2;
                        c[0] * ph.cos() + c[1] * ph.sin()
                    })
                    .sum()
            });
            let w = perp_gradient(&psi);
            w.scaled(1.0 / sobolev_norm(&w, k))
        })
        .collect()
}

/// Finite-difference `(exp(u + eps w) - exp(u)) / eps` as nodal vectors.
fn fd_derivative(
    base: &FlowMap,
    u_base: &VectorField,
    w: &VectorField,
    eps: f64,
    opts: &MapOptions,
) -> Result<VectorField> {
    let moved = opts.exp(&(u_base + &w.scaled(eps)))?;
    Ok(moved
        .displacement()
        .try_sub(base.displacement())?
        .scaled(1.0 / eps))
}

fn argmax_node(d: &VectorField) -> (usize, usize, f64) {
    let n = d.grid().n();
    let mut best = (0, 0, -1.0);
    for i in 0..n {
        for j in 0..n {
            let [a, b] = d.value_at_node(i, j);
            let v = a.hypot(b);
            if v > best.2 {
                best = (i, j, v);
            }
        }
    }
    best
}

/// Scans the given candidate directions and every node for the largest
/// `|(d exp(w))(x)|`; the winner is re-evaluated with `eps / 2`.
pub fn find_witness_among(
    u_base: &VectorField,
    candidates: &[VectorField],
    epsilon_fd: f64,
    opts: &MapOptions,
) -> Result<Witness> {
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no witness candidates".into()));
    }
    if !(epsilon_fd > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "finite-difference step {epsilon_fd} must be positive"
        )));
    }
    let base = opts.exp(u_base)?;
    let scans: Vec<Result<(usize, usize, f64)>> = candidates
        .par_iter()
        .map(|w| fd_derivative(&base, u_base, w, epsilon_fd, opts).map(|d| argmax_node(&d)))
        .collect();
    let mut best: Option<(usize, (usize, usize, f64))> = None;
    for (idx, s) in scans.into_iter().enumerate() {
        let s = s?;
        if best.map_or(true, |(_, b)| s.2 > b.2) {
            best = Some((idx, s));
        }
    }
    let (idx, (i, j, m)) = best.expect("at least one candidate");
    if m < MIN_WITNESS_VALUE {
        return Err(Error::DegenerateWitness { m });
    }
    let w = &candidates[idx];
    let half = fd_derivative(&base, u_base, w, epsilon_fd / 2.0, opts)?;
    let [a, b] = half.value_at_node(i, j);
    let m_half = a.hypot(b);
    if (m - m_half).abs() > RICHARDSON_TOLERANCE * m_half {
        return Err(Error::WitnessNotConverged { m, m_half });
    }
    Ok(Witness {
        u_base: u_base.clone(),
        w_star: w.clone(),
        x_star: u_base.grid().node(i, j),
        m,
        epsilon_fd,
        m_half,
    })
}

/// [`find_witness_among`] over `candidate_count` seeded [`witness_candidates`].
pub fn find_witness(
    u_base: &VectorField,
    candidate_count: usize,
    epsilon_fd: f64,
    opts: &MapOptions,
) -> Result<Witness> {
    let candidates = witness_candidates(u_base.grid(), candidate_count, opts.seed, opts.k);
    find_witness_among(u_base, &candidates, epsilon_fd, opts)
}

/// Velocities on the sphere of radius `radius` about `u_base` in `H^k`.
fn ball_samples(
    u_base: &VectorField,
    radius: f64,
    count: usize,
    opts: &MapOptions,
    stream: u64,
) -> Vec<VectorField> {
    let grid = u_base.grid();
    (0..count)
        .map(|i| {
            if radius == 0.0 {
                return u_base.clone();
            }
            let mut rng = random::rng(opts.seed, stream + i as u64);
            let dir = random::random_solenoidal(grid, 2.0, 1.0, &mut rng);
            u_base + &dir.scaled(radius / sobolev_norm(&dir, opts.k))
        })
        .collect()
}

/// `C2 = 1.5 max sup_x |D phi(x)|` over `phi = exp(u)` sampled on the ball.
pub fn estimate_lipschitz_c2(
    u_base: &VectorField,
    radius: f64,
    sample_count: usize,
    opts: &MapOptions,
) -> Result<EstimatedConstants> {
    if sample_count < 5 {
        return Err(Error::InvalidArgument(format!(
            "need at least 5 samples, got {sample_count}"
        )));
    }
    let samples = ball_samples(u_base, radius, sample_count, opts, 1 << 20);
    let norms: Vec<Result<f64>> = samples
        .par_iter()
        .map(|u| opts.exp(u).map(|phi| phi.max_jacobian_norm()))
        .collect();
    let mut emp = 0.0f64;
    for v in norms {
        emp = emp.max(v?);
    }
    Ok(EstimatedConstants {
        c1: f64::NAN,
        c2: SAFETY_FACTOR * emp,
        c1_empirical: f64::NAN,
        c2_empirical: emp,
        sample_count,
        radius,
    })
}

/// Largest two-sided ratio `max(q, 1/q)`, `q = ||f o phi^-1|| / ||f||`, over all pairs.
pub fn composition_constant(
    maps: &[FlowMap],
    fields: &[ScalarField],
    index: SobolevIndex,
) -> Result<f64> {
    let mut worst = 1.0f64;
    for phi in maps {
        let inv = invert_map(phi)?;
        for f in fields {
            let base = sobolev_norm_scalar(f, index);
            if base == 0.0 {
                continue;
            }
            let q = sobolev_norm_scalar(&compose_scalar_with_map(f, &inv)?, index) / base;
            worst = worst.max(q).max(1.0 / q);
        }
    }
    Ok(worst)
}

/// Test fields per sampled map in [`estimate_composition_c1`].
pub const C1_FIELDS_PER_MAP: usize = 3;

/// `C1 = 1.5 x` the empirical composition constant in `H^{k-1}`.
pub fn estimate_composition_c1(
    u_base: &VectorField,
    radius: f64,
    sample_count: usize,
    opts: &MapOptions,
) -> Result<EstimatedConstants> {
    if sample_count < 5 {
        return Err(Error::InvalidArgument(format!(
            "need at least 5 samples, got {sample_count}"
        )));
    }
    let grid = u_base.grid();
    let samples = ball_samples(u_base, radius, sample_count, opts, 1 << 21);
    let maps: Vec<Result<FlowMap>> = samples.par_iter().map(|u| opts.exp(u)).collect();
    let maps: Vec<FlowMap> = maps.into_iter().collect::<Result<_>>()?;
    let fields: Vec<ScalarField> = (0..C1_FIELDS_PER_MAP)
        .map(|j| {
            random::random_scalar(
                grid,
                4.0,
                1.0,
                &mut random::rng(opts.seed, (1 << 22) + j as u64),
            )
        })
        .collect();
    let emp = composition_constant(&maps, &fields, opts.k.minus_one())?;
    Ok(EstimatedConstants {
        c1: SAFETY_FACTOR * emp,
        c2: f64::NAN,
        c1_empirical: emp,
        c2_empirical: f64::NAN,
        sample_count,
        radius,
    })
}

/// Both constants from one set of samples.
pub fn estimate_constants(
    u_base: &VectorField,
    radius: f64,
    sample_count: usize,
    opts: &MapOptions,
) -> Result<EstimatedConstants> {
    let c2 = estimate_lipschitz_c2(u_base, radius, sample_count, opts)?;
    let c1 = estimate_composition_c1(u_base, radius, sample_count, opts)?;
    Ok(EstimatedConstants {
        c1: c1.c1,
        c1_empirical: c1.c1_empirical,
        ..c2
    })
}

/// `r_n = m / (8 n C2)`.
pub fn bump_radius(n: usize, m: f64, c2: f64) -> f64 {
    m / (8.0 * n as f64 * c2)
}

/// `u0 = u_base + v_n`, `u0_tilde = u0 + w*/n` with `v_n` a bump of `H^k` norm `R/2` at `x*`.
pub fn build_sequence_pair(
    n: usize,
    r: f64,
    witness: &Witness,
    constants: &EstimatedConstants,
    grid: Grid,
    k: SobolevIndex,
    mode_seed: u64,
) -> Result<SequencePair> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "sequence index n must be positive".into(),
        ));
    }
    let r_n = bump_radius(n, witness.m, constants.c2);
    check_resolvable(r_n, grid)?;
    let w = if witness.grid() == grid {
        witness.clone()
    } else {
        witness.resampled(grid)
    };
    let spec = BumpSpec {
        center: w.x_star,
        radius: r_n,
        target_hk_norm: r / 2.0,
        k,
        mode_seed,
    };
    let v_n = make_bump(&spec, grid)?;
    let u0 = &w.u_base + &v_n;
    let u0_tilde = &u0 + &w.w_star.scaled(1.0 / n as f64);
    Ok(SequencePair {
        n,
        u0,
        u0_tilde,
        r_n,
        v_n,
    })
}

impl SequencePair {
    pub fn bump_spec(
        &self,
        witness: &Witness,
        r: f64,
        k: SobolevIndex,
        mode_seed: u64,
    ) -> BumpSpec {
        BumpSpec {
            center: witness.x_star,
            radius: self.r_n,
            target_hk_norm: r / 2.0,
            k,
            mode_seed,
        }
    }
}
