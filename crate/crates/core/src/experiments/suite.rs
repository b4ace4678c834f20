//! Aggregated invariant checks with a resolution-dependent tolerance table.

use serde::{Deserialize, Serialize};

use crate::builtin;
use crate::error::Result;
use crate::lagrangian::{exp_map, exp_map_via_ode, frozen_vorticity_residual, FlowMap};
use crate::solver::{apply_scaling_map, solve, SolverConfig};
use crate::spectral::{random, relative_divergence, sobolev_norm, Grid, SobolevIndex, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub n: usize,
    pub dt: f64,
    pub seed: u64,
    /// Step of the two flow-map checks, which are far more expensive per step.
    pub map_dt: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            n: 64,
            dt: 1e-3,
            seed: builtin::GENERIC_SEED,
            map_dt: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Measured value; `null` in JSON when the check errored.
    pub value: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub dt: f64,
    pub checks: Vec<Check>,
    pub pass: bool,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// Names of the checks, in report order.
pub const CHECK_NAMES: [&str; 10] = [
    "steady_taylor_green",
    "steady_shear",
    "energy_drift",
    "enstrophy_drift",
    "scaling_law",
    "divergence_free",
    "frozen_vorticity",
    "exp_derivative_at_zero",
    "exp_vs_ode",
    "solve_convergence",
];

/// Tolerance of a check on an `n x n` grid.
///
/// Row per resolution tier: `n >= 64`, `32`, `16`, `<= 8`. Values sit a factor
/// 2 to 10 above refinement-study measurements (relative errors capped at 1).
pub fn tolerance(name: &str, n: usize) -> f64 {
    let tier = match n {
        n if n >= 64 => 0,
        n if n >= 32 => 1,
        n if n >= 16 => 2,
        _ => 3,
    };
    let row: [f64; 4] = match name {
        "steady_taylor_green" | "steady_shear" => [1e-6, 1e-6, 1e-6, 1e-6],
        "energy_drift" | "enstrophy_drift" => [1e-6, 1e-6, 1e-6, 1e-6],
        "scaling_law" => [1e-6, 1e-6, 1e-6, 1e-6],
        "divergence_free" => [1e-10, 1e-10, 1e-10, 1e-10],
        "frozen_vorticity" => [1e-2, 5e-1, 1.0, 1.0],
        "exp_derivative_at_zero" => [5e-2, 5e-2, 5e-2, 5e-2],
        "exp_vs_ode" => [1e-4, 2e-3, 1e-1, 1.0],
        "solve_convergence" => [1e-8, 1e-8, 1e-8, 1e-8],
        _ => [f64::NAN; 4],
    };
    row[tier]
}

fn check(name: &str, n: usize, measured: Result<f64>) -> Check {
    match measured {
        Ok(v) => {
            let tol = tolerance(name, n);
            Check {
                name: name.into(),
                value: Some(v),
                tolerance: tol,
                pass: v <= tol,
                detail: None,
            }
        }
        Err(e) => failed(name, n, e.to_string()),
    }
}

fn failed(name: &str, n: usize, detail: String) -> Check {
    Check {
        name: name.into(),
        value: None,
        tolerance: tolerance(name, n),
        pass: false,
        detail: Some(detail),
    }
}

fn steady_error(u0: &VectorField, sc: &SolverConfig) -> Result<f64> {
    let out = solve(u0, sc)?;
    Ok(sobolev_norm(&out.u.try_sub(u0)?, sc.k))
}

fn drifts(u0: &VectorField, sc: &SolverConfig) -> Result<[f64; 2]> {
    let first = solve(u0, &sc.with_t_end(0.0))?;
    let last = solve(u0, sc)?;
    Ok([
        (last.energy - first.energy).abs() / first.energy,
        (last.enstrophy - first.enstrophy).abs() / first.enstrophy,
    ])
}

fn scaling_error(u0: &VectorField, sc: &SolverConfig) -> Result<f64> {
    let t = 0.5;
    let direct = solve(u0, &sc.with_t_end(t))?;
    let scaled = apply_scaling_map(u0, t, sc)?;
    Ok(sobolev_norm(&direct.u.try_sub(&scaled.u)?, sc.k))
}

/// Largest relative nodal error of `(exp(eps w) - id) / eps` against `w`, `eps = 1e-3`, over 3 directions
/// with modes `|xi| <= 3` that survive the 2/3 rule.
fn exp_derivative_error(grid: Grid, sc: &SolverConfig, seed: u64) -> Result<f64> {
    let eps = 1e-3;
    let max_mode = 3.0f64.min((grid.n() / 3) as f64);
    let mut worst = 0.0f64;
    for j in 0..3 {
        let w = random::random_solenoidal(grid, max_mode, 1.0, &mut random::rng(seed, 100 + j));
        let w = w.scaled(1.0 / w.max_norm());
        let phi = exp_map(&w.scaled(eps), sc)?;
        let fd = phi.displacement().scaled(1.0 / eps);
        worst = worst.max(fd.try_sub(&w)?.max_norm() / w.max_norm());
    }
    Ok(worst)
}

fn exp_gap(u0: &VectorField, sc: &SolverConfig) -> Result<f64> {
    let a: FlowMap = exp_map(u0, sc)?;
    let b = exp_map_via_ode(u0, sc)?;
    a.max_gap(&b)
}

/// `||solve(dt) - solve(dt/2)||_{H^k} / ||solve(dt/2)||_{H^k}` on the generic data.
fn convergence_error(u0: &VectorField, sc: &SolverConfig) -> Result<f64> {
    let a = solve(u0, sc)?;
    let b = solve(u0, &sc.with_dt(sc.dt / 2.0))?;
    Ok(sobolev_norm(&a.u.try_sub(&b.u)?, sc.k) / sobolev_norm(&b.u, sc.k))
}

/// Runs every check; individual errors (CFL violations included) become failed checks.
pub fn run_invariant_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    let grid = Grid::new(config.n)?;
    let n = config.n;
    let k = SobolevIndex::default();
    let sc = SolverConfig::new(grid).with_dt(config.dt).with_k(k);
    sc.validate()?;
    let map_sc = sc.with_dt(config.map_dt.max(config.dt));
    let generic = builtin::generic(grid, config.seed);
    let mut checks = Vec::new();
    checks.push(check(
        CHECK_NAMES[0],
        n,
        steady_error(&builtin::taylor_green(grid), &sc),
    ));
    checks.push(check(
        CHECK_NAMES[1],
        n,
        steady_error(&builtin::shear(grid), &sc),
    ));
    match drifts(&generic, &sc) {
        Ok([e, z]) => {
            checks.push(check(CHECK_NAMES[2], n, Ok(e)));
            checks.push(check(CHECK_NAMES[3], n, Ok(z)));
        }
        Err(e) => {
            let msg = e.to_string();
            checks.push(check(CHECK_NAMES[2], n, Err(e)));
            checks.push(failed(CHECK_NAMES[3], n, msg));
        }
    }
    checks.push(check(CHECK_NAMES[4], n, scaling_error(&generic, &sc)));
    checks.push(check(
        CHECK_NAMES[5],
        n,
        solve(&generic, &sc).map(|s| relative_divergence(&s.u)),
    ));
    checks.push(check(
        CHECK_NAMES[6],
        n,
        frozen_vorticity_residual(&generic, &sc),
    ));
    checks.push(check(
        CHECK_NAMES[7],
        n,
        exp_derivative_error(grid, &map_sc, config.seed),
    ));
    checks.push(check(CHECK_NAMES[8], n, exp_gap(&generic, &map_sc)));
    checks.push(check(CHECK_NAMES[9], n, convergence_error(&generic, &sc)));
    let pass = checks.iter().all(|c| c.pass);
    Ok(SuiteReport {
        n,
        dt: config.dt,
        checks,
        pass,
    })
}
