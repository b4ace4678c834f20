//! The non-uniform continuity experiment, the derivative probe and the invariant suite.

mod config;
mod derivative;
mod output;
mod suite;
mod support;

pub use config::{ExperimentConfig, FieldSource, Setting};
pub use derivative::{
    grid_for_eps, last_relative_change, quotient_slope, run_derivative, run_derivative_probe,
    smooth_direction, DerivativeReport, DerivativeSummary, ProbeKind, ProbePoint, PROBE_HEADER,
    SMOOTH_CHANGE_BOUND,
};
pub use output::{
    parse_records_csv, read_records_csv, records_to_csv, write_records_csv, RECORDS_HEADER,
};
pub use suite::{run_invariant_suite, tolerance, Check, SuiteConfig, SuiteReport, CHECK_NAMES};
pub use support::{circle_points, disks_disjoint, TransportedDisk, BOUNDARY_POINTS};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construction::{
    build_sequence_pair, estimate_constants, find_witness, EstimatedConstants, MapOptions, Witness,
    MIN_RADIUS_SPACINGS,
};
use crate::error::{Error, Result};
use crate::solver::{policy_dt, Evolution, SolverConfig};
use crate::spectral::{sobolev_norm, sobolev_norm_scalar, torus_distance, SobolevIndex};

/// Separation must reach this fraction of `m / (2n)`.
pub const SEPARATION_FACTOR: f64 = 0.8;
/// Least-squares log-log slope required of the ratio trend.
pub const SLOPE_THRESHOLD: f64 = 0.5;
/// Largest ratio tolerated in the null-control run.
pub const NULL_RATIO_BOUND: f64 = 10.0;
/// Margin of the automatic `r1` over the resolvability minimum.
pub const R1_MARGIN: f64 = 1.05;
/// `R = auto` is this multiple of `||w*||_{H^k}`.
pub const AUTO_R_FACTOR: f64 = 2.02;

pub const CAVEAT: &str =
    "Refined-resolution trend at desk scale: the grid grows with n because at fixed N \
the discrete solution map is smooth. The numbers are consistent with, but do not prove, the \
infinite-dimensional statement.";

/// One row of the non-uniformity experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub input_distance: f64,
    pub output_distance: f64,
    pub vorticity_distance: f64,
    pub ratio: f64,
    pub particle_separation: f64,
    pub separation_bound: f64,
    pub supports_disjoint: bool,
}

impl ExperimentRecord {
    /// Placeholder for a failed `n`: all measurements NaN.
    pub fn failed(n: usize, big_n: usize) -> Self {
        Self {
            n,
            big_n,
            input_distance: f64::NAN,
            output_distance: f64::NAN,
            vorticity_distance: f64::NAN,
            ratio: f64::NAN,
            particle_separation: f64::NAN,
            separation_bound: f64::NAN,
            supports_disjoint: false,
        }
    }

    pub fn is_failed(&self) -> bool {
        self.output_distance.is_nan()
    }
}

/// `(separation, bound, separation >= 0.8 bound)`.
pub fn check_separation(particle_separation: f64, separation_bound: f64) -> (f64, f64, bool) {
    (
        particle_separation,
        separation_bound,
        particle_separation >= SEPARATION_FACTOR * separation_bound,
    )
}

/// `output / input`, with `0/0 = 0`.
pub fn distance_ratio(output: f64, input: f64) -> f64 {
    if input == 0.0 {
        if output == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        output / input
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0 && a.is_finite() && b.is_finite())
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// The witness, constants and scalings shared by every run of an experiment.
#[derive(Debug, Clone)]
pub struct Construction {
    /// Witness found with `||w||_{H^k} = 1`.
    pub unit_witness: Witness,
    /// The witness actually used: `w* = scale * w`, `m = scale * m_unit`.
    pub witness: Witness,
    pub constants: EstimatedConstants,
    pub scale: f64,
    /// Bump radius at `n = 1`, so that `r_n = r1 / n`.
    pub r1: f64,
    /// Ball radius `R`.
    pub r: f64,
    pub k: SobolevIndex,
}

impl Construction {
    pub fn m(&self) -> f64 {
        self.witness.m
    }

    pub fn w_star_norm(&self) -> f64 {
        sobolev_norm(&self.witness.w_star, self.k)
    }
}

/// Smallest `r1` with `r1 / n >= 8 h(N(n))` for every `n`.
pub fn minimal_r1(cfg: &ExperimentConfig, ns: &[usize]) -> f64 {
    ns.iter()
        .map(|&n| n as f64 * MIN_RADIUS_SPACINGS * cfg.grid_for(n).spacing())
        .fold(0.0, f64::max)
}

/// Finds the witness and constants on the coarse grid and fixes the scalings.
pub fn prepare_construction(cfg: &ExperimentConfig, ns: &[usize]) -> Result<Construction> {
    let grid = crate::spectral::Grid::new(cfg.witness_n)?;
    let base = cfg.base.load(grid, cfg.seed)?;
    let opts = MapOptions {
        k: cfg.k,
        dt_cap: cfg.dt_cap,
        seed: cfg.seed,
    };
    let unit = find_witness(&base, cfg.candidates, cfg.eps_fd, &opts)?;
    let constants = estimate_constants(&base, cfg.constant_radius, cfg.constant_samples, &opts)?;
    let r1 = match cfg.r1 {
        Setting::Auto => R1_MARGIN * minimal_r1(cfg, ns),
        Setting::Fixed(v) => v,
    };
    let scale = 8.0 * constants.c2 * r1 / unit.m;
    let witness = unit.scaled(scale);
    let w_norm = sobolev_norm(&witness.w_star, cfg.k);
    let r = match cfg.r {
        Setting::Auto => AUTO_R_FACTOR * w_norm,
        Setting::Fixed(v) => v,
    };
    Ok(Construction {
        unit_witness: unit,
        witness,
        constants,
        scale,
        r1,
        r,
        k: cfg.k,
    })
}

/// Solves both members of the `n`-th pair and measures them.
pub fn run_record(
    construction: &Construction,
    cfg: &ExperimentConfig,
    n: usize,
    r: f64,
) -> Result<ExperimentRecord> {
    let grid = cfg.grid_for(n);
    let k = construction.k;
    let pair = build_sequence_pair(
        n,
        r,
        &construction.witness,
        &construction.constants,
        grid,
        k,
        cfg.mode_seed,
    )?;
    let umax = pair.u0.max_norm().max(pair.u0_tilde.max_norm());
    let sc = SolverConfig::new(grid)
        .with_k(k)
        .with_dt(policy_dt(grid, umax, cfg.dt_cap));
    let x_star = construction.witness.x_star;
    let mut particles = vec![x_star];
    particles.extend(circle_points(x_star, pair.r_n, BOUNDARY_POINTS));
    let evolve = |u0| Evolution::new(sc).with_particles(particles.clone()).run(u0);
    let a = evolve(&pair.u0)?;
    let b = evolve(&pair.u0_tilde)?;
    let input = sobolev_norm(&pair.u0_tilde.try_sub(&pair.u0)?, k);
    let output = sobolev_norm(&a.velocity().try_sub(&b.velocity())?, k);
    let vort = sobolev_norm_scalar(&a.vorticity().try_sub(&b.vorticity())?, k.minus_one());
    let (pa, pb) = (a.particles(), b.particles());
    let separation = torus_distance(pa[0], pb[0]);
    let disjoint = disks_disjoint(
        &TransportedDisk::new(pa[0], &pa[1..]),
        &TransportedDisk::new(pb[0], &pb[1..]),
    );
    Ok(ExperimentRecord {
        n,
        big_n: grid.n(),
        input_distance: input,
        output_distance: output,
        vorticity_distance: vort,
        ratio: distance_ratio(output, input),
        particle_separation: separation,
        separation_bound: construction.m() / (2.0 * n as f64),
        supports_disjoint: disjoint,
    })
}

/// Runs every `n` (in parallel, collected in order); failures become NaN rows.
pub fn run_records(
    construction: &Construction,
    cfg: &ExperimentConfig,
    r: f64,
) -> (Vec<ExperimentRecord>, Vec<String>) {
    let results: Vec<(usize, Result<ExperimentRecord>)> = cfg
        .n_list
        .par_iter()
        .map(|&n| (n, run_record(construction, cfg, n, r)))
        .collect();
    let mut records = Vec::new();
    let mut errors = Vec::new();
    for (n, res) in results {
        match res {
            Ok(rec) => records.push(rec),
            Err(e) => {
                errors.push(format!("n = {n}: {e}"));
                records.push(ExperimentRecord::failed(n, cfg.grid_for(n).n()));
            }
        }
    }
    (records, errors)
}

/// Trend analysis written to `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonuniformSummary {
    pub caveat: String,
    pub m: f64,
    pub m_unit: f64,
    pub scale: f64,
    pub x_star: [f64; 2],
    pub w_star_norm: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub r1: f64,
    pub k: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    pub slope: f64,
    pub ratio_increasing: bool,
    pub trend_pass: bool,
    pub null_ratios: Vec<f64>,
    pub null_max_ratio: f64,
    pub null_pass: bool,
    pub separation_pass: Vec<bool>,
    /// `output_distance / R` per `n`; reported only.
    pub output_over_r: Vec<f64>,
    pub errors: Vec<String>,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct NonuniformReport {
    pub construction: Construction,
    pub records: Vec<ExperimentRecord>,
    pub null_records: Vec<ExperimentRecord>,
    pub summary: NonuniformSummary,
}

pub fn summarize(
    construction: &Construction,
    records: &[ExperimentRecord],
    null_records: &[ExperimentRecord],
    errors: Vec<String>,
) -> NonuniformSummary {
    let ns: Vec<f64> = records.iter().map(|r| r.n as f64).collect();
    let ratios: Vec<f64> = records.iter().map(|r| r.ratio).collect();
    let slope = log_log_slope(&ns, &ratios);
    let increasing = ratios.windows(2).all(|w| w[1] > w[0]) && ratios.iter().all(|r| r.is_finite());
    let null_ratios: Vec<f64> = null_records.iter().map(|r| r.ratio).collect();
    let null_max = null_ratios.iter().cloned().fold(0.0, f64::max);
    let null_pass = null_ratios
        .iter()
        .all(|r| r.is_finite() && *r <= NULL_RATIO_BOUND);
    let trend_pass = increasing && slope >= SLOPE_THRESHOLD;
    NonuniformSummary {
        caveat: CAVEAT.to_string(),
        m: construction.m(),
        m_unit: construction.unit_witness.m,
        scale: construction.scale,
        x_star: construction.witness.x_star,
        w_star_norm: construction.w_star_norm(),
        r: construction.r,
        r1: construction.r1,
        k: construction.k.value(),
        c1: construction.constants.c1,
        c2: construction.constants.c2,
        slope,
        ratio_increasing: increasing,
        trend_pass,
        null_ratios,
        null_max_ratio: null_max,
        null_pass,
        separation_pass: records
            .iter()
            .map(|r| check_separation(r.particle_separation, r.separation_bound).2)
            .collect(),
        output_over_r: records
            .iter()
            .map(|r| r.output_distance / construction.r)
            .collect(),
        pass: trend_pass && null_pass && errors.is_empty(),
        errors,
    }
}

/// Full construction plus the `R = 0` null control.
pub fn run_nonuniform(cfg: &ExperimentConfig) -> Result<NonuniformReport> {
    cfg.validate()?;
    let construction = prepare_construction(cfg, &cfg.n_list)?;
    let (records, mut errors) = run_records(&construction, cfg, construction.r);
    let (null_records, null_errors) = run_records(&construction, cfg, 0.0);
    errors.extend(
        null_errors
            .into_iter()
            .map(|e| format!("null control, {e}")),
    );
    let summary = summarize(&construction, &records, &null_records, errors);
    Ok(NonuniformReport {
        construction,
        records,
        null_records,
        summary,
    })
}

impl NonuniformReport {
    /// Writes `records.csv`, `null_records.csv`, `summary.json` and the effective `config.txt`.
    pub fn write(&self, cfg: &ExperimentConfig) -> Result<()> {
        let dir = &cfg.out_dir;
        std::fs::create_dir_all(dir)?;
        write_records_csv(dir.join("records.csv"), &self.records)?;
        write_records_csv(dir.join("null_records.csv"), &self.null_records)?;
        std::fs::write(
            dir.join("summary.json"),
            serde_json::to_string_pretty(&self.summary)? + "\n",
        )?;
        std::fs::write(dir.join("config.txt"), cfg.to_text())?;
        Ok(())
    }
}

/// Process exit code: 0 all assertions pass, 2 some failed.
pub fn exit_code(pass: bool) -> i32 {
    if pass {
        0
    } else {
        2
    }
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(0.75)).collect();
        assert!((log_log_slope(&x, &y) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn separation_check() {
        assert!(!check_separation(0.0, 1.0).2);
        assert!(check_separation(0.8, 1.0).2);
        assert!(!check_separation(0.79, 1.0).2);
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(distance_ratio(0.0, 0.0), 0.0);
        assert_eq!(distance_ratio(1.0, 4.0), 0.25);
    }

    #[test]
    fn auto_r1_meets_the_guard() {
        let cfg = ExperimentConfig::default();
        let r1 = minimal_r1(&cfg, &cfg.n_list);
        for &n in &cfg.n_list {
            assert!(
                r1 / n as f64 >= MIN_RADIUS_SPACINGS * cfg.grid_for(n).spacing() * (1.0 - 1e-12)
            );
        }
    }
}
