//! Difference quotients of the solution map along shrinking and smooth perturbations.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{
    invalid, log_log_slope, prepare_construction, Construction, ExperimentConfig, CAVEAT,
    SLOPE_THRESHOLD,
};
use crate::builtin;
use crate::construction::{make_bump, BumpSpec};
use crate::error::Result;
use crate::solver::{policy_dt, solve, SolverConfig};
use crate::spectral::{random, resample_vector, sobolev_norm, Grid, SobolevIndex, VectorField};

/// Largest relative change between the last two smooth-direction quotients.
pub const SMOOTH_CHANGE_BOUND: f64 = 0.1;
/// Stream offset of the random smooth direction.
const SMOOTH_STREAM: u64 = 1 << 23;

/// How the perturbation depends on `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeKind {
    /// `u0 + eps w` on the grid of `u0`.
    Smooth,
    /// Bump of radius `r1 eps` and norm `bump_norm` at `center` added to both
    /// members, the second also shifted by `eps w`; grid refined with `1/eps`.
    Aligned {
        center: [f64; 2],
        r1: f64,
        bump_norm: f64,
        mode_seed: u64,
    },
}

impl ProbeKind {
    pub fn label(&self) -> &'static str {
        match self {
            ProbeKind::Smooth => "smooth",
            ProbeKind::Aligned { .. } => "aligned",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbePoint {
    pub eps: f64,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub input_distance: f64,
    pub output_distance: f64,
    pub quotient: f64,
}

/// Grid for `eps` under the policy `N = max(grid_min, grid_per_n / eps)`, rounded up to even.
pub fn grid_for_eps(cfg: &ExperimentConfig, eps: f64) -> Grid {
    let raw = (cfg.grid_per_n as f64 / eps - 1e-9).ceil() as usize;
    let even = raw + raw % 2;
    Grid::new(cfg.grid_min.max(even)).expect("validated grid policy")
}

fn probe_point(
    u0: &VectorField,
    w: &VectorField,
    eps: f64,
    cfg: &ExperimentConfig,
    kind: &ProbeKind,
) -> Result<ProbePoint> {
    let k = cfg.k;
    let (a, b) = match *kind {
        ProbeKind::Smooth => (u0.clone(), u0 + &w.scaled(eps)),
        ProbeKind::Aligned {
            center,
            r1,
            bump_norm,
            mode_seed,
        } => {
            let grid = grid_for_eps(cfg, eps);
            let base = if u0.grid() == grid {
                u0.clone()
            } else {
                resample_vector(u0, grid)
            };
            let dir = if w.grid() == grid {
                w.clone()
            } else {
                resample_vector(w, grid)
            };
            let spec = BumpSpec {
                center,
                radius: r1 * eps,
                target_hk_norm: bump_norm,
                k,
                mode_seed,
            };
            let a = &base + &make_bump(&spec, grid)?;
            let b = &a + &dir.scaled(eps);
            (a, b)
        }
    };
    let grid = a.grid();
    let umax = a.max_norm().max(b.max_norm());
    let sc = SolverConfig::new(grid)
        .with_k(k)
        .with_dt(policy_dt(grid, umax, cfg.dt_cap));
    let pa = solve(&a, &sc)?;
    let pb = solve(&b, &sc)?;
    let input = sobolev_norm(&b.try_sub(&a)?, k);
    let output = sobolev_norm(&pb.u.try_sub(&pa.u)?, k);
    Ok(ProbePoint {
        eps,
        big_n: grid.n(),
        input_distance: input,
        output_distance: output,
        quotient: output / eps,
    })
}

/// Quotients `||Phi(u0 + perturbation) - Phi(u0)||_{H^k} / eps`, one per entry of `eps_list`.
pub fn run_derivative_probe(
    u0: &VectorField,
    w: &VectorField,
    eps_list: &[f64],
    cfg: &ExperimentConfig,
    kind: &ProbeKind,
) -> Result<Vec<ProbePoint>> {
    if eps_list.is_empty()
        || eps_list.iter().any(|&e| !(e > 0.0))
        || eps_list.windows(2).any(|p| p[1] >= p[0])
    {
        return Err(invalid(format!(
            "eps_list must be positive and decreasing, got {eps_list:?}"
        )));
    }
    use rayon::prelude::*;
    eps_list
        .par_iter()
        .map(|&eps| probe_point(u0, w, eps, cfg, kind))
        .collect()
}

/// Slope of `log quotient` against `log(1/eps)`.
pub fn quotient_slope(points: &[ProbePoint]) -> f64 {
    let x: Vec<f64> = points.iter().map(|p| 1.0 / p.eps).collect();
    let y: Vec<f64> = points.iter().map(|p| p.quotient).collect();
    log_log_slope(&x, &y)
}

/// `|q_last - q_prev| / |q_prev|`.
pub fn last_relative_change(points: &[ProbePoint]) -> f64 {
    match points {
        [.., a, b] => (b.quotient - a.quotient).abs() / a.quotient.abs(),
        _ => f64::NAN,
    }
}

/// Unit smooth direction for the control: random solenoidal, modes `|xi| <= 4`, `||w||_{H^k} = 1`.
pub fn smooth_direction(grid: Grid, k: SobolevIndex, seed: u64) -> VectorField {
    let w = random::random_solenoidal(grid, 4.0, 1.0, &mut random::rng(seed, SMOOTH_STREAM));
    w.scaled(1.0 / sobolev_norm(&w, k))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeSummary {
    pub caveat: String,
    pub eps_list: Vec<f64>,
    pub aligned_quotients: Vec<f64>,
    pub aligned_slope: f64,
    pub aligned_pass: bool,
    pub smooth_quotients: Vec<f64>,
    pub smooth_last_change: f64,
    pub smooth_pass: bool,
    pub m: f64,
    pub r1: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct DerivativeReport {
    pub construction: Construction,
    pub aligned: Vec<ProbePoint>,
    pub smooth: Vec<ProbePoint>,
    pub summary: DerivativeSummary,
}

/// Aligned probe around the configured base plus the Taylor-Green smooth control.
pub fn run_derivative(cfg: &ExperimentConfig) -> Result<DerivativeReport> {
    cfg.validate()?;
    let ns: Vec<usize> = cfg
        .eps_list
        .iter()
        .map(|e| (1.0 / e).ceil() as usize)
        .collect();
    let construction = prepare_construction(cfg, &ns)?;
    let kind = ProbeKind::Aligned {
        center: construction.witness.x_star,
        r1: construction.r1,
        bump_norm: construction.r / 2.0,
        mode_seed: cfg.mode_seed,
    };
    let base = &construction.witness.u_base;
    let aligned = run_derivative_probe(
        base,
        &construction.witness.w_star,
        &cfg.eps_list,
        cfg,
        &kind,
    )?;
    let g = Grid::new(cfg.grid_min)?;
    let smooth = run_derivative_probe(
        &builtin::taylor_green(g),
        &smooth_direction(g, cfg.k, cfg.seed),
        &cfg.eps_list,
        cfg,
        &ProbeKind::Smooth,
    )?;
    let aligned_slope = quotient_slope(&aligned);
    let aligned_pass = aligned_slope >= SLOPE_THRESHOLD;
    let change = last_relative_change(&smooth);
    let smooth_pass = change <= SMOOTH_CHANGE_BOUND;
    let summary = DerivativeSummary {
        caveat: CAVEAT.to_string(),
        eps_list: cfg.eps_list.clone(),
        aligned_quotients: aligned.iter().map(|p| p.quotient).collect(),
        aligned_slope,
        aligned_pass,
        smooth_quotients: smooth.iter().map(|p| p.quotient).collect(),
        smooth_last_change: change,
        smooth_pass,
        m: construction.m(),
        r1: construction.r1,
        r: construction.r,
        pass: aligned_pass && smooth_pass,
    };
    Ok(DerivativeReport {
        construction,
        aligned,
        smooth,
        summary,
    })
}

pub const PROBE_HEADER: &str = "kind,eps,N,input_distance,output_distance,quotient";

impl DerivativeReport {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{PROBE_HEADER}\n");
        for (kind, pts) in [("aligned", &self.aligned), ("smooth", &self.smooth)] {
            for p in pts.iter() {
                let _ = writeln!(
                    s,
                    "{kind},{:e},{},{:e},{:e},{:e}",
                    p.eps, p.big_n, p.input_distance, p.output_distance, p.quotient
                );
            }
        }
        s
    }

    /// Writes `probe.csv`, `summary.json` and `config.txt` into `cfg.out_dir`.
    pub fn write(&self, cfg: &ExperimentConfig) -> Result<()> {
        let dir = &cfg.out_dir;
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("probe.csv"), self.to_csv())?;
        std::fs::write(
            dir.join("summary.json"),
            serde_json::to_string_pretty(&self.summary)? + "\n",
        )?;
        std::fs::write(dir.join("config.txt"), cfg.to_text())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_direction_gives_zero_quotient() {
        let g = Grid::new(16).unwrap();
        let cfg = ExperimentConfig::default();
        let pts = run_derivative_probe(
            &builtin::shear(g),
            &VectorField::zeros(g),
            &[1.0],
            &cfg,
            &ProbeKind::Smooth,
        )
        .unwrap();
        assert_eq!(pts[0].quotient, 0.0);
        assert_eq!(ProbeKind::Smooth.label(), "smooth");
    }

    #[test]
    fn eps_grid_policy() {
        let cfg = ExperimentConfig::default();
        let ns: Vec<usize> = [0.5, 0.25, 0.125, 0.3]
            .iter()
            .map(|&e| grid_for_eps(&cfg, e).n())
            .collect();
        assert_eq!(ns, vec![128, 256, 512, 214]);
    }

    #[test]
    fn rejects_increasing_eps() {
        let g = Grid::new(8).unwrap();
        let u = VectorField::zeros(g);
        assert!(run_derivative_probe(
            &u,
            &u,
            &[0.1, 0.2],
            &ExperimentConfig::default(),
            &ProbeKind::Smooth
        )
        .is_err());
    }
}
