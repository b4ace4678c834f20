//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::time::{Duration, Instant};

use torus_euler::builtin;
use torus_euler::experiments::{
    check_separation, prepare_construction, run_derivative, run_nonuniform, run_record,
    ExperimentConfig,
};
use torus_euler::lagrangian::{exp_map, exp_map_via_ode, frozen_vorticity_residual};
use torus_euler::solver::{apply_scaling_map, solve, SolverConfig};
use torus_euler::spectral::{random, sobolev_norm};
use torus_euler::{Grid, Result, SobolevIndex};

type Criterion = (&'static str, fn() -> Result<Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn h3() -> SobolevIndex {
    SobolevIndex::default()
}

fn grid(n: usize) -> Grid {
    Grid::new(n).unwrap()
}

fn c1_steady_states() -> Result<Outcome> {
    let g = grid(128);
    let sc = SolverConfig::new(g).with_dt(1e-3);
    let mut detail = Vec::new();
    let mut pass = true;
    for (name, u0) in [
        ("taylor-green", builtin::taylor_green(g)),
        ("shear", builtin::shear(g)),
    ] {
        let t = Instant::now();
        let u1 = solve(&u0, &sc)?.u;
        let err = sobolev_norm(&u1.try_sub(&u0)?, h3());
        let secs = t.elapsed().as_secs_f64();
        pass &= err <= 1e-6 && secs <= 30.0;
        detail.push(format!("{name}: H3 error {err:.2e} in {secs:.1} s"));
    }
    Ok(Outcome {
        pass,
        detail: detail.join("; "),
    })
}

fn c2_conservation() -> Result<Outcome> {
    let g = grid(128);
    let u0 = builtin::random_band_limited(g, 8.0, 1.0, 7);
    let sc = SolverConfig::new(g).with_dt(1e-3);
    let first = solve(&u0, &sc.with_t_end(0.0))?;
    let last = solve(&u0, &sc)?;
    let de = (last.energy - first.energy).abs() / first.energy;
    let dz = (last.enstrophy - first.enstrophy).abs() / first.enstrophy;
    Ok(Outcome {
        pass: de <= 1e-6 && dz <= 1e-6,
        detail: format!("energy drift {de:.2e}, enstrophy drift {dz:.2e}"),
    })
}

fn c3_scaling() -> Result<Outcome> {
    let g = grid(128);
    let u0 = builtin::generic(g, builtin::GENERIC_SEED);
    let sc = SolverConfig::new(g).with_dt(1e-3);
    let mut worst = 0.0f64;
    for t in [0.25, 0.5, 2.0] {
        let direct = solve(&u0, &sc.with_t_end(t))?.u;
        let scaled = apply_scaling_map(&u0, t, &sc)?.u;
        worst = worst.max(sobolev_norm(&direct.try_sub(&scaled)?, h3()));
    }
    Ok(Outcome {
        pass: worst <= 1e-6,
        detail: format!("max H3 gap over T in {{0.25, 0.5, 2}}: {worst:.2e}"),
    })
}

fn c4_frozen() -> Result<Outcome> {
    let fine = {
        let g = grid(128);
        frozen_vorticity_residual(
            &builtin::generic(g, builtin::GENERIC_SEED),
            &SolverConfig::new(g).with_dt(1e-3),
        )?
    };
    let coarse = {
        let g = grid(64);
        frozen_vorticity_residual(
            &builtin::generic(g, builtin::GENERIC_SEED),
            &SolverConfig::new(g).with_dt(2e-3),
        )?
    };
    let factor = coarse / fine;
    Ok(Outcome {
        pass: fine <= 1e-4 && factor >= 4.0,
        detail: format!(
            "residual {fine:.2e} at N=128; {coarse:.2e} at N=64, dt=2e-3 (factor {factor:.1})"
        ),
    })
}

fn c5_oracle() -> Result<Outcome> {
    let gap = |n: usize| -> Result<f64> {
        let g = grid(n);
        let u0 = builtin::generic(g, builtin::GENERIC_SEED);
        let sc = SolverConfig::new(g).with_dt(1e-2);
        exp_map(&u0, &sc)?.max_gap(&exp_map_via_ode(&u0, &sc)?)
    };
    let (coarse, fine) = (gap(32)?, gap(64)?);
    Ok(Outcome {
        pass: fine <= 1e-4 && fine < coarse,
        detail: format!("max nodal gap {fine:.2e} at N=64, {coarse:.2e} at N=32"),
    })
}

fn c6_exp_derivative() -> Result<Outcome> {
    let g = grid(32);
    let sc = SolverConfig::new(g).with_dt(1e-2);
    let mut worst = [0.0f64; 2];
    let mut improving = true;
    for j in 0..5 {
        let w = random::random_solenoidal(g, 3.0, 1.0, &mut random::rng(11, j));
        let w = w.scaled(1.0 / w.max_norm());
        let err = |eps: f64| -> Result<f64> {
            let fd = exp_map(&w.scaled(eps), &sc)?
                .into_displacement()
                .scaled(1.0 / eps);
            Ok(fd.try_sub(&w)?.max_norm() / w.max_norm())
        };
        let (a, b) = (err(1e-3)?, err(1e-4)?);
        improving &= b < a;
        worst = [worst[0].max(a), worst[1].max(b)];
    }
    Ok(Outcome {
        pass: worst[0] <= 5e-2 && improving,
        detail: format!(
            "max relative error {:.2e} at eps=1e-3, {:.2e} at eps=1e-4",
            worst[0], worst[1]
        ),
    })
}

fn c7_separation() -> Result<Outcome> {
    let cfg = ExperimentConfig {
        grid_min: 256,
        n_list: vec![2],
        ..ExperimentConfig::default()
    };
    let t = Instant::now();
    let c = prepare_construction(&cfg, &cfg.n_list)?;
    let rec = run_record(&c, &cfg, 2, c.r)?;
    let secs = t.elapsed().as_secs_f64();
    let (sep, bound, ok) = check_separation(rec.particle_separation, rec.separation_bound);
    Ok(Outcome {
        pass: ok && rec.supports_disjoint && secs <= 600.0,
        detail: format!(
            "N={}: separation {sep:.3} vs 0.8 m/(2n) = {:.3}, supports disjoint = {}, {secs:.0} s",
            rec.big_n,
            0.8 * bound,
            rec.supports_disjoint
        ),
    })
}

fn c8_trend() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let cfg = ExperimentConfig {
        out_dir: dir.path().to_path_buf(),
        ..ExperimentConfig::default()
    };
    let t = Instant::now();
    let report = run_nonuniform(&cfg)?;
    report.write(&cfg)?;
    let secs = t.elapsed().as_secs_f64();
    let s = &report.summary;
    let ratios: Vec<String> = report
        .records
        .iter()
        .map(|r| format!("{:.2}", r.ratio))
        .collect();
    Ok(Outcome {
        pass: s.trend_pass && s.null_pass && s.errors.is_empty() && secs <= 3600.0,
        detail: format!(
            "ratios [{}], slope {:.3}, null max ratio {:.3}, {secs:.0} s",
            ratios.join(", "),
            s.slope,
            s.null_max_ratio
        ),
    })
}

fn c9_derivative() -> Result<Outcome> {
    let cfg = ExperimentConfig::default();
    let report = run_derivative(&cfg)?;
    let s = &report.summary;
    Ok(Outcome {
        pass: s.pass,
        detail: format!(
            "aligned slope {:.3}, smooth change between last two eps {:.2e}",
            s.aligned_slope, s.smooth_last_change
        ),
    })
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("steady states are fixed points", c1_steady_states),
        ("energy and enstrophy conservation", c2_conservation),
        ("scaling law", c3_scaling),
        ("frozen-in vorticity", c4_frozen),
        ("exp map against the Lagrangian ODE", c5_oracle),
        (
            "derivative of exp at zero is the identity",
            c6_exp_derivative,
        ),
        ("separation bound at n = 2", c7_separation),
        ("non-uniformity trend with null control", c8_trend),
        ("derivative probe", c9_derivative),
    ];
    let filter: Option<usize> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .and_then(|v| v.parse().ok());
    let mut failed = 0;
    let start = Instant::now();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = i + 1;
        if filter.is_some_and(|f| f != id) {
            continue;
        }
        let t = Instant::now();
        let (status, detail) = match run() {
            Ok(o) => (if o.pass { "PASS" } else { "FAIL" }, o.detail),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!(
            "{status} criterion {id}: {name} ({detail}) [{:.1} s]",
            t.elapsed().as_secs_f64()
        );
    }
    let total: Duration = start.elapsed();
    println!(
        "acceptance: {failed} failed, total {:.0} s",
        total.as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
