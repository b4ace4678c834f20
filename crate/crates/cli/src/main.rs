use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use torus_euler::construction::{estimate_constants, find_witness, MapOptions};
use torus_euler::experiments::{
    exit_code, run_derivative, run_invariant_suite, run_nonuniform, ExperimentConfig, FieldSource,
    SuiteConfig,
};
use torus_euler::lagrangian::{exp_map, exp_map_via_ode, frozen_vorticity_residual};
use torus_euler::solver::{solve_with_diagnostics, Diagnostics, SolverConfig};
use torus_euler::spectral::io::{self, FieldData};
use torus_euler::{Grid, SobolevIndex, VectorField};

#[derive(Parser)]
#[command(
    name = "torus-euler",
    version,
    about = "2D incompressible Euler on the flat torus"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct InitArgs {
    /// Initial velocity: a field file or `builtin:<name>`.
    #[arg(long, default_value = "builtin:taylor-green")]
    init: String,
    #[arg(long, default_value_t = 128)]
    n: usize,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl InitArgs {
    fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.n)?)
    }

    fn load(&self) -> Result<VectorField> {
        FieldSource::parse(&self.init)
            .load(self.grid()?, self.seed)
            .with_context(|| format!("loading {}", self.init))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Direct,
    Ode,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve to `t_end` and save the final velocity.
    Solve {
        #[command(flatten)]
        init: InitArgs,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of `t,energy,enstrophy,h3norm,courant`.
        #[arg(long)]
        diagnostics: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        stride: usize,
    },
    /// The time-one flow map; the displacement is saved as a vector field.
    Expmap {
        #[command(flatten)]
        init: InitArgs,
        #[arg(long, value_enum, default_value_t = Method::Direct)]
        method: Method,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invariant checks on the solver and flow maps.
    #[command(subcommand)]
    Check(CheckCommand),
    /// Search for a witness direction and point at a base field.
    Witness {
        #[arg(long, default_value = "builtin:zero")]
        base: String,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        candidates: usize,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long, default_value = "witness.json")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.02)]
        dt_cap: f64,
    },
    /// Empirical composition and Lipschitz constants on a ball about a base field.
    Constants {
        #[arg(long, default_value = "builtin:zero")]
        base: String,
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        #[arg(long, default_value_t = 8)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.02)]
        dt_cap: f64,
    },
    /// Construction experiments; outputs go to `out_dir`.
    #[command(subcommand)]
    Experiment(ExperimentCommand),
}

#[derive(Subcommand)]
enum CheckCommand {
    /// Frozen-in vorticity residual as `n,dt,residual`.
    Frozen {
        #[command(flatten)]
        init: InitArgs,
    },
    /// All invariant checks; JSON report on stdout.
    Suite {
        #[arg(long, default_value_t = 64)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = torus_euler::builtin::GENERIC_SEED)]
        seed: u64,
    },
}

#[derive(clap::Args)]
struct ExperimentArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides `out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ExperimentArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_file(p)
                .with_context(|| format!("reading {}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(o) = &self.out {
            cfg.out_dir = o.clone();
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Sequences of close initial data whose solutions stay apart.
    Nonuniform(ExperimentArgs),
    /// Difference quotients along shrinking and smooth perturbations.
    Derivative(ExperimentArgs),
}

fn save_vector(path: &Path, u: VectorField) -> Result<()> {
    io::save(path, &FieldData::Vector(u)).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve {
            init,
            t_end,
            out,
            diagnostics,
            stride,
        } => {
            let u0 = init.load()?;
            let cfg = SolverConfig::new(init.grid()?)
                .with_dt(init.dt)
                .with_t_end(t_end);
            let (snap, rows) = solve_with_diagnostics(&u0, &cfg, stride.max(1))?;
            if let Some(path) = diagnostics {
                let mut text = format!("{}\n", Diagnostics::CSV_HEADER);
                for r in &rows {
                    text.push_str(&r.csv_row());
                    text.push('\n');
                }
                std::fs::write(&path, text)?;
            }
            if let Some(path) = out {
                save_vector(&path, snap.u)?;
            }
            println!(
                "t = {}, energy = {:e}, enstrophy = {:e}",
                snap.t, snap.energy, snap.enstrophy
            );
        }
        Command::Expmap { init, method, out } => {
            let u0 = init.load()?;
            let cfg = SolverConfig::new(init.grid()?).with_dt(init.dt);
            let phi = match method {
                Method::Direct => exp_map(&u0, &cfg)?,
                Method::Ode => exp_map_via_ode(&u0, &cfg)?,
            };
            println!("max displacement = {:e}", phi.max_displacement());
            if let Some(path) = out {
                save_vector(&path, phi.into_displacement())?;
            }
        }
        Command::Check(CheckCommand::Frozen { init }) => {
            let u0 = init.load()?;
            let cfg = SolverConfig::new(init.grid()?).with_dt(init.dt);
            let r = frozen_vorticity_residual(&u0, &cfg)?;
            println!("n,dt,residual\n{},{},{:e}", init.n, init.dt, r);
        }
        Command::Check(CheckCommand::Suite { n, dt, seed }) => {
            let report = run_invariant_suite(&SuiteConfig {
                n,
                dt,
                seed,
                ..SuiteConfig::default()
            })?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            return Ok(exit_code(report.pass));
        }
        Command::Witness {
            base,
            n,
            candidates,
            eps,
            out,
            seed,
            dt_cap,
        } => {
            let grid = Grid::new(n)?;
            let u_base = FieldSource::parse(&base).load(grid, seed)?;
            let opts = MapOptions {
                k: SobolevIndex::default(),
                dt_cap,
                seed,
            };
            let w = find_witness(&u_base, candidates, eps, &opts)?;
            let stem = out
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            let w_path = out.with_file_name(format!("{stem}_w_star.field"));
            let u_path = out.with_file_name(format!("{stem}_u_base.field"));
            save_vector(&w_path, w.w_star.clone())?;
            save_vector(&u_path, w.u_base.clone())?;
            let mut json = serde_json::to_value(w.summary(opts.k))?;
            json["w_star_path"] = w_path.display().to_string().into();
            json["u_base_path"] = u_path.display().to_string().into();
            let text = serde_json::to_string_pretty(&json)?;
            std::fs::write(&out, format!("{text}\n"))?;
            println!("{text}");
        }
        Command::Constants {
            base,
            n,
            radius,
            samples,
            seed,
            dt_cap,
        } => {
            let grid = Grid::new(n)?;
            let u_base = FieldSource::parse(&base).load(grid, seed)?;
            let opts = MapOptions {
                k: SobolevIndex::default(),
                dt_cap,
                seed,
            };
            let c = estimate_constants(&u_base, radius, samples, &opts)?;
            let json = serde_json::json!({
                "C1": c.c1,
                "C2": c.c2,
                "samples": c.sample_count,
                "radius": c.radius,
            });
            println!("{}", serde_json::to_string_pretty(&json)?);
        }
        Command::Experiment(ExperimentCommand::Nonuniform(args)) => {
            let cfg = args.load()?;
            let report = run_nonuniform(&cfg)?;
            report.write(&cfg)?;
            for e in &report.summary.errors {
                eprintln!("warning: {e}");
            }
            println!("{}", serde_json::to_string_pretty(&report.summary)?);
            return Ok(exit_code(report.summary.pass));
        }
        Command::Experiment(ExperimentCommand::Derivative(args)) => {
            let cfg = args.load()?;
            let report = run_derivative(&cfg)?;
            report.write(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&report.summary)?);
            return Ok(exit_code(report.summary.pass));
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
