//! Difference quotients of the solution map along a smooth direction and along the
//! shrinking construction, on coarse grids.

use torus_euler::experiments::{run_derivative, ExperimentConfig};

fn main() -> torus_euler::Result<()> {
    let cfg = ExperimentConfig::parse(
        "eps_list = 0.5, 0.25\ngrid_min = 64\ngrid_per_n = 64\nwitness_n = 16\ncandidates = 2\nconstant_samples = 5\n",
    )?;
    let report = run_derivative(&cfg)?;
    print!("{}", report.to_csv());
    let s = &report.summary;
    println!(
        "aligned slope {:.3}, smooth change {:.2e}",
        s.aligned_slope, s.smooth_last_change
    );
    Ok(())
}
