//! A reduced non-uniformity run over n = 1, 2. The full run uses `ExperimentConfig::default()`
//! (or `torus-euler experiment nonuniform`) and takes several minutes.

use torus_euler::experiments::{run_nonuniform, ExperimentConfig};

fn main() -> torus_euler::Result<()> {
    let mut cfg = ExperimentConfig::parse(
        "n_list = 1, 2\ngrid_min = 64\ngrid_per_n = 64\nwitness_n = 16\ncandidates = 2\nconstant_samples = 5\n",
    )?;
    cfg.out_dir = std::env::temp_dir().join("torus_euler_nonuniform");
    let report = run_nonuniform(&cfg)?;
    report.write(&cfg)?;
    for r in &report.records {
        println!(
            "n={} N={} ratio={:.3} separation={:.3} bound={:.3} disjoint={}",
            r.n, r.big_n, r.ratio, r.particle_separation, r.separation_bound, r.supports_disjoint
        );
    }
    let s = &report.summary;
    println!(
        "slope {:.3}, null max ratio {:.3}, pass {}",
        s.slope, s.null_max_ratio, s.pass
    );
    println!("outputs in {}", cfg.out_dir.display());
    Ok(())
}
