//! `omega(t) o phi(t) = omega_0` along the flow, at two resolutions.

use torus_euler::builtin;
use torus_euler::lagrangian::frozen_vorticity_residual;
use torus_euler::solver::SolverConfig;
use torus_euler::Grid;

fn main() -> torus_euler::Result<()> {
    println!("n,dt,residual");
    for (n, dt) in [(32, 4e-3), (64, 2e-3)] {
        let g = Grid::new(n)?;
        let u0 = builtin::generic(g, builtin::GENERIC_SEED);
        let r = frozen_vorticity_residual(&u0, &SolverConfig::new(g).with_dt(dt))?;
        println!("{n},{dt},{r:.3e}");
    }
    Ok(())
}
