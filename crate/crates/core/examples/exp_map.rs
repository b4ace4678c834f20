//! The exponential map two ways: co-advected grid nodes and the Lagrangian ODE.

use torus_euler::builtin;
use torus_euler::lagrangian::{exp_map, exp_map_via_ode, invert_map, FlowMap};
use torus_euler::solver::SolverConfig;
use torus_euler::Grid;

fn main() -> torus_euler::Result<()> {
    for n in [16, 32, 64] {
        let g = Grid::new(n)?;
        let u0 = builtin::generic(g, builtin::GENERIC_SEED);
        let sc = SolverConfig::new(g).with_dt(1e-2);
        let direct = exp_map(&u0, &sc)?;
        let ode = exp_map_via_ode(&u0, &sc)?;
        let det = direct.jacobian_determinant();
        let dev = det
            .values()
            .iter()
            .map(|d| (d - 1.0).abs())
            .fold(0.0, f64::max);
        println!(
            "N={n:>3}: gap {:.2e}, max |det - 1| {dev:.2e}, max displacement {:.4}",
            direct.max_gap(&ode)?,
            direct.max_displacement()
        );
        if n == 64 {
            let inv = invert_map(&direct)?;
            let round = direct.compose(&inv)?.max_gap(&FlowMap::identity(g))?;
            println!("        phi o phi^-1 vs id: {round:.2e}");
        }
    }
    Ok(())
}
