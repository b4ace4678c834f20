//! Steady flows stay put, generic flows conserve energy and enstrophy.

use torus_euler::builtin;
use torus_euler::solver::{solve, solve_with_diagnostics, Diagnostics, SolverConfig};
use torus_euler::spectral::sobolev_norm;
use torus_euler::{Grid, SobolevIndex};

fn main() -> torus_euler::Result<()> {
    let g = Grid::new(64)?;
    let sc = SolverConfig::new(g).with_dt(2e-3);
    let k = SobolevIndex::default();
    for (name, u0) in [
        ("taylor-green", builtin::taylor_green(g)),
        ("shear", builtin::shear(g)),
    ] {
        let u1 = solve(&u0, &sc)?.u;
        println!(
            "{name:>12}: ||Phi_1(u0) - u0||_H3 = {:.2e}",
            sobolev_norm(&u1.try_sub(&u0)?, k)
        );
    }

    let u0 = builtin::random_band_limited(g, 8.0, 1.0, 7);
    let (_, rows) = solve_with_diagnostics(&u0, &sc, 100)?;
    println!("{}", Diagnostics::CSV_HEADER);
    for row in &rows {
        println!("{}", row.csv_row());
    }
    Ok(())
}
