//! Search for a witness direction at the zero base field and estimate the constants.

use torus_euler::construction::{estimate_constants, find_witness, MapOptions};
use torus_euler::{Grid, SobolevIndex, VectorField};

fn main() -> torus_euler::Result<()> {
    let g = Grid::new(32)?;
    let opts = MapOptions {
        dt_cap: 0.02,
        seed: 0,
        ..MapOptions::default()
    };
    let base = VectorField::zeros(g);
    let w = find_witness(&base, 4, 1e-3, &opts)?;
    let s = w.summary(SobolevIndex::default());
    println!(
        "m = {:.4} (with eps/2: {:.4}) at x* = ({:.3}, {:.3})",
        s.m, s.m_half, s.x_star[0], s.x_star[1]
    );
    println!("||w*||_H3 = {:.4}", s.w_star_norm);

    let c = estimate_constants(&base, 0.1, 6, &opts)?;
    println!(
        "C1 = {:.3} (sampled {:.3}), C2 = {:.3} (sampled {:.3})",
        c.c1, c.c1_empirical, c.c2, c.c2_empirical
    );
    Ok(())
}
