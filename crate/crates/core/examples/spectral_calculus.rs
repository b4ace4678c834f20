//! Derivatives, Biot-Savart and Sobolev norms on a 32x32 torus grid.

use torus_euler::spectral::{
    biot_savart, relative_divergence, sobolev_norm, sobolev_norm_scalar, vorticity_of,
};
use torus_euler::{Grid, ScalarField, SobolevIndex};

fn main() -> torus_euler::Result<()> {
    let g = Grid::new(32)?;
    let omega = ScalarField::from_fn(g, |x, y| 2.0 * x.sin() * y.sin() + (3.0 * y).cos());
    let u = biot_savart(&omega)?;
    let back = vorticity_of(&u);
    let err = back
        .values()
        .iter()
        .zip(omega.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("max |curl(BS(omega)) - omega| = {err:.2e}");
    println!(
        "relative divergence of u      = {:.2e}",
        relative_divergence(&u)
    );

    for s in [0.0, 1.0, 2.0, 3.0] {
        let k = SobolevIndex::new(s)?;
        println!(
            "H^{s}: ||u|| = {:.6}, ||omega|| = {:.6}",
            sobolev_norm(&u, k),
            sobolev_norm_scalar(&omega, k)
        );
    }
    Ok(())
}
