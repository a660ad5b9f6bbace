//! Effective thermal conductivity of the nominal unit cell.
//!
//! cargo run --release --example conductivity -- [resolution]

use std::time::Instant;
use wovencell::micromech::{matrix_props, yarn_props, ConstituentSet};
use wovencell::transport::effective_conductivity;
use wovencell::voxel::discretize;

fn main() -> wovencell::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let c = ConstituentSet::nominal();
    let m = matrix_props(&c)?;
    let y = yarn_props(&c, &m)?;
    let grid = discretize(&c.weave()?, n)?;
    println!("grid {}x{}x{}, weave fraction {:.4}", grid.nx, grid.ny, grid.nz, grid.weave_fraction());
    for (label, dir) in [("in-plane", 0), ("out-of-plane", 1)] {
        let start = Instant::now();
        let (k, diag) = effective_conductivity(&grid, m.conductivity, y.k_a, y.k_t, dir)?;
        println!(
            "{label:>13}: k = {k:.4} W/(m K)  ({} iterations, residual {:.1e}, {:.2?})",
            diag.iterations,
            diag.relative_residual,
            start.elapsed()
        );
    }
    Ok(())
}
