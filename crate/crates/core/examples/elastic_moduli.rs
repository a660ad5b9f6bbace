//! Effective elastic constants and thermal expansion of the nominal unit cell.
//!
//! cargo run --release --example elastic_moduli -- [resolution]

use std::time::Instant;
use wovencell::elasticity::{
    build_cell_stiffness, effective_youngs_poisson, solve_shear, solve_thermal_expansion, solve_uniaxial,
    TransverseIsotropic,
};
use wovencell::micromech::{upscale, ConstituentSet};
use wovencell::voxel::discretize;

fn main() -> wovencell::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let c = ConstituentSet::nominal();
    let props = upscale(&c)?;
    let (m, y) = (props.matrix, props.yarn);
    let grid = discretize(&c.weave()?, n)?;
    let yarn = TransverseIsotropic { e_a: y.e_a, e_t: y.e_t, g_a: y.g_a, g_t: y.g_t, nu_at: y.nu_at, nu_tt: y.nu_tt };
    let cells = build_cell_stiffness(&grid, m.young, m.poisson, m.cte, &yarn, (y.alpha_a, y.alpha_t))?;
    println!("grid {}x{}x{}", grid.nx, grid.ny, grid.nz);
    let strain = 1e-3;
    for (label, axis) in [("x", 0), ("y", 1), ("z", 2)] {
        let t = Instant::now();
        let sol = solve_uniaxial(&grid, &cells, axis, strain)?;
        let (e, nu_b, nu_c) = effective_youngs_poisson(&sol, axis, strain)?;
        println!(
            "load {label}: E = {e:.3} GPa, nu = ({nu_b:.4}, {nu_c:.4})  [{} it, {:.2?}]",
            sol.stats.iterations,
            t.elapsed()
        );
    }
    for (label, plane) in [("xy", (0, 1)), ("xz", (0, 2))] {
        let t = Instant::now();
        let (g, sol) = solve_shear(&grid, &cells, plane, strain)?;
        println!("shear {label}: G = {g:.3} GPa  [{} it, {:.2?}]", sol.stats.iterations, t.elapsed());
    }
    let t = Instant::now();
    let (alpha, sol) = solve_thermal_expansion(&grid, &cells, 1.0)?;
    println!(
        "CTE: ({:.3}, {:.3}, {:.3}) 1e-6/K  [{} it, {:.2?}]",
        alpha[0],
        alpha[1],
        alpha[2],
        sol.stats.iterations,
        t.elapsed()
    );
    Ok(())
}
