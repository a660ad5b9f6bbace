//! Upscaling of constituent properties to the matrix and yarn phases.
//!
//! cargo run --example micromechanics

use wovencell::micromech::{bruggeman_conductivity, matrix_volume_fractions, upscale, ConstituentSet};

fn main() -> wovencell::Result<()> {
    let c = ConstituentSet::nominal();
    let f = matrix_volume_fractions(&c);
    println!("matrix fractions: resin {:.4}, filler {:.4}, pore {:.4}", f.resin, f.filler, f.pore);

    let meso = upscale(&c)?;
    let m = meso.matrix;
    println!("\nmatrix phase");
    println!("  k     {:.4} W/(m K)", m.conductivity);
    println!("  E, nu {:.4} GPa, {:.4}", m.young, m.poisson);
    println!("  alpha {:.3} 1e-6/K (weights sum to {:.4})", m.cte, m.cte_weight_sum);
    println!("  rho   {:.4} g/cm^3, C {:.1} J/(kg K)", m.density, m.specific_heat);

    let y = meso.yarn;
    println!("\nyarn phase (axis a along the fibers)");
    println!("  k_a, k_t       {:.4}, {:.4}", y.k_a, y.k_t);
    println!("  E_a, E_t       {:.3}, {:.3} GPa", y.e_a, y.e_t);
    println!("  G_a, G_t       {:.3}, {:.3} GPa", y.g_a, y.g_t);
    println!("  nu_at, nu_tt   {:.4}, {:.4}", y.nu_at, y.nu_tt);
    println!("  alpha_a, _t    {:.4}, {:.4}", y.alpha_a, y.alpha_t);
    println!("  D_a, D_t       {:.4}, {:.4}", y.d_a, y.d_t);

    println!("\nBruggeman, 50/50 mix of k = 1 and 10: {}", bruggeman_conductivity(&[0.5, 0.5], &[1.0, 10.0])?);
    Ok(())
}
