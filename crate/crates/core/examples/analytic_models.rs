//! Closed-form comparison models and their least-squares fits.
//!
//! cargo run --example analytic_models

use wovencell::analytic::{
    bruggeman_tortuosity, fit_model, gebart_parallel, gebart_perpendicular, mattern_weighted_average,
    voigt_reuss_bounds, FitModel, DEFAULT_SEEDS, GEBART_QUADRATIC_C,
};

fn main() -> wovencell::Result<()> {
    let b = voigt_reuss_bounds(25.2, 1.41, 0.4, 0.5)?;
    println!("bounds: Reuss {:.4} <= VRH {:.4} <= Voigt {:.4}", b.reuss, b.hill, b.voigt);

    println!("\n  v_w   parallel    perpendicular   blend");
    for i in 0..8 {
        let v = 0.3 + 0.07 * i as f64;
        let par = gebart_parallel(v, GEBART_QUADRATIC_C)?;
        let perp = gebart_perpendicular(v, 0.63, 0.79)?;
        let blend = mattern_weighted_average(par, perp.value(), 0.5)?;
        println!("  {v:.2}  {par:.4e}  {:>13.4e}  {blend:.4e}", perp.value());
    }

    let data: Vec<(f64, f64)> =
        (0..10).map(|i| 0.3 + 0.04 * i as f64).map(|v| (v, gebart_perpendicular(v, 0.63, 0.79).unwrap().value())).collect();
    let fit = fit_model(&data, FitModel::GebartPerpendicular, &DEFAULT_SEEDS)?;
    println!("\nrecovered C1 = {:.6}, V_max = {:.6}", fit.parameters[0], fit.parameters[1]);
    println!("{}", serde_json::to_string_pretty(&fit)?);
    println!("Bruggeman tau(0.4, 1.37) = {:.4}", bruggeman_tortuosity(0.4, 1.37)?);
    Ok(())
}
