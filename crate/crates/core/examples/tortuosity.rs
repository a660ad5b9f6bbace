//! Diffusive tortuosity of the nominal cell and a sweep over fiber packing.
//!
//! cargo run --release --example tortuosity -- [resolution]

use wovencell::analytic::{fit_model, FitModel, DEFAULT_SEEDS};
use wovencell::micromech::{yarn_diffusivity, ConstituentSet};
use wovencell::transport::{effective_tortuosity, Tortuosity};
use wovencell::voxel::discretize;

fn main() -> wovencell::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    let mut points = [Vec::new(), Vec::new()];
    println!(" v_f_w   gap   solid   tau_ip   tau_oop");
    for (v, g) in [(0.5, 0.1), (0.6, 0.2), (0.7, 0.35), (0.8, 0.5), (0.9, 0.6)] {
        let mut c = ConstituentSet::nominal();
        c.v_f_w = v;
        c.g = g;
        let grid = discretize(&c.weave()?, n)?;
        let solid = v * grid.weave_fraction();
        let (d_a, d_t) = yarn_diffusivity(v);
        let mut taus = [f64::NAN; 2];
        for (k, dir) in [0, 1].into_iter().enumerate() {
            if let (Tortuosity::Finite { tau, .. }, _) = effective_tortuosity(&grid, solid, d_a, d_t, dir)? {
                taus[k] = tau;
                points[k].push((solid, tau));
            }
        }
        println!(" {v:.2}   {g:.2}   {solid:.3}   {:.4}   {:.4}", taus[0], taus[1]);
    }
    for (label, data) in ["in-plane", "out-of-plane"].iter().zip(&points) {
        let fit = fit_model(data, FitModel::Bruggeman, &DEFAULT_SEEDS)?;
        println!("{label} Bruggeman exponent {:.3} (residual {:.2e})", fit.parameters[0], fit.residual_norm);
    }
    Ok(())
}
