//! In-plane and out-of-plane weave permeability for a sweep of tow gaps.
//!
//! cargo run --release --example permeability -- [resolution]

use std::time::Instant;
use wovencell::geometry::{cross_section_area, WeaveParams};
use wovencell::stokes::{permeability, solve_stokes, FluidMask, StokesOutcome};

fn main() -> wovencell::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(32);
    println!("{:>6} {:>8} {:>14} {:>14} {:>14}", "gap", "fluid", "kappa_ip", "kappa_oop", "kappa_oop/A_w");
    for gap in [0.0, 0.05, 0.2, 0.35, 0.5] {
        let p = WeaveParams::new(0.125, 0.03, 0.65, gap, 0.7)?;
        let mask = FluidMask::from_weave(&p, n)?;
        let t = Instant::now();
        let mut out = Vec::new();
        for dir in [0, 1] {
            out.push(match solve_stokes(&mask, dir, 1.0, 1.0)? {
                StokesOutcome::Flow(s) => {
                    eprintln!("  gap {gap} dir {dir}: {} iterations", s.stats.iterations);
                    permeability(&s)
                }
                StokesOutcome::Blocked => 0.0,
            });
        }
        println!(
            "{gap:>6.2} {:>8.4} {:>14.4e} {:>14.4e} {:>14.4e}   ({:.2?})",
            mask.fluid_fraction(),
            out[0],
            out[1],
            out[1] / cross_section_area(&p),
            t.elapsed()
        );
    }
    Ok(())
}
