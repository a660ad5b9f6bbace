//! Closed-form geometry of a plain-weave unit cell and STL export of its tows.
//!
//! cargo run --release --example weave_geometry -- [output-dir]

use wovencell::geometry::{
    analytic_fiber_volume_fraction, cross_section_area, half_thickness_profile, phase_at_point, tow_volume,
    v_max_area_density, waviness, weave_volume_fraction, WeaveParams,
};
use wovencell::stl::export_stl;

fn main() -> wovencell::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "weave_stl".into());
    let p = WeaveParams::new(0.125, 0.03, 0.65, 0.35, 0.7)?;
    let cell = p.unit_cell();
    println!("unit cell {:.4} x {:.4} x {:.4} cm", cell.length(0), cell.length(1), cell.length(2));
    println!("waviness            {:.4}", waviness(&p));
    println!("area density V_max  {:.4}", v_max_area_density(&p));
    println!("A_w                 {:.6} cm^2", cross_section_area(&p));
    println!("tow volume          {:.6} cm^3", tow_volume(&p));
    println!("weave fraction      {:.4}", weave_volume_fraction(&p));
    println!("fiber fraction      {:.4}", analytic_fiber_volume_fraction(&p));

    println!("\nhalf-thickness across the tow width:");
    for i in 0..=8 {
        let x = p.tow_width * i as f64 / 8.0;
        println!("  x = {x:.4}  h = {:.5}", half_thickness_profile(x, &p)?);
    }
    let probe = [0.25 * cell.length(0), 0.0, 0.1 * cell.length(2)];
    println!("\nphase at {probe:?}: {:?}", phase_at_point(&probe, &p)?);

    for path in export_stl(&p, 48, std::path::Path::new(&out))? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
