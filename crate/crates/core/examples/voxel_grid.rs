//! Voxelization of the unit cell: phase fractions, contact area and a raw dump.
//!
//! cargo run --release --example voxel_grid -- [resolution] [dump-dir]

use wovencell::geometry::weave_volume_fraction;
use wovencell::micromech::ConstituentSet;
use wovencell::voxel::{discretize, specific_contact_area, specific_surface_area};

fn main() -> wovencell::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(32);
    let dump = args.next();
    let p = ConstituentSet::nominal().weave()?;
    let grid = discretize(&p, n)?;
    let [matrix, warp, weft] = grid.fractions();
    println!("grid {}x{}x{}, spacing {:?}", grid.nx, grid.ny, grid.nz, grid.spacing);
    println!("fractions: matrix {matrix:.4}, warp {warp:.4}, weft {weft:.4}");
    println!("weave fraction {:.4} (closed form {:.4})", grid.weave_fraction(), weave_volume_fraction(&p));
    println!("S_w  {:.3} 1/cm", specific_surface_area(&p, 64)?);
    let ca = specific_contact_area(&p, n)?;
    println!(
        "CA_w {:.3} 1/cm, {:.3} at double resolution ({:.1}% change{})",
        ca.value,
        ca.refined,
        100.0 * ca.relative_change,
        if ca.flagged { ", flagged" } else { "" }
    );
    if let Some(dir) = dump {
        grid.dump(std::path::Path::new(&dir), "cell")?;
        println!("wrote {dir}/cell.raw and {dir}/cell.json");
    }
    Ok(())
}
