//! All nineteen quantities of one sample, with solver families selectable.
//!
//! cargo run --release --example evaluate_sample -- [resolution] [family,...]

use std::time::Instant;
use wovencell::micromech::ConstituentSet;
use wovencell::props::{evaluate_sample, EvalSettings, Family, Qoi, Toggles};

fn main() -> wovencell::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(24);
    let toggles = match args.next() {
        Some(list) => Toggles::only(&list.split(',').map(Family::parse).collect::<wovencell::Result<Vec<_>>>()?),
        None => Toggles::all(),
    };
    let start = Instant::now();
    let rec = evaluate_sample(&ConstituentSet::nominal(), &EvalSettings::new(n, toggles))?;
    for q in Qoi::ALL {
        match rec.get(q) {
            Some(v) => println!("{:>10}  {v:.6e}  {:?}", q.name(), rec.status(q)),
            None => println!("{:>10}  {:>12}  {:?}", q.name(), "-", rec.status(q)),
        }
    }
    println!("evaluated in {:.2?}", start.elapsed());
    Ok(())
}
