//! Latin hypercube design, sparse polynomial chaos surrogate and Sobol
//! indices for closed-form quantities over the full 30-input space.
//!
//! cargo run --release --example sensitivity -- [samples] [seed]

use wovencell::micromech::PARAMETER_NAMES;
use wovencell::props::{evaluate_sample, EvalSettings, Qoi, Toggles};
use wovencell::uq::{constituents, correlation, lhs_sample, pce_fit, sobol_main_indices, CorrelationMode, ParameterSpace};

fn main() -> wovencell::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(500);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let space = ParameterSpace::default();
    let design = lhs_sample(&space, n, seed)?;
    let settings = EvalSettings::new(16, Toggles::closed_form_only());
    let records = design
        .values
        .iter()
        .map(|row| evaluate_sample(&constituents(row), &settings))
        .collect::<wovencell::Result<Vec<_>>>()?;
    let xi = design.standardized();
    for q in [Qoi::FiberFraction, Qoi::Density, Qoi::SpecificHeat] {
        let y: Vec<Option<f64>> = records.iter().map(|r| r.get(q)).collect();
        let s = pce_fit(&xi, &y)?;
        let idx = sobol_main_indices(&s)?;
        let mut order: Vec<usize> = (0..idx.len()).collect();
        order.sort_by(|a, b| idx[*b].total_cmp(&idx[*a]));
        println!(
            "{}: mean {:.4}, R2 {:.4}, Q2 {:.4}, {} terms",
            q.name(),
            s.mean(),
            s.r_squared,
            s.q_squared,
            s.retained_terms().len()
        );
        for &j in &order[..4] {
            let x: Vec<Option<f64>> = design.values.iter().map(|r| Some(r[j])).collect();
            let rho = correlation(&x, &y, CorrelationMode::Spearman)?.value;
            println!("    {:>10}  S = {:.3}  spearman = {:+.3}", PARAMETER_NAMES[j], idx[j], rho);
        }
    }
    Ok(())
}
