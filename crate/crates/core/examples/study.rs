//! A small checkpointed study: closed-form quantities plus in-plane and
//! out-of-plane conductivity on a coarse grid, followed by the reports.
//!
//! cargo run --release --example study -- [samples] [output-dir]

use wovencell::props::{Family, Toggles};
use wovencell::study::{bound_checks, run_study, RunOptions, StudyConfig, StudyOutcome};

fn main() -> wovencell::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(12);
    let out = args.next().unwrap_or_else(|| "example_study".into());
    let config = StudyConfig::new(n, 7, 16, Toggles::only(&[Family::Conductivity]));
    println!("{}", config.echo()?);
    let outcome = run_study(&config, std::path::Path::new(&out), RunOptions { resume: true, stop_after: None })?;
    if let StudyOutcome::Complete { table, nominal, reports, warnings } = outcome {
        for w in warnings {
            println!("warning: {w}");
        }
        let checks = bound_checks(&table);
        let inside = checks.iter().filter(|b| b.within).count();
        println!("{inside}/{} conductivities inside the Voigt/Reuss bounds", checks.len());
        println!("nominal record: {:?}", nominal.values);
        for r in reports {
            println!("wrote {}", r.display());
        }
    }
    Ok(())
}
