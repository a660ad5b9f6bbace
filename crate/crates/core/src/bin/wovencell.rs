use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use wovencell::props::{evaluate_sample, EvalSettings, Family, Toggles};
use wovencell::study::{self, named, parse_inputs, RunOptions, StudyConfig, StudyOutcome};
use wovencell::{stl, Result};

#[derive(Parser)]
#[command(name = "wovencell", version, about = "Plain-weave unit-cell properties and sensitivity studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct StudyArgs {
    /// Study configuration (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Cells across the in-plane period.
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    /// Restrict solvers to these families (repeatable or comma separated):
    /// geometry, conductivity, tortuosity, elastic, thermal-expansion,
    /// permeability, closed-form.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long, default_value = "study")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Write the Latin hypercube design only.
    Sample(StudyArgs),
    /// Run a full study with checkpointing.
    Run {
        #[command(flatten)]
        args: StudyArgs,
        /// Continue from the checkpoint in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Recompute the reports of a finished study.
    Analyze {
        #[arg(long, default_value = "study")]
        out: PathBuf,
    },
    /// Write one STL file per tow for the given parameter file.
    ExportStl {
        params: PathBuf,
        /// Segments along each tow direction.
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[arg(long, default_value = "stl")]
        out: PathBuf,
    },
    /// Evaluate a single sample and print its quantities as JSON.
    Evaluate {
        params: PathBuf,
        #[arg(long, default_value_t = 32)]
        resolution: usize,
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Also write the record to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn toggles(only: &[String]) -> Result<Option<Toggles>> {
    if only.is_empty() {
        return Ok(None);
    }
    let families = only.iter().map(|s| Family::parse(s.trim())).collect::<Result<Vec<_>>>()?;
    Ok(Some(Toggles::only(&families)))
}

fn resolve(args: &StudyArgs) -> Result<StudyConfig> {
    let mut c = match &args.config {
        Some(p) => StudyConfig::load(p)?,
        None => StudyConfig::new(64, 0, 32, Toggles::all()),
    };
    if let Some(v) = args.seed {
        c.seed = v;
    }
    if let Some(v) = args.samples {
        c.samples = v;
    }
    if let Some(v) = args.resolution {
        c.resolution = v;
    }
    if let Some(v) = args.workers {
        c.workers = v;
    }
    if let Some(t) = toggles(&args.only)? {
        c.toggles = t;
    }
    c.validate()?;
    Ok(c)
}

fn output_dir(args: &StudyArgs, c: &StudyConfig) -> PathBuf {
    match (&args.config, &c.output) {
        (Some(_), Some(p)) if args.out == Path::new("study") => p.clone(),
        _ => args.out.clone(),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Sample(args) => {
            let c = resolve(&args)?;
            let out = output_dir(&args, &c);
            std::fs::create_dir_all(&out)?;
            let m = study::generate_samples(&c)?;
            study::write_samples(&out.join("samples.csv"), &m)?;
            std::fs::write(out.join("config.echo"), c.echo()?)?;
            println!("wrote {} samples to {}", m.rows(), out.join("samples.csv").display());
        }
        Command::Run { args, resume } => {
            let c = resolve(&args)?;
            let out = output_dir(&args, &c);
            match study::run_study(&c, &out, RunOptions { resume, stop_after: None })? {
                StudyOutcome::Complete { table, reports, warnings, .. } => {
                    for w in warnings {
                        eprintln!("warning: {w}");
                    }
                    let failed = table.rows.iter().filter(|r| !r.record.failed().is_empty()).count();
                    println!("{} samples evaluated ({failed} with failed quantities)", table.len());
                    for r in reports {
                        println!("  {}", r.display());
                    }
                }
                StudyOutcome::Interrupted { completed } => println!("stopped after {completed} samples"),
            }
        }
        Command::Analyze { out } => {
            let (reports, warnings) = study::analyze(&out)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            for r in reports {
                println!("  {}", r.display());
            }
        }
        Command::ExportStl { params, resolution, out } => {
            let c = parse_inputs(&std::fs::read_to_string(&params)?)?;
            for p in stl::export_stl(&c.weave()?, resolution, &out)? {
                println!("{}", p.display());
            }
        }
        Command::Evaluate { params, resolution, only, out } => {
            let c = parse_inputs(&std::fs::read_to_string(&params)?)?;
            let t = toggles(&only)?.unwrap_or_else(Toggles::all);
            let rec = evaluate_sample(&c, &EvalSettings::new(resolution, t))?;
            let text = serde_json::to_string_pretty(&named(&rec))?;
            println!("{text}");
            if let Some(p) = out {
                std::fs::write(p, text + "\n")?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
