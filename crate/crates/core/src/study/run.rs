//! Sample generation, checkpointed parallel evaluation and analysis.

use super::config::StudyConfig;
use super::reports::emit_reports;
use super::table::{
    read_nominal, read_results, write_nominal, write_results, write_timings, Checkpoint, CheckpointEntry, StudyRow,
    StudyTable,
};
use crate::error::{Error, Result};
use crate::micromech::PARAMETER_NAMES;
use crate::props::{evaluate_sample, EvalSettings, QoIRecord};
use crate::uq::{constituents, lhs_sample, ParameterSpace, SampleMatrix};
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

pub const CHECKPOINT_FILE: &str = "checkpoint.jsonl";
pub const CONFIG_ECHO_FILE: &str = "config.echo";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Continue from an existing checkpoint instead of starting over.
    pub resume: bool,
    /// Stop after this many new evaluations, leaving the checkpoint as an
    /// interrupted run would.
    pub stop_after: Option<usize>,
}

#[derive(Debug)]
pub enum StudyOutcome {
    Complete { table: StudyTable, nominal: QoIRecord, reports: Vec<PathBuf>, warnings: Vec<String> },
    Interrupted { completed: usize },
}

pub fn write_samples(path: &Path, m: &SampleMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["id".to_string()];
    header.extend(PARAMETER_NAMES.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for (i, row) in m.values.iter().enumerate() {
        let mut r = vec![i.to_string()];
        r.extend(row.iter().map(|v| v.to_string()));
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

/// Latin hypercube design of the configured study.
pub fn generate_samples(config: &StudyConfig) -> Result<SampleMatrix> {
    config.validate()?;
    lhs_sample(&config.space()?, config.samples, config.seed)
}

fn evaluate(inputs: &[f64], settings: &EvalSettings) -> (QoIRecord, f64) {
    let start = Instant::now();
    let rec = evaluate_sample(&constituents(inputs), settings).unwrap_or_else(|e| QoIRecord::all_failed(&e));
    (rec, start.elapsed().as_secs_f64())
}

/// Runs the whole study in `out`: samples, evaluations (checkpointed one
/// row at a time), the nominal sample, the results tables and the reports.
pub fn run_study(config: &StudyConfig, out: &Path, options: RunOptions) -> Result<StudyOutcome> {
    config.validate()?;
    std::fs::create_dir_all(out)?;
    let echo = config.echo()?;
    let samples = generate_samples(config)?;
    write_samples(&out.join("samples.csv"), &samples)?;
    std::fs::write(out.join(CONFIG_ECHO_FILE), &echo)?;

    let cp_path = out.join(CHECKPOINT_FILE);
    let (checkpoint, prior) = if options.resume && cp_path.exists() {
        Checkpoint::resume(&cp_path, &echo)?
    } else {
        (Checkpoint::create(&cp_path, &echo)?, Vec::new())
    };
    let mut rows: Vec<Option<StudyRow>> = vec![None; config.samples];
    let mut nominal: Option<(QoIRecord, f64)> = None;
    for e in prior {
        match e {
            CheckpointEntry::Sample(r) if r.id < config.samples => {
                let id = r.id;
                rows[id] = Some(r);
            }
            CheckpointEntry::Nominal { record, seconds } => nominal = Some((record, seconds)),
            _ => return Err(Error::Config("unexpected checkpoint entry".into())),
        }
    }

    let settings = config.settings();
    let checkpoint = Mutex::new(checkpoint);
    let mut budget = options.stop_after.unwrap_or(usize::MAX);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;

    if nominal.is_none() && budget > 0 {
        let mid = config.space()?.midpoint();
        let (record, seconds) = pool.install(|| evaluate(&mid, &settings));
        checkpoint.lock().unwrap().append(&CheckpointEntry::Nominal { record: record.clone(), seconds })?;
        nominal = Some((record, seconds));
        budget -= 1;
    }
    let pending: Vec<usize> = (0..config.samples).filter(|i| rows[*i].is_none()).take(budget).collect();
    let fresh: Vec<Result<StudyRow>> = pool.install(|| {
        pending
            .par_iter()
            .map(|&id| {
                let (record, seconds) = evaluate(&samples.values[id], &settings);
                let row = StudyRow { id, inputs: samples.values[id].clone(), record, seconds };
                checkpoint.lock().unwrap().append(&CheckpointEntry::Sample(row.clone()))?;
                Ok(row)
            })
            .collect()
    });
    for r in fresh {
        let r = r?;
        let id = r.id;
        rows[id] = Some(r);
    }
    let completed = rows.iter().filter(|r| r.is_some()).count();
    let Some((nominal, nominal_seconds)) = nominal else {
        return Ok(StudyOutcome::Interrupted { completed });
    };
    if completed < config.samples {
        return Ok(StudyOutcome::Interrupted { completed });
    }
    let table = StudyTable { rows: rows.into_iter().flatten().collect() };
    write_results(&out.join("results.csv"), &table)?;
    write_nominal(&out.join("nominal.csv"), &samples_midpoint(config)?, &nominal)?;
    write_timings(&out.join("timings.csv"), &table, Some(nominal_seconds))?;
    let (reports, warnings) = emit_reports(out, &config.space()?, &table, Some(&nominal))?;
    Ok(StudyOutcome::Complete { table, nominal, reports, warnings })
}

fn samples_midpoint(config: &StudyConfig) -> Result<Vec<f64>> {
    Ok(config.space()?.midpoint())
}

/// Recomputes the reports from the tables of a finished study in `dir`.
pub fn analyze(dir: &Path) -> Result<(Vec<PathBuf>, Vec<String>)> {
    let config = StudyConfig::load(&dir.join(CONFIG_ECHO_FILE))?;
    let space: ParameterSpace = config.space()?;
    let table = read_results(&dir.join("results.csv"))?;
    let nominal_path = dir.join("nominal.csv");
    let nominal = if nominal_path.exists() { Some(read_nominal(&nominal_path)?.1) } else { None };
    emit_reports(dir, &space, &table, nominal.as_ref())
}
