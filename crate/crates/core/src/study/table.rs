//! Per-sample study rows, their CSV form and the append-only checkpoint.

use crate::error::{Error, Result};
use crate::micromech::PARAMETER_NAMES;
use crate::props::{QoIRecord, Qoi, Status, QOI_NAMES};
use crate::voxel::ContactArea;
use serde::{Deserialize, Serialize};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

pub const NA: &str = "NA";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub id: usize,
    pub inputs: Vec<f64>,
    pub record: QoIRecord,
    /// Wall time of the evaluation; kept out of the results table.
    pub seconds: f64,
}

/// Rows ordered by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StudyTable {
    pub rows: Vec<StudyRow>,
}

impl StudyTable {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Values of one quantity, `None` where missing.
    pub fn column(&self, q: Qoi) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| r.record.get(q)).collect()
    }

    pub fn input_column(&self, j: usize) -> Vec<Option<f64>> {
        self.rows.iter().map(|r| Some(r.inputs[j])).collect()
    }
}

fn status_name(s: &Status) -> &'static str {
    match s {
        Status::Computed => "computed",
        Status::Skipped => "skipped",
        Status::Blocked => "blocked",
        Status::Failed(_) => "failed",
    }
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| NA.to_string(), |x| x.to_string())
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s == NA {
        return Ok(None);
    }
    s.parse::<f64>().map(Some).map_err(|e| Error::Config(format!("bad number '{s}': {e}")))
}

pub fn results_header() -> Vec<String> {
    let mut h = vec!["id".to_string()];
    h.extend(PARAMETER_NAMES.iter().map(|s| s.to_string()));
    h.extend(QOI_NAMES.iter().map(|s| s.to_string()));
    h.extend(QOI_NAMES.iter().map(|s| format!("status_{s}")));
    h.extend(["v_w_grid", "CA_w_refined", "CA_w_change", "CA_w_flagged", "failures"].map(String::from));
    h
}

fn row_record(id: &str, inputs: &[f64], rec: &QoIRecord) -> Vec<String> {
    let mut r = vec![id.to_string()];
    r.extend(inputs.iter().map(|v| v.to_string()));
    r.extend(rec.values.iter().map(|v| fmt_opt(*v)));
    r.extend(rec.status.iter().map(|s| status_name(s).to_string()));
    r.push(fmt_opt(rec.grid_weave_fraction));
    r.push(fmt_opt(rec.contact.map(|c| c.refined)));
    r.push(fmt_opt(rec.contact.map(|c| c.relative_change)));
    r.push(rec.contact.map_or_else(|| NA.to_string(), |c| c.flagged.to_string()));
    let failures: Vec<String> = Qoi::ALL
        .iter()
        .filter_map(|q| match rec.status(*q) {
            Status::Failed(m) => Some(format!("{}: {}", q.name(), m)),
            _ => None,
        })
        .collect();
    r.push(failures.join(" | "));
    r
}

fn parse_record(fields: &csv::StringRecord) -> Result<(String, Vec<f64>, QoIRecord)> {
    let n_in = PARAMETER_NAMES.len();
    let n_q = QOI_NAMES.len();
    if fields.len() != results_header().len() {
        return Err(Error::Config(format!("results row has {} fields", fields.len())));
    }
    let id = fields[0].to_string();
    let inputs = (1..=n_in)
        .map(|i| fields[i].parse::<f64>().map_err(|e| Error::Config(format!("bad input '{}': {e}", &fields[i]))))
        .collect::<Result<Vec<_>>>()?;
    let mut values = [None; 19];
    for (k, v) in values.iter_mut().enumerate() {
        *v = parse_opt(&fields[1 + n_in + k])?;
    }
    let mut messages = std::collections::HashMap::new();
    let failures = &fields[fields.len() - 1];
    if !failures.is_empty() {
        for part in failures.split(" | ") {
            let (q, m) = part.split_once(": ").ok_or_else(|| Error::Config(format!("bad failure entry '{part}'")))?;
            messages.insert(q.to_string(), m.to_string());
        }
    }
    let mut status = Vec::with_capacity(n_q);
    for (k, name) in QOI_NAMES.iter().enumerate() {
        status.push(match &fields[1 + n_in + n_q + k] {
            "computed" => Status::Computed,
            "skipped" => Status::Skipped,
            "blocked" => Status::Blocked,
            "failed" => Status::Failed(messages.get(*name).cloned().unwrap_or_default()),
            other => return Err(Error::Config(format!("unknown status '{other}'"))),
        });
    }
    let base = 1 + n_in + 2 * n_q;
    let grid_weave_fraction = parse_opt(&fields[base])?;
    let contact = match (values[Qoi::ContactArea as usize], parse_opt(&fields[base + 1])?, parse_opt(&fields[base + 2])?)
    {
        (Some(value), Some(refined), Some(relative_change)) => {
            Some(ContactArea { value, refined, relative_change, flagged: &fields[base + 3] == "true" })
        }
        _ => None,
    };
    Ok((id, inputs, QoIRecord { values, status, grid_weave_fraction, contact }))
}

pub fn write_results(path: &Path, table: &StudyTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(results_header())?;
    for r in &table.rows {
        w.write_record(row_record(&r.id.to_string(), &r.inputs, &r.record))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_results(path: &Path) -> Result<StudyTable> {
    let mut rd = csv::Reader::from_path(path)?;
    let header: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    if header != results_header() {
        return Err(Error::Config(format!("{} does not have the results header", path.display())));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let (id, inputs, record) = parse_record(&rec?)?;
        let id = id.parse::<usize>().map_err(|e| Error::Config(format!("bad id '{id}': {e}")))?;
        rows.push(StudyRow { id, inputs, record, seconds: 0.0 });
    }
    Ok(StudyTable { rows })
}

/// The nominal sample in the results layout with id `nominal`.
pub fn write_nominal(path: &Path, inputs: &[f64], rec: &QoIRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(results_header())?;
    w.write_record(row_record("nominal", inputs, rec))?;
    w.flush()?;
    Ok(())
}

pub fn read_nominal(path: &Path) -> Result<(Vec<f64>, QoIRecord)> {
    let mut rd = csv::Reader::from_path(path)?;
    let rec = rd.records().next().ok_or_else(|| Error::Config(format!("{} is empty", path.display())))??;
    let (_, inputs, record) = parse_record(&rec)?;
    Ok((inputs, record))
}

pub fn write_timings(path: &Path, table: &StudyTable, nominal_seconds: Option<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["id", "seconds"])?;
    if let Some(s) = nominal_seconds {
        w.write_record(["nominal".to_string(), s.to_string()])?;
    }
    for r in &table.rows {
        w.write_record([r.id.to_string(), r.seconds.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// One line of the checkpoint file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CheckpointEntry {
    /// First line: the resolved configuration the rows belong to.
    Header { config: String },
    Sample(StudyRow),
    Nominal { record: QoIRecord, seconds: f64 },
}

/// Append-only JSON-lines log of completed evaluations.
pub struct Checkpoint {
    file: File,
}

impl Checkpoint {
    /// Starts a new checkpoint, discarding any previous one.
    pub fn create(path: &Path, echo: &str) -> Result<Self> {
        let mut file = File::create(path)?;
        let line = serde_json::to_string(&CheckpointEntry::Header { config: echo.to_string() })?;
        writeln!(file, "{line}")?;
        file.sync_data()?;
        Ok(Checkpoint { file })
    }

    /// Opens an existing checkpoint for appending and returns the entries
    /// already recorded. A torn final line is dropped. The stored
    /// configuration must match `echo`.
    pub fn resume(path: &Path, echo: &str) -> Result<(Self, Vec<CheckpointEntry>)> {
        let reader = BufReader::new(File::open(path)?);
        let mut entries = Vec::new();
        let mut valid_bytes = 0u64;
        for line in reader.split(b'\n') {
            let line = line?;
            match serde_json::from_slice::<CheckpointEntry>(&line) {
                Ok(e) => {
                    valid_bytes += line.len() as u64 + 1;
                    entries.push(e);
                }
                Err(_) => break,
            }
        }
        match entries.first() {
            Some(CheckpointEntry::Header { config }) if config == echo => {}
            Some(CheckpointEntry::Header { .. }) => {
                return Err(Error::Config("checkpoint belongs to a different configuration".into()))
            }
            _ => return Err(Error::Config("checkpoint has no header".into())),
        }
        let file = OpenOptions::new().write(true).open(path)?;
        file.set_len(valid_bytes)?;
        drop(file);
        let file = OpenOptions::new().append(true).open(path)?;
        Ok((Checkpoint { file }, entries.split_off(1)))
    }

    /// Writes one complete line and syncs it.
    pub fn append(&mut self, entry: &CheckpointEntry) -> Result<()> {
        let mut line = serde_json::to_vec(entry)?;
        line.push(b'\n');
        self.file.write_all(&line)?;
        self.file.sync_data()?;
        Ok(())
    }
}
