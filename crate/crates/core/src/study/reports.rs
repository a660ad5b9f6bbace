//! Analysis tables written after a study: statistics, sensitivities,
//! correlations, bound checks, plot data and model fits.

use super::table::{fmt_opt, StudyTable};
use crate::analytic::{fit_model, voigt_reuss_bounds, FitModel, FitReport, DEFAULT_SEEDS, GEBART_QUADRATIC_C};
use crate::error::Result;
use crate::geometry::{cross_section_area, weave_volume_fraction};
use crate::micromech::{chamis_yarn_conductivity, matrix_props};
use crate::props::{QoIRecord, Qoi, Status, QOI_NAMES};
use crate::uq::{
    constituents, correlation, pce_fit, sobol_main_indices, summary_stats, CorrelationMode, ParameterSpace,
};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Relative slack allowed on either side of the conductivity bounds.
pub const BOUND_TOLERANCE: f64 = 0.01;

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn strings<I: IntoIterator<Item = S>, S: Into<String>>(it: I) -> Vec<String> {
    it.into_iter().map(Into::into).collect()
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn standardized(space: &ParameterSpace, table: &StudyTable) -> Vec<Vec<f64>> {
    table
        .rows
        .iter()
        .map(|r| space.parameters.iter().zip(&r.inputs).map(|(p, x)| 2.0 * p.to_unit(*x) - 1.0).collect())
        .collect()
}

fn summary_rows(table: &StudyTable, nominal: Option<&QoIRecord>) -> Vec<Vec<String>> {
    Qoi::ALL
        .iter()
        .map(|q| {
            let col = table.column(*q);
            let blocked = table.rows.iter().filter(|r| r.record.blocked(*q)).count();
            let nom = nominal.and_then(|n| n.get(*q));
            let mut row = vec![q.name().to_string()];
            match summary_stats(&col, nom) {
                Ok(s) => row.extend([
                    s.count.to_string(),
                    (col.len() - s.count).to_string(),
                    blocked.to_string(),
                    s.mean.to_string(),
                    s.std_dev.to_string(),
                    fmt_opt(s.cv),
                    fmt_opt(s.don),
                    fmt_opt(nom),
                    s.zero_mean.to_string(),
                ]),
                Err(_) => row.extend(strings([
                    "0".to_string(),
                    col.len().to_string(),
                    blocked.to_string(),
                    "NA".into(),
                    "NA".into(),
                    "NA".into(),
                    "NA".into(),
                    fmt_opt(nom),
                    "false".into(),
                ])),
            }
            row
        })
        .collect()
}

fn sobol_rows(space: &ParameterSpace, table: &StudyTable) -> Vec<Vec<String>> {
    let xi = standardized(space, table);
    Qoi::ALL
        .iter()
        .map(|q| {
            let mut row = vec![q.name().to_string()];
            match pce_fit(&xi, &table.column(*q)) {
                Ok(s) => {
                    match sobol_main_indices(&s) {
                        Ok(idx) => row.extend(idx.iter().map(|v| v.to_string())),
                        Err(_) => row.extend(std::iter::repeat_n("NA".to_string(), space.len())),
                    }
                    row.extend([
                        s.r_squared.to_string(),
                        s.q_squared.to_string(),
                        s.retained_terms().len().to_string(),
                        s.samples_used.to_string(),
                        s.low_quality.to_string(),
                        s.degenerate.to_string(),
                    ]);
                }
                Err(_) => {
                    row.extend(std::iter::repeat_n("NA".to_string(), space.len() + 3));
                    row.push(table.column(*q).iter().flatten().count().to_string());
                    row.extend(strings(["true", "false"]));
                }
            }
            row
        })
        .collect()
}

/// One quantity against a set of columns. The last field is true when the
/// quantity itself is constant.
fn correlation_rows(
    table: &StudyTable,
    columns: &[Vec<Option<f64>>],
    mode: CorrelationMode,
) -> Vec<Vec<String>> {
    Qoi::ALL
        .iter()
        .map(|q| {
            let y = table.column(*q);
            let mut row = vec![q.name().to_string()];
            let mut degenerate = false;
            for c in columns {
                match correlation(c, &y, mode) {
                    Ok(r) => {
                        degenerate |= r.degenerate;
                        row.push(r.value.to_string());
                    }
                    Err(_) => row.push("NA".into()),
                }
            }
            row.push(degenerate.to_string());
            row
        })
        .collect()
}

fn distribution_rows(table: &StudyTable, nominal: Option<&QoIRecord>) -> Vec<Vec<String>> {
    Qoi::ALL
        .iter()
        .map(|q| {
            let nom = nominal.and_then(|n| n.get(*q));
            let mut v: Vec<f64> = table.column(*q).into_iter().flatten().collect();
            let mut row = vec![q.name().to_string(), fmt_opt(nom), v.len().to_string()];
            match nom.filter(|y0| *y0 != 0.0) {
                Some(y0) if !v.is_empty() => {
                    v.iter_mut().for_each(|x| *x = (*x - y0) / y0.abs());
                    v.sort_by(f64::total_cmp);
                    let mean = v.iter().sum::<f64>() / v.len() as f64;
                    for p in [0.0, 0.25, 0.5, 0.75, 1.0] {
                        row.push(quantile(&v, p).to_string());
                    }
                    row.push(mean.to_string());
                    row.push("0".into());
                }
                _ => row.extend(std::iter::repeat_n("NA".to_string(), 7)),
            }
            row
        })
        .collect()
}

/// Voigt/Reuss comparison of one sample and direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundCheck {
    pub id: usize,
    pub direction: &'static str,
    pub conductivity: f64,
    pub reuss: f64,
    pub hill: f64,
    pub voigt: f64,
    pub within: bool,
}

/// Bound checks for every computed conductivity. The tow fraction is the
/// one measured on the voxel grid the solver used.
pub fn bound_checks(table: &StudyTable) -> Vec<BoundCheck> {
    let mut out = Vec::new();
    for r in &table.rows {
        let c = constituents(&r.inputs);
        let Some(v_w) = r.record.grid_weave_fraction else { continue };
        let Ok(m) = matrix_props(&c) else { continue };
        let Ok((ka, kt)) = chamis_yarn_conductivity(m.conductivity, c.k_f_a, c.k_f_t(), c.v_f_w) else { continue };
        let Ok(b) = voigt_reuss_bounds(ka, kt, m.conductivity, v_w) else { continue };
        for (q, dir) in [(Qoi::ConductivityIp, "ip"), (Qoi::ConductivityOop, "oop")] {
            if let Some(k) = r.record.get(q) {
                out.push(BoundCheck {
                    id: r.id,
                    direction: dir,
                    conductivity: k,
                    reuss: b.reuss,
                    hill: b.hill,
                    voigt: b.voigt,
                    within: b.contains(k, BOUND_TOLERANCE),
                });
            }
        }
    }
    out
}

/// Points `(v_w, κ/A_w)` with a strictly positive permeability.
pub fn normalized_permeability(table: &StudyTable, q: Qoi) -> Vec<(f64, f64)> {
    table
        .rows
        .iter()
        .filter_map(|r| {
            let k = r.record.get(q).filter(|k| *k > 0.0)?;
            let p = constituents(&r.inputs).weave().ok()?;
            Some((weave_volume_fraction(&p), k / cross_section_area(&p)))
        })
        .collect()
}

/// Points `(solid fraction, τ)`; the solid fraction is the fiber fraction
/// on the voxel grid.
pub fn tortuosity_points(table: &StudyTable, q: Qoi) -> Vec<(f64, f64)> {
    table
        .rows
        .iter()
        .filter_map(|r| {
            let tau = r.record.get(q)?;
            let v = r.record.grid_weave_fraction?;
            Some((r.inputs[4] * v, tau))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum FitOutcome {
    Fit(FitReport),
    Error { error: String },
}

pub fn fit_all(table: &StudyTable) -> BTreeMap<&'static str, FitOutcome> {
    let run = |data: Vec<(f64, f64)>, model: FitModel| match fit_model(&data, model, &DEFAULT_SEEDS) {
        Ok(r) => FitOutcome::Fit(r),
        Err(e) => FitOutcome::Error { error: e.to_string() },
    };
    let mut m = BTreeMap::new();
    m.insert("tortuosity_ip", run(tortuosity_points(table, Qoi::TortuosityIp), FitModel::Bruggeman));
    m.insert("tortuosity_oop", run(tortuosity_points(table, Qoi::TortuosityOop), FitModel::Bruggeman));
    let oop = normalized_permeability(table, Qoi::PermeabilityOop);
    m.insert("permeability_oop_perpendicular", run(oop, FitModel::GebartPerpendicular));
    let ip = normalized_permeability(table, Qoi::PermeabilityIp);
    m.insert("permeability_ip_perpendicular", run(ip.clone(), FitModel::GebartPerpendicular));
    let mattern = FitModel::Mattern { c: GEBART_QUADRATIC_C, c1: 0.147, v_max: 1.0 };
    m.insert("permeability_ip_mattern", run(ip, mattern));
    m
}

/// Writes every analysis file into `dir` and returns the written paths. An
/// empty table writes nothing and returns a warning instead.
pub fn emit_reports(
    dir: &Path,
    space: &ParameterSpace,
    table: &StudyTable,
    nominal: Option<&QoIRecord>,
) -> Result<(Vec<PathBuf>, Vec<String>)> {
    if table.is_empty() {
        return Ok((Vec::new(), vec!["results table is empty; no reports written".into()]));
    }
    let mut written = Vec::new();
    let mut emit = |name: &str, header: Vec<String>, rows: Vec<Vec<String>>| -> Result<()> {
        let p = dir.join(name);
        write_csv(&p, &header, &rows)?;
        written.push(p);
        Ok(())
    };
    let names: Vec<String> = space.names().iter().map(|s| s.to_string()).collect();

    let header = strings(["qoi", "count", "excluded", "blocked", "mean", "std_dev", "cv", "don", "nominal", "zero_mean"]);
    emit("summary.csv", header, summary_rows(table, nominal))?;

    let mut header = vec!["qoi".to_string()];
    header.extend(names.iter().cloned());
    header.extend(strings(["r_squared", "q_squared", "terms", "samples_used", "low_quality", "degenerate"]));
    emit("sobol.csv", header, sobol_rows(space, table))?;

    let inputs: Vec<Vec<Option<f64>>> = (0..space.len()).map(|j| table.input_column(j)).collect();
    let qois: Vec<Vec<Option<f64>>> = Qoi::ALL.iter().map(|q| table.column(*q)).collect();
    let mut header = vec!["qoi".to_string()];
    header.extend(names.iter().cloned());
    header.push("degenerate".into());
    emit("corr_inputs.csv", header.clone(), correlation_rows(table, &inputs, CorrelationMode::Spearman))?;
    emit("corr_inputs_pearson.csv", header, correlation_rows(table, &inputs, CorrelationMode::Pearson))?;
    let mut header = vec!["qoi".to_string()];
    header.extend(QOI_NAMES.iter().map(|s| s.to_string()));
    header.push("degenerate".into());
    emit("corr_qoi.csv", header.clone(), correlation_rows(table, &qois, CorrelationMode::Spearman))?;
    emit("corr_qoi_pearson.csv", header, correlation_rows(table, &qois, CorrelationMode::Pearson))?;

    let header = strings(["qoi", "nominal", "count", "min", "q1", "median", "q3", "max", "mean", "nominal_marker"]);
    emit("distributions.csv", header, distribution_rows(table, nominal))?;

    let header = strings([
        "id", "g", "u", "v_w", "A_w", "kappa_ip", "kappa_oop", "kappa_ip_over_A_w", "kappa_oop_over_A_w", "status_ip",
        "status_oop",
    ]);
    let status = |s: &Status| match s {
        Status::Computed => "computed",
        Status::Skipped => "skipped",
        Status::Blocked => "blocked",
        Status::Failed(_) => "failed",
    };
    let perm: Vec<Vec<String>> = table
        .rows
        .iter()
        .filter_map(|r| {
            let p = constituents(&r.inputs).weave().ok()?;
            let a = cross_section_area(&p);
            let (ki, ko) = (r.record.get(Qoi::PermeabilityIp), r.record.get(Qoi::PermeabilityOop));
            Some(vec![
                r.id.to_string(),
                p.gap.to_string(),
                p.undulation.to_string(),
                weave_volume_fraction(&p).to_string(),
                a.to_string(),
                fmt_opt(ki),
                fmt_opt(ko),
                fmt_opt(ki.map(|k| k / a)),
                fmt_opt(ko.map(|k| k / a)),
                status(r.record.status(Qoi::PermeabilityIp)).to_string(),
                status(r.record.status(Qoi::PermeabilityOop)).to_string(),
            ])
        })
        .collect();
    emit("perm_gap.csv", header, perm)?;

    let header = strings(["id", "solid_fraction", "tau_ip", "tau_oop", "status_ip", "status_oop"]);
    let tort: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            vec![
                r.id.to_string(),
                fmt_opt(r.record.grid_weave_fraction.map(|v| r.inputs[4] * v)),
                fmt_opt(r.record.get(Qoi::TortuosityIp)),
                fmt_opt(r.record.get(Qoi::TortuosityOop)),
                status(r.record.status(Qoi::TortuosityIp)).to_string(),
                status(r.record.status(Qoi::TortuosityOop)).to_string(),
            ]
        })
        .collect();
    emit("tortuosity_vf.csv", header, tort)?;

    let header = strings(["id", "direction", "k", "k_reuss", "k_vrh", "k_voigt", "within"]);
    let bounds: Vec<Vec<String>> = bound_checks(table)
        .iter()
        .map(|b| {
            vec![
                b.id.to_string(),
                b.direction.to_string(),
                b.conductivity.to_string(),
                b.reuss.to_string(),
                b.hill.to_string(),
                b.voigt.to_string(),
                b.within.to_string(),
            ]
        })
        .collect();
    emit("bounds.csv", header, bounds)?;

    let fits = dir.join("fits.json");
    let mut text = serde_json::to_string_pretty(&fit_all(table))?;
    text.push('\n');
    std::fs::write(&fits, text)?;
    written.push(fits);
    Ok((written, Vec::new()))
}
