//! Batch studies: configuration, checkpointed execution and reports.

pub mod config;
pub mod inputs;
pub mod reports;
pub mod run;
pub mod table;

pub use config::{Range, StudyConfig};
pub use inputs::{named, parse_inputs, NamedValue};
pub use reports::{bound_checks, emit_reports, fit_all, normalized_permeability, tortuosity_points, BoundCheck};
pub use run::{analyze, generate_samples, run_study, write_samples, RunOptions, StudyOutcome};
pub use table::{read_results, write_results, StudyRow, StudyTable};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::props::Toggles;
    use std::path::Path;

    const TABLES: [&str; 14] = [
        "samples.csv",
        "results.csv",
        "nominal.csv",
        "summary.csv",
        "sobol.csv",
        "corr_inputs.csv",
        "corr_inputs_pearson.csv",
        "corr_qoi.csv",
        "corr_qoi_pearson.csv",
        "distributions.csv",
        "perm_gap.csv",
        "tortuosity_vf.csv",
        "bounds.csv",
        "fits.json",
    ];

    fn read_all(dir: &Path) -> Vec<Vec<u8>> {
        TABLES.iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect()
    }

    #[test]
    fn closed_form_study_is_repeatable_and_resumable() {
        let config = StudyConfig::new(64, 5, 16, Toggles::closed_form_only());
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert!(matches!(run_study(&config, a.path(), RunOptions::default()).unwrap(), StudyOutcome::Complete { .. }));
        let first = read_all(a.path());
        run_study(&config, a.path(), RunOptions::default()).unwrap();
        assert_eq!(read_all(a.path()), first);

        let stop = RunOptions { resume: true, stop_after: Some(10) };
        assert!(matches!(run_study(&config, b.path(), stop).unwrap(), StudyOutcome::Interrupted { completed: 9 }));
        let resume = RunOptions { resume: true, stop_after: None };
        run_study(&config, b.path(), resume).unwrap();
        assert_eq!(read_all(b.path()), first);

        analyze(b.path()).unwrap();
        assert_eq!(read_all(b.path()), first);
    }

    #[test]
    fn emitted_csv_round_trips() {
        let config = StudyConfig::new(60, 2, 16, Toggles::closed_form_only());
        let dir = tempfile::tempdir().unwrap();
        run_study(&config, dir.path(), RunOptions::default()).unwrap();
        for f in TABLES.iter().filter(|f| f.ends_with(".csv")) {
            let path = dir.path().join(f);
            let bytes = std::fs::read(&path).unwrap();
            let mut rd = csv::Reader::from_reader(bytes.as_slice());
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(rd.headers().unwrap()).unwrap();
            for r in rd.records() {
                w.write_record(&r.unwrap()).unwrap();
            }
            assert_eq!(w.into_inner().unwrap(), bytes, "{f}");
        }
        let dist = std::fs::read_to_string(dir.path().join("distributions.csv")).unwrap();
        assert!(dist.lines().any(|l| l.starts_with("rho,")));
    }

    #[test]
    fn empty_table_warns() {
        let dir = tempfile::tempdir().unwrap();
        let (files, warnings) =
            emit_reports(dir.path(), &crate::uq::ParameterSpace::default(), &StudyTable::default(), None).unwrap();
        assert!(files.is_empty() && warnings.len() == 1);
    }

    #[test]
    fn mismatched_checkpoint_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let stop = RunOptions { resume: true, stop_after: Some(3) };
        run_study(&StudyConfig::new(8, 1, 16, Toggles::closed_form_only()), dir.path(), stop).unwrap();
        let other = StudyConfig::new(8, 2, 16, Toggles::closed_form_only());
        assert!(run_study(&other, dir.path(), RunOptions { resume: true, stop_after: None }).is_err());
    }
}
