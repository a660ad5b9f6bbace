use std::path::Path;
use std::process::{Command, Output};

fn wovencell(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wovencell")).args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).to_string()
}

#[test]
fn evaluate_prints_named_quantities() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.toml"), "g = 0.2\n").unwrap();
    let o = wovencell(&["evaluate", "p.toml", "--only", "closed-form", "--out", "rec.json"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let items = v.as_array().unwrap();
    assert_eq!(items.len(), 19);
    assert_eq!(items[0]["name"], "v_f");
    assert!(items[0]["value"].as_f64().unwrap() > 0.0);
    assert_eq!(items[10]["status"]["status"], "skipped");
    assert!(dir.path().join("rec.json").exists());
}

#[test]
fn rejects_unknown_parameters_and_families() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "gap = 0.2\n").unwrap();
    let o = wovencell(&["evaluate", "bad.toml"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown parameter"));
    std::fs::write(dir.path().join("ok.toml"), "").unwrap();
    let o = wovencell(&["evaluate", "ok.toml", "--only", "acoustics"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn sample_run_and_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "samples = 12\nseed = 4\n[toggles]\ngeometry = false\nconductivity = false\ntortuosity = false\nelastic = false\nthermal_expansion = false\npermeability = false\n[ranges.g]\nmin = 0.1\nmax = 0.3\n";
    std::fs::write(dir.path().join("study.toml"), cfg).unwrap();

    let o = wovencell(&["sample", "--config", "study.toml", "--out", "s"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let samples = std::fs::read_to_string(dir.path().join("s/samples.csv")).unwrap();
    assert_eq!(samples.lines().count(), 13);

    let o = wovencell(&["run", "--config", "study.toml", "--out", "s"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["results.csv", "nominal.csv", "summary.csv", "config.echo", "fits.json"] {
        assert!(dir.path().join("s").join(f).exists(), "{f}");
    }
    let echo = std::fs::read_to_string(dir.path().join("s/config.echo")).unwrap();
    assert!(echo.contains("[ranges.g]") && echo.contains("min = 0.1"));

    let summary = std::fs::read(dir.path().join("s/summary.csv")).unwrap();
    std::fs::remove_file(dir.path().join("s/summary.csv")).unwrap();
    let o = wovencell(&["analyze", "--out", "s"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(dir.path().join("s/summary.csv")).unwrap(), summary);

    let o = wovencell(&["run", "--config", "study.toml", "--out", "s", "--resume"], dir.path());
    assert!(o.status.success());
}

#[test]
fn export_stl_writes_one_file_per_tow() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("p.toml"), "").unwrap();
    let o = wovencell(&["export-stl", "p.toml", "--resolution", "16", "--out", "mesh"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let files: Vec<_> = std::fs::read_dir(dir.path().join("mesh")).unwrap().collect();
    assert!(files.len() >= 2);
    for f in files {
        let bytes = std::fs::read(f.unwrap().path()).unwrap();
        let facets = wovencell::stl::read_binary_stl(bytes.as_slice()).unwrap();
        assert!(!facets.is_empty());
    }
}
