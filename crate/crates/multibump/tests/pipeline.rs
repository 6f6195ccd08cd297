use std::path::Path;

use multibump::config::RunConfig;
use multibump::io::{read_field_csv, write_outputs};
use multibump::pipeline::{run_pipeline, Mode};
use multibump::report::{RunReport, Status};

fn configs() -> Vec<std::path::PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut paths: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    paths.sort();
    paths
}

#[test]
fn shipped_configs_load_and_validate() {
    let paths = configs();
    assert!(paths.len() >= 6);
    for path in paths {
        let config = RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        config.validate().unwrap();
        assert_eq!(config.dim(), 2);
    }
}

#[test]
fn report_round_trips_and_fields_reload() {
    let mut config = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/remark.toml")).unwrap();
    config.grid.resolution = 65;
    let mut outcome = run_pipeline(&config, Mode::Solve).unwrap();
    assert_eq!(outcome.report.status, Status::Completed);
    assert_eq!(outcome.exit_code(), 0);

    let tmp = tempfile::tempdir().unwrap();
    let path = write_outputs(&mut outcome, tmp.path(), config.output.fields, true).unwrap();
    let back = RunReport::load(&path).unwrap();
    assert_eq!(back, outcome.report);

    let solved = outcome.solved.as_ref().unwrap();
    for (row, sol) in back.solutions.iter().zip(&solved.solutions) {
        let rel = row.field.as_ref().unwrap();
        let u = read_field_csv(&tmp.path().join(rel), &solved.grid).unwrap();
        assert_eq!(u, sol.materialize(&solved.bumps, &solved.grid));
        assert!(tmp.path().join(rel.replace(".csv", ".vtk")).exists());
    }
}

#[test]
fn check_mode_reports_the_gate_only() {
    let config = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/holed.toml")).unwrap();
    let outcome = run_pipeline(&config, Mode::Check).unwrap();
    let r = &outcome.report;
    assert_eq!(r.status, Status::Checked);
    assert!(r.passed());
    let d = r.decomposition.as_ref().unwrap();
    assert_eq!(d.chi, 4);
    assert_eq!(d.j_counts.get(&1), Some(&2));
    assert_eq!(d.j_counts.get(&3), Some(&2));
    assert_eq!(r.f2.len(), 4);
    assert!(r.bumps.is_empty() && outcome.solved.is_none());
}
