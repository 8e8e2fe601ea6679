use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;

use fermigap_cli::config::{FlowConfig, LatticeConfig, RunConfig};
use fermigap_cli::report::{emit, Status, Tables, VerificationReport};
use fermigap_cli::suite::run_suite;
use fermigap::lattice::Boundary;
use proptest::prelude::*;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fermigap"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn write_config(dir: &Path, cfg: &RunConfig) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, cfg.to_toml()).unwrap();
    path
}

fn four_site_chain() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.lattice = LatticeConfig { dims: vec![4], boundary: vec![Boundary::Open] };
    cfg.hopping.entries.retain(|e| e.j < 4);
    cfg.interaction.truncate(3);
    cfg
}

#[test]
fn shipped_configs_round_trip() {
    for name in ["dimerized_demo.toml", "uniform_chain.toml"] {
        let cfg = RunConfig::load(&configs().join(name).to_string_lossy()).unwrap();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg, "{name}");
    }
    let demo = RunConfig::load(&configs().join("dimerized_demo.toml").to_string_lossy()).unwrap();
    assert_eq!(demo, RunConfig::default());
}

#[test]
fn periodic_side_two_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.lattice = LatticeConfig { dims: vec![2], boundary: vec![Boundary::Periodic] };
    cfg.hopping.entries.clear();
    cfg.interaction.clear();
    cfg.flow = FlowConfig { sites: 2, ..FlowConfig::default() };
    let text = cfg.to_toml();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, text).unwrap();
    let out = bin().args(["suite", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("periodic"), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "lattice = 3").unwrap();
    assert_eq!(bin().args(["suite", "--config"]).arg(&path).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["suite", "--suite", "nonsense"]).output().unwrap().status.code(), Some(2));
    assert_eq!(bin().args(["suite", "--tol-scale", "-1"]).output().unwrap().status.code(), Some(2));
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let out = bin().args(["suite", "--suite", "geometry", "--out"]).arg(blocker.join("sub")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn car_suite_on_four_modes_passes() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &four_site_chain());
    let out = bin().args(["suite", "--suite", "car", "--config"]).arg(&path).output().unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("5 checks: 5 passed"), "{stdout}");
}

#[test]
fn check_prints_canonical_config() {
    let out = bin().arg("check").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let body: String = stdout.lines().skip(1).map(|l| format!("{l}\n")).collect();
    assert_eq!(RunConfig::from_toml(&body).unwrap(), RunConfig::default());
}

#[test]
fn reports_are_byte_identical() {
    let mut cfg = RunConfig::default();
    cfg.suites = ["geometry", "single-particle", "majorana", "transform", "flow", "assembly", "localization", "gap"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let out = run_suite(&cfg, 1.0);
        emit(&out.report, &out.tables, d.path()).unwrap();
    }
    for file in ["report.json", "gap_curve.csv", "decay_profiles.csv", "shell_norms.csv", "lr_profiles.csv"] {
        let a = std::fs::read(dirs[0].path().join(file)).unwrap();
        let b = std::fs::read(dirs[1].path().join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn gap_curve_has_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::default();
    cfg.gap_curve.steps = 13;
    let path = write_config(dir.path(), &cfg);
    let out_dir = dir.path().join("out");
    let out = bin().args(["assemble", "--config"]).arg(&path).arg("--out").arg(&out_dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let mut reader = csv::Reader::from_path(out_dir.join("gap_curve.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 14);
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.0);
    assert_eq!(rows[13][0].parse::<f64>().unwrap(), 0.2);
}

#[test]
fn empty_report_is_valid_json() {
    let dir = tempfile::tempdir().unwrap();
    emit(&VerificationReport::empty(), &Tables::default(), dir.path()).unwrap();
    let text = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["checks"].as_array().unwrap().len(), 0);
    assert_eq!(v["status"], "pass");
    assert_eq!(v["summary"]["total"], 0);
}

#[test]
fn full_default_suite() {
    let out = run_suite(&RunConfig::default(), 1.0);
    let checks = &out.report.checks;
    assert!(checks.len() >= 40, "{} checks", checks.len());
    let ids: BTreeSet<&str> = checks.iter().map(|c| c.id.as_str()).collect();
    assert_eq!(ids.len(), checks.len(), "duplicate check ids");
    let suites: Vec<&str> = checks.iter().map(|c| c.suite.as_str()).collect();
    let mut order = suites.clone();
    order.dedup();
    assert_eq!(order, fermigap_cli::config::SUITES.to_vec());
    for c in checks.iter().filter(|c| c.suite != "lr") {
        assert_eq!(c.status, Status::Pass, "{} {:?} {:?} {}", c.id, c.measured, c.tolerance, c.message);
    }
    let failed = checks.iter().any(|c| c.status == Status::Fail);
    assert_eq!(out.report.passed(), !failed);
    assert!(checks.iter().all(|c| !c.anchor.is_empty() && !c.anchor.contains("Eq")));
}

#[test]
fn tolerance_scale_tightens_precision_checks() {
    let mut cfg = RunConfig::default();
    cfg.suites = vec!["single-particle".into()];
    assert!(run_suite(&cfg, 1.0).report.passed());
    let strict = run_suite(&cfg, 1e-9).report;
    let diag = strict.checks.iter().find(|c| c.id == "single-particle.diagonalization").unwrap();
    assert_eq!(diag.status, Status::Fail);
    let gap = strict.checks.iter().find(|c| c.id == "single-particle.fermi-gap").unwrap();
    assert_eq!(gap.status, Status::Pass);
    cfg.tolerances.insert("single-particle.diagonalization".into(), 1.0);
    let relaxed = run_suite(&cfg, 1e-9).report;
    assert!(relaxed.checks.iter().any(|c| c.id == "single-particle.diagonalization" && c.status == Status::Pass));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_round_trips(
        seed in 0..=i64::MAX as u64,
        n in 2usize..8,
        periodic in any::<bool>(),
        fermi in -2.0f64..2.0,
        u in -3.0f64..3.0,
        steps in 1usize..200,
        s_max in 1e-3f64..1.0,
        tol in 1e-15f64..1e-3,
    ) {
        let mut cfg = RunConfig::default();
        cfg.seed = seed;
        let boundary = if periodic && n >= 3 { Boundary::Periodic } else { Boundary::Open };
        cfg.lattice = LatticeConfig { dims: vec![n], boundary: vec![boundary] };
        cfg.hopping.entries.retain(|e| e.j < n);
        cfg.interaction.truncate(n - 1);
        for term in &mut cfg.interaction {
            term.monomials[0].coefficient = [u, 0.0];
        }
        cfg.fermi_energy = fermi;
        cfg.flow.steps = steps;
        cfg.flow.s_max = s_max;
        cfg.tolerances.insert("flow.intertwining".into(), tol);
        let text = cfg.to_toml();
        let back = RunConfig::from_toml(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_toml(), text);
    }
}
