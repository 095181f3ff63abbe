//! CLI surface and report-format checks: schema validity, CSV shape,
//! overrides, and the config round trip through a real file.

use std::process::Command;

use sixvertex::harness::{emit_report, load_config, run_suite, OutputFormat, RunConfig, Suite};

fn small_commute_config() -> RunConfig {
    let mut config = RunConfig::for_suite(Suite::Commute);
    config.grids.commute_site_counts = vec![2, 3];
    config.grids.draws = 1;
    config.grids.spectral_pairs = 1;
    config
}

#[test]
fn report_validates_against_shipped_schema() {
    let schema_text = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/schema/report.schema.json"
    ))
    .unwrap();
    let schema: serde_json::Value = serde_json::from_str(&schema_text).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();

    for suite in [Suite::Commute, Suite::LemmaAudit, Suite::ActionAngle] {
        let mut config = small_commute_config();
        config.suite = suite;
        config.grids.action_angle_grid = 3;
        let report = run_suite(&config).unwrap();
        let bytes = emit_report(&report, OutputFormat::Json).unwrap();
        let value: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        let errors: Vec<String> = validator.iter_errors(&value).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{suite}: schema violations: {errors:?}");
    }
}

#[test]
fn csv_emission_via_binary() {
    let exe = env!("CARGO_BIN_EXE_sixvertex");
    let dir = std::env::temp_dir().join(format!("sixvertex-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("commute.json");
    std::fs::write(
        &config_path,
        serde_json::to_string(&small_commute_config()).unwrap(),
    )
    .unwrap();
    let out = dir.join("report.csv");
    let result = Command::new(exe)
        .args(["commute", "--format", "csv", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(result.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("suite,case,label,residual,tolerance,pass,error"));
    assert_eq!(lines.count(), 2, "one row per case");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn seed_flag_overrides_config() {
    let exe = env!("CARGO_BIN_EXE_sixvertex");
    let dir = std::env::temp_dir().join(format!("sixvertex-seed-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("commute.json");
    std::fs::write(
        &config_path,
        serde_json::to_string(&small_commute_config()).unwrap(),
    )
    .unwrap();
    let run_with_seed = |seed: &str, out: &std::path::Path| {
        let result = Command::new(exe)
            .args(["commute", "--seed", seed, "--config"])
            .arg(&config_path)
            .arg("--out")
            .arg(out)
            .output()
            .unwrap();
        assert!(result.status.success());
        let v: serde_json::Value = serde_json::from_slice(&std::fs::read(out).unwrap()).unwrap();
        v["cases"][0]["inputs"].clone()
    };
    let a = run_with_seed("3", &dir.join("a.json"));
    let b = run_with_seed("4", &dir.join("b.json"));
    let c = run_with_seed("3", &dir.join("c.json"));
    assert_ne!(a, b);
    assert_eq!(a, c);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn tol_flag_fails_a_passing_suite() {
    let exe = env!("CARGO_BIN_EXE_sixvertex");
    let dir = std::env::temp_dir().join(format!("sixvertex-tol-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("commute.json");
    std::fs::write(
        &config_path,
        serde_json::to_string(&small_commute_config()).unwrap(),
    )
    .unwrap();
    let result = Command::new(exe)
        .args(["commute", "--tol", "1e-300", "--config"])
        .arg(&config_path)
        .arg("--out")
        .arg(dir.join("r.json"))
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(1));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_file_round_trip() {
    let config = small_commute_config();
    let text = serde_json::to_string_pretty(&config).unwrap();
    let parsed = load_config(&text).unwrap();
    assert_eq!(config, parsed);
}
