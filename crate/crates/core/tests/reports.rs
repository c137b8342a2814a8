use std::f64::consts::PI;
use std::fs;

use diskmod::certificates::ClassTag;
use diskmod::config::RunConfig;
use diskmod::report::{
    cmd_certify, cmd_gleason, cmd_isometry, cmd_morita_two_point, cmd_outer, cmd_picard, corpus_cases,
    emit_plot_data, outcome_of_error, run_corpus, Outcome, Report, REPORT_SCHEMA,
};
use diskmod::Error;
use serde_json::Value;

fn validator() -> jsonschema::Validator {
    let schema: Value = serde_json::from_str(REPORT_SCHEMA).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(report: &Report) {
    let v: Value = serde_json::from_str(&report.to_json_string()).unwrap();
    let errors: Vec<String> = validator().iter_errors(&v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{} report: {errors:#?}", report.command);
}

fn every_command(cfg: &RunConfig) -> Vec<Report> {
    vec![
        cmd_outer("exp-cos", cfg),
        cmd_outer("fat-arc-zero", cfg),
        cmd_certify(ClassTag::Q, "two-plus-cos", &[], None, cfg),
        cmd_certify(ClassTag::MTight, "exp-cos", &[], None, cfg),
        cmd_certify(ClassTag::RE, "abs-one-plus-z", &[0.1, 0.01], Some(&[PI]), cfg),
        cmd_certify(ClassTag::Q, "no-such-weight", &[], None, cfg),
        cmd_isometry("abs-two-plus-z", "one", cfg),
        cmd_isometry("lacunary", "one", cfg),
        cmd_gleason([0.5, 0.0], [-0.5, 0.0], None, &[], cfg),
        cmd_gleason([0.5, 0.0], [1.0, 0.0], Some("exp"), &[4, 8], cfg),
        cmd_gleason([0.5, 0.0], [-0.5, 0.0], Some("exp"), &[4, 8], cfg),
        cmd_morita_two_point([0.5, 0.0], [-0.5, 0.0], "exp", "even", 1.02, cfg),
        cmd_morita_two_point([0.5, 0.0], [-0.5, 0.0], "exp", "even", 0.5, cfg),
        cmd_picard("lacunary", [0.3, 0.0], 0.5, cfg),
        cmd_picard("exp-cos", [0.0, 0.0], 0.0, cfg),
    ]
}

#[test]
fn every_report_validates_against_schema() {
    let cfg = RunConfig::default();
    for r in every_command(&cfg) {
        assert_valid(&r);
    }
}

#[test]
fn schema_rejects_malformed_reports() {
    let cfg = RunConfig::default();
    let mut v: Value = serde_json::to_value(cmd_outer("exp-cos", &cfg)).unwrap();
    v["outcome"] = Value::from("MAYBE");
    assert!(!validator().is_valid(&v));
    let mut v: Value = serde_json::to_value(cmd_outer("exp-cos", &cfg)).unwrap();
    v.as_object_mut().unwrap().remove("provenance");
    assert!(!validator().is_valid(&v));
    let mut v: Value = serde_json::to_value(cmd_outer("exp-cos", &cfg)).unwrap();
    v["config"]["tolerances"]["tol_q"] = Value::from(-1.0);
    assert!(!validator().is_valid(&v));
}

#[test]
fn outcomes_follow_the_result() {
    let cfg = RunConfig::default();
    assert_eq!(cmd_certify(ClassTag::Q, "no-such-weight", &[], None, &cfg).outcome, Outcome::InputError);
    assert_eq!(cmd_outer("exp-cos", &cfg).outcome, Outcome::Pass);
    assert_eq!(cmd_morita_two_point([0.5, 0.0], [-0.5, 0.0], "exp", "even", 1.02, &cfg).outcome, Outcome::Fail);
    assert_eq!(cmd_morita_two_point([0.5, 0.0], [-0.5, 0.0], "exp", "even", 0.5, &cfg).outcome, Outcome::InputError);
    assert_eq!(cmd_gleason([0.5, 0.0], [-0.5, 0.0], Some("exp"), &[4, 8], &cfg).outcome, Outcome::Pass);
    let r = cmd_certify(ClassTag::Q, "no-such-weight", &[], None, &cfg);
    assert_eq!(r.results["error"]["kind"], "InvalidArgument");
}

#[test]
fn exit_codes_are_distinct() {
    let codes: Vec<i32> =
        [Outcome::Pass, Outcome::Inconclusive, Outcome::Fail, Outcome::InputError].iter().map(|o| o.exit_code()).collect();
    assert_eq!(codes, vec![0, 2, 3, 4]);
    assert_eq!(outcome_of_error(&Error::InvalidGrid(3)), Outcome::InputError);
    assert_eq!(
        outcome_of_error(&Error::TruncationFailure { best_residual: 1.0, max_degree: 8 }),
        Outcome::Inconclusive
    );
    assert_eq!(outcome_of_error(&Error::NotInvertible), Outcome::Fail);
}

#[test]
fn reports_are_deterministic() {
    let cfg = RunConfig::default();
    for case in corpus_cases() {
        let a = (case.run)(&cfg).to_json_string();
        let b = (case.run)(&cfg).to_json_string();
        assert_eq!(a, b, "{}", case.name);
    }
}

#[test]
fn corpus_round_trips_through_a_fresh_directory() {
    let dir = tempfile::tempdir().unwrap();
    let written = run_corpus(dir.path(), true).unwrap();
    assert!(written.iter().all(|e| e.matches_golden.is_none()));
    let checked = run_corpus(dir.path(), false).unwrap();
    assert!(checked.iter().all(|e| e.matches_golden == Some(true)));

    let victim = dir.path().join(format!("{}.json", checked[0].name));
    let text = fs::read_to_string(&victim).unwrap();
    fs::write(&victim, text.replacen('1', "2", 1)).unwrap();
    let checked = run_corpus(dir.path(), false).unwrap();
    assert_eq!(checked[0].matches_golden, Some(false));
    assert!(checked[1..].iter().all(|e| e.matches_golden == Some(true)));
}

#[test]
fn certify_writes_one_csv_per_stage() {
    let cfg = RunConfig::default();
    let dir = tempfile::tempdir().unwrap();
    let r = cmd_certify(ClassTag::RE, "abs-one-plus-z", &[0.1, 0.01], Some(&[PI]), &cfg);
    let files = emit_plot_data(&r, dir.path()).unwrap();
    let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["stage_0.csv", "stage_1.csv", "summary.csv"]);

    let mut rdr = csv::Reader::from_path(dir.path().join("stage_1.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, ["theta", "f", "norm_K", "inv_norm_H", "e_re", "e_im", "abs_e_minus_1"]);
    assert_eq!(rdr.records().count(), cfg.grid_n);

    let mut rdr = csv::Reader::from_path(dir.path().join("summary.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 2);
    let e0: f64 = rows[0][4].parse().unwrap();
    let e1: f64 = rows[1][4].parse().unwrap();
    assert!(e1 < e0);
}

#[test]
fn reports_without_stages_get_only_a_summary() {
    let cfg = RunConfig::default();
    let dir = tempfile::tempdir().unwrap();
    let r = cmd_gleason([0.5, 0.0], [-0.5, 0.0], None, &[], &cfg);
    let files = emit_plot_data(&r, dir.path()).unwrap();
    assert_eq!(files, [dir.path().join("summary.csv")]);
    let mut rdr = csv::Reader::from_path(&files[0]).unwrap();
    assert_eq!(rdr.records().count(), 0);

    let r = cmd_outer("exp-cos", &cfg);
    let files = emit_plot_data(&r, dir.path()).unwrap();
    assert_eq!(files.len(), 2);
    assert!(dir.path().join("outer.csv").exists());
}
