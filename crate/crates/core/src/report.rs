//! Command runners, JSON reports, CSV export and the golden example corpus.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{ATuple, AnalyticElement};
use crate::certificates::{
    certify_r, generate_m_rank1, generate_q, verify_m, verify_q, Certificate, ClassTag, PeakSetSpec,
    VerificationReport,
};
use crate::circle::{angle_distance, CircleGrid, DiskPoint, SampledFunction, C64};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::gleason::{
    exponential_g, functional_distance, morita_obstruction, two_point_qbar_certificate,
    unitary_subequivalence, ObstructionVerdict,
};
use crate::hardy::{bridged_log, log_integrability, outer_boundary, LogVerdict, DEFAULT_CUTOFFS};
use crate::modules::{
    build_canonical_isometry, decide_isometric, lacunary_weight, picard_decompose, FunctionModule,
    IsometryVerdict, Mobius, ModuleMap,
};

pub const SCHEMA_VERSION: &str = "1";

/// JSON schema every report validates against.
pub const REPORT_SCHEMA: &str = include_str!("../schema/report.schema.json");

/// Directory holding the golden corpus reports in the source tree.
pub const GOLDEN_DIR: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/golden");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub artifact: String,
    pub version: String,
    /// Unix seconds from `SOURCE_DATE_EPOCH`, or 0 so that reports stay
    /// byte-identical across runs.
    pub timestamp: u64,
}

impl Provenance {
    pub fn fixed() -> Self {
        Provenance {
            artifact: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: 0,
        }
    }

    pub fn from_env() -> Self {
        let timestamp = std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(0);
        Provenance { timestamp, ..Self::fixed() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Pass,
    Inconclusive,
    Fail,
    InputError,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Inconclusive => 2,
            Outcome::Fail => 3,
            Outcome::InputError => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub command: String,
    pub outcome: Outcome,
    pub config: RunConfig,
    pub inputs: Value,
    pub results: Value,
    pub provenance: Provenance,
}

impl Report {
    fn new(command: &str, cfg: &RunConfig, inputs: Value, outcome: Outcome, results: Value) -> Self {
        Report {
            schema_version: SCHEMA_VERSION.to_string(),
            command: command.to_string(),
            outcome,
            config: cfg.clone(),
            inputs,
            results,
            provenance: Provenance::from_env(),
        }
    }

    /// Report for a command that stopped with a library error.
    pub fn from_error(command: &str, cfg: &RunConfig, inputs: Value, err: &Error) -> Self {
        Self::new(
            command,
            cfg,
            inputs,
            outcome_of_error(err),
            json!({"error": {"kind": error_kind(err), "message": err.to_string()}}),
        )
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports are plain data");
        s.push('\n');
        s
    }
}

pub fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::InvalidGrid(_) => "InvalidGrid",
        Error::LengthMismatch { .. } => "LengthMismatch",
        Error::GridMismatch(..) => "GridMismatch",
        Error::InvalidArgument(_) => "InvalidArgument",
        Error::Precondition(_) => "Precondition",
        Error::ZeroOnGrid { .. } => "ZeroOnGrid",
        Error::RadiusOutOfDomain { .. } => "RadiusOutOfDomain",
        Error::BoundaryEvaluation(_) => "BoundaryEvaluation",
        Error::OutsideDisk(_) => "OutsideDisk",
        Error::AllZero => "AllZero",
        Error::DegreeTooLarge { .. } => "DegreeTooLarge",
        Error::Inconclusive { .. } => "Inconclusive",
        Error::NotInSubalgebra { .. } => "NotInSubalgebra",
        Error::TruncationFailure { .. } => "TruncationFailure",
        Error::NotLogIntegrable(_) => "NotLogIntegrable",
        Error::PeakSetMismatch(_) => "PeakSetMismatch",
        Error::SmoothingFailure(_) => "SmoothingFailure",
        Error::StageCheckFailed(_) => "StageCheckFailed",
        Error::NotInvertible => "NotInvertible",
        Error::SamePart { .. } => "SamePart",
        Error::ConstructionFailure(_) => "ConstructionFailure",
        Error::InvalidCertificate(_) => "InvalidCertificate",
        Error::Json(_) => "Json",
        Error::Io(_) => "Io",
    }
}

pub fn outcome_of_error(err: &Error) -> Outcome {
    match err {
        Error::InvalidGrid(_)
        | Error::LengthMismatch { .. }
        | Error::GridMismatch(..)
        | Error::InvalidArgument(_)
        | Error::Precondition(_)
        | Error::OutsideDisk(_)
        | Error::RadiusOutOfDomain { .. }
        | Error::BoundaryEvaluation(_)
        | Error::DegreeTooLarge { .. }
        | Error::AllZero
        | Error::PeakSetMismatch(_)
        | Error::InvalidCertificate(_)
        | Error::Json(_)
        | Error::Io(_) => Outcome::InputError,
        Error::Inconclusive { .. } | Error::TruncationFailure { .. } => Outcome::Inconclusive,
        _ => Outcome::Fail,
    }
}

/// Names accepted wherever a weight is expected, besides a JSON file path.
pub const BUILTIN_WEIGHTS: [&str; 10] = [
    "one",
    "const:<value>",
    "exp-cos",
    "two-plus-cos",
    "abs-one-plus-z",
    "abs-two-plus-z",
    "abs-one-minus-z2",
    "lacunary",
    "fat-arc-zero",
    "exp-inv-dist",
];

fn unit(t: f64) -> C64 {
    C64::from_polar(1.0, t)
}

pub fn builtin_weight(name: &str, grid: CircleGrid) -> Option<SampledFunction> {
    let f = |g: fn(f64) -> f64| Some(SampledFunction::from_real_fn(grid, g));
    match name {
        "one" => f(|_| 1.0),
        "exp-cos" => f(|t| t.cos().exp()),
        "two-plus-cos" => f(|t| 2.0 + t.cos()),
        "abs-one-plus-z" => f(|t| (1.0 + unit(t)).norm()),
        "abs-two-plus-z" => f(|t| (2.0 + unit(t)).norm()),
        "abs-one-minus-z2" => f(|t| (1.0 - unit(2.0 * t)).norm()),
        "lacunary" => Some(lacunary_weight(grid)),
        "fat-arc-zero" => f(|t| {
            let d = angle_distance(t, 0.0);
            if d <= 0.5 { 0.0 } else { d - 0.5 }
        }),
        "exp-inv-dist" => f(|t| {
            let d = angle_distance(t, 0.0);
            if d == 0.0 { 0.0 } else { (-1.0 / d).exp() }
        }),
        other => {
            let v: f64 = other.strip_prefix("const:")?.parse().ok()?;
            Some(SampledFunction::from_real_fn(grid, move |_| v))
        }
    }
}

/// A builtin name, or a path to a JSON sampled function.
pub fn load_weight(spec: &str, cfg: &RunConfig) -> Result<(SampledFunction, Value)> {
    let grid = CircleGrid::new(cfg.grid_n)?;
    if let Some(f) = builtin_weight(spec, grid) {
        return Ok((f, json!({"builtin": spec})));
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Error::InvalidArgument(format!(
            "'{spec}' is neither a builtin weight nor a readable file"
        )));
    }
    let text = fs::read_to_string(path)?;
    let value: Value = serde_json::from_str(&text)?;
    let f: SampledFunction = serde_json::from_value(value.clone())?;
    Ok((f, json!({"file": spec, "data": value})))
}

/// `"exp"` for the exponential family through the two points, or a JSON
/// analytic element.
pub fn load_g(spec: &str, w1: DiskPoint, w2: DiskPoint) -> Result<AnalyticElement> {
    if spec == "exp" {
        return exponential_g(w1, w2);
    }
    let text = fs::read_to_string(spec)?;
    Ok(serde_json::from_str(&text)?)
}

fn run(command: &str, cfg: &RunConfig, inputs: Value, body: impl FnOnce() -> Result<(Outcome, Value)>) -> Report {
    if let Err(e) = cfg.validate() {
        return Report::from_error(command, cfg, inputs, &e);
    }
    match body() {
        Ok((outcome, results)) => Report::new(command, cfg, inputs, outcome, results),
        Err(e) => Report::from_error(command, cfg, inputs, &e),
    }
}

fn pass_or_fail(ok: bool) -> Outcome {
    if ok { Outcome::Pass } else { Outcome::Fail }
}

/// Cells within this many grid steps of a clamped cell count as the clamp
/// neighbourhood, where the bridged log deviates from `log f`.
const CLAMP_NEIGHBOURHOOD: usize = 2;
const OUTER_TOL_SMOOTH: f64 = 1e-8;
const OUTER_TOL_CLAMPED: f64 = 1e-4;

pub fn cmd_outer(f_spec: &str, cfg: &RunConfig) -> Report {
    run("outer", cfg, json!({"f": f_spec}), || {
        let (f, _) = load_weight(f_spec, cfg)?;
        let li = log_integrability(&f, &DEFAULT_CUTOFFS, cfg.tolerances.tol_logint)?;
        if li.verdict == LogVerdict::DivergentSuspected {
            return Err(Error::NotLogIntegrable(format!("truncated log-means {:?}", li.means)));
        }
        let b = bridged_log(&f, cfg.tolerances.m_clamp)?;
        let grid = f.grid();
        let phi = outer_boundary(&b.as_sampled(grid));
        let n = grid.n();
        let mut near = vec![false; n];
        for (j, &c) in b.clamped.iter().enumerate() {
            if c {
                for d in 0..=CLAMP_NEIGHBOURHOOD {
                    near[(j + d) % n] = true;
                    near[(j + n - d) % n] = true;
                }
            }
        }
        let sup = f.max_abs();
        let err: Vec<f64> =
            phi.values().iter().zip(f.values()).map(|(p, v)| (p.norm() - v.re).abs() / sup).collect();
        let full = err.iter().cloned().fold(0.0, f64::max);
        let off = err.iter().zip(&near).filter(|(_, &m)| !m).map(|(e, _)| *e).fold(0.0, f64::max);
        let clamped = b.clamped.iter().any(|&c| c);
        let tol = if clamped { OUTER_TOL_CLAMPED } else { OUTER_TOL_SMOOTH };
        Ok((
            pass_or_fail(off <= tol),
            json!({
                "phi": phi,
                "abs_phi": phi.abs(),
                "f": f,
                "residual": full,
                "residual_off_clamp": off,
                "tolerance": tol,
                "clamped_cells": b.clamped.iter().filter(|&&c| c).count(),
                "clamp_neighbourhood_cells": CLAMP_NEIGHBOURHOOD,
                "clamp_slack": b.clamp_slack,
                "log_integrability": li,
            }),
        ))
    })
}

fn certificate_results(cert: &Certificate, rep: &VerificationReport) -> Value {
    json!({"certificate": cert, "verification": rep})
}

pub fn cmd_certify(
    tag: ClassTag,
    f_spec: &str,
    eps: &[f64],
    peak: Option<&[f64]>,
    cfg: &RunConfig,
) -> Report {
    let inputs = json!({"tag": tag, "f": f_spec, "eps": eps, "peak": peak});
    run("certify", cfg, inputs, || {
        let (f, _) = load_weight(f_spec, cfg)?;
        match tag {
            ClassTag::Q => {
                let cert = generate_q(&f, cfg)?;
                let rep = verify_q(&f, &cert.stages[0].k.entries()[0], cfg)?;
                Ok((pass_or_fail(rep.passed()), certificate_results(&cert, &rep)))
            }
            ClassTag::MTight => {
                let cert = generate_m_rank1(&f, cfg)?;
                let rep = verify_m(&cert, cfg)?;
                Ok((pass_or_fail(rep.passed()), certificate_results(&cert, &rep)))
            }
            ClassTag::RE => {
                if eps.is_empty() {
                    return Err(Error::InvalidArgument("R_E needs an eps schedule".into()));
                }
                let e = match peak {
                    Some(p) => PeakSetSpec::points(p)?,
                    None => PeakSetSpec::empty(),
                };
                let (cert, rep) = certify_r(&f, &e, eps, cfg)?;
                Ok((pass_or_fail(rep.passed()), certificate_results(&cert, &rep)))
            }
            other => Err(Error::InvalidArgument(format!(
                "certify supports Q, M_TIGHT and R_E, not {}",
                serde_json::to_string(&other).expect("tag")
            ))),
        }
    })
}

/// Test elements for the canonical isometry harness.
fn probe_elements() -> Vec<AnalyticElement> {
    vec![
        AnalyticElement::one(),
        AnalyticElement::from_real(&[0.0, 1.0]).expect("finite"),
        AnalyticElement::from_real(&[1.0, -0.5, 0.25]).expect("finite"),
        AnalyticElement::new(vec![C64::new(0.2, 0.1), C64::new(0.0, -1.0), C64::new(0.3, 0.3)]).expect("finite"),
    ]
}

pub fn cmd_isometry(f1_spec: &str, f2_spec: &str, cfg: &RunConfig) -> Report {
    run("isometry", cfg, json!({"f1": f1_spec, "f2": f2_spec}), || {
        let (f1, _) = load_weight(f1_spec, cfg)?;
        let (f2, _) = load_weight(f2_spec, cfg)?;
        let m1 = FunctionModule::full(f1)?;
        let m2 = FunctionModule::full(f2)?;
        let d = decide_isometric(&m1, &m2, cfg)?;
        let mut results = json!({"decision": d});
        if let (IsometryVerdict::Isometric, Some(w)) = (d.verdict, &d.witness) {
            // |g| = f1/f2, so a f1 -> a g f2 preserves norms.
            let iso = build_canonical_isometry(
                &m1,
                &m2,
                ModuleMap { mobius: Mobius::identity(), multiplier: w.clone() },
                cfg,
            )?;
            let mut worst = 0.0f64;
            for a in probe_elements() {
                let (l, r) = iso.norms(&a, cfg)?;
                worst = worst.max((l - r).abs() / l.max(f64::MIN_POSITIVE));
            }
            results["norm_preservation"] = json!({"max_relative_gap": worst, "probes": probe_elements().len()});
        }
        let outcome = match d.verdict {
            IsometryVerdict::Isometric => Outcome::Pass,
            IsometryVerdict::Inconclusive => Outcome::Inconclusive,
        };
        Ok((outcome, results))
    })
}

fn point(v: [f64; 2]) -> Result<DiskPoint> {
    DiskPoint::new(C64::new(v[0], v[1]))
}

pub fn cmd_gleason(w1: [f64; 2], w2: [f64; 2], g: Option<&str>, n_schedule: &[usize], cfg: &RunConfig) -> Report {
    let inputs = json!({"w1": w1, "w2": w2, "G": g, "n_schedule": n_schedule});
    run("gleason", cfg, inputs, || {
        let (p1, p2) = (point(w1)?, point(w2)?);
        let distance = functional_distance(p1, p2, cfg);
        let mut results = json!({"distance": distance, "tau_part": cfg.tolerances.tau_part});
        let mut outcome = pass_or_fail(distance.challenge_passed);
        if let Some(spec) = g {
            let g = load_g(spec, p1, p2)?;
            if distance.same_part {
                let h = AnalyticElement::monomial(1, C64::new(1.0, 0.0))?;
                let w = unitary_subequivalence(p1, p2, &g, &h, cfg)?;
                outcome = pass_or_fail(outcome == Outcome::Pass && w.report.passed());
                results["dichotomy"] = json!({"branch": "SAME_PART", "subequivalence": w});
            } else {
                let out = two_point_qbar_certificate(p1, p2, &g, n_schedule, cfg)?;
                outcome = pass_or_fail(outcome == Outcome::Pass && out.report.passed());
                results["dichotomy"] = json!({"branch": "DIFFERENT_PARTS", "qbar": out});
            }
        }
        Ok((outcome, results))
    })
}

/// Built-in Morita candidates: `even` pairs `3 + z^2` with its reciprocal,
/// `subequivalence` feeds the unitary witnesses `(z/G, zG)`.
pub fn morita_candidate(name: &str, w1: DiskPoint, w2: DiskPoint, g: &AnalyticElement, cfg: &RunConfig) -> Result<(ATuple, ATuple)> {
    match name {
        "even" => {
            let k = AnalyticElement::from_real(&[3.0, 0.0, 1.0])?;
            let (h, _) = k.reciprocal(1e-14, cfg.max_degree)?;
            Ok((ATuple::single(h), ATuple::single(k)))
        }
        "subequivalence" => {
            let z = AnalyticElement::monomial(1, C64::new(1.0, 0.0))?;
            let w = unitary_subequivalence(w1, w2, g, &z, cfg)?;
            Ok((ATuple::single(w.y), ATuple::single(w.x)))
        }
        path => {
            #[derive(Deserialize)]
            struct Pair {
                #[serde(rename = "H")]
                h: Vec<AnalyticElement>,
                #[serde(rename = "K")]
                k: Vec<AnalyticElement>,
            }
            let p: Pair = serde_json::from_str(&fs::read_to_string(path)?)?;
            Ok((ATuple::new(p.h)?, ATuple::new(p.k)?))
        }
    }
}

pub fn cmd_morita_two_point(
    w1: [f64; 2],
    w2: [f64; 2],
    g: &str,
    candidate: &str,
    c: f64,
    cfg: &RunConfig,
) -> Report {
    let inputs = json!({"w1": w1, "w2": w2, "G": g, "candidate": candidate, "c": c});
    run("morita-two-point", cfg, inputs, || {
        let (p1, p2) = (point(w1)?, point(w2)?);
        let g = load_g(g, p1, p2)?;
        let (h, k) = morita_candidate(candidate, p1, p2, &g, cfg)?;
        let rep = morita_obstruction(&h, &k, c, p1, p2, &g, cfg)?;
        let outcome = match rep.verdict {
            ObstructionVerdict::Consistent => Outcome::Pass,
            ObstructionVerdict::Violation => Outcome::Fail,
        };
        Ok((outcome, json!({"obstruction": rep, "tau_part": cfg.tolerances.tau_part})))
    })
}

pub fn cmd_picard(f_spec: &str, a: [f64; 2], lambda_angle: f64, cfg: &RunConfig) -> Report {
    let inputs = json!({"f": f_spec, "mobius": {"a": a, "lambda_angle": lambda_angle}});
    run("picard", cfg, inputs, || {
        let (f, _) = load_weight(f_spec, cfg)?;
        let m = Mobius::new(C64::new(a[0], a[1]), C64::from_polar(1.0, lambda_angle))?;
        let p = picard_decompose(&FunctionModule::full(f)?, m)?;
        let identity = p.element.is_identity();
        Ok((Outcome::Pass, json!({"decomposition": p, "is_identity": identity})))
    })
}

/// Writes one CSV per certificate stage and a summary CSV for certify
/// reports; outer reports get a single profile CSV plus the summary.
pub fn emit_plot_data(report: &Report, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));

    let mut summary = csv::Writer::from_path(dir.join("summary.csv")).map_err(csv_err)?;
    summary
        .write_record(["stage", "eps", "k_len", "k_degree", "sup_abs_e_minus_1", "max_norm_k_over_f"])
        .map_err(csv_err)?;

    if let Some(cert) = report.results.get("certificate") {
        let cert: Certificate = serde_json::from_value(cert.clone())?;
        let grid = cert.target.grid();
        let f = cert.target.re();
        for (m, stage) in cert.stages.iter().enumerate() {
            let ks = stage.k.boundary_samples(grid);
            let hs = stage.h.boundary_samples(grid);
            let path = dir.join(format!("stage_{m}.csv"));
            let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
            w.write_record(["theta", "f", "norm_K", "inv_norm_H", "e_re", "e_im", "abs_e_minus_1"])
                .map_err(csv_err)?;
            let mut sup_e = 0.0f64;
            let mut ratio = 0.0f64;
            for j in 0..grid.n() {
                let nk = ks.iter().map(|s| s.values()[j].norm_sqr()).sum::<f64>().sqrt();
                let nh = hs.iter().map(|s| s.values()[j].norm_sqr()).sum::<f64>().sqrt();
                let e: C64 = ks.iter().zip(&hs).map(|(k, h)| k.values()[j] * h.values()[j]).sum();
                sup_e = sup_e.max((e - 1.0).norm());
                if f[j] > 0.0 {
                    ratio = ratio.max(nk / f[j]);
                }
                w.write_record(&[
                    grid.theta(j).to_string(),
                    f[j].to_string(),
                    nk.to_string(),
                    (1.0 / nh).to_string(),
                    e.re.to_string(),
                    e.im.to_string(),
                    (e - 1.0).norm().to_string(),
                ])
                .map_err(csv_err)?;
            }
            w.flush()?;
            written.push(path);
            summary
                .write_record(&[
                    m.to_string(),
                    stage.eps.to_string(),
                    stage.k.len().to_string(),
                    stage.k.max_degree().to_string(),
                    sup_e.to_string(),
                    ratio.to_string(),
                ])
                .map_err(csv_err)?;
        }
    } else if let (Some(f), Some(phi)) = (report.results.get("f"), report.results.get("abs_phi")) {
        let f: SampledFunction = serde_json::from_value(f.clone())?;
        let phi: SampledFunction = serde_json::from_value(phi.clone())?;
        let path = dir.join("outer.csv");
        let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
        w.write_record(["theta", "f", "abs_phi"]).map_err(csv_err)?;
        for j in 0..f.n() {
            w.write_record(&[
                f.grid().theta(j).to_string(),
                f.values()[j].re.to_string(),
                phi.values()[j].re.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        written.push(path);
    }
    summary.flush()?;
    written.push(dir.join("summary.csv"));
    Ok(written)
}

/// One shipped example with its golden file name.
pub struct CorpusCase {
    pub name: &'static str,
    pub run: fn(&RunConfig) -> Report,
}

pub fn corpus_cases() -> Vec<CorpusCase> {
    vec![
        CorpusCase { name: "outer_exp_cos", run: |c| cmd_outer("exp-cos", c) },
        CorpusCase { name: "outer_abs_one_plus_z", run: |c| cmd_outer("abs-one-plus-z", c) },
        CorpusCase { name: "certify_q_two_plus_cos", run: |c| cmd_certify(ClassTag::Q, "two-plus-cos", &[], None, c) },
        CorpusCase {
            name: "certify_re_abs_one_plus_z",
            run: |c| cmd_certify(ClassTag::RE, "abs-one-plus-z", &[0.1, 0.01], Some(&[std::f64::consts::PI]), c),
        },
        CorpusCase { name: "isometry_abs_two_plus_z_vs_one", run: |c| cmd_isometry("abs-two-plus-z", "one", c) },
        CorpusCase { name: "gleason_half_minus_half", run: |c| cmd_gleason([0.5, 0.0], [-0.5, 0.0], None, &[], c) },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusEntry {
    pub name: String,
    pub outcome: Outcome,
    /// `None` when writing, otherwise whether the golden file matched byte for byte.
    pub matches_golden: Option<bool>,
}

/// Reruns every corpus case under the default configuration with fixed
/// provenance, then either writes the golden files or compares against them.
pub fn run_corpus(dir: &Path, write: bool) -> Result<Vec<CorpusEntry>> {
    let cfg = RunConfig::default();
    if write {
        fs::create_dir_all(dir)?;
    }
    let mut out = Vec::new();
    for case in corpus_cases() {
        let mut report = (case.run)(&cfg);
        report.provenance = Provenance::fixed();
        let text = report.to_json_string();
        let path = dir.join(format!("{}.json", case.name));
        let matches_golden = if write {
            fs::write(&path, &text)?;
            None
        } else {
            Some(fs::read_to_string(&path).map(|g| g == text).unwrap_or(false))
        };
        out.push(CorpusEntry { name: case.name.to_string(), outcome: report.outcome, matches_golden });
    }
    Ok(out)
}
