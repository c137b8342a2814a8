//! Certificates for the modulus-approximation classes and their verifiers.
//!
//! A certificate carries a target weight `f`, one `(K, H)` tuple pair per
//! stage and the measurements the verifier produced for it. Generators never
//! fill `achieved` themselves.

mod q;
mod rigged;

pub use q::{
    generate_q, generate_m_rank1, verify_m, verify_m_alternative, verify_q, verify_qbar,
    verify_subequivalence,
};
pub use rigged::{
    certify_r, clamp_cells, generate_r_certificate, verify_r, RStage, RStageDiagnostics,
    SmoothingMode,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::algebra::{ATuple, SubalgebraDescriptor};
use crate::circle::{angle_distance, SampledFunction};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClassTag {
    P,
    Q,
    #[serde(rename = "QBAR_PLUS")]
    QbarPlus,
    #[serde(rename = "G_CONVEX")]
    GConvex,
    #[serde(rename = "M_TIGHT")]
    MTight,
    #[serde(rename = "R_E")]
    RE,
}

/// Closed arcs `[a, b]` (radians, counterclockwise from `a`) of the circle.
/// Single points are degenerate arcs `[t, t]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PeakSetSpec {
    intervals: Vec<[f64; 2]>,
}

impl PeakSetSpec {
    pub fn empty() -> Self {
        PeakSetSpec::default()
    }

    pub fn new(intervals: Vec<[f64; 2]>) -> Result<Self> {
        let mut norm = Vec::with_capacity(intervals.len());
        for [a, b] in intervals {
            if !(a.is_finite() && b.is_finite()) || b < a || b - a >= 2.0 * PI {
                return Err(Error::InvalidArgument(format!("bad arc [{a}, {b}]")));
            }
            let a0 = a.rem_euclid(2.0 * PI);
            norm.push([a0, a0 + (b - a)]);
        }
        for i in 0..norm.len() {
            for j in 0..norm.len() {
                if i != j && arc_contains(norm[i], norm[j][0]) {
                    return Err(Error::InvalidArgument("arcs must be disjoint".into()));
                }
            }
        }
        let spec = PeakSetSpec { intervals: norm };
        if spec.total_measure() >= 2.0 * PI {
            return Err(Error::InvalidArgument("peak set must not fill the circle".into()));
        }
        Ok(spec)
    }

    pub fn points(thetas: &[f64]) -> Result<Self> {
        Self::new(thetas.iter().map(|&t| [t, t]).collect())
    }

    pub fn intervals(&self) -> &[[f64; 2]] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn total_measure(&self) -> f64 {
        self.intervals.iter().map(|[a, b]| b - a).sum()
    }

    /// Circular distance from `theta` to the set; infinite for the empty set.
    pub fn distance(&self, theta: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&arc| {
                if arc_contains(arc, theta) {
                    0.0
                } else {
                    angle_distance(theta, arc[0]).min(angle_distance(theta, arc[1]))
                }
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        let mut all = self.intervals.clone();
        all.extend_from_slice(&other.intervals);
        Self::new(all)
    }
}

fn arc_contains([a, b]: [f64; 2], t: f64) -> bool {
    (t - a).rem_euclid(2.0 * PI) <= b - a
}

impl Serialize for PeakSetSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.intervals.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PeakSetSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<[f64; 2]>::deserialize(d)?;
        PeakSetSpec::new(v).map_err(serde::de::Error::custom)
    }
}

mod entries_list {
    use crate::algebra::{ATuple, AnalyticElement};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(t: &ATuple, s: S) -> Result<S::Ok, S::Error> {
        t.entries().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ATuple, D::Error> {
        let v = Vec::<AnalyticElement>::deserialize(d)?;
        ATuple::new(v).map_err(serde::de::Error::custom)
    }
}

/// One stage of a certificate: tuples `K` (approximating `f`) and `H`
/// (approximating `1/f`) at tolerance `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub eps: f64,
    #[serde(rename = "K", with = "entries_list")]
    pub k: ATuple,
    #[serde(rename = "H", with = "entries_list")]
    pub h: ATuple,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub tag: ClassTag,
    #[serde(rename = "f")]
    pub target: SampledFunction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_set: Option<PeakSetSpec>,
    #[serde(default = "full_algebra", skip_serializing_if = "SubalgebraDescriptor::is_full")]
    pub algebra: SubalgebraDescriptor,
    pub stages: Vec<Stage>,
    #[serde(default)]
    pub achieved: Map<String, Value>,
}

fn full_algebra() -> SubalgebraDescriptor {
    SubalgebraDescriptor::Full
}

impl Certificate {
    pub fn new(tag: ClassTag, target: SampledFunction, stages: Vec<Stage>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidCertificate("a certificate needs at least one stage".into()));
        }
        Ok(Certificate {
            tag,
            target,
            peak_set: None,
            algebra: SubalgebraDescriptor::Full,
            stages,
            achieved: Map::new(),
        })
    }

    pub fn eps_schedule(&self) -> Vec<f64> {
        self.stages.iter().map(|s| s.eps).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
}

/// A single measured quantity compared against the tolerance it was tested at.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<usize>,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub measurements: Map<String, Value>,
}

impl VerificationReport {
    pub(crate) fn new() -> Self {
        VerificationReport {
            verdict: Verdict::Pass,
            checks: Vec::new(),
            notes: Vec::new(),
            measurements: Map::new(),
        }
    }

    /// Records `value <= tolerance`.
    pub(crate) fn at_most(&mut self, name: &str, stage: Option<usize>, value: f64, tolerance: f64) -> bool {
        self.record(name, stage, value, tolerance, value <= tolerance)
    }

    pub(crate) fn record(
        &mut self,
        name: &str,
        stage: Option<usize>,
        value: f64,
        tolerance: f64,
        passed: bool,
    ) -> bool {
        if !passed {
            self.verdict = Verdict::Fail;
        }
        self.checks.push(Check { name: name.to_string(), stage, value, tolerance, passed });
        passed
    }

    pub(crate) fn fail(&mut self, note: impl Into<String>) {
        self.verdict = Verdict::Fail;
        self.notes.push(note.into());
    }

    pub(crate) fn measure(&mut self, key: &str, v: impl Into<Value>) {
        self.measurements.insert(key.to_string(), v.into());
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn check(&self, name: &str, stage: Option<usize>) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name && c.stage == stage)
    }
}

/// `[0, 1, 2, 4, ...]` up to and including `max`.
pub(crate) fn degree_ladder(max: usize) -> Vec<usize> {
    let mut v = vec![0];
    let mut d = 1;
    while d < max {
        v.push(d);
        d *= 2;
    }
    if max > 0 {
        v.push(max);
    }
    v
}
