//! Weighted modules `Af`: norms, isometry decisions, canonical isometries,
//! tensor weights, rank-one Morita checks and the Picard record.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::algebra::{is_invertible, subalgebra_defect, AnalyticElement, SubalgebraDescriptor};
use crate::certificates::{generate_q, VerificationReport};
use crate::circle::{sup_norm, CircleGrid, DiskPoint, SampledFunction, C64};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::hardy::{conjugate, negative_frequency_fraction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionModule {
    pub weight: SampledFunction,
    pub algebra: SubalgebraDescriptor,
}

impl FunctionModule {
    pub fn new(weight: SampledFunction, algebra: SubalgebraDescriptor) -> Result<Self> {
        if !weight.is_nonnegative() {
            return Err(Error::Precondition("module weight must be real and nonnegative".into()));
        }
        Ok(FunctionModule { weight, algebra })
    }

    pub fn full(weight: SampledFunction) -> Result<Self> {
        Self::new(weight, SubalgebraDescriptor::Full)
    }

    fn require_positive_full(&self) -> Result<()> {
        if !self.algebra.is_full() {
            return Err(Error::Precondition("operation needs the full disk algebra".into()));
        }
        let tau = 1e-10 * (1.0 + self.weight.max_abs());
        if self.weight.values().iter().any(|v| !(v.re > tau)) {
            return Err(Error::Precondition("weight must be strictly positive".into()));
        }
        Ok(())
    }
}

/// A disk automorphism `z -> lambda (z - a) / (1 - conj(a) z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: C64,
    pub lambda: C64,
}

impl Mobius {
    pub fn new(a: C64, lambda: C64) -> Result<Self> {
        if !(a.norm() < 1.0) {
            return Err(Error::InvalidArgument(format!("Mobius parameter {a} must lie in the open disk")));
        }
        if (lambda.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("rotation {lambda} must be unimodular")));
        }
        Ok(Mobius { a, lambda })
    }

    pub fn identity() -> Self {
        Mobius { a: C64::new(0.0, 0.0), lambda: C64::new(1.0, 0.0) }
    }

    pub fn rotation(lambda: C64) -> Result<Self> {
        Self::new(C64::new(0.0, 0.0), lambda)
    }

    pub fn apply(&self, z: C64) -> C64 {
        self.lambda * (z - self.a) / (C64::new(1.0, 0.0) - self.a.conj() * z)
    }

    pub fn is_identity(&self) -> bool {
        self.a == C64::new(0.0, 0.0) && self.lambda == C64::new(1.0, 0.0)
    }
}

/// `T(a f1) = (a o phi) h f2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleMap {
    pub mobius: Mobius,
    pub multiplier: AnalyticElement,
}

/// `sup |a f|` over the refined boundary grid.
pub fn module_norm(a: &AnalyticElement, m: &FunctionModule, cfg: &RunConfig) -> Result<f64> {
    if !m.algebra.is_full() {
        let defect = subalgebra_defect(a, &m.algebra);
        if defect > cfg.tolerances.tau_eq {
            return Err(Error::NotInSubalgebra { defect });
        }
    }
    let prod = a.boundary_samples(m.weight.grid()).mul(&m.weight)?;
    Ok(sup_norm(&prod, cfg.oversample))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IsometryVerdict {
    Isometric,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryDecision {
    pub verdict: IsometryVerdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<AnalyticElement>,
    pub residual: f64,
    pub tolerance: f64,
    /// `| log|g(0)| - mean log(f1/f2) |`, the two routes to the log-mean.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_mean_discrepancy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negative_hint: Option<f64>,
}

const NEGATIVE_HINT_BOUND: f64 = 1e-3;

/// Isometry of `Af1` and `Af2` via a Q-witness for `f1/f2`.
pub fn decide_isometric(m1: &FunctionModule, m2: &FunctionModule, cfg: &RunConfig) -> Result<IsometryDecision> {
    m1.require_positive_full()?;
    m2.require_positive_full()?;
    let ratio = m1.weight.div(&m2.weight)?;
    let tol = cfg.tolerances.tol_q;
    match generate_q(&ratio, cfg) {
        Ok(cert) => {
            let g = cert.stages[0].k.entries()[0].clone();
            let residual = cert.achieved["residual"].as_f64().unwrap_or(f64::NAN);
            let log_mean = ratio.values().iter().map(|v| v.re.ln()).sum::<f64>() / ratio.n() as f64;
            let disc = (g.coeffs()[0].norm().ln() - log_mean).abs();
            let passed = cert.achieved["verdict"] == json!("PASS");
            Ok(IsometryDecision {
                verdict: if passed { IsometryVerdict::Isometric } else { IsometryVerdict::Inconclusive },
                witness: Some(g),
                residual,
                tolerance: tol,
                log_mean_discrepancy: Some(disc),
                negative_hint: (disc > NEGATIVE_HINT_BOUND).then_some(disc),
            })
        }
        Err(Error::TruncationFailure { best_residual, .. }) => Ok(IsometryDecision {
            verdict: IsometryVerdict::Inconclusive,
            witness: None,
            residual: best_residual,
            tolerance: tol,
            log_mean_discrepancy: None,
            negative_hint: None,
        }),
        Err(e) => Err(e),
    }
}

/// The operator `a f1 -> (a o phi) h f2` on boundary samples.
#[derive(Debug, Clone)]
pub struct CanonicalIsometry {
    pub map: ModuleMap,
    pub source: FunctionModule,
    pub target: FunctionModule,
    multiplier_samples: SampledFunction,
}

/// Result of composing an element with the map's automorphism.
#[derive(Debug, Clone)]
pub struct Composition {
    pub element: AnalyticElement,
    /// Energy fraction the re-projection discarded at negative frequencies.
    pub leakage: f64,
    pub warning: Option<String>,
}

pub const LEAKAGE_WARNING: f64 = 1e-8;

pub fn build_canonical_isometry(
    m1: &FunctionModule,
    m2: &FunctionModule,
    map: ModuleMap,
    cfg: &RunConfig,
) -> Result<CanonicalIsometry> {
    match is_invertible(&map.multiplier, cfg) {
        Ok(c) if c.invertible => {}
        Ok(_) | Err(Error::Inconclusive { .. }) => return Err(Error::NotInvertible),
        Err(e) => return Err(e),
    }
    if m1.weight.grid() != m2.weight.grid() {
        return Err(Error::GridMismatch(m1.weight.n(), m2.weight.n()));
    }
    let multiplier_samples = map.multiplier.boundary_samples(m2.weight.grid());
    Ok(CanonicalIsometry { map, source: m1.clone(), target: m2.clone(), multiplier_samples })
}

impl CanonicalIsometry {
    fn grid(&self) -> CircleGrid {
        self.target.weight.grid()
    }

    /// `a o phi`, sampled at `phi` of the grid points and re-projected.
    pub fn compose(&self, a: &AnalyticElement) -> Result<Composition> {
        let grid = self.grid();
        let phi = self.map.mobius;
        if phi.is_identity() {
            return Ok(Composition { element: a.clone(), leakage: 0.0, warning: None });
        }
        let samples = SampledFunction::from_fn(grid, |t| a.eval(phi.apply(C64::from_polar(1.0, t))));
        let leakage = negative_frequency_fraction(&samples);
        let element = AnalyticElement::from_boundary(&samples, grid.n() / 2 - 1)?;
        let warning = (leakage > LEAKAGE_WARNING)
            .then(|| format!("negative-frequency leakage {leakage:.3e} in Mobius substitution"));
        Ok(Composition { element, leakage, warning })
    }

    /// Boundary samples of `(a o phi) h f2`.
    pub fn apply(&self, a: &AnalyticElement) -> Result<SampledFunction> {
        let comp = self.compose(a)?;
        comp.element
            .boundary_samples(self.grid())
            .mul(&self.multiplier_samples)?
            .mul(&self.target.weight)
    }

    /// `(|| a f1 ||, || T(a f1) ||)` on the refined grid.
    pub fn norms(&self, a: &AnalyticElement, cfg: &RunConfig) -> Result<(f64, f64)> {
        let lhs = sup_norm(&a.boundary_samples(self.grid()).mul(&self.source.weight)?, cfg.oversample);
        let rhs = sup_norm(&self.apply(a)?, cfg.oversample);
        Ok((lhs, rhs))
    }
}

/// Normal form of the module tensor product: the pointwise product weight.
pub fn tensor_weight(m1: &FunctionModule, m2: &FunctionModule) -> Result<FunctionModule> {
    if !(m1.algebra.is_full() && m2.algebra.is_full()) {
        return Err(Error::Precondition("tensor_weight needs the full disk algebra".into()));
    }
    FunctionModule::full(m1.weight.mul(&m2.weight)?)
}

/// Rank-one strong Morita witness `x = f/g`, `y = g/f` with `g` a Q-witness.
/// Here `x` is `a f` with `a = 1/g` in the algebra and `y` is `g f^{-1}`, so
/// `xy = 1` holds exactly and the report measures how close `|x|` and `|y|`
/// come to 1.
pub fn rank1_morita_check(m: &FunctionModule, cfg: &RunConfig) -> Result<VerificationReport> {
    m.require_positive_full()?;
    let f = &m.weight;
    let cert = generate_q(f, cfg)?;
    let g = cert.stages[0].k.entries()[0].clone();
    let gs = g.boundary_samples(f.grid());
    let x = f.div(&gs)?;
    let y = gs.div(f)?;
    let sup_x = x.max_abs();
    let sup_y = y.max_abs();
    let pairing = x.mul(&y)?.values().iter().map(|v| (v - 1.0).norm()).fold(0.0, f64::max);
    let eps = (sup_x - 1.0).max(sup_y - 1.0).max(pairing).max(0.0);
    let fv = f.re();
    let ratio = fv.iter().cloned().fold(0.0, f64::max) / fv.iter().cloned().fold(f64::INFINITY, f64::min);
    let bound = cfg.tolerances.tol_q * ratio * (1.0 + 1e-6) + 1e-14;
    let mut rep = VerificationReport::new();
    rep.at_most("pairing", None, pairing, cfg.tolerances.tau_eq);
    rep.at_most("eps_achieved", None, eps, bound);
    rep.measure("eps", eps);
    rep.measure("sup_x", sup_x);
    rep.measure("sup_y", sup_y);
    rep.measure("witness_degree", g.degree());
    Ok(rep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Roughness {
    Smooth,
    Rough,
}

/// Modulus of continuity of the harmonic conjugate of `log f`. A coarse,
/// heuristic indicator only: on a finite grid every sample is the boundary
/// value of a trigonometric polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateProfile {
    pub conjugate: SampledFunction,
    pub shifts: Vec<usize>,
    pub modulus_of_continuity: Vec<f64>,
    pub holder_exponent: f64,
    pub roughness: Roughness,
    pub heuristic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardElement {
    pub mobius: Mobius,
    pub weight: SampledFunction,
}

impl PicardElement {
    pub fn is_identity(&self) -> bool {
        self.mobius.is_identity() && self.weight.values().iter().all(|v| (v - 1.0).norm() < 1e-12)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardDecomposition {
    #[serde(flatten)]
    pub element: PicardElement,
    pub conjugate_profile: ConjugateProfile,
}

const ROUGH_EXPONENT: f64 = 0.75;

pub fn picard_decompose(m: &FunctionModule, mobius: Mobius) -> Result<PicardDecomposition> {
    let tau = 1e-10 * (1.0 + m.weight.max_abs());
    if m.weight.values().iter().any(|v| !(v.re > tau)) || !m.weight.is_real() {
        return Err(Error::Precondition("weight must be strictly positive".into()));
    }
    let v = conjugate(&m.weight.map_real(f64::ln));
    let vals = v.re();
    let n = vals.len();
    let mut shifts = Vec::new();
    let mut s = 1;
    while s <= n / 4 {
        shifts.push(s);
        s *= 2;
    }
    let omega: Vec<f64> = shifts
        .iter()
        .map(|&s| (0..n).map(|j| (vals[(j + s) % n] - vals[j]).abs()).fold(0.0, f64::max))
        .collect();
    let small = 4.min(omega.len());
    let exponent = if omega[..small].iter().any(|&w| w < 1e-12) {
        1.0
    } else {
        let xs: Vec<f64> = shifts[..small].iter().map(|&s| (s as f64).ln()).collect();
        let ys: Vec<f64> = omega[..small].iter().map(|w| w.ln()).collect();
        let mx = xs.iter().sum::<f64>() / small as f64;
        let my = ys.iter().sum::<f64>() / small as f64;
        let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        num / den
    };
    Ok(PicardDecomposition {
        element: PicardElement { mobius, weight: m.weight.clone() },
        conjugate_profile: ConjugateProfile {
            conjugate: v,
            shifts,
            modulus_of_continuity: omega,
            holder_exponent: exponent,
            roughness: if exponent < ROUGH_EXPONENT { Roughness::Rough } else { Roughness::Smooth },
            heuristic: true,
        },
    })
}

/// A lacunary sample `log f = sum_k 2^{-k/2} cos(2^k theta)` whose conjugate
/// is only Holder-1/2 down to the grid scale.
pub fn lacunary_weight(grid: CircleGrid) -> SampledFunction {
    let top = (grid.n() / 4).trailing_zeros();
    SampledFunction::from_real_fn(grid, |t| {
        (1..=top)
            .map(|k| 2f64.powf(-(k as f64) / 2.0) * ((1u64 << k) as f64 * t).cos())
            .sum::<f64>()
            .exp()
    })
}

/// Convenience for building a two-point module.
pub fn two_point_module(weight: SampledFunction, w1: DiskPoint, w2: DiskPoint) -> Result<FunctionModule> {
    FunctionModule::new(weight, SubalgebraDescriptor::two_point(w1, w2)?)
}
