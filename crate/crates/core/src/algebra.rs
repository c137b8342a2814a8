//! Polynomial elements of the disk algebra, A-tuples, invertibility and
//! the two-point subalgebra `A0 = {a : a(w1) = a(w2)}`.

use serde::{Deserialize, Serialize};

use crate::circle::{
    dft_inverse, fft_analysis, min_modulus, sup_norm, winding_number, CircleGrid, DiskPoint,
    SampledFunction, C64,
};
use crate::config::RunConfig;
use crate::error::{Error, Result};

/// Hard cap on the degree of any element.
pub const DEGREE_CAP: usize = 4096;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// A polynomial `sum_k c_k z^k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "analytic")]
pub struct AnalyticElement {
    coeffs: Vec<C64>,
}

impl AnalyticElement {
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("an element needs at least one coefficient".into()));
        }
        if coeffs.len() - 1 > DEGREE_CAP {
            return Err(Error::DegreeTooLarge { degree: coeffs.len() - 1, max: DEGREE_CAP });
        }
        Ok(AnalyticElement { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn constant(c: C64) -> Self {
        AnalyticElement { coeffs: vec![c] }
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    pub fn monomial(k: usize, c: C64) -> Result<Self> {
        let mut v = vec![ZERO; k + 1];
        v[k] = c;
        Self::new(v)
    }

    /// Taylor polynomial of `alpha * exp(c z)` of the given degree.
    pub fn exp_linear(alpha: C64, c: C64, degree: usize) -> Result<Self> {
        let mut v = Vec::with_capacity(degree + 1);
        let mut term = alpha;
        for k in 0..=degree {
            v.push(term);
            term = term * c / (k + 1) as f64;
        }
        Self::new(v)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Horner evaluation. Defined for any complex `z`; the algebra only
    /// cares about the closed disk.
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn evaluate(&self, z: DiskPoint) -> C64 {
        self.eval(z.z())
    }

    /// Exact values at the grid points. Coefficients beyond the grid are
    /// folded onto their aliases, which is exact for point values.
    pub fn boundary_samples(&self, grid: CircleGrid) -> SampledFunction {
        let n = grid.n();
        let mut buf = vec![ZERO; n];
        for (k, &c) in self.coeffs.iter().enumerate() {
            buf[k % n] += c;
        }
        dft_inverse(&mut buf);
        SampledFunction::new(grid, buf).expect("length matches grid")
    }

    /// Smallest grid on which this element is spectrally resolved.
    pub fn natural_grid(&self) -> CircleGrid {
        let n = (2 * self.degree() + 2).next_power_of_two().max(16);
        CircleGrid::new(n).expect("power of two")
    }

    pub fn sup_norm(&self, oversample: usize) -> f64 {
        sup_norm(&self.boundary_samples(self.natural_grid()), oversample)
    }

    /// Projection of boundary samples onto frequencies `0..=degree`.
    pub fn from_boundary(samples: &SampledFunction, degree: usize) -> Result<Self> {
        if degree >= samples.n() / 2 {
            return Err(Error::InvalidArgument(format!(
                "degree {degree} is not resolved by a grid of {} points",
                samples.n()
            )));
        }
        let c = fft_analysis(samples);
        Self::new((0..=degree as i64).map(|k| c.get(k)).collect())
    }

    pub fn truncate(&self, degree: usize) -> Self {
        let d = degree.min(self.degree());
        AnalyticElement { coeffs: self.coeffs[..=d].to_vec() }
    }

    pub fn scale(&self, s: C64) -> Self {
        AnalyticElement { coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| {
                self.coeffs.get(k).copied().unwrap_or(ZERO)
                    + other.coeffs.get(k).copied().unwrap_or(ZERO)
            })
            .collect();
        AnalyticElement { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let d = self.degree() + other.degree();
        if d > DEGREE_CAP {
            return Err(Error::DegreeTooLarge { degree: d, max: DEGREE_CAP });
        }
        let mut out = vec![ZERO; d + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Ok(AnalyticElement { coeffs: out })
    }

    /// Polynomial approximant of `1/a`, for `a` zero-free on the closed disk.
    /// Returns the approximant and the achieved `sup |r a - 1|`.
    pub fn reciprocal(&self, tol: f64, max_degree: usize) -> Result<(Self, f64)> {
        let mut best: Option<(Self, f64)> = None;
        let mut d = 16usize;
        loop {
            let d_eff = d.min(max_degree);
            let grid = CircleGrid::new((4 * (d_eff + self.degree() + 1)).next_power_of_two())?;
            let inv = self.boundary_samples(grid).map(|v| C64::new(1.0, 0.0) / v);
            let r = Self::from_boundary(&inv, d_eff)?;
            let prod = r.mul(self)?;
            let res = prod
                .boundary_samples(grid)
                .values()
                .iter()
                .fold(0.0f64, |m, v| m.max((v - 1.0).norm()));
            if best.as_ref().map_or(true, |b| res < b.1) {
                best = Some((r, res));
            }
            if res <= tol || d_eff >= max_degree {
                break;
            }
            d *= 2;
        }
        let (r, res) = best.expect("at least one attempt");
        if res <= tol {
            Ok((r, res))
        } else {
            Err(Error::TruncationFailure { best_residual: res, max_degree })
        }
    }
}

/// A finite vector of elements with pointwise Euclidean-norm semantics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "atuple")]
pub struct ATuple {
    entries: Vec<AnalyticElement>,
}

impl ATuple {
    pub fn new(entries: Vec<AnalyticElement>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidArgument("a tuple needs at least one entry".into()));
        }
        Ok(ATuple { entries })
    }

    pub fn single(a: AnalyticElement) -> Self {
        ATuple { entries: vec![a] }
    }

    pub fn entries(&self) -> &[AnalyticElement] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_degree(&self) -> usize {
        self.entries.iter().map(|e| e.degree()).max().unwrap_or(0)
    }

    pub fn values_at(&self, z: C64) -> Vec<C64> {
        self.entries.iter().map(|e| e.eval(z)).collect()
    }

    pub fn norm_at(&self, z: C64) -> f64 {
        self.entries.iter().map(|e| e.eval(z).norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn boundary_samples(&self, grid: CircleGrid) -> Vec<SampledFunction> {
        self.entries.iter().map(|e| e.boundary_samples(grid)).collect()
    }

    /// The bilinear pairing `sum_i h_i k_i` (no conjugation).
    pub fn dot(&self, other: &ATuple) -> Result<AnalyticElement> {
        if self.len() != other.len() {
            return Err(Error::InvalidArgument(format!(
                "tuple lengths differ: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        let mut acc = AnalyticElement::constant(ZERO);
        for (h, k) in self.entries.iter().zip(&other.entries) {
            acc = acc.add(&h.mul(k)?);
        }
        Ok(acc)
    }

    /// Tensor product: all pairwise products of entries.
    pub fn tensor(&self, other: &ATuple) -> Result<ATuple> {
        let mut entries = Vec::with_capacity(self.len() * other.len());
        for a in &self.entries {
            for b in &other.entries {
                entries.push(a.mul(b)?);
            }
        }
        ATuple::new(entries)
    }

    pub fn map(&self, f: impl Fn(&AnalyticElement) -> AnalyticElement) -> ATuple {
        ATuple { entries: self.entries.iter().map(f).collect() }
    }
}

/// Pointwise Euclidean norm of the tuple on the grid.
pub fn tuple_pointwise_norm(h: &ATuple, grid: CircleGrid) -> SampledFunction {
    let samples = h.boundary_samples(grid);
    let vals = (0..grid.n())
        .map(|j| samples.iter().map(|s| s.values()[j].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    SampledFunction::from_real(grid, vals).expect("length matches grid")
}

/// The full disk algebra or the two-point subalgebra.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SubalgebraDescriptor {
    Full,
    TwoPoint { w1: DiskPoint, w2: DiskPoint },
}

impl SubalgebraDescriptor {
    pub fn two_point(w1: DiskPoint, w2: DiskPoint) -> Result<Self> {
        if w1 == w2 {
            return Err(Error::Precondition("two-point algebra needs w1 != w2".into()));
        }
        Ok(SubalgebraDescriptor::TwoPoint { w1, w2 })
    }

    pub fn is_full(&self) -> bool {
        matches!(self, SubalgebraDescriptor::Full)
    }
}

/// Outcome of [`is_invertible`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvertibilityCheck {
    pub invertible: bool,
    pub margin: f64,
    pub winding: Option<i64>,
    pub tau_inv: f64,
}

/// Invertibility in the disk algebra via boundary margin and winding number.
pub fn is_invertible(a: &AnalyticElement, cfg: &RunConfig) -> Result<InvertibilityCheck> {
    let n = cfg.grid_n.max((2 * a.degree() + 2).next_power_of_two());
    let samples = a.boundary_samples(CircleGrid::new(n)?);
    let sup = sup_norm(&samples, cfg.oversample);
    let margin = min_modulus(&samples, cfg.oversample);
    let tau_zero = 1e-10 * (1.0 + sup);
    let tau_inv = cfg.tolerances.tau_inv * (1.0 + sup);
    if margin < tau_zero {
        return Ok(InvertibilityCheck { invertible: false, margin, winding: None, tau_inv });
    }
    if margin < tau_inv {
        return Err(Error::Inconclusive { margin, tau_zero, tau_inv });
    }
    let w = winding_number(&samples, cfg.oversample)?;
    Ok(InvertibilityCheck { invertible: w == 0, margin, winding: Some(w), tau_inv })
}

/// Relative two-point defect `|a(w1) - a(w2)| / (1 + sup|a|)`; zero for FULL.
pub fn subalgebra_defect(a: &AnalyticElement, s: &SubalgebraDescriptor) -> f64 {
    match s {
        SubalgebraDescriptor::Full => 0.0,
        SubalgebraDescriptor::TwoPoint { w1, w2 } => {
            (a.evaluate(*w1) - a.evaluate(*w2)).norm() / (1.0 + a.sup_norm(4))
        }
    }
}

pub fn belongs_to_subalgebra(a: &AnalyticElement, s: &SubalgebraDescriptor, tau_eq: f64) -> bool {
    subalgebra_defect(a, s) <= tau_eq
}

/// `a - (a(w1) - a(w2)) z / (w1 - w2)`, which lies in `A0`.
pub fn constrained_projection(a: &AnalyticElement, s: &SubalgebraDescriptor) -> Result<AnalyticElement> {
    match s {
        SubalgebraDescriptor::Full => {
            Err(Error::Precondition("constrained_projection needs a TWO_POINT algebra".into()))
        }
        SubalgebraDescriptor::TwoPoint { w1, w2 } => {
            let gap = a.evaluate(*w1) - a.evaluate(*w2);
            let b = AnalyticElement::monomial(1, gap / (w1.z() - w2.z()))?;
            Ok(a.sub(&b))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn evaluation_examples() {
        let a = AnalyticElement::from_real(&[1.0, 1.0]).unwrap();
        assert_eq!(a.eval(c(0.0, 1.0)), c(1.0, 1.0));
        let z3 = AnalyticElement::monomial(3, c(1.0, 0.0)).unwrap();
        assert!((z3.eval(c(0.5, 0.0)) - 0.125).norm() < 1e-16);
    }

    #[test]
    fn boundary_samples_agree_with_horner_and_fold_exactly() {
        let a = AnalyticElement::new((0..40).map(|k| c((k as f64).sin(), 0.1 * k as f64)).collect()).unwrap();
        for n in [16usize, 64, 128] {
            let g = CircleGrid::new(n).unwrap();
            let s = a.boundary_samples(g);
            for j in 0..n {
                assert!((s.values()[j] - a.eval(g.point(j))).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn tuple_norm_examples() {
        let g = CircleGrid::new(64).unwrap();
        let one = ATuple::single(AnalyticElement::one());
        assert!(tuple_pointwise_norm(&one, g).values().iter().all(|v| (v.re - 1.0).abs() < 1e-15));
        let t = ATuple::new(vec![
            AnalyticElement::one(),
            AnalyticElement::monomial(1, c(1.0, 0.0)).unwrap(),
        ])
        .unwrap();
        assert!(tuple_pointwise_norm(&t, g).values().iter().all(|v| (v.re - 2f64.sqrt()).abs() < 1e-14));
        let p = ATuple::new(vec![
            AnalyticElement::from_real(&[1.0, 1.0]).unwrap(),
            AnalyticElement::from_real(&[1.0, -1.0]).unwrap(),
        ])
        .unwrap();
        assert!(tuple_pointwise_norm(&p, g).values().iter().all(|v| (v.re - 2.0).abs() < 1e-14));
    }

    #[test]
    fn invertibility_examples() {
        let cfg = RunConfig::default();
        let a = AnalyticElement::from_real(&[2.0, 1.0]).unwrap();
        let r = is_invertible(&a, &cfg).unwrap();
        assert!(r.invertible);
        assert!((r.margin - 1.0).abs() < 1e-12);
        let z = AnalyticElement::monomial(1, c(1.0, 0.0)).unwrap();
        let r = is_invertible(&z, &cfg).unwrap();
        assert!(!r.invertible);
        assert_eq!(r.winding, Some(1));
        // (z - 0.5)(z - 3) = z^2 - 3.5 z + 1.5
        let q = AnalyticElement::from_real(&[1.5, -3.5, 1.0]).unwrap();
        let r = is_invertible(&q, &cfg).unwrap();
        assert!(!r.invertible);
        assert_eq!(r.winding, Some(1));
        // a root just outside the circle lands in the inconclusive band
        let near = AnalyticElement::from_real(&[1.0 + 1e-8, 1.0]).unwrap();
        assert!(matches!(is_invertible(&near, &cfg), Err(Error::Inconclusive { .. })));
        let on = AnalyticElement::from_real(&[1.0, 1.0]).unwrap();
        assert!(!is_invertible(&on, &cfg).unwrap().invertible);
    }

    #[test]
    fn two_point_membership() {
        let s = SubalgebraDescriptor::two_point(DiskPoint::real(0.5).unwrap(), DiskPoint::real(-0.5).unwrap()).unwrap();
        let z2 = AnalyticElement::monomial(2, c(1.0, 0.0)).unwrap();
        assert!(belongs_to_subalgebra(&z2, &s, 1e-9));
        let z = AnalyticElement::monomial(1, c(1.0, 0.0)).unwrap();
        assert!(!belongs_to_subalgebra(&z, &s, 1e-9));
        // z e^{i pi z}
        let e = AnalyticElement::exp_linear(c(1.0, 0.0), c(0.0, PI), 60).unwrap();
        let ze = e.mul(&z).unwrap();
        assert!(belongs_to_subalgebra(&ze, &s, 1e-9));
    }

    #[test]
    fn projection_lands_in_subalgebra() {
        let s = SubalgebraDescriptor::two_point(DiskPoint::real(0.5).unwrap(), DiskPoint::real(-0.5).unwrap()).unwrap();
        let z2 = AnalyticElement::monomial(2, c(1.0, 0.0)).unwrap();
        let p = constrained_projection(&z2, &s).unwrap();
        assert!(p.sub(&z2).coeffs().iter().all(|v| v.norm() < 1e-16));
        let z = AnalyticElement::monomial(1, c(1.0, 0.0)).unwrap();
        let p = constrained_projection(&z, &s).unwrap();
        assert!((p.eval(c(0.5, 0.0)) - p.eval(c(-0.5, 0.0))).norm() < 1e-15);
        assert!(constrained_projection(&z, &SubalgebraDescriptor::Full).is_err());
    }

    #[test]
    fn reciprocal_of_invertible_element() {
        let a = AnalyticElement::from_real(&[2.0, 1.0]).unwrap();
        let (r, res) = a.reciprocal(1e-12, 4096).unwrap();
        assert!(res <= 1e-12);
        assert!((r.eval(c(0.3, 0.2)) * a.eval(c(0.3, 0.2)) - 1.0).norm() < 1e-11);
    }

    #[test]
    fn json_shapes() {
        let a = AnalyticElement::from_real(&[1.0, 2.0]).unwrap();
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"kind":"analytic","coeffs":[[1.0,0.0],[2.0,0.0]]}"#);
        let t = serde_json::to_value(ATuple::single(a)).unwrap();
        assert_eq!(t["kind"], "atuple");
        let d = serde_json::to_string(&SubalgebraDescriptor::Full).unwrap();
        assert_eq!(d, r#"{"variant":"FULL"}"#);
    }
}
