use serde_json::{json, Value};

use super::{degree_ladder, Certificate, ClassTag, Stage, VerificationReport};
use crate::algebra::{is_invertible, subalgebra_defect, ATuple, AnalyticElement};
use crate::circle::{CircleGrid, SampledFunction, C64};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::hardy::outer_boundary;

/// Positivity up to the zero threshold `1e-10 (1 + sup f)`, so that samples
/// of a function with a zero that round to `1e-16` are not mistaken for
/// positive ones.
pub(crate) fn require_positive(f: &SampledFunction) -> Result<()> {
    let tau = 1e-10 * (1.0 + f.max_abs());
    if f.is_real() && f.values().iter().all(|v| v.re > tau) {
        Ok(())
    } else {
        Err(Error::Precondition("target must be real and strictly positive".into()))
    }
}

/// `max_j | |g(theta_j)| - f_j | / max f`.
fn modulus_residual(f: &SampledFunction, g: &AnalyticElement) -> f64 {
    let gs = g.boundary_samples(f.grid());
    let sup = f.max_abs();
    f.values()
        .iter()
        .zip(gs.values())
        .map(|(fv, gv)| (gv.norm() - fv.re).abs())
        .fold(0.0, f64::max)
        / sup
}

pub fn verify_q(f: &SampledFunction, g: &AnalyticElement, cfg: &RunConfig) -> Result<VerificationReport> {
    require_positive(f)?;
    let mut rep = VerificationReport::new();
    let res = modulus_residual(f, g);
    rep.at_most("modulus_residual", None, res, cfg.tolerances.tol_q);
    rep.measure("residual", res);
    rep.measure("degree", g.degree());
    match is_invertible(g, cfg) {
        Ok(chk) => {
            rep.record("invertible", None, chk.margin, chk.tau_inv, chk.invertible);
            rep.measure("margin", chk.margin);
            rep.measure("winding", chk.winding.map_or(Value::Null, Value::from));
        }
        Err(Error::Inconclusive { margin, tau_inv, .. }) => {
            rep.record("invertible", None, margin, tau_inv, false);
            rep.fail("invertibility inconclusive: margin inside the guard band");
            rep.measure("margin", margin);
        }
        Err(e) => return Err(e),
    }
    Ok(rep)
}

struct OuterPair {
    g: AnalyticElement,
    h: AnalyticElement,
    g_residual: f64,
    h_residual: f64,
}

fn outer_pair(f: &SampledFunction, cfg: &RunConfig) -> Result<OuterPair> {
    require_positive(f)?;
    let n = f.n();
    let logf = f.map_real(f64::ln);
    let outer = outer_boundary(&logf);
    let inv_outer = outer_boundary(&logf.map_real(|v| -v));
    let dmax = cfg.max_degree.min(n / 2 - 1);
    let tol = cfg.tolerances.tol_q;

    let mut best = f64::INFINITY;
    let mut chosen = None;
    for d in degree_ladder(dmax) {
        let g = AnalyticElement::from_boundary(&outer, d)?;
        let res = modulus_residual(f, &g);
        best = best.min(res);
        if res <= tol && matches!(is_invertible(&g, cfg), Ok(c) if c.invertible) {
            chosen = Some((g, res));
            break;
        }
    }
    let (g, g_residual) =
        chosen.ok_or(Error::TruncationFailure { best_residual: best, max_degree: dmax })?;

    let inv_f = f.map_real(|v| 1.0 / v);
    let mut h_pick = None;
    for d in degree_ladder(dmax) {
        let h = AnalyticElement::from_boundary(&inv_outer, d)?;
        let res = modulus_residual(&inv_f, &h);
        if res <= tol || d == dmax {
            h_pick = Some((h, res));
            break;
        }
    }
    let (h, h_residual) = h_pick.expect("ladder ends at dmax");
    Ok(OuterPair { g, h, g_residual, h_residual })
}

/// Q-certificate from the truncated outer function with modulus `f`.
pub fn generate_q(f: &SampledFunction, cfg: &RunConfig) -> Result<Certificate> {
    let p = outer_pair(f, cfg)?;
    let rep = verify_q(f, &p.g, cfg)?;
    let stage = Stage {
        eps: cfg.tolerances.tol_q,
        k: ATuple::single(p.g),
        h: ATuple::single(p.h),
    };
    let mut cert = Certificate::new(ClassTag::Q, f.clone(), vec![stage])?;
    cert.achieved = rep.measurements;
    cert.achieved.insert("verdict".into(), json!(rep.verdict));
    cert.achieved.insert("reciprocal_residual".into(), json!(p.h_residual));
    debug_assert!(p.g_residual <= cfg.tolerances.tol_q);
    Ok(cert)
}

/// Rank-one tight certificate `K = (g)`, `H = (outer of 1/f)`.
pub fn generate_m_rank1(f: &SampledFunction, cfg: &RunConfig) -> Result<Certificate> {
    let p = outer_pair(f, cfg)?;
    let stage = Stage {
        eps: cfg.tolerances.tol_q.max(p.h_residual),
        k: ATuple::single(p.g),
        h: ATuple::single(p.h),
    };
    let mut cert = Certificate::new(ClassTag::MTight, f.clone(), vec![stage])?;
    let rep = verify_m(&cert, cfg)?;
    cert.achieved = rep.measurements;
    Ok(cert)
}

struct StageSamples {
    k: Vec<Vec<C64>>,
    h: Vec<Vec<C64>>,
}

fn stage_samples(stage: &Stage, grid: CircleGrid) -> StageSamples {
    let take = |t: &ATuple| t.boundary_samples(grid).into_iter().map(|s| s.into_values()).collect();
    StageSamples { k: take(&stage.k), h: take(&stage.h) }
}

fn norm_at(v: &[Vec<C64>], j: usize) -> f64 {
    v.iter().map(|e| e[j].norm_sqr()).sum::<f64>().sqrt()
}

fn schedule_check(rep: &mut VerificationReport, cert: &Certificate) {
    let worst = cert
        .stages
        .windows(2)
        .map(|w| w[1].eps - w[0].eps)
        .fold(0.0f64, f64::max);
    rep.at_most("eps_schedule_nonincreasing", None, worst, 0.0);
}

/// Checks pairing, `||K|| -> f` and `||H|| -> 1/f` stage by stage.
pub fn verify_m(cert: &Certificate, _cfg: &RunConfig) -> Result<VerificationReport> {
    let f = &cert.target;
    require_positive(f)?;
    let grid = f.grid();
    let fv = f.re();
    let sup_f = fv.iter().cloned().fold(0.0, f64::max);
    let sup_inv = fv.iter().map(|v| 1.0 / v).fold(0.0, f64::max);
    let mut rep = VerificationReport::new();
    schedule_check(&mut rep, cert);
    let mut per_stage = Vec::new();
    for (m, stage) in cert.stages.iter().enumerate() {
        if stage.k.len() != stage.h.len() {
            rep.fail(format!("stage {m}: K and H have different lengths"));
            continue;
        }
        let s = stage_samples(stage, grid);
        let mut eta = 0.0f64;
        let mut kn = 0.0f64;
        let mut hn = 0.0f64;
        for j in 0..grid.n() {
            let dot: C64 = s.k.iter().zip(&s.h).map(|(k, h)| k[j] * h[j]).sum();
            eta = eta.max((dot - 1.0).norm());
            kn = kn.max((norm_at(&s.k, j) - fv[j]).abs());
            hn = hn.max((norm_at(&s.h, j) - 1.0 / fv[j]).abs());
        }
        let kn = kn / sup_f;
        let hn = hn / sup_inv;
        rep.at_most("pairing", Some(m), eta, stage.eps);
        rep.at_most("k_norm", Some(m), kn, stage.eps);
        rep.at_most("h_norm", Some(m), hn, stage.eps);
        per_stage.push(json!({"eps": stage.eps, "eta": eta, "k_norm": kn, "h_norm": hn}));
    }
    rep.measure("stages", per_stage);
    Ok(rep)
}

/// Conditions (i), (ii), (iii) and the normalized (iii') of the alternative
/// description of tight approximation.
pub fn verify_m_alternative(cert: &Certificate, _cfg: &RunConfig) -> Result<VerificationReport> {
    let f = &cert.target;
    require_positive(f)?;
    let grid = f.grid();
    let fv = f.re();
    let sup_f = fv.iter().cloned().fold(0.0, f64::max);
    let sup_inv = fv.iter().map(|v| 1.0 / v).fold(0.0, f64::max);
    let mut rep = VerificationReport::new();
    schedule_check(&mut rep, cert);
    let mut per_stage = Vec::new();
    for (m, stage) in cert.stages.iter().enumerate() {
        if stage.k.len() != stage.h.len() {
            rep.fail(format!("stage {m}: K and H have different lengths"));
            continue;
        }
        let s = stage_samples(stage, grid);
        let (mut c1, mut c2, mut c3, mut c3n) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for j in 0..grid.n() {
            let nk = norm_at(&s.k, j);
            let nh = norm_at(&s.h, j);
            c1 = c1.max((nk - fv[j]).abs());
            c2 = c2.max((nh - 1.0 / fv[j]).abs());
            let f2 = fv[j] * fv[j];
            let d: f64 = s.k.iter().zip(&s.h).map(|(k, h)| (k[j] - h[j].conj() * f2).norm_sqr()).sum();
            c3 = c3.max(d.sqrt());
            let dn: f64 = if nk > 0.0 && nh > 0.0 {
                s.k.iter()
                    .zip(&s.h)
                    .map(|(k, h)| (k[j] / nk - h[j].conj() / nh).norm_sqr())
                    .sum::<f64>()
                    .sqrt()
            } else {
                f64::INFINITY
            };
            c3n = c3n.max(dn);
        }
        let c1 = c1 / sup_f;
        let c2 = c2 / sup_inv;
        rep.at_most("i_k_norm", Some(m), c1, stage.eps);
        rep.at_most("ii_h_norm", Some(m), c2, stage.eps);
        rep.at_most("iii_tightness", Some(m), c3 / sup_f, stage.eps);
        rep.at_most("iii_normalized", Some(m), c3n, stage.eps);
        per_stage.push(json!({
            "eps": stage.eps,
            "i": c1,
            "ii": c2,
            "iii_abs": c3,
            "iii_rel": c3 / sup_f,
            "iii_normalized": c3n,
        }));
    }
    rep.measure("stages", per_stage);
    Ok(rep)
}

/// Two-sided modulus bounds `|| K ||^2 / f^2` and `|| H ||^2 f^2` near 1,
/// with no pairing condition. Reports the smallest passing `eps`.
pub fn verify_subequivalence(
    f: &SampledFunction,
    h: &ATuple,
    k: &ATuple,
    tol: f64,
) -> Result<VerificationReport> {
    require_positive(f)?;
    let grid = f.grid();
    let fv = f.re();
    let ks: Vec<Vec<C64>> = k.boundary_samples(grid).into_iter().map(|s| s.into_values()).collect();
    let hs: Vec<Vec<C64>> = h.boundary_samples(grid).into_iter().map(|s| s.into_values()).collect();
    let mut ek = 0.0f64;
    let mut eh = 0.0f64;
    for j in 0..grid.n() {
        let nk = norm_at(&ks, j);
        let nh = norm_at(&hs, j);
        ek = ek.max((nk * nk / (fv[j] * fv[j]) - 1.0).abs());
        eh = eh.max((nh * nh * fv[j] * fv[j] - 1.0).abs());
    }
    let eps = ek.max(eh);
    let mut rep = VerificationReport::new();
    rep.at_most("k_two_sided", None, ek, tol);
    rep.at_most("h_two_sided", None, eh, tol);
    rep.measure("eps", eps);
    Ok(rep)
}

/// Stages of a closure-class certificate: each `K_m = (c_m)` must be
/// invertible, lie in the certificate's algebra, and have modulus residuals
/// that strictly decrease along the stages.
pub fn verify_qbar(cert: &Certificate, cfg: &RunConfig) -> Result<VerificationReport> {
    let f = &cert.target;
    require_positive(f)?;
    let mut rep = VerificationReport::new();
    let mut residuals = Vec::new();
    for (m, stage) in cert.stages.iter().enumerate() {
        let c = &stage.k.entries()[0];
        let res = modulus_residual(f, c);
        residuals.push(res);
        match is_invertible(c, cfg) {
            Ok(chk) => {
                rep.record("invertible", Some(m), chk.margin, chk.tau_inv, chk.invertible);
            }
            Err(Error::Inconclusive { margin, tau_inv, .. }) => {
                rep.record("invertible", Some(m), margin, tau_inv, false);
            }
            Err(e) => return Err(e),
        }
        let defect = subalgebra_defect(c, &cert.algebra);
        rep.at_most("subalgebra_membership", Some(m), defect, cfg.tolerances.tau_eq);
    }
    let worst_step = residuals.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    if residuals.len() > 1 {
        rep.record("residuals_decreasing", None, worst_step, 0.0, worst_step < 0.0);
    }
    rep.measure("residuals", residuals);
    Ok(rep)
}
