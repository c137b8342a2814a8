//! Rigged (peak-set) certificates for nonnegative weights.
//!
//! A stage is built from the clamped log `w` of the weight: a smooth minorant
//! `k1` with `w - eps <= k1 <= w`, a companion `k2 = k1 + eps` that is bent
//! back towards `w` on small arcs `U` around the peak set, and the outer
//! functions `k = outer(k1)`, `h = outer(-k2)`. Away from `U` the product
//! `kh` has modulus `e^{-eps}` and, because the harmonic conjugates of `k1`
//! and `k2` differ only by the contribution of `U`, a phase close to zero.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::{degree_ladder, Certificate, ClassTag, PeakSetSpec, Stage, VerificationReport};
use crate::algebra::{ATuple, AnalyticElement};
use crate::circle::{fft_analysis, CircleGrid, SampledFunction, C64};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::hardy::{bridged_log, cyclic_runs, log_integrability, outer_boundary, LogVerdict, DEFAULT_CUTOFFS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SmoothingMode {
    /// `w` is resolved by the grid and `k1 = w - eps/2` is used as is.
    Exact,
    /// `w - eps/2` is mollified and clipped back into `[w - eps, w]`.
    Mollified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RStageDiagnostics {
    pub smoothing: SmoothingMode,
    pub mollifier_half_width: usize,
    pub u_arcs: Vec<[f64; 2]>,
    pub u_half_width_cells: usize,
    /// Riemann sum of `|k1|` over `U`. Reported, not enforced: on a grid a
    /// single cell next to a logarithmic zero already carries more than
    /// small `eps`.
    pub u_budget: f64,
    /// Riemann sum of `k2 - k1` over `U`.
    pub u_mass: f64,
    pub w_positive_in_u: bool,
    pub clamp_slack: f64,
    pub degree_k: usize,
    pub degree_h: usize,
    pub overshoot_k: f64,
    pub overshoot_h: f64,
    /// `sup |kh - 1|` on `{dist(theta, E) >= sqrt(eps)}`.
    pub sup_e_minus_1: f64,
    /// `(half width in cells, sup |kh - 1|)` for every admissible `U` tried.
    pub candidates: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RStage {
    pub eps: f64,
    pub k: AnalyticElement,
    pub h: AnalyticElement,
    pub diagnostics: RStageDiagnostics,
}

/// Cells where the weight is below `exp(-m_clamp)` and the declared
/// envelope slack on them.
pub fn clamp_cells(f: &SampledFunction, m_clamp: f64) -> Result<(Vec<bool>, f64)> {
    let b = bridged_log(f, m_clamp)?;
    Ok((b.clamped, b.clamp_slack))
}

fn mollify(v: &[f64], hw: usize) -> Vec<f64> {
    let n = v.len();
    let weights: Vec<f64> = (-(hw as i64)..=hw as i64)
        .map(|i| {
            let x = i as f64 / hw as f64;
            (1.0 - x * x).powi(2)
        })
        .collect();
    let total: f64 = weights.iter().sum();
    (0..n)
        .map(|j| {
            weights
                .iter()
                .enumerate()
                .map(|(t, w)| w * v[(j + n + t - hw) % n])
                .sum::<f64>()
                / total
        })
        .collect()
}

/// Fraction of non-constant spectral energy at `|k| >= n/4`.
fn spectral_tail(w: &[f64], grid: CircleGrid) -> f64 {
    let c = fft_analysis(&SampledFunction::from_real(grid, w.to_vec()).expect("grid length"));
    let n = grid.n() as i64;
    let mut hi = 0.0;
    let mut all = 0.0;
    for (k, v) in c.centered() {
        if k == 0 {
            continue;
        }
        all += v.norm_sqr();
        if k.abs() >= n / 4 {
            hi += v.norm_sqr();
        }
    }
    if all == 0.0 {
        0.0
    } else {
        hi / all
    }
}

/// Outer function with log-modulus `u`, truncated at the smallest ladder
/// degree whose discarded coefficients have relative l1 mass below `tol`.
/// The l1 mass bounds the sup-norm error of the truncation.
fn truncated_outer(u: &[f64], grid: CircleGrid, max_degree: usize, tol: f64) -> Result<AnalyticElement> {
    let b = outer_boundary(&SampledFunction::from_real(grid, u.to_vec())?);
    let c = fft_analysis(&b);
    let total: f64 = c.raw().iter().map(|v| v.norm()).sum();
    let dmax = max_degree.min(grid.n() / 2 - 1);
    let mut prefix = Vec::with_capacity(dmax + 1);
    let mut acc = 0.0;
    for k in 0..=dmax as i64 {
        acc += c.get(k).norm();
        prefix.push(acc);
    }
    let d = degree_ladder(dmax)
        .into_iter()
        .find(|&d| (total - prefix[d]) <= tol * total)
        .unwrap_or(dmax);
    AnalyticElement::from_boundary(&b, d)
}

fn check_zero_set(f: &SampledFunction, e: &PeakSetSpec) -> Result<()> {
    let grid = f.grid();
    let h = grid.spacing();
    let fv = f.re();
    let sup = fv.iter().cloned().fold(0.0, f64::max);
    let tau = 1e-10 * (1.0 + sup);
    let zeros: Vec<usize> = (0..grid.n()).filter(|&j| fv[j] < tau).collect();
    for &j in &zeros {
        if e.distance(grid.theta(j)) > h {
            return Err(Error::PeakSetMismatch(format!(
                "f vanishes at theta = {:.6} which is not in E",
                grid.theta(j)
            )));
        }
    }
    for arc in e.intervals() {
        let single = PeakSetSpec::new(vec![*arc])?;
        if !zeros.iter().any(|&j| single.distance(grid.theta(j)) <= h) {
            return Err(Error::PeakSetMismatch(format!(
                "f does not vanish on the arc [{:.6}, {:.6}]",
                arc[0], arc[1]
            )));
        }
    }
    Ok(())
}

struct Candidate {
    m: usize,
    k: AnalyticElement,
    h: AnalyticElement,
    overshoot_k: f64,
    overshoot_h: f64,
    sup_e: f64,
    u_arcs: Vec<[f64; 2]>,
    u_budget: f64,
    u_mass: f64,
    w_positive_in_u: bool,
}

fn hermite(t: f64, span: f64, pa: f64, ma: f64, pb: f64, mb: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * pa
        + (t3 - 2.0 * t2 + t) * span * ma
        + (-2.0 * t3 + 3.0 * t2) * pb
        + (t3 - t2) * span * mb
}

struct Inputs<'a> {
    f: &'a [f64],
    w: &'a [f64],
    k1: &'a [f64],
    clamped: &'a [bool],
    compact: &'a [bool],
    grid: CircleGrid,
    eps: f64,
}

fn build_candidate(inp: &Inputs, e_runs: &[(usize, usize)], m: usize, cfg: &RunConfig) -> Result<Option<Candidate>> {
    let n = inp.grid.n();
    let h = inp.grid.spacing();
    let k1 = inp.k1;
    let mut k2: Vec<f64> = k1.iter().map(|v| v + inp.eps).collect();
    let mut u_budget = 0.0;
    let mut u_mass = 0.0;
    let mut w_positive = false;
    let mut u_arcs = Vec::new();
    for &(s, len) in e_runs {
        let first = (s + n - m) % n;
        let count = len + 2 * m;
        if count + 4 > n {
            return Ok(None);
        }
        let cells: Vec<usize> = (0..count).map(|i| (first + i) % n).collect();
        if cells.iter().any(|&j| !(k1[j] < -1.0)) {
            return Ok(None);
        }
        let a = (first + n - 1) % n;
        let a2 = (first + n - 2) % n;
        let b = (first + count) % n;
        let b2 = (first + count + 1) % n;
        let pa = k1[a] + inp.eps;
        let pb = k1[b] + inp.eps;
        let ma = (k1[a] - k1[a2]) / h;
        let mb = (k1[b2] - k1[b]) / h;
        let span = (count + 1) as f64 * h;
        for (i, &j) in cells.iter().enumerate() {
            let t = (i + 1) as f64 / (count + 1) as f64;
            let p = hermite(t, span, pa, ma, pb, mb);
            let lo = inp.w[j].min(0.0);
            let hi = inp.w[j].max(0.0);
            if inp.w[j] > 0.0 {
                w_positive = true;
            }
            if p < lo - 1e-12 || p > hi + 1e-12 {
                return Ok(None);
            }
            k2[j] = p;
            u_budget += k1[j].abs() * h;
            u_mass += (p - k1[j]) * h;
        }
        u_arcs.push([inp.grid.theta(first), inp.grid.theta(first) + (count - 1) as f64 * h]);
    }

    let tol = cfg.tolerances.analyticity_tol;
    let k_raw = truncated_outer(k1, inp.grid, cfg.max_degree, tol)?;
    let minus_k2: Vec<f64> = k2.iter().map(|v| -v).collect();
    let h_raw = truncated_outer(&minus_k2, inp.grid, cfg.max_degree, tol)?;
    let ks = k_raw.boundary_samples(inp.grid);
    let hs = h_raw.boundary_samples(inp.grid);
    let mut ok = 0.0f64;
    let mut oh = 0.0f64;
    for j in 0..n {
        if !inp.clamped[j] {
            ok = ok.max(ks.values()[j].norm() / inp.f[j] - 1.0);
        }
        oh = oh.max(inp.f[j] * hs.values()[j].norm() - 1.0);
    }
    let k = k_raw.scale(C64::new(1.0 / (1.0 + ok), 0.0));
    let hh = h_raw.scale(C64::new(1.0 / (1.0 + oh), 0.0));
    let scale = 1.0 / ((1.0 + ok) * (1.0 + oh));
    let sup_e = (0..n)
        .filter(|&j| inp.compact[j])
        .map(|j| (ks.values()[j] * hs.values()[j] * scale - 1.0).norm())
        .fold(0.0, f64::max);
    Ok(Some(Candidate {
        m,
        k,
        h: hh,
        overshoot_k: ok,
        overshoot_h: oh,
        sup_e,
        u_arcs,
        u_budget,
        u_mass,
        w_positive_in_u: w_positive,
    }))
}

/// One stage `(k, h)` of a rigged certificate for `f` vanishing on `E`.
pub fn generate_r_certificate(
    f: &SampledFunction,
    e: &PeakSetSpec,
    eps: f64,
    cfg: &RunConfig,
) -> Result<RStage> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must lie in (0, 1)")));
    }
    if !f.is_nonnegative() {
        return Err(Error::Precondition("weight must be real and nonnegative".into()));
    }
    let t = &cfg.tolerances;
    let li = log_integrability(f, &DEFAULT_CUTOFFS, t.tol_logint)?;
    if li.verdict == LogVerdict::DivergentSuspected {
        return Err(Error::NotLogIntegrable(format!("cutoff means {:?}", li.means)));
    }
    check_zero_set(f, e)?;

    let grid = f.grid();
    let n = grid.n();
    let fv = f.re();
    let bl = bridged_log(f, t.m_clamp)?;
    let w = &bl.values;

    let resolved = spectral_tail(w, grid) < t.analyticity_tol;
    let hw = 4usize.max((eps * n as f64 / 16.0).ceil() as usize);
    let (k1, smoothing) = if resolved {
        (w.iter().map(|v| v - eps / 2.0).collect::<Vec<_>>(), SmoothingMode::Exact)
    } else {
        let base: Vec<f64> = w.iter().map(|v| v - eps / 2.0).collect();
        let s1 = mollify(&base, hw);
        let s2: Vec<f64> = s1.iter().zip(w).map(|(s, w)| s.min(w - eps / 4.0)).collect();
        let s3 = mollify(&s2, 2);
        let k1 = s3.iter().zip(w).map(|(s, w)| s.max(w - eps).min(*w)).collect();
        (k1, SmoothingMode::Mollified)
    };

    let delta = eps.sqrt();
    let compact: Vec<bool> = (0..n).map(|j| e.distance(grid.theta(j)) >= delta).collect();
    let inputs = Inputs { f: &fv, w, k1: &k1, clamped: &bl.clamped, compact: &compact, grid, eps };

    let h = grid.spacing();
    let e_mask: Vec<bool> = (0..n).map(|j| e.distance(grid.theta(j)) <= h / 2.0 + 1e-12).collect();
    let e_runs = if e.is_empty() { Vec::new() } else { cyclic_runs(&e_mask) };
    let widths: Vec<usize> = if e.is_empty() {
        vec![0]
    } else {
        let mut v = Vec::new();
        let mut m = 1;
        while m as f64 * h <= delta / 2.0 {
            v.push(m);
            m *= 2;
        }
        v
    };
    let mut best: Option<Candidate> = None;
    let mut tried = Vec::new();
    for m in widths {
        if let Some(c) = build_candidate(&inputs, &e_runs, m, cfg)? {
            tried.push((c.m, c.sup_e));
            if best.as_ref().map_or(true, |b| c.sup_e < b.sup_e) {
                best = Some(c);
            }
        }
    }
    let c = best.ok_or_else(|| {
        Error::SmoothingFailure(format!(
            "no arc U with k1 < -1 and a C1 companion inside [min(w,0), max(w,0)] within half-width sqrt(eps)/2 = {:.4}",
            delta / 2.0
        ))
    })?;

    let ks = c.k.boundary_samples(grid);
    let hs = c.h.boundary_samples(grid);
    for j in 0..n {
        let kv = ks.values()[j].norm();
        let bound = if bl.clamped[j] { fv[j] + bl.clamp_slack } else { fv[j] * (1.0 + 1e-12) };
        if kv > bound {
            return Err(Error::StageCheckFailed(format!("|k| exceeds f at theta = {:.6}", grid.theta(j))));
        }
        if fv[j] * hs.values()[j].norm() > 1.0 + 1e-12 {
            return Err(Error::StageCheckFailed(format!("f|h| exceeds 1 at theta = {:.6}", grid.theta(j))));
        }
    }
    let bound = 6.0 * delta + t.slack_num;
    if c.sup_e > bound {
        return Err(Error::StageCheckFailed(format!(
            "sup |kh - 1| = {:.4e} exceeds 6 sqrt(eps) + slack = {bound:.4e}",
            c.sup_e
        )));
    }
    Ok(RStage {
        eps,
        diagnostics: RStageDiagnostics {
            smoothing,
            mollifier_half_width: if resolved { 0 } else { hw },
            u_arcs: c.u_arcs,
            u_half_width_cells: c.m,
            u_budget: c.u_budget,
            u_mass: c.u_mass,
            w_positive_in_u: c.w_positive_in_u,
            clamp_slack: bl.clamp_slack,
            degree_k: c.k.degree(),
            degree_h: c.h.degree(),
            overshoot_k: c.overshoot_k,
            overshoot_h: c.overshoot_h,
            sup_e_minus_1: c.sup_e,
            candidates: tried,
        },
        k: c.k,
        h: c.h,
    })
}

/// Runs the generator for each `eps` and verifies the resulting certificate.
pub fn certify_r(
    f: &SampledFunction,
    e: &PeakSetSpec,
    eps_schedule: &[f64],
    cfg: &RunConfig,
) -> Result<(Certificate, VerificationReport)> {
    let stages: Vec<RStage> = eps_schedule
        .iter()
        .map(|&eps| generate_r_certificate(f, e, eps, cfg))
        .collect::<Result<_>>()?;
    let diags: Vec<Value> = stages.iter().map(|s| json!(s.diagnostics)).collect();
    let mut cert = Certificate::new(
        ClassTag::RE,
        f.clone(),
        stages
            .into_iter()
            .map(|s| Stage { eps: s.eps, k: ATuple::single(s.k), h: ATuple::single(s.h) })
            .collect(),
    )?;
    cert.peak_set = Some(e.clone());
    let rep = verify_r(&cert, cfg)?;
    cert.achieved = rep.measurements.clone();
    cert.achieved.insert("verdict".into(), json!(rep.verdict));
    cert.achieved.insert("stage_diagnostics".into(), Value::Array(diags));
    Ok((cert, rep))
}

fn delta_key(d: f64) -> String {
    format!("{d:.6}")
}

/// Envelope inequalities on the whole grid and convergence of `H . K` to 1
/// on the compacts `{dist(theta, E) >= delta}`.
pub fn verify_r(cert: &Certificate, cfg: &RunConfig) -> Result<VerificationReport> {
    let f = &cert.target;
    if !f.is_nonnegative() {
        return Err(Error::Precondition("weight must be real and nonnegative".into()));
    }
    let grid = f.grid();
    let n = grid.n();
    let fv = f.re();
    let empty = PeakSetSpec::empty();
    let e = cert.peak_set.as_ref().unwrap_or(&empty);
    let (clamped, clamp_slack) = clamp_cells(f, cfg.tolerances.m_clamp)?;
    let mut rep = VerificationReport::new();
    let worst = cert.stages.windows(2).map(|w| w[1].eps - w[0].eps).fold(0.0f64, f64::max);
    rep.at_most("eps_schedule_nonincreasing", None, worst, 0.0);

    let delta0 = cert.stages[0].eps.sqrt();
    let common: Vec<bool> = (0..n).map(|j| e.distance(grid.theta(j)) >= delta0).collect();
    let mut per_stage = Vec::new();
    let mut env_max = 0.0f64;
    let mut last_table = Map::new();
    let mut trend_e = Vec::new();
    let mut trend_k = Vec::new();
    let mut trend_h = Vec::new();
    for (m, stage) in cert.stages.iter().enumerate() {
        if stage.k.len() != stage.h.len() {
            rep.fail(format!("stage {m}: K and H have different lengths"));
            continue;
        }
        let ks: Vec<Vec<C64>> = stage.k.boundary_samples(grid).into_iter().map(|s| s.into_values()).collect();
        let hs: Vec<Vec<C64>> = stage.h.boundary_samples(grid).into_iter().map(|s| s.into_values()).collect();
        let nk: Vec<f64> = (0..n).map(|j| ks.iter().map(|v| v[j].norm_sqr()).sum::<f64>().sqrt()).collect();
        let nh: Vec<f64> = (0..n).map(|j| hs.iter().map(|v| v[j].norm_sqr()).sum::<f64>().sqrt()).collect();
        let ev: Vec<C64> = (0..n).map(|j| ks.iter().zip(&hs).map(|(k, h)| k[j] * h[j]).sum()).collect();

        let mut env = 0.0f64;
        for j in 0..n {
            let over_k = if clamped[j] { nk[j] - fv[j] - clamp_slack } else { nk[j] / fv[j] - 1.0 };
            env = env.max(over_k).max(fv[j] * nh[j] - 1.0);
        }
        env_max = env_max.max(env);
        rep.at_most("envelope", Some(m), env, 1e-6);

        let root = stage.eps.sqrt();
        let mut table = Map::new();
        let mut rows = Vec::new();
        for mult in [1.0, 2.0, 4.0] {
            let d = mult * root;
            let cells: Vec<usize> = (0..n).filter(|&j| e.distance(grid.theta(j)) >= d).collect();
            if cells.is_empty() {
                table.insert(delta_key(d), Value::Null);
                continue;
            }
            let sup_e = cells.iter().map(|&j| (ev[j] - 1.0).norm()).fold(0.0, f64::max);
            let inf_e = cells.iter().map(|&j| ev[j].norm()).fold(f64::INFINITY, f64::min);
            let sup_hf = cells.iter().map(|&j| (nh[j] * fv[j] - 1.0).abs()).fold(0.0, f64::max);
            if mult == 1.0 {
                rep.at_most("e_minus_1", Some(m), sup_e, 6.0 * root + cfg.tolerances.slack_num);
                rep.record("e_nonvanishing", Some(m), inf_e, 0.0, inf_e > 0.0);
            }
            table.insert(delta_key(d), json!(sup_e));
            rows.push(json!({"delta": d, "sup_abs_e_minus_1": sup_e, "inf_abs_e": inf_e, "sup_abs_hf_minus_1": sup_hf}));
        }
        let k_uniform = (0..n).map(|j| (nk[j] - fv[j]).abs()).fold(0.0, f64::max);
        let on_common = |v: &dyn Fn(usize) -> f64| {
            (0..n).filter(|&j| common[j]).map(v).fold(0.0, f64::max)
        };
        trend_e.push(on_common(&|j| (ev[j] - 1.0).norm()));
        trend_h.push(on_common(&|j| (nh[j] * fv[j] - 1.0).abs()));
        trend_k.push(k_uniform);
        per_stage.push(json!({
            "eps": stage.eps,
            "env_slack": env,
            "sup_abs_norm_k_minus_f": k_uniform,
            "compacts": rows,
        }));
        last_table = table;
    }
    let rise = |v: &[f64]| v.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    if cert.stages.len() > 1 {
        rep.at_most("monotone_improvement", None, rise(&trend_e), 1e-6);
        rep.at_most("k_norm_convergence", None, rise(&trend_k), 1e-6);
        rep.at_most("h_norm_convergence", None, rise(&trend_h), 1e-6);
    }
    rep.measure("env_slack", env_max);
    rep.measure("clamp_slack", clamp_slack);
    rep.measure("e_minus_1_by_delta", Value::Object(last_table));
    rep.measure("common_compact_delta", delta0);
    rep.measure("e_minus_1_on_common_compact", trend_e);
    rep.measure("stages", per_stage);
    Ok(rep)
}
