//! Hardy-space transforms on the grid: conjugate function, Herglotz and
//! Poisson extensions, outer functions and a log-integrability diagnosis.
//!
//! Extensions into the disk are evaluated from the discrete Fourier
//! coefficients of the boundary data as a power series. This is the exact
//! harmonic extension of the trigonometric interpolant, so it agrees with
//! the boundary data on the circle and is harmonic inside.

use serde::{Deserialize, Serialize};

use crate::circle::{fft_analysis, fft_synthesis, CircleGrid, DiskPoint, SampledFunction, C64};
use crate::error::{Error, Result};

/// Conjugate function of the real part of `u` via the multiplier `-i sign(k)`.
/// The mean and the Nyquist mode are sent to zero.
pub fn conjugate(u: &SampledFunction) -> SampledFunction {
    let grid = u.grid();
    let n = grid.n();
    let mut c = fft_analysis(&u.map(|v| C64::new(v.re, 0.0)));
    let mi = C64::new(0.0, -1.0);
    for k in 1..(n / 2) as i64 {
        c.set(k, c.get(k) * mi);
        c.set(-k, c.get(-k) * -mi);
    }
    c.set(0, C64::new(0.0, 0.0));
    c.set(-(n as i64) / 2, C64::new(0.0, 0.0));
    fft_synthesis(&c).map(|v| C64::new(v.re, 0.0))
}

/// Harmonic extension of a real boundary function, stored as the power
/// series of its Herglotz transform.
#[derive(Debug, Clone)]
pub struct HarmonicExtension {
    boundary: SampledFunction,
    series: Vec<C64>,
}

impl HarmonicExtension {
    pub fn new(u: &SampledFunction) -> Self {
        let boundary = u.map(|v| C64::new(v.re, 0.0));
        let c = fft_analysis(&boundary);
        let half = boundary.n() as i64 / 2;
        let mut series = Vec::with_capacity(half as usize + 1);
        series.push(c.get(0));
        for k in 1..half {
            series.push(c.get(k) * 2.0);
        }
        series.push(c.get(-half));
        HarmonicExtension { boundary, series }
    }

    pub fn boundary(&self) -> &SampledFunction {
        &self.boundary
    }

    fn horner(&self, z: C64) -> C64 {
        self.series.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `(1/2pi) * integral of (e^{it} + z)/(e^{it} - z) u(t) dt`, for `|z| < 1`.
    pub fn herglotz(&self, z: C64) -> Result<C64> {
        if !(z.norm() < 1.0) {
            return Err(Error::BoundaryEvaluation(z));
        }
        Ok(self.horner(z))
    }

    /// The Herglotz series summed at any `|z| <= 1`. On the circle this is
    /// `u + i conj(u)` interpolated between grid points.
    pub(crate) fn series_at(&self, z: C64) -> C64 {
        self.horner(z)
    }

    /// Poisson extension, the real part of the Herglotz transform.
    pub fn poisson(&self, z: C64) -> Result<f64> {
        self.herglotz(z).map(|v| v.re)
    }

    /// Evaluator usable with [`crate::circle::mean_on_circle`]. Points must
    /// already be known to lie inside the disk.
    pub fn evaluator(&self) -> impl Fn(C64) -> C64 + '_ {
        move |z| C64::new(self.horner(z).re, 0.0)
    }
}

pub fn herglotz(u: &SampledFunction, z: DiskPoint) -> Result<C64> {
    HarmonicExtension::new(u).herglotz(z.z())
}

/// Boundary values `exp(u + i conj(u))` of the outer function with modulus `exp(u)`.
pub fn outer_boundary(logmod: &SampledFunction) -> SampledFunction {
    let v = conjugate(logmod);
    logmod.zip_with(&v, |u, v| C64::from_polar(u.re.exp(), v.re)).expect("same grid")
}

/// Fraction of spectral energy in the negative frequencies.
pub fn negative_frequency_fraction(f: &SampledFunction) -> f64 {
    let c = fft_analysis(f);
    let total = c.energy();
    if total == 0.0 {
        0.0
    } else {
        c.negative_energy() / total
    }
}

/// `log f` with cells below `exp(-m_clamp)` replaced by a smooth bridge.
///
/// Each maximal run of clamped cells is filled by the cubic Hermite
/// interpolant of the values and one-sided slopes at the two neighbouring
/// unclamped cells, capped above by the smaller neighbour value and below by
/// `-m_clamp`. Keeping the raw clamp value instead would leave a one-cell
/// spike whose conjugate function pollutes the phase everywhere.
#[derive(Debug, Clone)]
pub struct BridgedLog {
    pub values: Vec<f64>,
    pub clamped: Vec<bool>,
    /// `(start, len)` of every cyclic run of clamped cells.
    pub runs: Vec<(usize, usize)>,
    /// Largest `f` at a cell adjacent to a clamped run. Any envelope
    /// inequality `|k| <= f` is only claimed up to this amount on clamped cells.
    pub clamp_slack: f64,
}

impl BridgedLog {
    pub fn as_sampled(&self, grid: CircleGrid) -> SampledFunction {
        SampledFunction::from_real(grid, self.values.clone()).expect("length matches grid")
    }
}

pub fn bridged_log(f: &SampledFunction, m_clamp: f64) -> Result<BridgedLog> {
    if !f.is_nonnegative() {
        return Err(Error::Precondition("weight must be real and nonnegative".into()));
    }
    let n = f.n();
    let h = f.grid().spacing();
    let fv = f.re();
    let raw: Vec<f64> = fv.iter().map(|&x| x.ln()).collect();
    let clamped: Vec<bool> = raw.iter().map(|&w| !(w >= -m_clamp)).collect();
    if clamped.iter().all(|&c| c) {
        return Err(Error::AllZero);
    }
    let mut values: Vec<f64> = raw.iter().map(|&w| w.max(-m_clamp)).collect();
    let runs = cyclic_runs(&clamped);
    let mut clamp_slack = 0.0f64;
    for &(s, len) in &runs {
        let a = (s + n - 1) % n;
        let b = (s + len) % n;
        let a2 = (a + n - 1) % n;
        let b2 = (b + 1) % n;
        let wa = raw[a];
        let wb = raw[b];
        let ma = if clamped[a2] { 0.0 } else { (wa - raw[a2]) / h };
        let mb = if clamped[b2] { 0.0 } else { (raw[b2] - wb) / h };
        let span = (len + 1) as f64 * h;
        let cap = wa.min(wb);
        for i in 0..len {
            let t = (i + 1) as f64 / (len + 1) as f64;
            let t2 = t * t;
            let t3 = t2 * t;
            let p = (2.0 * t3 - 3.0 * t2 + 1.0) * wa
                + (t3 - 2.0 * t2 + t) * span * ma
                + (-2.0 * t3 + 3.0 * t2) * wb
                + (t3 - t2) * span * mb;
            values[(s + i) % n] = p.min(cap).max(-m_clamp);
        }
        clamp_slack = clamp_slack.max(fv[a]).max(fv[b]);
    }
    Ok(BridgedLog { values, clamped, runs, clamp_slack })
}

/// Maximal runs of `true`, read cyclically, as `(start, len)`.
pub(crate) fn cyclic_runs(mask: &[bool]) -> Vec<(usize, usize)> {
    let n = mask.len();
    if mask.iter().all(|&m| m) {
        return vec![(0, n)];
    }
    let first_false = mask.iter().position(|&m| !m).unwrap_or(0);
    let mut runs = Vec::new();
    let mut i = 0;
    while i < n {
        let j = (first_false + i) % n;
        if mask[j] {
            let mut len = 0;
            while len < n && mask[(j + len) % n] {
                len += 1;
            }
            runs.push((j, len));
            i += len;
        } else {
            i += 1;
        }
    }
    runs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LogVerdict {
    Integrable,
    DivergentSuspected,
}

/// Outcome of the cutoff-refinement heuristic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogIntegrability {
    pub cutoffs: Vec<f64>,
    pub means: Vec<f64>,
    pub verdict: LogVerdict,
    /// Grid cells where `f` is numerically zero but both neighbours are not.
    /// They stand for a zero of measure zero and are left out of the means,
    /// since a single sample at `-M` would otherwise dominate the differences.
    pub isolated_zero_samples: Vec<usize>,
    pub heuristic: bool,
}

pub fn log_integrability(
    f: &SampledFunction,
    cutoffs: &[f64],
    tol_logint: f64,
) -> Result<LogIntegrability> {
    if !f.is_nonnegative() {
        return Err(Error::Precondition("log_integrability needs a nonnegative real f".into()));
    }
    if cutoffs.is_empty() || cutoffs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("cutoffs must be a nonempty increasing list".into()));
    }
    let fv = f.re();
    let sup = fv.iter().cloned().fold(0.0, f64::max);
    if sup == 0.0 {
        return Err(Error::AllZero);
    }
    let tau = 1e-10 * (1.0 + sup);
    let n = fv.len();
    let small: Vec<bool> = fv.iter().map(|&x| x < tau).collect();
    let isolated: Vec<usize> = (0..n)
        .filter(|&j| small[j] && !small[(j + n - 1) % n] && !small[(j + 1) % n])
        .collect();
    let keep: Vec<bool> = {
        let mut k = vec![true; n];
        isolated.iter().for_each(|&j| k[j] = false);
        k
    };
    let count = keep.iter().filter(|&&k| k).count() as f64;
    let means: Vec<f64> = cutoffs
        .iter()
        .map(|&m| {
            fv.iter()
                .zip(&keep)
                .filter(|(_, &k)| k)
                .map(|(&x, _)| x.ln().max(-m))
                .sum::<f64>()
                / count
        })
        .collect();
    let ok = means.windows(2).all(|w| (w[1] - w[0]).abs() < tol_logint);
    Ok(LogIntegrability {
        cutoffs: cutoffs.to_vec(),
        means,
        verdict: if ok { LogVerdict::Integrable } else { LogVerdict::DivergentSuspected },
        isolated_zero_samples: isolated,
        heuristic: true,
    })
}

pub const DEFAULT_CUTOFFS: [f64; 3] = [10.0, 20.0, 30.0];
