//! Uniform grids on the unit circle, sampled functions, discrete Fourier
//! transforms, grid-approximate sup norms, winding numbers and circle means.
//!
//! Fourier coefficients are normalized so that `f_j = sum_k c_k e^{i k theta_j}`
//! with `k` ranging over `-n/2 .. n/2 - 1`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlannerScalar};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

thread_local! {
    // The scalar planner keeps results bit-identical across CPUs with
    // different SIMD support, which the golden corpus relies on.
    static PLANNER: RefCell<FftPlannerScalar<f64>> = RefCell::new(FftPlannerScalar::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// Unnormalized forward DFT in place: `X_k = sum_j x_j e^{-2 pi i jk/len}`.
pub(crate) fn dft_forward(buf: &mut [C64]) {
    plan(buf.len(), false).process(buf);
}

/// Unnormalized inverse DFT in place: `x_j = sum_k X_k e^{2 pi i jk/len}`.
pub(crate) fn dft_inverse(buf: &mut [C64]) {
    plan(buf.len(), true).process(buf);
}

/// A uniform grid `theta_j = 2 pi j / n`. Only `n` is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct CircleGrid {
    n: usize,
}

impl TryFrom<usize> for CircleGrid {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        CircleGrid::new(n)
    }
}

impl From<CircleGrid> for usize {
    fn from(g: CircleGrid) -> usize {
        g.n
    }
}

impl CircleGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 16 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(n));
        }
        Ok(CircleGrid { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n as f64
    }

    pub fn point(&self, j: usize) -> C64 {
        C64::from_polar(1.0, self.theta(j))
    }

    pub fn thetas(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |j| self.theta(j))
    }

    pub fn points(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.n).map(move |j| self.point(j))
    }

    /// The grid refined by an integer factor.
    pub fn refined(&self, factor: usize) -> Result<Self> {
        CircleGrid::new(self.n * factor)
    }
}

/// Samples of a function on a [`CircleGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    grid: CircleGrid,
    values: Vec<C64>,
}

impl SampledFunction {
    pub fn new(grid: CircleGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch { expected: grid.n(), found: values.len() });
        }
        Ok(SampledFunction { grid, values })
    }

    pub fn from_real(grid: CircleGrid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, values.into_iter().map(|v| C64::new(v, 0.0)).collect())
    }

    pub fn from_fn(grid: CircleGrid, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.thetas().map(f).collect();
        SampledFunction { grid, values }
    }

    pub fn from_real_fn(grid: CircleGrid, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |t| C64::new(f(t), 0.0))
    }

    pub fn constant(grid: CircleGrid, c: C64) -> Self {
        SampledFunction { grid, values: vec![c; grid.n()] }
    }

    pub fn grid(&self) -> CircleGrid {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.is_real() && self.values.iter().all(|v| v.re >= 0.0)
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.is_real() && self.values.iter().all(|v| v.re > 0.0)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        SampledFunction { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn map_real(&self, f: impl Fn(f64) -> f64) -> Self {
        self.map(|v| C64::new(f(v.re), 0.0))
    }

    pub fn abs(&self) -> Self {
        self.map(|v| C64::new(v.norm(), 0.0))
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(self.n(), other.n()));
        }
        Ok(SampledFunction {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a / b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn min_abs(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, v| m.min(v.norm()))
    }

    pub fn mean(&self) -> C64 {
        self.values.iter().sum::<C64>() / self.n() as f64
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum SampledWire {
    Samples { n: usize, values: Vec<C64> },
    Fourier { n: usize, coeffs: Vec<C64> },
}

impl Serialize for SampledFunction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SampledWire::Samples { n: self.n(), values: self.values.clone() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SampledFunction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match SampledWire::deserialize(d)? {
            SampledWire::Samples { n, values } => {
                let grid = CircleGrid::new(n).map_err(D::Error::custom)?;
                SampledFunction::new(grid, values).map_err(D::Error::custom)
            }
            SampledWire::Fourier { n, coeffs } => {
                let grid = CircleGrid::new(n).map_err(D::Error::custom)?;
                let half = (coeffs.len() / 2) as i64;
                let mut fc = FourierCoefficients::zeros(grid);
                for (i, c) in coeffs.iter().enumerate() {
                    let k = i as i64 - half;
                    if k < -(n as i64) / 2 || k >= n as i64 / 2 {
                        return Err(D::Error::custom(format!(
                            "frequency {k} does not fit a grid of {n} points"
                        )));
                    }
                    fc.set(k, *c);
                }
                Ok(fft_synthesis(&fc))
            }
        }
    }
}

/// Discrete Fourier coefficients in FFT storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierCoefficients {
    grid: CircleGrid,
    data: Vec<C64>,
}

impl FourierCoefficients {
    pub fn zeros(grid: CircleGrid) -> Self {
        FourierCoefficients { grid, data: vec![C64::new(0.0, 0.0); grid.n()] }
    }

    pub fn grid(&self) -> CircleGrid {
        self.grid
    }

    fn slot(&self, k: i64) -> usize {
        let n = self.grid.n() as i64;
        assert!(k >= -n / 2 && k < n / 2, "frequency {k} outside -n/2..n/2-1");
        k.rem_euclid(n) as usize
    }

    pub fn get(&self, k: i64) -> C64 {
        self.data[self.slot(k)]
    }

    pub fn set(&mut self, k: i64, c: C64) {
        let s = self.slot(k);
        self.data[s] = c;
    }

    /// Coefficients as `(k, c_k)` for `k = -n/2 .. n/2 - 1`.
    pub fn centered(&self) -> Vec<(i64, C64)> {
        let n = self.grid.n() as i64;
        (-n / 2..n / 2).map(|k| (k, self.get(k))).collect()
    }

    pub fn raw(&self) -> &[C64] {
        &self.data
    }

    pub fn energy(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Energy of the coefficients with `k < 0` (the Nyquist index counts as negative).
    pub fn negative_energy(&self) -> f64 {
        let n = self.grid.n();
        self.data[n / 2..].iter().map(|c| c.norm_sqr()).sum()
    }
}

pub fn fft_analysis(f: &SampledFunction) -> FourierCoefficients {
    let mut buf = f.values.clone();
    dft_forward(&mut buf);
    let scale = 1.0 / f.n() as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    FourierCoefficients { grid: f.grid, data: buf }
}

pub fn fft_synthesis(c: &FourierCoefficients) -> SampledFunction {
    let mut buf = c.data.clone();
    dft_inverse(&mut buf);
    SampledFunction { grid: c.grid, values: buf }
}

/// Trigonometric interpolation onto `oversample * n` points. The Nyquist
/// coefficient is split evenly between `+n/2` and `-n/2` so that real
/// samples interpolate to real values.
pub fn interpolate(f: &SampledFunction, oversample: usize) -> Vec<C64> {
    assert!(oversample >= 1, "oversample must be at least 1");
    if oversample == 1 {
        return f.values.clone();
    }
    let n = f.n();
    let m = n * oversample;
    let c = fft_analysis(f);
    let mut buf = vec![C64::new(0.0, 0.0); m];
    buf[0] = c.data[0];
    for k in 1..n / 2 {
        buf[k] = c.data[k];
        buf[m - k] = c.data[n - k];
    }
    let nyq = c.data[n / 2] * 0.5;
    buf[n / 2] = nyq;
    buf[m - n / 2] = nyq;
    dft_inverse(&mut buf);
    buf
}

/// Grid-approximate sup norm. Panics if `oversample == 0`.
pub fn sup_norm(f: &SampledFunction, oversample: usize) -> f64 {
    interpolate(f, oversample).iter().fold(0.0, |m, v| m.max(v.norm()))
}

/// Minimum modulus on the refined grid.
pub fn min_modulus(f: &SampledFunction, oversample: usize) -> f64 {
    interpolate(f, oversample).iter().fold(f64::INFINITY, |m, v| m.min(v.norm()))
}

/// Winding number about the origin by phase unwrapping on the refined grid.
pub fn winding_number(g: &SampledFunction, oversample: usize) -> Result<i64> {
    let vals = interpolate(g, oversample);
    let sup = vals.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    let min = vals.iter().fold(f64::INFINITY, |m, v| m.min(v.norm()));
    let threshold = 1e-10 * (1.0 + sup);
    if min < threshold {
        return Err(Error::ZeroOnGrid { min_modulus: min, threshold });
    }
    Ok(winding_of_values(&vals))
}

pub(crate) fn winding_of_values(vals: &[C64]) -> i64 {
    let m = vals.len();
    let total: f64 = (0..m).map(|j| (vals[(j + 1) % m] / vals[j]).arg()).sum();
    (total / (2.0 * PI)).round() as i64
}

/// A point of the closed unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "C64", into = "C64")]
pub struct DiskPoint(C64);

impl TryFrom<C64> for DiskPoint {
    type Error = Error;
    fn try_from(z: C64) -> Result<Self> {
        DiskPoint::new(z)
    }
}

impl From<DiskPoint> for C64 {
    fn from(p: DiskPoint) -> C64 {
        p.0
    }
}

impl DiskPoint {
    /// Accepts `|z| <= 1` up to a rounding allowance of `1e-12`.
    pub fn new(z: C64) -> Result<Self> {
        if !(z.re.is_finite() && z.im.is_finite()) || z.norm() > 1.0 + 1e-12 {
            return Err(Error::OutsideDisk(z));
        }
        Ok(DiskPoint(z))
    }

    pub fn real(x: f64) -> Result<Self> {
        Self::new(C64::new(x, 0.0))
    }

    pub fn z(&self) -> C64 {
        self.0
    }

    pub fn is_interior(&self) -> bool {
        self.0.norm() < 1.0 - 1e-12
    }
}

/// Average of `f` over `m` uniform points on the circle `|z - center| = radius`.
pub fn mean_on_circle(
    f: impl Fn(C64) -> C64,
    center: DiskPoint,
    radius: f64,
    m: usize,
) -> Result<C64> {
    if !(radius >= 0.0) || center.z().norm() + radius >= 1.0 || m == 0 {
        return Err(Error::RadiusOutOfDomain { center: center.z(), radius });
    }
    let sum: C64 = (0..m)
        .map(|j| f(center.z() + C64::from_polar(radius, 2.0 * PI * j as f64 / m as f64)))
        .sum();
    Ok(sum / m as f64)
}

pub const LATTICE_RADII: [f64; 5] = [0.25, 0.5, 0.75, 0.9, 0.99];
pub const LATTICE_ANGLES: usize = 64;

/// The fixed interior test lattice used by all interior checks.
pub fn interior_lattice() -> Vec<C64> {
    let mut pts = Vec::with_capacity(LATTICE_RADII.len() * LATTICE_ANGLES);
    for &r in &LATTICE_RADII {
        for j in 0..LATTICE_ANGLES {
            pts.push(C64::from_polar(r, 2.0 * PI * j as f64 / LATTICE_ANGLES as f64));
        }
    }
    pts
}

/// Circular distance between two angles.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}
