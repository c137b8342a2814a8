#![allow(dead_code)]

use std::f64::consts::PI;

use diskmod::algebra::{ATuple, AnalyticElement};
use diskmod::circle::{CircleGrid, SampledFunction, C64};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

/// Strictly positive real trigonometric polynomial of the given degree with
/// values in `[0.1, 1.9]`.
pub fn positive_trig(rng: &mut ChaCha8Rng, degree: usize, grid: CircleGrid) -> SampledFunction {
    let a: Vec<(f64, f64)> = (0..degree).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let p = |t: f64| {
        a.iter()
            .enumerate()
            .map(|(k, (c, s))| c * ((k + 1) as f64 * t).cos() + s * ((k + 1) as f64 * t).sin())
            .sum::<f64>()
    };
    let bound = a.iter().map(|(c, s)| c.abs() + s.abs()).sum::<f64>().max(1e-12);
    SampledFunction::from_real_fn(grid, move |t| 1.0 + 0.9 * p(t) / bound)
}

pub fn random_poly(rng: &mut ChaCha8Rng, degree: usize) -> AnalyticElement {
    AnalyticElement::new(
        (0..=degree).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect(),
    )
    .unwrap()
}

/// `prod (1 - z / zeta_i)` with every `|zeta_i|` in `[2, 4]`: invertible in
/// the disk algebra.
pub fn random_invertible(rng: &mut ChaCha8Rng, degree: usize) -> AnalyticElement {
    let mut g = AnalyticElement::one();
    for _ in 0..degree {
        let zeta = C64::from_polar(rng.gen_range(2.0..4.0), rng.gen_range(0.0..2.0 * PI));
        let factor = AnalyticElement::new(vec![C64::new(1.0, 0.0), -1.0 / zeta]).unwrap();
        g = g.mul(&factor).unwrap();
    }
    g
}

pub fn random_tuple(rng: &mut ChaCha8Rng, len: usize, degree: usize) -> ATuple {
    ATuple::new((0..len).map(|_| random_poly(rng, degree)).collect()).unwrap()
}

/// Supremum of a continuous function of the angle: a dense scan followed by
/// golden-section refinement of the best cells.
pub fn boundary_max(f: impl Fn(f64) -> f64, scan: usize) -> f64 {
    let h = 2.0 * PI / scan as f64;
    let mut vals: Vec<(f64, usize)> = (0..scan).map(|j| (f(j as f64 * h), j)).collect();
    vals.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = vals[0].0;
    for &(_, j) in vals.iter().take(8) {
        let (mut a, mut b) = ((j as f64 - 1.0) * h, (j as f64 + 1.0) * h);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..80 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        best = best.max(f(0.5 * (a + b)));
    }
    best
}
