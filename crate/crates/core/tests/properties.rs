mod common;

use std::f64::consts::PI;

use diskmod::algebra::{constrained_projection, AnalyticElement, SubalgebraDescriptor};
use diskmod::certificates::{certify_r, generate_q, verify_q, verify_r, Certificate, ClassTag, PeakSetSpec, Stage};
use diskmod::circle::{
    fft_analysis, fft_synthesis, interior_lattice, sup_norm, winding_number, CircleGrid, DiskPoint, SampledFunction, C64,
};
use diskmod::config::RunConfig;
use diskmod::gleason::{
    exponential_g, functional_distance, lower_bound, two_point_qbar_certificate,
};
use diskmod::hardy::{negative_frequency_fraction, outer_boundary, HarmonicExtension};
use diskmod::modules::{
    build_canonical_isometry, decide_isometric, module_norm, tensor_weight, two_point_module, FunctionModule,
    IsometryVerdict, Mobius, ModuleMap,
};
use diskmod::Error;
use proptest::prelude::*;
use rand::Rng;

use common::*;

fn grid(n: usize) -> CircleGrid {
    CircleGrid::new(n).unwrap()
}

fn unit(t: f64) -> C64 {
    C64::from_polar(1.0, t)
}

fn max_diff(a: &SampledFunction, b: &SampledFunction) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fft_round_trip(log_n in 4u32..12, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = grid(1 << log_n);
        let f = SampledFunction::new(
            g,
            (0..g.n()).map(|_| C64::new(r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0))).collect(),
        ).unwrap();
        let back = fft_synthesis(&fft_analysis(&f));
        prop_assert!(max_diff(&f, &back) <= 1e-12 * (1.0 + f.max_abs()));
    }

    #[test]
    fn sup_norm_is_submultiplicative(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = grid(256);
        let a = random_poly(&mut r, 12).boundary_samples(g);
        let b = random_poly(&mut r, 12).boundary_samples(g);
        let ab = a.mul(&b).unwrap();
        prop_assert!(sup_norm(&ab, 4) <= sup_norm(&a, 4) * sup_norm(&b, 4) * (1.0 + 1e-12));
    }

    #[test]
    fn winding_counts_interior_zeros(k in 0usize..5, m in 0usize..4, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = grid(512);
        let zero = |r: &mut rand_chacha::ChaCha8Rng, inside: bool| {
            let rad = if inside { r.gen_range(0.0..0.7) } else { r.gen_range(1.5..3.0) };
            C64::from_polar(rad, r.gen_range(0.0..2.0 * PI))
        };
        let mut zs: Vec<C64> = (0..k).map(|_| zero(&mut r, true)).collect();
        zs.extend((0..m).map(|_| zero(&mut r, false)));
        let p = SampledFunction::from_fn(g, |t| zs.iter().map(|z| unit(t) - z).product());
        let w = winding_number(&p, 4).unwrap();
        prop_assert_eq!(w, k as i64);

        // a positive factor does not change it, and products add
        let pos = positive_trig(&mut r, 5, g);
        prop_assert_eq!(winding_number(&p.mul(&pos).unwrap(), 4).unwrap(), w);
        let sq = p.mul(&p).unwrap();
        prop_assert_eq!(winding_number(&sq, 4).unwrap(), 2 * w);
    }

    #[test]
    fn outer_function_laws(seed in any::<u64>(), d1 in 1usize..9, d2 in 1usize..9) {
        let mut r = rng(seed);
        let g = grid(1024);
        let f1 = positive_trig(&mut r, d1, g);
        let f2 = positive_trig(&mut r, d2, g);
        let o1 = outer_boundary(&f1.map_real(f64::ln));
        let o2 = outer_boundary(&f2.map_real(f64::ln));
        let o12 = outer_boundary(&f1.mul(&f2).unwrap().map_real(f64::ln));

        prop_assert!(negative_frequency_fraction(&o1) <= 1e-20);
        prop_assert!(max_diff(&o1.abs(), &f1) <= 1e-12);
        let prod = o1.mul(&o2).unwrap();
        prop_assert!(max_diff(&o12, &prod) <= 1e-11 * o12.max_abs());
    }

    #[test]
    fn pairing_obeys_cauchy_schwarz(seed in any::<u64>(), len in 1usize..5) {
        let mut r = rng(seed);
        let h = random_tuple(&mut r, len, 10);
        let k = random_tuple(&mut r, len, 10);
        let dot = h.dot(&k).unwrap();
        for j in 0..200 {
            let z = C64::from_polar(r.gen_range(0.0..1.0), j as f64 * 0.0314);
            prop_assert!(dot.eval(z).norm() <= h.norm_at(z) * k.norm_at(z) * (1.0 + 1e-12) + 1e-14);
        }
    }

    #[test]
    fn obstruction_bound_decreases(c1 in 1.0f64..10.0, dc in 1e-6f64..5.0) {
        prop_assert!(lower_bound(c1 + dc) < lower_bound(c1));
        prop_assert!(lower_bound(c1) <= 2.0);
        prop_assert_eq!(lower_bound(1.0), 2.0);
    }
}

#[test]
fn rigged_certificates_multiply() {
    let cfg = RunConfig::default();
    let g = grid(1024);
    let f1 = SampledFunction::from_real_fn(g, |t| (1.0 + unit(t)).norm());
    let f2 = SampledFunction::from_real_fn(g, |t| (1.0 - unit(t)).norm());
    let e1 = PeakSetSpec::points(&[PI]).unwrap();
    let e2 = PeakSetSpec::points(&[0.0]).unwrap();
    let schedule = [0.1, 0.01];
    let (c1, r1) = certify_r(&f1, &e1, &schedule, &cfg).unwrap();
    let (c2, r2) = certify_r(&f2, &e2, &schedule, &cfg).unwrap();
    assert!(r1.passed() && r2.passed());

    // rank-one stages multiply entrywise; each factor contributes its own
    // 6 sqrt(eps) budget, so the product stage is declared at 4 eps
    let stages = c1
        .stages
        .iter()
        .zip(&c2.stages)
        .map(|(a, b)| Stage { eps: 4.0 * a.eps, k: a.k.tensor(&b.k).unwrap(), h: a.h.tensor(&b.h).unwrap() })
        .collect();
    let mut cert = Certificate::new(ClassTag::RE, f1.mul(&f2).unwrap(), stages).unwrap();
    cert.peak_set = Some(e1.union(&e2).unwrap());
    let rep = verify_r(&cert, &cfg).unwrap();
    assert!(rep.passed(), "{:#?}", rep.checks);
}

#[test]
fn envelope_ordering_holds_off_the_peak_set() {
    let cfg = RunConfig::default();
    let g = grid(1024);
    let f = SampledFunction::from_real_fn(g, |t| (1.0 + unit(t)).norm());
    let e = PeakSetSpec::points(&[PI]).unwrap();
    let (cert, rep) = certify_r(&f, &e, &[0.1, 0.01], &cfg).unwrap();
    assert!(rep.passed());
    let slack = 1e-6 + rep.measurements["clamp_slack"].as_f64().unwrap();
    for stage in &cert.stages {
        let k = stage.k.entries()[0].boundary_samples(g);
        let h = stage.h.entries()[0].boundary_samples(g);
        for j in 0..g.n() {
            let fj = f.values()[j].re;
            if e.distance(g.theta(j)) < g.spacing() || fj <= 0.0 {
                continue;
            }
            assert!(k.values()[j].norm().ln() <= fj.ln() + slack, "theta {}", g.theta(j));
            assert!(fj.ln() <= -h.values()[j].norm().ln() + slack, "theta {}", g.theta(j));
        }
    }
}

#[test]
fn smaller_eps_tightens_envelope_and_pairing() {
    let cfg = RunConfig::default();
    let g = grid(1024);
    let f = SampledFunction::from_real_fn(g, |t| (1.0 + unit(t)).norm());
    let e = PeakSetSpec::points(&[PI]).unwrap();
    let (_, rep) = certify_r(&f, &e, &[0.2, 0.05, 0.01], &cfg).unwrap();
    assert!(rep.passed());
    for m in 0..3 {
        assert!(rep.check("envelope", Some(m)).unwrap().value <= 1e-6);
    }
    let trend: Vec<f64> = rep.measurements["e_minus_1_on_common_compact"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(trend.windows(2).all(|w| w[1] <= w[0] + 1e-6), "{trend:?}");
}

#[test]
fn restriction_norm_matches_full_norm() {
    let cfg = RunConfig::default();
    let mut r = rng(11);
    let g = grid(1024);
    let (w1, w2) = (DiskPoint::real(0.3).unwrap(), DiskPoint::new(C64::new(-0.2, 0.4)).unwrap());
    let desc = SubalgebraDescriptor::two_point(w1, w2).unwrap();
    for _ in 0..10 {
        let f = positive_trig(&mut r, 6, g);
        let a = constrained_projection(&random_poly(&mut r, 10), &desc).unwrap();
        let full = module_norm(&a, &FunctionModule::full(f.clone()).unwrap(), &cfg).unwrap();
        let sub = module_norm(&a, &two_point_module(f, w1, w2).unwrap(), &cfg).unwrap();
        assert_eq!(full, sub);
    }
}

#[test]
fn interior_extension_never_beats_boundary_norm() {
    let cfg = RunConfig::default();
    let mut r = rng(16);
    let g = grid(1024);
    let lattice = interior_lattice();
    let weights = [
        SampledFunction::from_real_fn(g, |t| t.cos().exp()),
        SampledFunction::from_real_fn(g, |t| 2.0 + t.cos()),
        SampledFunction::from_real_fn(g, |t| (1.0 + unit(t)).norm()),
    ];
    for f in weights {
        let ext = HarmonicExtension::new(&f.map_real(|v| v.max((-cfg.tolerances.m_clamp).exp()).ln()));
        let tilde: Vec<f64> = lattice.iter().map(|&z| ext.poisson(z).unwrap().exp()).collect();
        let m = FunctionModule::full(f).unwrap();
        for _ in 0..50 {
            let a = random_poly(&mut r, 12);
            let norm = module_norm(&a, &m, &cfg).unwrap();
            let inner = lattice.iter().zip(&tilde).map(|(&z, t)| a.eval(z).norm() * t).fold(0.0, f64::max);
            assert!(inner <= norm + 1e-6, "{inner} > {norm}");
        }
    }
}

#[test]
fn canonical_isometry_argmax_is_stable() {
    let cfg = RunConfig::default();
    let mut r = rng(17);
    let g = grid(1024);
    for _ in 0..10 {
        let f1 = positive_trig(&mut r, 5, g);
        let f2 = positive_trig(&mut r, 5, g);
        let h = random_invertible(&mut r, 6);
        let m1 = FunctionModule::full(f1.clone()).unwrap();
        let m2 = FunctionModule::full(f2.clone()).unwrap();
        let iso =
            build_canonical_isometry(&m1, &m2, ModuleMap { mobius: Mobius::identity(), multiplier: h.clone() }, &cfg)
                .unwrap();
        let argmax = |v: &SampledFunction| {
            (0..v.n()).max_by(|&i, &j| v.values()[i].norm().total_cmp(&v.values()[j].norm())).unwrap()
        };
        for _ in 0..10 {
            let a = random_poly(&mut r, 8);
            let image = iso.apply(&a).unwrap();
            let direct = a
                .boundary_samples(g)
                .mul(&f1)
                .unwrap()
                .mul(&h.boundary_samples(g).mul(&f2).unwrap().div(&f1).unwrap())
                .unwrap();
            assert_eq!(argmax(&image), argmax(&direct));
        }
    }
}

#[test]
fn q_inverse_uses_the_reciprocal_outer() {
    let cfg = RunConfig::default();
    let mut r = rng(18);
    let g = grid(1024);
    let mut loose = cfg.clone();
    loose.tolerances.tol_q *= 2.0;
    for _ in 0..10 {
        let f = positive_trig(&mut r, 8, g);
        let cert = generate_q(&f, &cfg).unwrap();
        let h = &cert.stages[0].h.entries()[0];
        let rep = verify_q(&f.map_real(|v| 1.0 / v), h, &loose).unwrap();
        assert!(rep.passed(), "{:#?}", rep.checks);
    }
}

#[test]
fn restriction_rejects_elements_outside_subalgebra() {
    let cfg = RunConfig::default();
    let f = SampledFunction::from_real_fn(grid(256), |_| 1.0);
    let m = two_point_module(f, DiskPoint::real(0.3).unwrap(), DiskPoint::real(-0.3).unwrap()).unwrap();
    let z = AnalyticElement::monomial(1, C64::new(1.0, 0.0)).unwrap();
    assert!(matches!(module_norm(&z, &m, &cfg), Err(Error::NotInSubalgebra { .. })));
}

#[test]
fn isometry_witnesses_compose() {
    let cfg = RunConfig::default();
    let mut r = rng(12);
    let g = grid(1024);
    for _ in 0..10 {
        let f1 = positive_trig(&mut r, 4, g);
        let f2 = positive_trig(&mut r, 4, g);
        let f3 = positive_trig(&mut r, 4, g);
        let m = |f: &SampledFunction| FunctionModule::full(f.clone()).unwrap();
        let d12 = decide_isometric(&m(&f1), &m(&f2), &cfg).unwrap();
        let d23 = decide_isometric(&m(&f2), &m(&f3), &cfg).unwrap();
        assert_eq!(d12.verdict, IsometryVerdict::Isometric);
        assert_eq!(d23.verdict, IsometryVerdict::Isometric);
        let prod = d12.witness.unwrap().mul(&d23.witness.unwrap()).unwrap().boundary_samples(g).abs();
        let ratio = f1.div(&f3).unwrap();
        assert!(max_diff(&prod, &ratio) <= 1e-8 * ratio.max_abs());
    }
}

#[test]
fn tensor_weight_is_commutative_and_associative() {
    let mut r = rng(13);
    let g = grid(512);
    let m = |r: &mut rand_chacha::ChaCha8Rng| FunctionModule::full(positive_trig(r, 5, g)).unwrap();
    let (a, b, c) = (m(&mut r), m(&mut r), m(&mut r));
    let ab = tensor_weight(&a, &b).unwrap();
    let ba = tensor_weight(&b, &a).unwrap();
    assert_eq!(ab.weight.values(), ba.weight.values());
    let left = tensor_weight(&ab, &c).unwrap();
    let right = tensor_weight(&a, &tensor_weight(&b, &c).unwrap()).unwrap();
    assert!(max_diff(&left.weight, &right.weight) <= 1e-14);
}

#[test]
fn distance_maximizer_is_stable() {
    let cfg = RunConfig::default();
    let pairs = [(0.5, -0.5), (0.1, 0.6), (-0.3, 0.2)];
    for (a, b) in pairs {
        let (w1, w2) = (DiskPoint::real(a).unwrap(), DiskPoint::real(b).unwrap());
        let d = functional_distance(w1, w2, &cfg);
        assert_eq!(d, functional_distance(w1, w2, &cfg));
        assert!(d.challenge_passed);
        let mut finer = cfg.clone();
        finer.grid_n *= 2;
        let e = functional_distance(w1, w2, &finer);
        assert!((d.functional_norm - e.functional_norm).abs() <= 1e-9);
        assert!((d.blaschke_center - e.blaschke_center).norm() <= 1e-6);
    }
}

#[test]
fn distance_is_mobius_invariant() {
    let cfg = RunConfig::default();
    let mut r = rng(14);
    let (w1, w2) = (C64::new(0.3, 0.1), C64::new(-0.4, 0.2));
    let d0 = functional_distance(DiskPoint::new(w1).unwrap(), DiskPoint::new(w2).unwrap(), &cfg).functional_norm;
    for _ in 0..20 {
        let a = C64::from_polar(r.gen_range(0.0..0.6), r.gen_range(0.0..2.0 * PI));
        let phi = Mobius::new(a, unit(r.gen_range(0.0..2.0 * PI))).unwrap();
        let p = |z: C64| DiskPoint::new(phi.apply(z)).unwrap();
        let d = functional_distance(p(w1), p(w2), &cfg).functional_norm;
        assert!((d - d0).abs() <= 1e-6, "{d} vs {d0}");
    }
}

#[test]
fn dichotomy_is_consistent() {
    let cfg = RunConfig::default();
    let p = |re: f64, im: f64| DiskPoint::new(C64::new(re, im)).unwrap();
    let cases = [(p(0.5, 0.0), p(1.0, 0.0)), (p(0.0, 0.0), p(1.0, 0.0)), (p(1.0, 0.0), p(-1.0, 0.0)), (p(0.5, 0.0), p(-0.5, 0.0)), (p(0.2, 0.0), p(0.0, 0.7))];
    for (w1, w2) in cases {
        let d = functional_distance(w1, w2, &cfg);
        let g = exponential_g(w1, w2).unwrap();
        match two_point_qbar_certificate(w1, w2, &g, &[4, 8], &cfg) {
            Err(Error::SamePart { .. }) => assert!(d.same_part, "{w1:?} {w2:?}"),
            Ok(out) => {
                assert!(!d.same_part, "{w1:?} {w2:?}");
                assert!(out.report.passed());
            }
            Err(e) => panic!("{w1:?} {w2:?}: {e}"),
        }
    }
}

#[test]
fn q_certificate_reciprocal_pairs_to_one() {
    let cfg = RunConfig::default();
    let mut r = rng(15);
    let g = grid(1024);
    for _ in 0..10 {
        let f = positive_trig(&mut r, 8, g);
        let cert = generate_q(&f, &cfg).unwrap();
        let s = &cert.stages[0];
        let e = s.k.dot(&s.h).unwrap().boundary_samples(g);
        let one = SampledFunction::constant(g, C64::new(1.0, 0.0));
        assert!(max_diff(&e, &one) <= 1e-8);
    }
}
