//! Property suites over a matrix of measure families.

use std::f64::consts::PI;

use boolrv::boolean_max::{self, DistFunction};
use boolrv::free_additive::{self, FixedPointOptions};
use boolrv::inversion::{self, InversionProfile};
use boolrv::transforms::{self, remainder_at, remainder_k_direct};
use boolrv::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn family() -> Vec<(&'static str, Measure)> {
    vec![
        ("dirac+", Measure::dirac(0.7)),
        ("dirac-", Measure::dirac(-1.3)),
        ("bernoulli", Measure::bernoulli()),
        ("atoms3", Measure::atomic(vec![(0.5, 0.2), (1.0, 0.5), (4.0, 0.3)]).unwrap()),
        ("grid", Measure::grid(vec![0.0, 1.0, 2.5, 3.0], vec![0.3, 0.5, 0.2]).unwrap()),
        ("pareto0.5", Measure::pareto(0.5, 1.0).unwrap()),
        ("pareto1", Measure::pareto(1.0, 1.0).unwrap()),
        ("pareto1.5", Measure::pareto(1.5, 1.0).unwrap()),
        ("pareto2.5", Measure::pareto(2.5, 2.0).unwrap()),
        ("cauchy", Measure::StandardCauchy),
        ("semicircle", Measure::semicircle(2.0).unwrap()),
        (
            "mixture",
            Measure::mixture(vec![
                (0.6, Measure::grid(vec![0.0, 1.0, 2.0], vec![0.5, 0.5]).unwrap()),
                (0.4, Measure::pareto(1.5, 1.0).unwrap()),
            ])
            .unwrap(),
        ),
    ]
}

fn positive_family() -> Vec<(&'static str, Measure)> {
    family().into_iter().filter(|(_, m)| m.support_positive()).collect()
}

fn upper_point() -> impl Strategy<Value = Complex64> {
    (-1.5f64..1.5, 0.05f64..(PI - 0.05)).prop_map(|(lr, th)| Complex64::from_polar(10f64.powf(lr), th))
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tails_are_monotone(i in 0usize..12, y1 in -50.0f64..50.0, dy in 0.0f64..50.0) {
        let (name, m) = &family()[i];
        prop_assert!(m.tail(y1) >= m.tail(y1 + dy), "{name}");
        prop_assert!(m.tail(-1e12) > 1.0 - 1e-6 && m.tail(1e12) < 1e-5, "{name}");
    }

    #[test]
    fn pareto_tail_scaling_is_exact(alpha in 0.2f64..4.0, y in 1.0f64..1e6, t in 1.0f64..100.0) {
        let m = Measure::pareto(alpha, 1.0).unwrap();
        let r = m.tail(t * y) / m.tail(y);
        prop_assert!((r / t.powf(-alpha) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_tail_is_weighted_sum(w in 0.05f64..0.95, y in -5.0f64..1e3) {
        let a = Measure::pareto(1.5, 1.0).unwrap();
        let b = Measure::semicircle(1.0).unwrap();
        let m = Measure::mixture(vec![(w, a.clone()), (1.0 - w, b.clone())]).unwrap();
        prop_assert!((m.tail(y) - (w * a.tail(y) + (1.0 - w) * b.tail(y))).abs() < 1e-12);
    }

    #[test]
    fn transforms_are_conjugate_symmetric(i in 0usize..12, z in upper_point()) {
        let (name, m) = &family()[i];
        let h = TransformHandle::leaf(m.clone());
        let zc = z.conj();
        prop_assert!(close(h.g(zc).unwrap(), h.g(z).unwrap().conj(), 1e-12), "G {name} {z}");
        prop_assert!(close(h.f(zc).unwrap(), h.f(z).unwrap().conj(), 1e-12), "F {name} {z}");
        prop_assert!(close(h.k(zc).unwrap(), h.k(z).unwrap().conj(), 1e-12), "K {name} {z}");
        if m.support_positive() {
            prop_assert!(close(h.eta(zc).unwrap(), h.eta(z).unwrap().conj(), 1e-12), "eta {name} {z}");
            prop_assert!(close(h.psi(zc).unwrap(), h.psi(z).unwrap().conj(), 1e-12), "psi {name} {z}");
        }
    }

    #[test]
    fn reciprocal_cauchy_is_nevanlinna(i in 0usize..12, z in upper_point()) {
        let (name, m) = &family()[i];
        let f = transforms::f_transform(m, z).unwrap();
        prop_assert!(f.im >= z.im - 1e-12 * (1.0 + f.norm()), "{name} {z} {f}");
    }

    #[test]
    fn eta_argument_bounds(i in 0usize..6, z in upper_point(), x in 0.01f64..50.0) {
        let (name, m) = &positive_family()[i];
        let e = transforms::eta(m, z).unwrap();
        let (ae, az) = (e.arg(), z.arg());
        prop_assert!(ae >= az - 1e-12 && ae < PI, "{name} {z}: arg eta {ae} vs arg z {az}");
        let en = transforms::eta(m, Complex64::new(-x, 0.0)).unwrap();
        prop_assert!(en.re < 0.0 && en.im.abs() < 1e-12, "{name} at -{x}: {en}");
    }

    #[test]
    fn boolean_sum_commutes_and_associates(i in 0usize..12, j in 0usize..12, k in 0usize..12, z in upper_point()) {
        let fam = family();
        let (a, b, c) = (
            TransformHandle::leaf(fam[i].1.clone()),
            TransformHandle::leaf(fam[j].1.clone()),
            TransformHandle::leaf(fam[k].1.clone()),
        );
        let ab = bool_add(&a, &b).f(z).unwrap();
        prop_assert!(close(ab, bool_add(&b, &a).f(z).unwrap(), 1e-12));
        let l = bool_add(&bool_add(&a, &b), &c).f(z).unwrap();
        let r = bool_add(&a, &bool_add(&b, &c)).f(z).unwrap();
        prop_assert!(close(l, r, 1e-12));
    }

    #[test]
    fn boolean_product_commutes_and_associates(i in 0usize..6, j in 0usize..6, k in 0usize..6, z in upper_point()) {
        let fam = positive_family();
        let with_mean = |n: usize| fam[n].1.moment(1).finite().is_some();
        prop_assume!(with_mean(i) && with_mean(j) && with_mean(k));
        let (a, b, c) = (
            TransformHandle::leaf(fam[i].1.clone()),
            TransformHandle::leaf(fam[j].1.clone()),
            TransformHandle::leaf(fam[k].1.clone()),
        );
        let ab = bool_mult(&a, &b).unwrap().f(z).unwrap();
        prop_assert!(close(ab, bool_mult(&b, &a).unwrap().f(z).unwrap(), 1e-12));
        let l = bool_mult(&bool_mult(&a, &b).unwrap(), &c).unwrap().f(z).unwrap();
        let r = bool_mult(&a, &bool_mult(&b, &c).unwrap()).unwrap().f(z).unwrap();
        prop_assert!(close(l, r, 1e-12));
    }

    #[test]
    fn boolean_powers_compose(i in 0usize..12, s in 0.1f64..3.0, t in 0.1f64..3.0, z in upper_point()) {
        let h = TransformHandle::leaf(family()[i].1.clone());
        let l = bool_add_power(&bool_add_power(&h, s).unwrap(), t).unwrap().f(z).unwrap();
        let r = bool_add_power(&h, s * t).unwrap().f(z).unwrap();
        prop_assert!(close(l, r, 1e-12));
    }

    #[test]
    fn outputs_of_positive_inputs_are_positive(i in 0usize..6, j in 0usize..6, x in -5.0f64..20.0, eps in 1e-3f64..1.0) {
        let fam = positive_family();
        let (a, b) = (TransformHandle::leaf(fam[i].1.clone()), TransformHandle::leaf(fam[j].1.clone()));
        let z = Complex64::new(x, eps);
        prop_assert!(bool_add(&a, &b).g(z).unwrap().im <= 1e-14);
        if fam[j].1.moment(1).finite().is_some() {
            prop_assert!(bool_mult(&a, &b).unwrap().g(z).unwrap().im <= 1e-14);
        }
    }

    #[test]
    fn max_maps_are_a_semigroup_isomorphism(f in 2e-3f64..1.0, g in 2e-3f64..1.0) {
        let (df, dg) = (DistFunction::from_cdf("f", move |_| f), DistFunction::from_cdf("g", move |_| g));
        // X carries the Boolean max to the product, and its inverse carries the product back
        let l = boolean_max::x_map(&boolean_max::bool_max_conv(&df, &dg)).cdf(0.0);
        let r = boolean_max::product(&boolean_max::x_map(&df), &boolean_max::x_map(&dg)).cdf(0.0);
        prop_assert!((l - r).abs() <= 1e-12);
        let l = boolean_max::x_inv(&boolean_max::product(&df, &dg)).cdf(0.0);
        let r = boolean_max::bool_max_conv(&boolean_max::x_inv(&df), &boolean_max::x_inv(&dg)).cdf(0.0);
        prop_assert!((l - r).abs() <= 1e-12);
        let back = boolean_max::x_inv_scalar(boolean_max::x_map_scalar(f).unwrap()).unwrap();
        prop_assert!((back - f).abs() <= 1e-14);
    }

    #[test]
    fn subordination_invariants(i in 0usize..12, t in 1.0f64..4.0, z in upper_point()) {
        let h = TransformHandle::leaf(family()[i].1.clone());
        let opts = FixedPointOptions::default();
        let r = free_additive::subordinator(&h, t, z, &opts).unwrap();
        if r.converged {
            prop_assert!(r.residual <= opts.tol);
            prop_assert!(r.omega.im >= z.im * (1.0 - 1e-12));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn k_and_inverse_b_remainders_agree(idx in 0usize..4, y in 1.0f64..1e4, th in -0.6f64..0.6) {
        let (alpha, p) = [(0.5, 0u32), (1.5, 1), (2.5, 2), (3.5, 3)][idx];
        let m = Measure::pareto(alpha, 1.0).unwrap();
        let z = Complex64::from_polar(1.0 / y, -PI / 2.0 + th);
        let at = ComplexPoint::new(z.re, z.im).unwrap();
        let via_b = remainder_at(RemainderKind::RInvB, &m, at, p, Precision::Extended).unwrap().value;
        let via_k = remainder_k_direct(&m, 1.0 / z, p, Precision::Extended).unwrap();
        prop_assert!((via_b - via_k).norm() <= 1e-10 * (1.0 + via_b.norm()), "{via_b} vs {via_k}");
    }

    #[test]
    fn psi_paths_agree_near_zero(i in 0usize..12, r in 1e-3f64..0.1, th in 0.1f64..(2.0 * PI - 0.1)) {
        let (name, m) = &family()[i];
        let z = Complex64::from_polar(r, th);
        let a = transforms::psi_at(m, z, Precision::Double).unwrap();
        let b = transforms::psi_via_cauchy(m, z, Precision::Double).unwrap();
        prop_assert!((a - b).norm() <= 1e-8 * (1.0 + a.norm()), "{name} {z}: {a} vs {b}");
    }

    #[test]
    fn k_remainder_scales_under_boolean_powers(idx in 0usize..3, t in 0.2f64..4.0, y in 2.0f64..1e3) {
        let (alpha, p) = [(0.5, 0u32), (1.5, 1), (2.5, 2)][idx];
        let m = Measure::pareto(alpha, 1.0).unwrap();
        let ht = bool_add_power(&TransformHandle::leaf(m.clone()), t).unwrap();
        let w = Complex64::new(0.0, y);
        let e = transforms::eta_series_coeffs(&m.moments(p).unwrap());
        let series: Complex64 = e.iter().enumerate().map(|(i, c)| t * c * w.powi(-(i as i32))).sum();
        let scale = if p == 0 { Complex64::new(1.0, 0.0) } else { w.powi(p as i32 - 1) };
        let rt = (ht.k(w).unwrap() - series) * scale;
        let r = remainder_k_direct(&m, w, p, Precision::Double).unwrap();
        prop_assert!((rt - t * r).norm() <= 1e-8 * (1.0 + rt.norm()), "{rt} vs {}", t * r);
    }
}

#[test]
fn zeroth_moment_is_one() {
    for (name, m) in family() {
        assert_eq!(m.moment(0).finite(), Some(1.0), "{name}");
    }
}

#[test]
fn resolvent_normalization_at_large_height() {
    let iy = Complex64::new(0.0, 1e3);
    for (name, m) in family() {
        let g = transforms::cauchy(&m, iy).unwrap();
        let dev = (iy * g - 1.0).norm();
        if let Some(alpha) = m.tail_index().filter(|a| *a < 1.0) {
            // decays like y^-alpha
            let far = (Complex64::new(0.0, 1e5) * transforms::cauchy(&m, Complex64::new(0.0, 1e5)).unwrap() - 1.0).norm();
            let rate = (dev / far).log10() / 2.0;
            assert!((rate - alpha).abs() < 0.05, "{name}: rate {rate}");
        } else if m.tail_index().is_some() || name == "cauchy" {
            assert!(dev < 1e-2, "{name}: {dev}");
        } else {
            // compact support: iyG(iy) = 1 + m1/(iy) + m2/(iy)^2 + O(y^-3)
            let (m1, m2) = (m.moment(1).finite().unwrap(), m.moment(2).finite().unwrap());
            let rest = (iy * g - 1.0 - m1 / iy - m2 / (iy * iy)).norm();
            assert!(rest < 1e-6, "{name}: {rest}");
        }
    }
}

#[test]
fn mass_is_conserved_across_the_family() {
    let prof = InversionProfile::default();
    for (name, m) in family() {
        let mass = inversion::total_mass(&TransformHandle::leaf(m), &prof).unwrap().total;
        assert!((0.999..=1.001).contains(&mass), "{name}: {mass}");
    }
}

// Newton on F(u) = target with a centered-difference derivative.
fn invert_f(h: &TransformHandle, target: Complex64, start: Complex64) -> Complex64 {
    let mut u = start;
    for _ in 0..100 {
        let fu = h.f(u).unwrap() - target;
        if fu.norm() < 1e-14 * (1.0 + target.norm()) {
            break;
        }
        let d = 1e-6 * (1.0 + u.norm());
        let df = (h.f(u + d).unwrap() - h.f(u - d).unwrap()) / (2.0 * d);
        u -= fu / df;
    }
    u
}

#[test]
fn free_power_reproduces_the_inverse_identity() {
    for m in [Measure::semicircle(1.0).unwrap(), Measure::bernoulli(), Measure::pareto(1.5, 1.0).unwrap()] {
        let h = TransformHandle::leaf(m);
        for t in [1.5, 2.0, 3.0] {
            for z in [Complex64::new(0.3, 1.0), Complex64::new(-2.0, 3.0), Complex64::new(1.0, 0.5)] {
                let ft = free_additive::free_power_f(&h, t, z).unwrap();
                let opts = FixedPointOptions::default();
                let guess = free_additive::subordinator(&h, t, z, &opts).unwrap().omega + Complex64::new(1e-3, 1e-3);
                let u = invert_f(&h, ft, guess);
                let rebuilt = (1.0 - t) * ft + t * u;
                assert!((rebuilt - z).norm() < 1e-6, "t = {t}, z = {z}: {rebuilt}");
            }
        }
    }
}

#[test]
fn inverted_tails_decrease() {
    let p = TransformHandle::leaf(Measure::pareto(1.5, 1.0).unwrap());
    let h = bool_add(&p, &p);
    let ys: Vec<f64> = (0..12).map(|i| 10f64.powf(0.5 + 0.25 * i as f64)).collect();
    let t = inversion::tail_table(&h, &ys, &InversionProfile::default()).unwrap();
    assert!(t.windows(2).all(|w| w[1].value < w[0].value));
}

#[test]
fn leaf_inversion_matches_closed_forms() {
    let prof = InversionProfile::default();
    let sc = Measure::semicircle(1.0).unwrap();
    let h = TransformHandle::leaf(sc.clone());
    for x in [-1.5, -0.7, 0.0, 0.4, 1.2] {
        let d = inversion::density_at(&h, x, &prof).unwrap();
        assert!((d - sc.density(x)).abs() < 1e-6, "x = {x}: {d} vs {}", sc.density(x));
    }
    let m = Measure::atomic(vec![(-1.0, 0.25), (0.5, 0.25), (2.0, 0.5)]).unwrap();
    let found = inversion::atoms(&TransformHandle::leaf(m.clone()), (-3.0, 3.0), &prof).unwrap();
    assert_eq!(found.len(), 3);
    for (a, (x, w)) in found.iter().zip(m.atoms()) {
        assert!((a.location - x).abs() < 1e-8 && (a.mass - w).abs() < 1e-8, "{a:?}");
    }
}
