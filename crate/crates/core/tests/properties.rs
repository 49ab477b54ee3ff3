use approx::assert_relative_eq;
use proptest::prelude::*;
use roundness_core::metric::{gr_bruteforce, roundness_defect, sanchez_mgr, validate_metric};
use roundness_core::moduli::{clarkson_ratio, nu_estimate, rho_estimate, VIOLATION_MARGIN};
use roundness_core::orlicz::{self, largest_valid_t0, phi_example1, phi_from_psi, psi_example1};
use roundness_core::spaces::{
    dual_norm_2d, lp_norm, lplq_norm, luxemburg_norm, racetrack_dual_norm, schatten_norm,
};
use roundness_core::{Matrix, MgrScan, OrliczSpec, SearchBudget, SpaceSpec};

fn small() -> SearchBudget {
    SearchBudget::new(48, 60, 0.5, 3).unwrap()
}

fn vec_in(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn luxemburg_of_power_is_lp(x in vec_in(3), p in 1.0f64..6.0) {
        prop_assume!(x.iter().any(|v| v.abs() > 1e-3));
        let phi = orlicz::power(p).unwrap();
        let a = luxemburg_norm(&x, &phi).unwrap();
        let b = lp_norm(&x, p).unwrap();
        prop_assert!((a - b).abs() <= 1e-8 * b, "{a} vs {b}");
    }

    #[test]
    fn schatten_two_is_frobenius(data in vec_in(9)) {
        let m = Matrix::new(3, data.clone()).unwrap();
        let fro = data.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!((schatten_norm(&m, 2.0).unwrap() - fro).abs() <= 1e-10 * fro.max(1.0));
        let t = schatten_norm(&m.transpose(), 1.3).unwrap();
        prop_assert!((schatten_norm(&m, 1.3).unwrap() - t).abs() <= 1e-10 * t.max(1.0));
    }

    #[test]
    fn lplq_collapses(x in vec_in(6), p in 1.0f64..5.0, q in 1.0f64..5.0) {
        let same = lplq_norm(&x, 2, 3, p, p).unwrap();
        prop_assert!((same - lp_norm(&x, p).unwrap()).abs() <= 1e-10 * same.max(1.0));
        let single_block = lplq_norm(&x, 1, 6, p, q).unwrap();
        prop_assert!((single_block - lp_norm(&x, q).unwrap()).abs() <= 1e-10 * single_block.max(1.0));
        let scalar_blocks = lplq_norm(&x, 6, 1, p, q).unwrap();
        prop_assert!((scalar_blocks - lp_norm(&x, p).unwrap()).abs() <= 1e-10 * scalar_blocks.max(1.0));
    }

    #[test]
    fn numerical_dual_of_racetrack(theta in 0.0f64..std::f64::consts::TAU, res in 200usize..2000) {
        let f = [theta.cos(), theta.sin()];
        let num = dual_norm_2d(&SpaceSpec::Racetrack, &f, res).unwrap();
        let exact = racetrack_dual_norm(&f).unwrap();
        prop_assert!(num <= exact * (1.0 + 1e-12));
        prop_assert!(exact - num <= 3.0 / res as f64 * exact, "{num} vs {exact} at {res}");
    }

    #[test]
    fn triangle_inequality_everywhere(x in vec_in(4), y in vec_in(4), k in 0usize..6) {
        let spec = [
            SpaceSpec::lp(1.2, 4),
            SpaceSpec::LpLq { p: 3.0, q: 1.5, outer: 2, inner: 2 },
            SpaceSpec::Schatten { p: 4.0, dim: 2 },
            SpaceSpec::Orlicz { phi: OrliczSpec::Example2 { p: 3.0 }, dim: 4 },
            SpaceSpec::Orlicz { phi: OrliczSpec::Power { p: 2.5 }, dim: 4 },
            SpaceSpec::lp(7.0, 4),
        ][k].clone();
        let s = spec.build().unwrap();
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        prop_assert!(s.norm(&sum) <= (s.norm(&x) + s.norm(&y)) * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn metric_permutation_invariance(
        pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 3..6),
        seed in any::<u64>(),
    ) {
        let rows: Vec<Vec<f64>> = pts.iter()
            .map(|a| pts.iter().map(|b| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()).collect())
            .collect();
        prop_assume!(validate_metric(&rows).is_ok());
        let m = validate_metric(&rows).unwrap();
        let n = m.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.rotate_left((seed % n as u64) as usize);
        perm.swap(0, n - 1);
        let pm = m.permuted(&perm).unwrap();
        for p in [1.0, 1.5, 2.0] {
            let (a, b) = (roundness_defect(&m, p).unwrap().0, roundness_defect(&pm, p).unwrap().0);
            prop_assert!((a - b).abs() <= 1e-12);
        }
        let scan = MgrScan { p_max: 4.0, ..MgrScan::default() };
        let (a, b) = (sanchez_mgr(&m, &scan).unwrap(), sanchez_mgr(&pm, &scan).unwrap());
        match (a.value(), b.value()) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-6),
            (None, None) => {}
            _ => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }
}

#[test]
fn nu_estimates_respect_bounds_and_monotonicity() {
    for spec in [SpaceSpec::lp(1.2, 3), SpaceSpec::Schatten { p: 3.0, dim: 2 }, SpaceSpec::RacetrackDual] {
        let s = spec.build().unwrap();
        let mut prev = 0.0;
        for i in 0..9 {
            let p = 1.0 + 0.375 * i as f64;
            let e = nu_estimate(&s, p, &small()).unwrap();
            assert!(e.raw <= 2f64.powf(p) + 1e-9, "{spec} at {p}");
            assert!(e.value >= 2f64.max(2f64.powf(p - 1.0)));
            assert!(e.value >= prev - 1e-6, "{spec}: not monotone at {p}");
            prev = e.value;
        }
    }
}

#[test]
fn rho_exceeds_nordlander_bound() {
    for spec in [
        SpaceSpec::lp(1.5, 2),
        SpaceSpec::lp(4.0, 3),
        SpaceSpec::Schatten { p: 1.5, dim: 2 },
        SpaceSpec::Racetrack,
        SpaceSpec::RacetrackDual,
    ] {
        let s = spec.build().unwrap();
        for t in [0.01, 0.1, 0.5, 1.0] {
            let r = rho_estimate(&s, t, &small()).unwrap();
            assert!(r.value >= (1.0 + t * t).sqrt() - 1.0 - 1e-6, "{spec} at {t}: {}", r.value);
            assert!(r.value <= t);
        }
    }
}

#[test]
fn clarkson_ratio_bounds_nu() {
    for (spec, p) in [
        (SpaceSpec::lp(1.5, 2), 1.5),
        (SpaceSpec::lp(3.0, 2), 1.5),
        (SpaceSpec::lp(2.0, 3), 2.0),
        (SpaceSpec::Schatten { p: 1.5, dim: 2 }, 1.2),
    ] {
        let s = spec.build().unwrap();
        let c = clarkson_ratio(&s, p, &small()).unwrap();
        if c.value <= 1.0 + 1e-6 {
            let nu = nu_estimate(&s, p, &small()).unwrap().value;
            assert!(nu <= 2.0 + 1e-4, "{spec} at {p}: clarkson {} but nu {nu}", c.value);
        }
    }
}

#[test]
fn orlicz_power_matches_lp_modulus() {
    let a = SpaceSpec::Orlicz { phi: OrliczSpec::Power { p: 3.0 }, dim: 2 }.build().unwrap();
    let b = SpaceSpec::lp(3.0, 2).build().unwrap();
    for q in [1.2, 2.0, 3.5] {
        let (x, y) = (nu_estimate(&a, q, &small()).unwrap().value, nu_estimate(&b, q, &small()).unwrap().value);
        assert_relative_eq!(x, y, max_relative = 1e-6);
    }
}

#[test]
fn phi_from_psi_agrees_with_closed_form() {
    for p in [1.3, 1.5, 1.8] {
        let t0 = largest_valid_t0(p).unwrap();
        let num = phi_from_psi(&psi_example1(p, t0).unwrap(), 1e-10).unwrap();
        let closed = phi_example1(p, t0).unwrap();
        for i in 0..1000 {
            let t = 1e-6f64.powf(1.0 - i as f64 / 999.0);
            assert!((num.eval(t) - closed.eval(t)).abs() < 1e-7, "p={p} t={t}");
        }
        assert_relative_eq!(num.eval(3.0), closed.eval(3.0), max_relative = 1e-8);
    }
}

#[test]
fn generalised_roundness_brackets_mgr() {
    for n in [4, 6] {
        let m = roundness_core::FiniteMetricSpace::cycle(n).unwrap();
        let v = sanchez_mgr(&m, &MgrScan::default()).unwrap().value().unwrap();
        assert!(gr_bruteforce(&m, v - 0.05, 2).unwrap().0 <= 1e-12);
        assert!(gr_bruteforce(&m, v + 0.05, 2).unwrap().0.max(gr_bruteforce(&m, v + 0.05, 3).unwrap().0) > 0.0);
    }
}

// Finite truncation of the first Orlicz example: a search should find no
// roundness violation just above 1.
#[test]
fn orlicz_example1_truncation_has_no_violation_near_one() {
    let t0 = largest_valid_t0(1.5).unwrap();
    let s = SpaceSpec::Orlicz { phi: OrliczSpec::Example1 { p: 1.5, t0 }, dim: 2 }.build().unwrap();
    let nu = nu_estimate(&s, 1.1, &small()).unwrap().value;
    assert!(nu <= 2.0 + VIOLATION_MARGIN, "{nu}");
}
