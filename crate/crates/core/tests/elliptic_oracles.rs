use std::f64::consts::PI;

use proptest::prelude::*;
use zakharov_core::elliptic::{complete_e, complete_k, complete_k_e, jacobi_sn_cn_dn};
use zakharov_core::EllipticModulus;

fn modulus(k: f64) -> EllipticModulus {
    EllipticModulus::new(k).unwrap()
}

// Trapezoid rule over a full period of the π-periodic integrands; spectrally
// accurate, independent of the AGM.
fn k_by_quadrature(kappa: f64) -> f64 {
    let n = 4000;
    let h = PI / n as f64;
    0.5 * h
        * (0..n)
            .map(|j| 1.0 / (1.0 - (kappa * (j as f64 * h).sin()).powi(2)).sqrt())
            .sum::<f64>()
}

fn e_by_quadrature(kappa: f64) -> f64 {
    let n = 4000;
    let h = PI / n as f64;
    0.5 * h
        * (0..n)
            .map(|j| (1.0 - (kappa * (j as f64 * h).sin()).powi(2)).sqrt())
            .sum::<f64>()
}

fn k_by_plain_agm(kappa: f64) -> f64 {
    let (mut a, mut b) = (1.0_f64, (1.0 - kappa * kappa).sqrt());
    for _ in 0..40 {
        let (an, bn) = (0.5 * (a + b), (a * b).sqrt());
        a = an;
        b = bn;
    }
    PI / (2.0 * a)
}

// Descending Landen (Gauss) transformation down to a negligible modulus,
// then back up.
fn landen_sn_cn_dn(u: f64, kappa: f64) -> (f64, f64, f64) {
    if kappa < 1e-9 {
        return (u.sin(), u.cos(), 1.0);
    }
    let kp = (1.0 - kappa * kappa).sqrt();
    let mu = (1.0 - kp) / (1.0 + kp);
    let v = u / (1.0 + mu);
    let (s, c, d) = landen_sn_cn_dn(v, mu);
    let den = 1.0 + mu * s * s;
    ((1.0 + mu) * s / den, c * d / den, (1.0 - mu * s * s) / den)
}

#[test]
fn k_and_e_agree_with_quadrature() {
    for i in 0..=19 {
        let kappa = i as f64 * 0.05;
        let (k, e) = complete_k_e(modulus(kappa)).unwrap();
        assert!((k - k_by_quadrature(kappa)).abs() < 1e-12, "K({kappa})");
        assert!((e - e_by_quadrature(kappa)).abs() < 1e-12, "E({kappa})");
    }
}

#[test]
fn k_at_one_half_matches_plain_agm() {
    let k = complete_k(modulus(0.5)).unwrap();
    assert!((k - k_by_plain_agm(0.5)).abs() < 1e-12);
    assert!((complete_e(modulus(0.5)).unwrap() - e_by_quadrature(0.5)).abs() < 1e-12);
}

#[test]
fn jacobi_triple_matches_landen_at_reference_point() {
    let (s, c, d) = jacobi_sn_cn_dn(1.0, modulus(0.7)).unwrap();
    let (ls, lc, ld) = landen_sn_cn_dn(1.0, 0.7);
    assert!((s * s + c * c - 1.0).abs() < 1e-13);
    assert!((d * d + 0.49 * s * s - 1.0).abs() < 1e-13);
    assert!((s - ls).abs() < 1e-13 && (c - lc).abs() < 1e-13 && (d - ld).abs() < 1e-13);
}

#[test]
fn derivative_identities_by_central_differences() {
    let step = 1e-6;
    for kappa in [0.05, 0.4, 0.75, 0.95] {
        let m = modulus(kappa);
        for u in [-7.0, -0.5, 0.9, 3.3, 11.0] {
            let (s, c, d) = jacobi_sn_cn_dn(u, m).unwrap();
            let (sp, cp, dp) = jacobi_sn_cn_dn(u + step, m).unwrap();
            let (sm, cm, dm) = jacobi_sn_cn_dn(u - step, m).unwrap();
            assert!(((sp - sm) / (2.0 * step) - c * d).abs() < 1e-6);
            assert!(((cp - cm) / (2.0 * step) + s * d).abs() < 1e-6);
            assert!(((dp - dm) / (2.0 * step) + kappa * kappa * s * c).abs() < 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn pythagorean_identities(u in -60.0f64..60.0, kappa in 0.0f64..0.999_999) {
        let (s, c, d) = jacobi_sn_cn_dn(u, modulus(kappa)).unwrap();
        prop_assert!((s * s + c * c - 1.0).abs() < 1e-12);
        prop_assert!((d * d + kappa * kappa * s * s - 1.0).abs() < 1e-12);
        prop_assert!(s.abs() <= 1.0 && c.abs() <= 1.0 && d <= 1.0);
        prop_assert!(d >= modulus(kappa).kappa_prime() - 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn agrees_with_landen(u in -20.0f64..20.0, kappa in 0.0f64..0.99) {
        let (s, c, d) = jacobi_sn_cn_dn(u, modulus(kappa)).unwrap();
        let (ls, lc, ld) = landen_sn_cn_dn(u, kappa);
        prop_assert!((s - ls).abs() < 1e-11);
        prop_assert!((c - lc).abs() < 1e-11);
        prop_assert!((d - ld).abs() < 1e-11);
    }
}
