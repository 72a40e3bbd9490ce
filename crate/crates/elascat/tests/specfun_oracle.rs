//! Production Hankel values against the extended-precision series oracle.

mod support;

use elascat::specfun::{alpha_n, beta_n, hankel1};
use num_complex::Complex64;
use support::{oracle_alpha, oracle_beta, oracle_dh, oracle_h, rel_err_c};

const ORDERS: [i32; 12] = [0, 1, 2, 3, 5, 8, 11, 15, 19, 23, 27, 30];
const ARGS: [f64; 13] = [
    0.1, 0.3, 0.7, 1.0, 2.0, 3.5, 5.0, 7.5, 9.0, 11.0, 12.0, 13.5, 15.0,
];

#[test]
fn production_matches_series_oracle() {
    let mut worst = (0.0f64, 0, 0.0f64);
    for &n in &ORDERS {
        for &t in &ARGS {
            let v = hankel1(n, t).unwrap();
            let href = oracle_h(n, t).to_c64();
            let dhref = oracle_dh(n, t).to_c64();
            let e1 = rel_err_c(v.h, href);
            let e2 = rel_err_c(v.dh, dhref);
            let e = e1.max(e2);
            if e > worst.0 {
                worst = (e, n, t);
            }
        }
    }
    assert!(
        worst.0 < 1e-10,
        "worst relative error {:.3e} at n={}, t={}",
        worst.0,
        worst.1,
        worst.2
    );
}

#[test]
fn frozen_oracle_values() {
    // H_5(2), series oracle reference
    let v = hankel1(5, 2.0).unwrap();
    let reference = Complex64::new(0.007039629755871685, -9.935989128481975);
    assert!(rel_err_c(v.h, reference) < 1e-10);

    // H_30(0.1): huge Y, tiny J
    let v = hankel1(30, 0.1).unwrap();
    assert!((v.h.im - -3.0222212624030168e69).abs() / 3.02e69 < 1e-10);

    // H_17(12): asymptotic seed region
    let v = hankel1(17, 12.0).unwrap();
    let reference = Complex64::new(0.005697760699443032, -4.683597890587997);
    assert!(rel_err_c(v.h, reference) < 1e-10);

    // α_2(0.5) against the oracle ratio
    let a = alpha_n(2, 0.5).unwrap();
    let reference = Complex64::new(-3.7293350437016757, 0.04300111644741096);
    assert!(rel_err_c(a, reference) < 1e-11);
    assert!(rel_err_c(a, oracle_alpha(2, 0.5)) < 1e-11);

    // α_5(2)
    let a = alpha_n(5, 2.0).unwrap();
    let reference = Complex64::new(-2.2216214824677042, 0.0032242424682530945);
    assert!(rel_err_c(a, reference) < 1e-11);
}

#[test]
fn beta_matches_oracle_second_derivative() {
    // β_n computed through the ODE identity vs the oracle's five-point
    // second derivative
    for &n in &[0, 1, 4, 9, 16, 25] {
        for &t in &[0.1, 0.5, 2.0, 5.0, 9.0, 15.0] {
            let b = beta_n(n, t).unwrap();
            let bref = oracle_beta(n, t);
            assert!(
                rel_err_c(b, bref) < 1e-9,
                "n={n}, t={t}: {b} vs {bref}"
            );
        }
    }
}

#[test]
fn wronskian_at_dtn_arguments() {
    // at every argument a DtN build uses: t ∈ {t_p, t_s} for the paper
    // frequencies, all orders up to the truncation
    let medium = elascat::dtn::BackgroundMedium::default();
    for &omega in &[1.0, 5.0, 10.0, 11.0] {
        let w = elascat::dtn::wave_numbers(&medium, omega).unwrap();
        let nt = elascat::dtn::default_truncation(&w);
        for &t in &[w.tp, w.ts] {
            for n in 0..=nt {
                let v = hankel1(n, t).unwrap();
                let wr = v.h.re * v.dh.im - v.dh.re * v.h.im;
                let exact = 2.0 / (std::f64::consts::PI * t);
                assert!(
                    ((wr - exact) / exact).abs() < 1e-10,
                    "omega={omega}, t={t}, n={n}"
                );
            }
        }
    }
}
