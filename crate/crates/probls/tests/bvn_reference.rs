//! Bivariate-normal kernels against series, identity and Monte-Carlo
//! oracles. The full 200-query / 1e7-sample check runs in the acceptance
//! suite; this file keeps a faster version plus the exact identities.

mod common;

use common::rng;
use probls::bvn::{bvn_prob, phi, BvnQuery};
use rand::Rng;
use rand_distr::StandardNormal;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Reference normal CDF via the Taylor series
/// `Phi(x) = 1/2 + pdf(x) * sum_k x^(2k+1) / (1 * 3 * ... * (2k+1))`,
/// accurate to ~1e-15 for |x| <= 6.
fn phi_series(x: f64) -> f64 {
    assert!(x.abs() <= 6.5);
    let pdf = (-0.5 * x * x).exp() / TWO_PI.sqrt();
    let mut term = x;
    let mut sum = x;
    for k in 1..200 {
        term *= x * x / (2.0 * k as f64 + 1.0);
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1.0) {
            break;
        }
    }
    0.5 + pdf * sum
}

#[test]
fn phi_matches_the_series_oracle() {
    for i in -60..=60 {
        let x = i as f64 * 0.1;
        let reference = phi_series(x);
        assert!(
            (phi(x) - reference).abs() <= 1e-12,
            "phi({x}) = {} vs series {reference}",
            phi(x)
        );
    }
    // the classic two-sided 95% quantile
    assert!((phi(1.959964) - 0.975).abs() <= 1e-6);
}

#[test]
fn phi_is_monotone() {
    let mut prev = phi(-40.0);
    for i in -400..=400 {
        let x = i as f64 * 0.1;
        let p = phi(x);
        assert!(p >= prev, "phi not monotone at {x}");
        prev = p;
    }
}

#[test]
fn orthant_identities_are_exact() {
    assert!((bvn_prob(&BvnQuery::orthant(0.0, 0.0, 0.0)) - 0.25).abs() <= 1e-9);
    assert!((bvn_prob(&BvnQuery::orthant(0.0, 0.0, 1.0)) - 0.5).abs() <= 1e-9);
    assert_eq!(bvn_prob(&BvnQuery::orthant(0.0, 0.0, -1.0)), 0.0);
    let third = bvn_prob(&BvnQuery::orthant(0.0, 0.0, 0.5));
    assert!((third - 1.0 / 3.0).abs() <= 1e-6, "rho = 0.5 orthant: {third}");
}

#[test]
fn rectangle_additivity_over_a_split() {
    let mut rng = rng(301);
    for _ in 0..300 {
        let rho: f64 = rng.gen_range(-0.999..0.999);
        let a_low: f64 = rng.gen_range(-3.0..2.0);
        let a_high = a_low + rng.gen_range(0.1..3.0);
        let b_low: f64 = rng.gen_range(-3.0..2.0);
        let b_high = b_low + rng.gen_range(0.2..3.0);
        let split = b_low + (b_high - b_low) * rng.gen_range(0.1..0.9);
        let whole = bvn_prob(&BvnQuery { a_low, a_high, b_low, b_high, rho });
        let lower = bvn_prob(&BvnQuery { a_low, a_high, b_low, b_high: split, rho });
        let upper = bvn_prob(&BvnQuery { a_low, a_high, b_low: split, b_high, rho });
        assert!(
            (whole - lower - upper).abs() <= 1e-9,
            "additivity broke: {whole} vs {lower} + {upper} (rho {rho})"
        );
        assert!((0.0..=1.0).contains(&whole));
    }
}

#[test]
fn rho_negation_mirrors_the_second_variable() {
    let mut rng = rng(302);
    for _ in 0..200 {
        let rho: f64 = rng.gen_range(-0.999..0.999);
        let x: f64 = rng.gen_range(-2.5..2.5);
        let y: f64 = rng.gen_range(-2.5..2.5);
        let p1 = bvn_prob(&BvnQuery::orthant(x, y, rho));
        // P(A > x, B < -y) with correlation -rho
        let p2 = bvn_prob(&BvnQuery {
            a_low: x,
            a_high: f64::INFINITY,
            b_low: f64::NEG_INFINITY,
            b_high: -y,
            rho: -rho,
        });
        assert!((p1 - p2).abs() <= 1e-9, "rho {rho}, x {x}, y {y}: {p1} vs {p2}");
    }
}

#[test]
fn quick_monte_carlo_agreement() {
    let mut rng = rng(303);
    let n = 200_000usize;
    for case in 0..20 {
        let rho: f64 = rng.gen_range(-0.99..0.99);
        let a_low: f64 = rng.gen_range(-2.0..1.0);
        let a_high = if case % 3 == 0 { f64::INFINITY } else { a_low + rng.gen_range(0.3..3.0) };
        let b_low: f64 = rng.gen_range(-2.0..1.0);
        let b_high = if case % 4 == 0 { f64::INFINITY } else { b_low + rng.gen_range(0.3..3.0) };
        let query = BvnQuery { a_low, a_high, b_low, b_high, rho };
        let p = bvn_prob(&query);

        let root = (1.0 - rho * rho).sqrt();
        let mut hits = 0usize;
        for _ in 0..n {
            let z1: f64 = rng.sample(StandardNormal);
            let z2: f64 = rng.sample(StandardNormal);
            let a = z1;
            let b = rho * z1 + root * z2;
            if a >= a_low && a <= a_high && b >= b_low && b <= b_high {
                hits += 1;
            }
        }
        let freq = hits as f64 / n as f64;
        let se = (freq * (1.0 - freq) / n as f64).sqrt();
        assert!(
            (p - freq).abs() <= 4.0 * se + 1e-4,
            "case {case}: p {p} vs mc {freq} (se {se})"
        );
    }
}
