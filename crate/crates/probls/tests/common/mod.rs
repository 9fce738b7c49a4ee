//! Shared helpers for the integration suites: independent numeric oracles
//! and random-fixture builders. Nothing here calls back into the code paths
//! under test beyond plain posterior construction.
#![allow(dead_code)]

use probls::gp::{KernelParams, Observation, SurrogatePosterior};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Central finite difference of a scalar function.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Eigenvalues of a dense symmetric matrix via cyclic Jacobi rotations.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        let scale: f64 = (0..n).map(|i| m[i * n + i].abs()).fold(1e-300, f64::max);
        if off.sqrt() <= 1e-14 * scale * n as f64 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = 0.5 * (aqq - app) / apq;
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i]).collect()
}

/// Posterior over randomly placed noiseless observations: the origin plus
/// up to `max_extra` nodes with spacing at least `min_gap` inside
/// `(0, t_span]`, values and slopes drawn standard normal.
pub fn random_noiseless_posterior(
    rng: &mut ChaCha8Rng,
    max_extra: usize,
    t_span: f64,
    min_gap: f64,
) -> SurrogatePosterior {
    let n_extra = rng.gen_range(1..=max_extra);
    let mut ts: Vec<f64> = Vec::new();
    while ts.len() < n_extra {
        let t = rng.gen_range(min_gap..t_span);
        if ts.iter().all(|&u| (u - t).abs() > min_gap) {
            ts.push(t);
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut post = SurrogatePosterior::new(
        KernelParams::default(),
        Observation::new(0.0, 0.0, rng.sample::<f64, _>(StandardNormal) - 1.0, 0.0, 0.0),
    )
    .unwrap();
    for t in ts {
        let y: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        post = post.update(Observation::new(t, y, dy, 0.0, 0.0)).unwrap();
    }
    post
}

/// Like `random_noiseless_posterior` but with homoscedastic noise levels.
pub fn random_noisy_posterior(
    rng: &mut ChaCha8Rng,
    max_extra: usize,
    t_span: f64,
    min_gap: f64,
    sigma_f: f64,
    sigma_df: f64,
) -> SurrogatePosterior {
    let n_extra = rng.gen_range(1..=max_extra);
    let mut ts: Vec<f64> = Vec::new();
    while ts.len() < n_extra {
        let t = rng.gen_range(min_gap..t_span);
        if ts.iter().all(|&u| (u - t).abs() > min_gap) {
            ts.push(t);
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let var_f = sigma_f * sigma_f;
    let var_df = sigma_df * sigma_df;
    let mut post = SurrogatePosterior::new(
        KernelParams::default(),
        Observation::new(0.0, 0.0, rng.sample::<f64, _>(StandardNormal) - 1.0, var_f, var_df),
    )
    .unwrap();
    for t in ts {
        let y: f64 = rng.sample(StandardNormal);
        let dy: f64 = rng.sample(StandardNormal);
        post = post.update(Observation::new(t, y, dy, var_f, var_df)).unwrap();
    }
    post
}

/// Plain dense Cholesky for the tiny covariance matrices the Monte-Carlo
/// oracles sample from; jitters the diagonal until the factorization holds.
pub fn chol_with_jitter(a: &[f64], n: usize) -> Vec<f64> {
    let mut jitter = 0.0;
    loop {
        let mut m = a.to_vec();
        for i in 0..n {
            m[i * n + i] += jitter;
        }
        if let Some(l) = try_chol(&m, n) {
            return l;
        }
        jitter = if jitter == 0.0 { 1e-12 } else { jitter * 10.0 };
        assert!(jitter < 1.0, "covariance matrix is badly indefinite");
    }
}

fn try_chol(a: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l[i * n + j] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Some(l)
}

/// Grid scan for local minima of the posterior mean over `[0, t_max]`.
/// Strict interior comparisons on a uniform grid of the given spacing.
pub fn grid_local_minima(post: &SurrogatePosterior, spacing: f64) -> Vec<f64> {
    let t_max = post.t_max();
    let n = (t_max / spacing).ceil() as usize;
    let values: Vec<f64> = (0..=n).map(|i| post.mean(i as f64 * spacing)).collect();
    let mut minima = Vec::new();
    for i in 1..n {
        if values[i] < values[i - 1] && values[i] < values[i + 1] {
            minima.push(i as f64 * spacing);
        }
    }
    minima
}
