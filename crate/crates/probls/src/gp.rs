//! Gaussian process surrogate over a univariate objective and its derivative.
//!
//! The prior is a once-integrated Wiener process, so the posterior mean is a
//! piecewise-cubic spline with knots at the observed locations. Observations
//! are noisy `(value, derivative)` pairs; inference conditions jointly on
//! both channels through a dense 2N x 2N Gram system, which is cheap because
//! a line search collects fewer than ten points.

use crate::linalg::Cholesky;

/// Variance floor applied to every observation, in scaled units. Keeps the
/// Gram matrix invertible when callers pass exactly-zero noise.
pub const NOISE_FLOOR: f64 = 1e-12;

/// Tolerance below which two observation locations count as duplicates.
pub const DUP_TOL: f64 = 1e-10;

/// Hyperparameters of the integrated Wiener process covariance.
///
/// `theta2` scales the prior variance and stays at 1 because the line search
/// standardizes its inputs; `tau` shifts the process origin to `-tau` so the
/// kernel is positive definite on `t >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub theta2: f64,
    pub tau: f64,
}

impl Default for KernelParams {
    fn default() -> Self {
        Self { theta2: 1.0, tau: 10.0 }
    }
}

/// One noisy evaluation of the scaled objective: location, value, projected
/// derivative, and the noise variances of the two channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub t: f64,
    pub y: f64,
    pub dy: f64,
    pub var_f: f64,
    pub var_df: f64,
}

impl Observation {
    pub fn new(t: f64, y: f64, dy: f64, var_f: f64, var_df: f64) -> Self {
        debug_assert!(t >= 0.0 && var_f >= 0.0 && var_df >= 0.0);
        Self { t, y, dy, var_f, var_df }
    }
}

/// Covariance of the joint process `(f, f')` with derivative counts
/// `order_t` on the first argument (0..=3) and `order_u` on the second
/// (0..=1).
///
/// Orders (0,0), (1,0), (0,1) and (1,1) use the shifted arguments
/// `t + tau`, `u + tau`; the second and third derivatives are invariant
/// under that shift. Ties `t == u` resolve to the right-sided derivative.
///
/// Panics on an unsupported order pair.
pub fn kernel(order_t: usize, order_u: usize, t: f64, u: f64, params: &KernelParams) -> f64 {
    let th = params.theta2;
    let a = t + params.tau;
    let b = u + params.tau;
    match (order_t, order_u) {
        (0, 0) => {
            let m = a.min(b);
            th * (m * m * m / 3.0 + 0.5 * (a - b).abs() * m * m)
        }
        (1, 0) => {
            if a > b {
                th * 0.5 * b * b
            } else {
                th * (a * b - 0.5 * a * a)
            }
        }
        (0, 1) => kernel(1, 0, u, t, params),
        (1, 1) => th * a.min(b),
        (2, 0) => {
            if t <= u {
                th * (u - t)
            } else {
                0.0
            }
        }
        // Strict comparisons below make the tie value the right-sided
        // derivative: the kernel slice anchored at u is linear for t > u,
        // so its higher derivatives vanish from u onwards.
        (2, 1) => {
            if t < u {
                th
            } else {
                0.0
            }
        }
        (3, 0) => {
            if t < u {
                -th
            } else {
                0.0
            }
        }
        (3, 1) => 0.0,
        _ => panic!("unsupported kernel derivative order ({order_t},{order_u})"),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GpError {
    #[error("observation at t={t} duplicates an existing node")]
    DuplicateObservation { t: f64 },
    #[error("gram matrix factorization failed after jitter escalation")]
    DegenerateGram,
}

/// GP posterior over `(f, f')` conditioned on all observations so far.
///
/// Holds the Cholesky factor of the Gram matrix and the solved weight vector
/// `G^-1 [y; y']`, so mean queries are a single kernel sweep and covariance
/// queries one triangular solve.
#[derive(Debug, Clone)]
pub struct SurrogatePosterior {
    params: KernelParams,
    obs: Vec<Observation>,
    chol: Cholesky,
    weights: Vec<f64>,
}

impl SurrogatePosterior {
    /// Starts a posterior from the mandatory `t = 0` observation.
    pub fn new(params: KernelParams, origin: Observation) -> Result<Self, GpError> {
        assert_eq!(origin.t, 0.0, "the initial observation must sit at t = 0");
        Self::build(params, vec![floored(origin)])
    }

    /// Returns a new posterior conditioned on one more observation.
    pub fn update(&self, new_obs: Observation) -> Result<Self, GpError> {
        assert!(new_obs.t >= 0.0, "observation locations must be nonnegative");
        if self.obs.iter().any(|o| (o.t - new_obs.t).abs() <= DUP_TOL) {
            return Err(GpError::DuplicateObservation { t: new_obs.t });
        }
        let mut obs = self.obs.clone();
        let pos = obs.partition_point(|o| o.t < new_obs.t);
        obs.insert(pos, floored(new_obs));
        Self::build(self.params, obs)
    }

    fn build(params: KernelParams, obs: Vec<Observation>) -> Result<Self, GpError> {
        let n = obs.len();
        let dim = 2 * n;
        let mut gram = vec![0.0; dim * dim];
        for (i, oi) in obs.iter().enumerate() {
            for (j, oj) in obs.iter().enumerate() {
                gram[i * dim + j] = kernel(0, 0, oi.t, oj.t, &params);
                gram[i * dim + n + j] = kernel(0, 1, oi.t, oj.t, &params);
                gram[(n + i) * dim + j] = kernel(1, 0, oi.t, oj.t, &params);
                gram[(n + i) * dim + n + j] = kernel(1, 1, oi.t, oj.t, &params);
            }
            gram[i * dim + i] += oi.var_f;
            gram[(n + i) * dim + n + i] += oi.var_df;
        }

        let trace: f64 = (0..dim).map(|i| gram[i * dim + i]).sum();
        let base_jitter = 1e-10 * trace / dim as f64;
        let mut chol = Cholesky::factor(&gram, dim);
        let mut jitter = base_jitter;
        for _ in 0..3 {
            if chol.is_some() {
                break;
            }
            let mut regularized = gram.clone();
            for i in 0..dim {
                regularized[i * dim + i] += jitter;
            }
            chol = Cholesky::factor(&regularized, dim);
            jitter *= 10.0;
        }
        let chol = chol.ok_or(GpError::DegenerateGram)?;

        let mut rhs = vec![0.0; dim];
        for (i, o) in obs.iter().enumerate() {
            rhs[i] = o.y;
            rhs[n + i] = o.dy;
        }
        let weights = chol.solve(&rhs);
        Ok(Self { params, obs, chol, weights })
    }

    pub fn params(&self) -> &KernelParams {
        &self.params
    }

    /// Observations in ascending `t` order; the first is always `t = 0`.
    pub fn observations(&self) -> &[Observation] {
        &self.obs
    }

    pub fn t_max(&self) -> f64 {
        self.obs.last().expect("posterior is never empty").t
    }

    /// Posterior mean and its first three derivatives at `t`.
    ///
    /// The mean is piecewise cubic; at a knot the second and third
    /// derivatives are the right-sided values, so the returned triple
    /// describes the cell to the right of `t`.
    pub fn mean_derivatives(&self, t: f64) -> (f64, f64, f64, f64) {
        debug_assert!(t >= 0.0);
        let n = self.obs.len();
        let mut out = [0.0; 4];
        for (d, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, o) in self.obs.iter().enumerate() {
                acc += self.weights[i] * kernel(d, 0, t, o.t, &self.params);
                acc += self.weights[n + i] * kernel(d, 1, t, o.t, &self.params);
            }
            *slot = acc;
        }
        (out[0], out[1], out[2], out[3])
    }

    /// Posterior mean of `f` at `t`.
    pub fn mean(&self, t: f64) -> f64 {
        let n = self.obs.len();
        let mut acc = 0.0;
        for (i, o) in self.obs.iter().enumerate() {
            acc += self.weights[i] * kernel(0, 0, t, o.t, &self.params);
            acc += self.weights[n + i] * kernel(0, 1, t, o.t, &self.params);
        }
        acc
    }

    /// Posterior covariance between `f^(order_t)(t)` and `f^(order_u)(u)`,
    /// with orders restricted to value (0) or first derivative (1).
    pub fn covariance(&self, order_t: usize, order_u: usize, t: f64, u: f64) -> f64 {
        assert!(order_t <= 1 && order_u <= 1, "covariance orders are 0 or 1");
        let prior = kernel(order_t, order_u, t, u, &self.params);
        let qt = self.cross_vector(order_t, t);
        let qu = self.cross_vector(order_u, u);
        let solved = self.chol.solve(&qu);
        let mut correction = 0.0;
        for i in 0..qt.len() {
            correction += qt[i] * solved[i];
        }
        prior - correction
    }

    /// Posterior variance of `f` at `t` (may be a tiny negative round-off).
    pub fn variance(&self, t: f64) -> f64 {
        self.covariance(0, 0, t, t)
    }

    fn cross_vector(&self, order: usize, t: f64) -> Vec<f64> {
        let n = self.obs.len();
        let mut q = vec![0.0; 2 * n];
        for (i, o) in self.obs.iter().enumerate() {
            q[i] = kernel(order, 0, t, o.t, &self.params);
            q[n + i] = kernel(order, 1, t, o.t, &self.params);
        }
        q
    }
}

fn floored(mut o: Observation) -> Observation {
    o.var_f = o.var_f.max(NOISE_FLOOR);
    o.var_df = o.var_df.max(NOISE_FLOOR);
    o
}
