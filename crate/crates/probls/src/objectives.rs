//! Desk-scale stochastic test problems with exact analytic gradients.
//!
//! All four kinds expose the exchangeable per-sample structure the driver
//! expects: a batch mean of per-sample losses is an unbiased estimate of the
//! full objective, with noise that shrinks as the batch grows.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::{self, DataError, Dataset};
use crate::driver::Objective;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProblemKind {
    #[serde(rename = "noisy-quadratic")]
    NoisyQuadratic,
    #[serde(rename = "noisy-rosenbrock-like")]
    NoisyRosenbrock,
    #[serde(rename = "logistic-regression")]
    LogisticRegression,
    #[serde(rename = "mlp2")]
    Mlp2,
}

/// Declarative problem description; everything an experiment needs to
/// rebuild its objective deterministically.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Input dimension (feature count for classifiers).
    pub dimension: usize,
    /// Per-sample noise scale: sample spread for the quadratic, tilt scale
    /// for the Rosenbrock variant; unused by the data-driven kinds.
    #[serde(default = "default_noise")]
    pub noise: f64,
    /// Number of samples / dataset rows.
    #[serde(default = "default_rows")]
    pub rows: usize,
    /// CSV file for the data-driven kinds; synthesized when absent.
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default = "default_classes")]
    pub classes: usize,
    #[serde(default = "default_separation")]
    pub separation: f64,
    /// Hidden width of the two-layer net.
    #[serde(default = "default_hidden")]
    pub hidden: usize,
    /// Held-out rows appended to synthetic classification data.
    #[serde(default)]
    pub test_rows: usize,
    /// Condition number of the quadratic's diagonal curvature.
    #[serde(default = "default_cond")]
    pub cond: f64,
    #[serde(default)]
    pub standardize: bool,
    pub seed: u64,
}

fn default_noise() -> f64 {
    0.1
}
fn default_rows() -> usize {
    1000
}
fn default_classes() -> usize {
    2
}
fn default_separation() -> f64 {
    2.0
}
fn default_hidden() -> usize {
    32
}
fn default_cond() -> f64 {
    10.0
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, dimension: usize, seed: u64) -> Self {
        Self {
            kind,
            dimension,
            noise: default_noise(),
            rows: default_rows(),
            dataset: None,
            classes: default_classes(),
            separation: default_separation(),
            hidden: default_hidden(),
            test_rows: 0,
            cond: default_cond(),
            standardize: false,
            seed,
        }
    }
}

/// A constructed problem: the train objective plus optional held-out data.
#[derive(Debug, Clone)]
pub enum Problem {
    Quadratic(QuadraticProblem),
    Rosenbrock(RosenbrockProblem),
    Logistic(LogisticProblem),
    Mlp(MlpProblem),
}

/// Builds the objective described by `spec`.
///
/// Data-driven kinds load `spec.dataset` when given (I/O failures surface
/// as errors) and otherwise synthesize `rows + test_rows` points from
/// `spec.seed`, holding the tail out for test-error reporting.
pub fn make_problem(spec: &ProblemSpec) -> Result<Problem, DataError> {
    if spec.dimension == 0 || spec.rows == 0 {
        return Err(DataError::Invalid("dimension and rows must be positive".into()));
    }
    match spec.kind {
        ProblemKind::NoisyQuadratic => Ok(Problem::Quadratic(QuadraticProblem::new(spec))),
        ProblemKind::NoisyRosenbrock => Ok(Problem::Rosenbrock(RosenbrockProblem::new(spec))),
        ProblemKind::LogisticRegression | ProblemKind::Mlp2 => {
            let (train, test) = classification_data(spec)?;
            match spec.kind {
                ProblemKind::LogisticRegression => {
                    Ok(Problem::Logistic(LogisticProblem { train, test }))
                }
                _ => {
                    let x0 = mlp_init(&trainparams(&train, spec.hidden), spec.seed);
                    Ok(Problem::Mlp(MlpProblem { train, test, hidden: spec.hidden, x0 }))
                }
            }
        }
    }
}

struct MlpShape {
    d: usize,
    h: usize,
    c: usize,
}

fn trainparams(train: &Dataset, hidden: usize) -> MlpShape {
    MlpShape { d: train.num_features(), h: hidden, c: train.num_classes() }
}

fn classification_data(spec: &ProblemSpec) -> Result<(Dataset, Option<Dataset>), DataError> {
    let raw = match &spec.dataset {
        Some(path) => {
            let ds = dataset::load_csv(path)?;
            if ds.num_features() != spec.dimension {
                return Err(DataError::Invalid(format!(
                    "dataset has {} features, spec says {}",
                    ds.num_features(),
                    spec.dimension
                )));
            }
            return Ok((maybe_standardize(ds, spec.standardize), None));
        }
        None => dataset::gen_synth(
            spec.classes,
            spec.rows + spec.test_rows,
            spec.dimension,
            spec.separation,
            spec.seed,
        ),
    };
    let raw = maybe_standardize(raw, spec.standardize);
    if spec.test_rows > 0 {
        let (train, test) = raw.split_at(spec.rows);
        Ok((train, Some(test)))
    } else {
        Ok((raw, None))
    }
}

fn maybe_standardize(ds: Dataset, on: bool) -> Dataset {
    if on {
        ds.standardized().0
    } else {
        ds
    }
}

impl Problem {
    pub fn objective(&self) -> &dyn Objective {
        match self {
            Problem::Quadratic(p) => p,
            Problem::Rosenbrock(p) => p,
            Problem::Logistic(p) => p,
            Problem::Mlp(p) => p,
        }
    }

    /// Deterministic starting point for optimization runs.
    pub fn initial_point(&self) -> Vec<f64> {
        match self {
            Problem::Quadratic(p) => vec![2.0; p.dim],
            Problem::Rosenbrock(p) => {
                (0..p.dim).map(|j| if j % 2 == 0 { -1.2 } else { 1.0 }).collect()
            }
            Problem::Logistic(p) => vec![0.0; Objective::dim(p)],
            Problem::Mlp(p) => p.x0.clone(),
        }
    }

    /// Misclassification rate on the held-out set, when one exists.
    pub fn test_error(&self, x: &[f64]) -> Option<f64> {
        match self {
            Problem::Logistic(p) => p.test.as_ref().map(|ds| p.error_rate(x, ds)),
            Problem::Mlp(p) => p.test.as_ref().map(|ds| p.error_rate(x, ds)),
            _ => None,
        }
    }
}

/// Wraps an objective so every loss and gradient is multiplied by a
/// constant; used to check scale equivariance of the search.
pub struct ScaledObjective<'a> {
    pub inner: &'a dyn Objective,
    pub lambda: f64,
}

impl Objective for ScaledObjective<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn num_samples(&self) -> usize {
        self.inner.num_samples()
    }
    fn sample_loss_grad(&self, x: &[f64], index: usize, grad: &mut [f64]) -> f64 {
        let loss = self.inner.sample_loss_grad(x, index, grad);
        for g in grad.iter_mut() {
            *g *= self.lambda;
        }
        loss * self.lambda
    }
}

// ---------------------------------------------------------------------------
// noisy quadratic

/// Per-sample losses `0.5 (x - d_i)' A (x - d_i)` with anchors
/// `d_i ~ N(0, noise^2 I)` and diagonal `A`; the full-data minimizer is the
/// anchor mean.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    dim: usize,
    a_diag: Vec<f64>,
    anchors: Vec<f64>,
    rows: usize,
}

impl QuadraticProblem {
    fn new(spec: &ProblemSpec) -> Self {
        let d = spec.dimension;
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let a_diag: Vec<f64> = (0..d)
            .map(|j| {
                if d == 1 {
                    1.0
                } else {
                    1.0 + (spec.cond - 1.0) * j as f64 / (d - 1) as f64
                }
            })
            .collect();
        let anchors: Vec<f64> = (0..spec.rows * d)
            .map(|_| spec.noise * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self { dim: d, a_diag, anchors, rows: spec.rows }
    }

    /// Minimizer of the full-data objective (the anchor mean).
    pub fn full_minimizer(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        for i in 0..self.rows {
            for j in 0..self.dim {
                mean[j] += self.anchors[i * self.dim + j];
            }
        }
        for m in mean.iter_mut() {
            *m /= self.rows as f64;
        }
        mean
    }
}

impl Objective for QuadraticProblem {
    fn dim(&self) -> usize {
        self.dim
    }
    fn num_samples(&self) -> usize {
        self.rows
    }
    fn sample_loss_grad(&self, x: &[f64], index: usize, grad: &mut [f64]) -> f64 {
        let anchor = &self.anchors[index * self.dim..(index + 1) * self.dim];
        let mut loss = 0.0;
        for j in 0..self.dim {
            let r = x[j] - anchor[j];
            grad[j] = self.a_diag[j] * r;
            loss += 0.5 * self.a_diag[j] * r * r;
        }
        loss
    }
}

// ---------------------------------------------------------------------------
// noisy rosenbrock

/// Classic Rosenbrock valley plus a per-sample linear tilt `d_i' x`,
/// `d_i ~ N(0, noise^2 I)`: curved, non-convex, with gradient noise that is
/// constant in `x`.
#[derive(Debug, Clone)]
pub struct RosenbrockProblem {
    dim: usize,
    tilts: Vec<f64>,
    rows: usize,
}

impl RosenbrockProblem {
    fn new(spec: &ProblemSpec) -> Self {
        assert!(spec.dimension >= 2, "rosenbrock needs dimension >= 2");
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let tilts: Vec<f64> = (0..spec.rows * spec.dimension)
            .map(|_| spec.noise * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Self { dim: spec.dimension, tilts, rows: spec.rows }
    }
}

impl Objective for RosenbrockProblem {
    fn dim(&self) -> usize {
        self.dim
    }
    fn num_samples(&self) -> usize {
        self.rows
    }
    fn sample_loss_grad(&self, x: &[f64], index: usize, grad: &mut [f64]) -> f64 {
        let tilt = &self.tilts[index * self.dim..(index + 1) * self.dim];
        let mut loss = 0.0;
        grad.fill(0.0);
        for k in 0..self.dim - 1 {
            let a = 1.0 - x[k];
            let b = x[k + 1] - x[k] * x[k];
            loss += a * a + 100.0 * b * b;
            grad[k] += -2.0 * a - 400.0 * x[k] * b;
            grad[k + 1] += 200.0 * b;
        }
        for j in 0..self.dim {
            loss += tilt[j] * x[j];
            grad[j] += tilt[j];
        }
        loss
    }
}

// ---------------------------------------------------------------------------
// softmax helpers

fn log_sum_exp(z: &[f64]) -> f64 {
    let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    zmax + z.iter().map(|&v| (v - zmax).exp()).sum::<f64>().ln()
}

fn softmax_into(z: &mut [f64]) {
    let lse = log_sum_exp(z);
    for v in z.iter_mut() {
        *v = (*v - lse).exp();
    }
}

// ---------------------------------------------------------------------------
// logistic regression

/// Multinomial logistic regression with bias: parameters are `C` rows of
/// `D + 1` weights, loss is softmax cross-entropy.
#[derive(Debug, Clone)]
pub struct LogisticProblem {
    pub train: Dataset,
    pub test: Option<Dataset>,
}

impl LogisticProblem {
    fn logits(&self, x: &[f64], features: &[f64], out: &mut [f64]) {
        let d = self.train.num_features();
        for (c, o) in out.iter_mut().enumerate() {
            let row = &x[c * (d + 1)..(c + 1) * (d + 1)];
            let mut z = row[d]; // bias
            for j in 0..d {
                z += row[j] * features[j];
            }
            *o = z;
        }
    }

    pub fn error_rate(&self, x: &[f64], ds: &Dataset) -> f64 {
        let c = self.train.num_classes();
        let mut z = vec![0.0; c];
        let mut wrong = 0usize;
        for i in 0..ds.rows() {
            self.logits(x, ds.feature_row(i), &mut z);
            let pred = argmax(&z);
            if pred != ds.label(i) {
                wrong += 1;
            }
        }
        wrong as f64 / ds.rows() as f64
    }
}

fn argmax(z: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in z.iter().enumerate() {
        if v > z[best] {
            best = i;
        }
    }
    best
}

impl Objective for LogisticProblem {
    fn dim(&self) -> usize {
        self.train.num_classes() * (self.train.num_features() + 1)
    }
    fn num_samples(&self) -> usize {
        self.train.rows()
    }
    fn sample_loss_grad(&self, x: &[f64], index: usize, grad: &mut [f64]) -> f64 {
        let d = self.train.num_features();
        let c = self.train.num_classes();
        let features = self.train.feature_row(index);
        let label = self.train.label(index);
        let mut z = vec![0.0; c];
        self.logits(x, features, &mut z);
        let loss = log_sum_exp(&z) - z[label];
        softmax_into(&mut z);
        for ci in 0..c {
            let delta = z[ci] - if ci == label { 1.0 } else { 0.0 };
            let row = &mut grad[ci * (d + 1)..(ci + 1) * (d + 1)];
            for j in 0..d {
                row[j] = delta * features[j];
            }
            row[d] = delta;
        }
        loss
    }
}

// ---------------------------------------------------------------------------
// two-layer net

/// Two-layer network with logistic (sigmoid) hidden units and softmax
/// cross-entropy output. Parameter layout: hidden weights `H x (D + 1)`
/// followed by output weights `C x (H + 1)`; both layers carry a bias.
#[derive(Debug, Clone)]
pub struct MlpProblem {
    pub train: Dataset,
    pub test: Option<Dataset>,
    pub hidden: usize,
    x0: Vec<f64>,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn mlp_init(shape: &MlpShape, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d6c7032); // distinct stream from data synthesis
    let mut x = vec![0.0; shape.h * (shape.d + 1) + shape.c * (shape.h + 1)];
    let r1 = (6.0 / (shape.d + shape.h) as f64).sqrt();
    let r2 = (6.0 / (shape.h + shape.c) as f64).sqrt();
    for (i, v) in x.iter_mut().enumerate() {
        let r = if i < shape.h * (shape.d + 1) { r1 } else { r2 };
        *v = rng.gen_range(-r..r);
    }
    x
}

impl MlpProblem {
    fn forward(&self, x: &[f64], features: &[f64], hidden_out: &mut [f64], logits: &mut [f64]) {
        let d = self.train.num_features();
        let h = self.hidden;
        for (k, hv) in hidden_out.iter_mut().enumerate() {
            let row = &x[k * (d + 1)..(k + 1) * (d + 1)];
            let mut z = row[d];
            for j in 0..d {
                z += row[j] * features[j];
            }
            *hv = sigmoid(z);
        }
        let w2 = &x[h * (d + 1)..];
        for (c, o) in logits.iter_mut().enumerate() {
            let row = &w2[c * (h + 1)..(c + 1) * (h + 1)];
            let mut z = row[h];
            for k in 0..h {
                z += row[k] * hidden_out[k];
            }
            *o = z;
        }
    }

    pub fn error_rate(&self, x: &[f64], ds: &Dataset) -> f64 {
        let c = self.train.num_classes();
        let mut hidden = vec![0.0; self.hidden];
        let mut z = vec![0.0; c];
        let mut wrong = 0usize;
        for i in 0..ds.rows() {
            self.forward(x, ds.feature_row(i), &mut hidden, &mut z);
            if argmax(&z) != ds.label(i) {
                wrong += 1;
            }
        }
        wrong as f64 / ds.rows() as f64
    }
}

impl Objective for MlpProblem {
    fn dim(&self) -> usize {
        let d = self.train.num_features();
        let c = self.train.num_classes();
        self.hidden * (d + 1) + c * (self.hidden + 1)
    }
    fn num_samples(&self) -> usize {
        self.train.rows()
    }
    fn sample_loss_grad(&self, x: &[f64], index: usize, grad: &mut [f64]) -> f64 {
        let d = self.train.num_features();
        let h = self.hidden;
        let c = self.train.num_classes();
        let features = self.train.feature_row(index);
        let label = self.train.label(index);

        let mut hidden = vec![0.0; h];
        let mut z = vec![0.0; c];
        self.forward(x, features, &mut hidden, &mut z);
        let loss = log_sum_exp(&z) - z[label];
        softmax_into(&mut z);

        grad.fill(0.0);
        let w2_off = h * (d + 1);
        let mut delta_hidden = vec![0.0; h];
        for ci in 0..c {
            let delta2 = z[ci] - if ci == label { 1.0 } else { 0.0 };
            let grow = &mut grad[w2_off + ci * (h + 1)..w2_off + (ci + 1) * (h + 1)];
            for k in 0..h {
                grow[k] = delta2 * hidden[k];
                delta_hidden[k] += x[w2_off + ci * (h + 1) + k] * delta2;
            }
            grow[h] = delta2;
        }
        for k in 0..h {
            let delta1 = delta_hidden[k] * hidden[k] * (1.0 - hidden[k]);
            let grow = &mut grad[k * (d + 1)..(k + 1) * (d + 1)];
            for j in 0..d {
                grow[j] = delta1 * features[j];
            }
            grow[d] = delta1;
        }
        loss
    }
}
