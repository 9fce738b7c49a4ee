//! Outer stochastic-gradient loop.
//!
//! Each outer step draws a minibatch, estimates the loss/gradient noise
//! within that batch, projects onto the descent direction and hands control
//! to the line search; inner evaluations re-draw batches at the proposed
//! step lengths. The batch statistics of the accepted node are inherited by
//! the next search, so a search only pays for the evaluations it proposes.
//! Fixed and `alpha0 / i` decayed SGD run through the same loop as
//! baselines.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::controller::{self, Decision, SearchConfig, StepSizeRule, DEFAULT_BUDGET};
use crate::util::CompensatedSum;
use crate::wolfe::WolfeParams;

/// Stochastic objective interface: per-sample loss and gradient at `x`.
pub trait Objective {
    fn dim(&self) -> usize;
    fn num_samples(&self) -> usize;
    /// Evaluates sample `index` at `x`, writing the gradient into `grad`
    /// (length `dim()`) and returning the loss.
    fn sample_loss_grad(&self, x: &[f64], index: usize, grad: &mut [f64]) -> f64;
}

/// One-pass minibatch statistics: first and second moments of the loss and
/// of every gradient coordinate.
#[derive(Debug, Clone)]
pub struct BatchStats {
    pub loss_mean: f64,
    pub loss_sq_mean: f64,
    pub grad_mean: Vec<f64>,
    pub grad_sq_mean: Vec<f64>,
    pub m: usize,
}

/// Accumulates the four statistics in one pass over the batch, with
/// compensated summation in a fixed reduction order.
pub fn batch_stats(objective: &dyn Objective, x: &[f64], batch: &[usize]) -> BatchStats {
    assert!(!batch.is_empty(), "batch must not be empty");
    let d = objective.dim();
    let mut loss = CompensatedSum::new();
    let mut loss_sq = CompensatedSum::new();
    let mut grad = vec![CompensatedSum::new(); d];
    let mut grad_sq = vec![CompensatedSum::new(); d];
    let mut g = vec![0.0; d];
    for &idx in batch {
        let l = objective.sample_loss_grad(x, idx, &mut g);
        loss.add(l);
        loss_sq.add(l * l);
        for j in 0..d {
            grad[j].add(g[j]);
            grad_sq[j].add(g[j] * g[j]);
        }
    }
    let m = batch.len() as f64;
    BatchStats {
        loss_mean: loss.value() / m,
        loss_sq_mean: loss_sq.value() / m,
        grad_mean: grad.iter().map(|a| a.value() / m).collect(),
        grad_sq_mean: grad_sq.iter().map(|a| a.value() / m).collect(),
        m: batch.len(),
    }
}

/// Variance of the batch-mean loss and of the batch-mean projected
/// gradient, from within-batch scatter. Per-coordinate gradient variances
/// assume independent noise across coordinates and are contracted with the
/// squared direction.
pub fn noise_estimates(stats: &BatchStats, direction: &[f64]) -> (f64, f64) {
    assert!(stats.m >= 2, "variance estimation needs at least two samples");
    let denom = (stats.m - 1) as f64;
    let var_f = ((stats.loss_sq_mean - stats.loss_mean * stats.loss_mean) / denom).max(0.0);
    let mut var_df = 0.0;
    for (j, &s) in direction.iter().enumerate() {
        let per_dim =
            ((stats.grad_sq_mean[j] - stats.grad_mean[j] * stats.grad_mean[j]) / denom).max(0.0);
        var_df += s * s * per_dim;
    }
    (var_f, var_df)
}

/// Optimizer variants the driver can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "linesearch")]
    LineSearch,
    #[serde(rename = "sgd-fixed")]
    SgdFixed,
    #[serde(rename = "sgd-decay")]
    SgdDecay,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::LineSearch => "linesearch",
            Mode::SgdFixed => "sgd-fixed",
            Mode::SgdDecay => "sgd-decay",
        }
    }
}

/// Driver settings. One of `num_steps` / `num_epochs` must be set; epochs
/// are converted into a batch-evaluation budget of `epochs * (M / m)` so
/// that all modes touch the same amount of data.
#[derive(Debug, Clone)]
pub struct DriverConfig {
    pub mode: Mode,
    pub alpha0: f64,
    pub batch_size: usize,
    pub num_steps: Option<usize>,
    pub num_epochs: Option<usize>,
    pub seed: u64,
    pub budget: usize,
    pub wolfe: WolfeParams,
    /// Reuse the search-start batch for every inner evaluation of that
    /// search. Test hook; production searches re-draw per evaluation.
    pub fixed_batch_per_search: bool,
}

impl DriverConfig {
    pub fn new(mode: Mode, alpha0: f64, batch_size: usize, seed: u64) -> Self {
        Self {
            mode,
            alpha0,
            batch_size,
            num_steps: None,
            num_epochs: None,
            seed,
            budget: DEFAULT_BUDGET,
            wolfe: WolfeParams::default(),
            fixed_batch_per_search: false,
        }
    }

    fn validate(&self, _objective: &dyn Objective) -> Result<(), RunError> {
        if !(self.alpha0 > 0.0) {
            return Err(RunError::InvalidConfig("alpha0 must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(RunError::InvalidConfig("batch_size must be at least 1".into()));
        }
        if self.mode == Mode::LineSearch && self.batch_size < 2 {
            return Err(RunError::InvalidConfig(
                "line-search mode needs batch_size >= 2 for noise estimation".into(),
            ));
        }
        if self.num_steps.is_none() && self.num_epochs.is_none() {
            return Err(RunError::InvalidConfig(
                "one of num_steps or num_epochs must be set".into(),
            ));
        }
        if self.budget == 0 {
            return Err(RunError::InvalidConfig("budget must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid run configuration: {0}")]
    InvalidConfig(String),
}

/// One row per outer step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    /// Raw batch loss at the accepted node (line search) or at the step's
    /// start (baselines).
    pub loss: f64,
    pub t_accepted: f64,
    /// Effective learning rate of the step: `t* * alpha0` for the line
    /// search, the schedule value for baselines.
    pub step_size: f64,
    /// Inner evaluations spent by the search; 1 for baselines.
    pub evals: usize,
    /// Raw noise standard deviations measured at the search start.
    pub sigma_f: f64,
    pub sigma_df: f64,
    /// Wolfe probability at the accepted node; 1 for baseline steps, which
    /// are accepted unconditionally.
    pub p_wolfe: f64,
    /// Budget-forced acceptance, or a skipped search on a non-descent
    /// direction.
    pub forced: bool,
}

/// Per-step records of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
}

/// Proposal history of one line search, for equivariance checks.
#[derive(Debug, Clone)]
pub struct SearchDetail {
    pub proposals: Vec<f64>,
    pub t_accepted: f64,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trace: RunTrace,
    pub searches: Vec<SearchDetail>,
    pub final_x: Vec<f64>,
    /// Every batch evaluation, including search-start draws.
    pub total_evals: usize,
    pub wall_time: Duration,
}

fn draw_batch(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<usize> {
    (0..m).map(|_| rng.gen_range(0..n)).collect()
}

/// Runs the configured optimizer from the objective's initial point.
pub fn run(objective: &dyn Objective, x0: &[f64], config: &DriverConfig) -> Result<RunResult, RunError> {
    config.validate(objective)?;
    assert_eq!(x0.len(), objective.dim());
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = objective.num_samples();
    let m = config.batch_size;
    let max_steps = config.num_steps.unwrap_or(usize::MAX);
    let max_evals = config.num_epochs.map(|e| e * (n / m).max(1)).unwrap_or(usize::MAX);

    let mut x = x0.to_vec();
    let mut trace = RunTrace::default();
    let mut searches = Vec::new();
    let mut total_evals = 0usize;

    match config.mode {
        Mode::SgdFixed | Mode::SgdDecay => {
            let mut step = 0usize;
            while step < max_steps && total_evals < max_evals {
                step += 1;
                let batch = draw_batch(&mut rng, m, n);
                let stats = batch_stats(objective, &x, &batch);
                total_evals += 1;
                let alpha = match config.mode {
                    Mode::SgdFixed => config.alpha0,
                    _ => config.alpha0 / step as f64,
                };
                let (sigma_f, sigma_df) = if m >= 2 {
                    let dir: Vec<f64> = stats.grad_mean.iter().map(|g| -alpha * g).collect();
                    let (vf, vdf) = noise_estimates(&stats, &dir);
                    (vf.sqrt(), vdf.sqrt())
                } else {
                    (0.0, 0.0)
                };
                for (xi, gi) in x.iter_mut().zip(&stats.grad_mean) {
                    *xi -= alpha * gi;
                }
                trace.rows.push(TraceRow {
                    step,
                    loss: stats.loss_mean,
                    t_accepted: 1.0,
                    step_size: alpha,
                    evals: 1,
                    sigma_f,
                    sigma_df,
                    p_wolfe: 1.0,
                    forced: false,
                });
            }
        }
        Mode::LineSearch => {
            let rule = StepSizeRule::anchored_at(config.alpha0);
            let mut alpha = config.alpha0;
            // Batch statistics (and the indices that produced them) valid at
            // the current x, inherited from the accepted node when possible.
            let mut pending: Option<(BatchStats, Vec<usize>)> = None;
            let mut step = 0usize;
            while step < max_steps && total_evals < max_evals {
                step += 1;
                let (stats, start_batch) = match pending.take() {
                    Some(sb) => sb,
                    None => {
                        let batch = draw_batch(&mut rng, m, n);
                        let stats = batch_stats(objective, &x, &batch);
                        total_evals += 1;
                        (stats, batch)
                    }
                };

                let direction: Vec<f64> = stats.grad_mean.iter().map(|g| -alpha * g).collect();
                let f0 = stats.loss_mean;
                let df0: f64 = direction.iter().zip(&stats.grad_mean).map(|(s, g)| s * g).sum();
                let (var_f, var_df) = noise_estimates(&stats, &direction);

                if !(df0 < 0.0) || !df0.is_finite() {
                    // Degenerate direction (zero or non-finite gradient):
                    // take the unit step along it and move on.
                    for (xi, si) in x.iter_mut().zip(&direction) {
                        *xi += si;
                    }
                    trace.rows.push(TraceRow {
                        step,
                        loss: f0,
                        t_accepted: 1.0,
                        step_size: alpha,
                        evals: 0,
                        sigma_f: var_f.sqrt(),
                        sigma_df: var_df.sqrt(),
                        p_wolfe: 0.0,
                        forced: true,
                    });
                    continue;
                }

                let mut search_cfg = SearchConfig::new(alpha, rule);
                search_cfg.budget = config.budget;
                search_cfg.wolfe = config.wolfe;
                let mut state =
                    controller::begin(f0, df0, var_f.sqrt(), var_df.sqrt(), search_cfg)
                        .expect("descent direction checked above");

                let mut node_stats: Vec<(f64, BatchStats, Vec<usize>)> = Vec::new();
                let mut x_trial = vec![0.0; x.len()];
                let outcome = loop {
                    let t = state.pending_proposal();
                    for (j, xt) in x_trial.iter_mut().enumerate() {
                        *xt = x[j] + t * direction[j];
                    }
                    let batch = if config.fixed_batch_per_search {
                        start_batch.clone()
                    } else {
                        draw_batch(&mut rng, m, n)
                    };
                    let trial_stats = batch_stats(objective, &x_trial, &batch);
                    total_evals += 1;
                    let y = trial_stats.loss_mean;
                    let dy: f64 =
                        direction.iter().zip(&trial_stats.grad_mean).map(|(s, g)| s * g).sum();
                    node_stats.push((t, trial_stats, batch));
                    match state.step(t, y, dy) {
                        Decision::Evaluate(_) => continue,
                        Decision::Accept(outcome) => break outcome,
                    }
                };

                let t_acc = outcome.t_accepted;
                for (j, xi) in x.iter_mut().enumerate() {
                    *xi += t_acc * direction[j];
                }
                // the accepted node's batch is valid at the new x
                if let Some((_, s, b)) = node_stats
                    .into_iter()
                    .find(|(t, _, _)| (*t - t_acc).abs() <= 1e-12 * t_acc.max(1.0))
                {
                    pending = Some((s, b));
                }
                trace.rows.push(TraceRow {
                    step,
                    loss: outcome.accepted_raw_y,
                    t_accepted: t_acc,
                    step_size: t_acc * alpha,
                    evals: outcome.evals,
                    sigma_f: var_f.sqrt(),
                    sigma_df: var_df.sqrt(),
                    p_wolfe: outcome.p_wolfe,
                    forced: outcome.forced,
                });
                searches.push(SearchDetail {
                    proposals: state.proposals().to_vec(),
                    t_accepted: t_acc,
                });
                alpha = outcome.next_alpha0;
            }
        }
    }

    Ok(RunResult { trace, searches, final_x: x, total_evals, wall_time: start.elapsed() })
}
