//! One line search end to end.
//!
//! The controller standardizes the raw objective into a frame where
//! `y(0) = 0` and `y'(0) = -1` (which also fixes the prior scale at 1),
//! then loops evaluate -> update -> check-accept -> select-next until a node
//! clears the Wolfe threshold or the evaluation budget runs out. The
//! accepted step is handed back in raw units together with the propagated
//! scale for the next search.

use crate::acquisition;
use crate::candidates::{self, BOUNDARY_TOL};
use crate::gp::{KernelParams, Observation, SurrogatePosterior};
use crate::wolfe::{self, WolfeParams};

/// Default number of inner evaluations a search may spend.
pub const DEFAULT_BUDGET: usize = 7;

/// Growth factor and clamp bounds for step-scale propagation.
#[derive(Debug, Clone, Copy)]
pub struct StepSizeRule {
    pub growth: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
}

impl StepSizeRule {
    /// Clamp bounds anchored at the run's initial step scale.
    pub fn anchored_at(alpha_init: f64) -> Self {
        Self { growth: 1.3, alpha_min: 1e-10 * alpha_init, alpha_max: 1e10 * alpha_init }
    }

    /// Next search's step scale from the accepted step.
    pub fn propagate(&self, t_accepted: f64, alpha0_prev: f64) -> f64 {
        (self.growth * t_accepted * alpha0_prev).clamp(self.alpha_min, self.alpha_max)
    }
}

/// Scale from the accepted step of a finished search, clamped by `rule`.
pub fn propagate(outcome: &SearchOutcome, alpha0_prev: f64, rule: &StepSizeRule) -> f64 {
    rule.propagate(outcome.t_accepted, alpha0_prev)
}

/// Per-search settings supplied by the driver.
#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub wolfe: WolfeParams,
    pub budget: usize,
    /// Step scale this search was started with; used to fill
    /// `SearchOutcome::next_alpha0`.
    pub alpha0_prev: f64,
    pub rule: StepSizeRule,
}

impl SearchConfig {
    pub fn new(alpha0_prev: f64, rule: StepSizeRule) -> Self {
        Self { wolfe: WolfeParams::default(), budget: DEFAULT_BUDGET, alpha0_prev, rule }
    }
}

/// Standardized coordinate frame of one search.
#[derive(Debug, Clone, Copy)]
pub struct SearchFrame {
    pub f0_raw: f64,
    pub df0_raw: f64,
    /// `|df0_raw|`; divides values, derivatives and noise levels.
    pub scale: f64,
    pub sigma_f_scaled: f64,
    pub sigma_df_scaled: f64,
}

/// Result of a finished search, in a mix of scaled (`t`) and raw units.
#[derive(Debug, Clone, Copy)]
pub struct SearchOutcome {
    pub t_accepted: f64,
    pub accepted_raw_y: f64,
    pub accepted_raw_dy: f64,
    pub evals: usize,
    /// Set when the budget ran out (or the surrogate degenerated) and the
    /// best observed node was taken instead of a Wolfe-qualified one.
    pub forced: bool,
    /// Wolfe probability at the accepted node.
    pub p_wolfe: f64,
    /// Propagated step scale for the next search.
    pub next_alpha0: f64,
}

/// Driver-facing decision after feeding one observation.
#[derive(Debug, Clone)]
pub enum Decision {
    Accept(SearchOutcome),
    Evaluate(f64),
}

#[derive(Debug, thiserror::Error)]
pub enum BeginError {
    #[error("projected gradient at t = 0 must be negative, got {df0}")]
    NotDescentDirection { df0: f64 },
}

/// Live state of one line search.
#[derive(Debug, Clone)]
pub struct SearchState {
    frame: SearchFrame,
    config: SearchConfig,
    posterior: SurrogatePosterior,
    alpha_ext: f64,
    evals_used: usize,
    pending: f64,
    proposals: Vec<f64>,
    /// Raw observations in evaluation order: (t, y_raw, dy_raw).
    raw: Vec<(f64, f64, f64)>,
}

/// Opens a search from raw values at `t = 0`.
///
/// `sigma_f_raw` / `sigma_df_raw` are noise standard deviations of the raw
/// value and projected-gradient channels; they are divided by `|df0_raw|`
/// like everything else and held fixed for the whole search. The first
/// proposal is always `t = 1`.
pub fn begin(
    f0_raw: f64,
    df0_raw: f64,
    sigma_f_raw: f64,
    sigma_df_raw: f64,
    config: SearchConfig,
) -> Result<SearchState, BeginError> {
    if !(df0_raw < 0.0) {
        return Err(BeginError::NotDescentDirection { df0: df0_raw });
    }
    debug_assert!(sigma_f_raw >= 0.0 && sigma_df_raw >= 0.0);
    let scale = df0_raw.abs();
    let sigma_f_scaled = sigma_f_raw / scale;
    let sigma_df_scaled = sigma_df_raw / scale;
    let frame = SearchFrame { f0_raw, df0_raw, scale, sigma_f_scaled, sigma_df_scaled };

    let origin = Observation::new(
        0.0,
        0.0,
        -1.0,
        sigma_f_scaled * sigma_f_scaled,
        sigma_df_scaled * sigma_df_scaled,
    );
    let posterior = SurrogatePosterior::new(KernelParams::default(), origin)
        .expect("a single-observation posterior is always well conditioned");

    Ok(SearchState {
        frame,
        config,
        posterior,
        alpha_ext: 1.0,
        evals_used: 0,
        pending: 1.0,
        proposals: vec![1.0],
        raw: Vec::new(),
    })
}

impl SearchState {
    pub fn frame(&self) -> &SearchFrame {
        &self.frame
    }

    pub fn posterior(&self) -> &SurrogatePosterior {
        &self.posterior
    }

    /// Location the driver is expected to evaluate next.
    pub fn pending_proposal(&self) -> f64 {
        self.pending
    }

    /// Every proposal made so far, including the pending one.
    pub fn proposals(&self) -> &[f64] {
        &self.proposals
    }

    pub fn evals_used(&self) -> usize {
        self.evals_used
    }

    /// Feeds the observation made at the pending proposal and either accepts
    /// a step or asks for the next evaluation.
    pub fn step(&mut self, t: f64, y_raw: f64, dy_raw: f64) -> Decision {
        assert!(
            (t - self.pending).abs() <= 1e-9 * self.pending.max(1.0),
            "observation at t={t} does not match the pending proposal t={}",
            self.pending
        );
        self.raw.push((t, y_raw, dy_raw));
        self.evals_used += 1;

        let obs = Observation::new(
            t,
            (y_raw - self.frame.f0_raw) / self.frame.scale,
            dy_raw / self.frame.scale,
            self.frame.sigma_f_scaled * self.frame.sigma_f_scaled,
            self.frame.sigma_df_scaled * self.frame.sigma_df_scaled,
        );
        match self.posterior.update(obs) {
            Ok(p) => self.posterior = p,
            // Degenerate surrogate: stop here with the best node seen.
            Err(_) => return Decision::Accept(self.forced_outcome()),
        }

        let observed: Vec<f64> =
            self.posterior.observations().iter().skip(1).map(|o| o.t).collect();
        if let Some(t_acc) = wolfe::accept(&observed, &self.posterior, &self.config.wolfe) {
            return Decision::Accept(self.outcome_at(t_acc, false));
        }
        if self.evals_used >= self.config.budget {
            return Decision::Accept(self.forced_outcome());
        }

        let mut cands = candidates::generate(&self.posterior, self.alpha_ext);
        cands
            .points
            .retain(|&p| observed.iter().all(|&t_obs| (p - t_obs).abs() > BOUNDARY_TOL));
        let t_next = acquisition::select_next(&cands, &self.posterior, &self.config.wolfe);
        if t_next == cands.extrapolation_point {
            self.alpha_ext *= 2.0;
        }
        self.pending = t_next;
        self.proposals.push(t_next);
        Decision::Evaluate(t_next)
    }

    /// Budget exhausted or surrogate degenerate: take the evaluated node
    /// with the lowest posterior mean.
    fn forced_outcome(&self) -> SearchOutcome {
        let in_posterior: Vec<f64> =
            self.posterior.observations().iter().skip(1).map(|o| o.t).collect();
        let t_best = if in_posterior.is_empty() {
            // first update failed; fall back to the raw node just evaluated
            self.raw.last().expect("at least one evaluation happened").0
        } else {
            in_posterior
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    self.posterior.mean(a).partial_cmp(&self.posterior.mean(b)).unwrap()
                })
                .unwrap()
        };
        self.outcome_at(t_best, true)
    }

    fn outcome_at(&self, t_accepted: f64, forced: bool) -> SearchOutcome {
        let &(_, y_raw, dy_raw) = self
            .raw
            .iter()
            .find(|(t, _, _)| (*t - t_accepted).abs() <= 1e-12 * t_accepted.max(1.0))
            .expect("accepted node was evaluated");
        let in_posterior = self
            .posterior
            .observations()
            .iter()
            .any(|o| (o.t - t_accepted).abs() <= 1e-12 * t_accepted.max(1.0));
        let p_wolfe = if in_posterior {
            wolfe::p_wolfe(&self.posterior, t_accepted, &self.config.wolfe)
        } else {
            0.0
        };
        SearchOutcome {
            t_accepted,
            accepted_raw_y: y_raw,
            accepted_raw_dy: dy_raw,
            evals: self.evals_used,
            forced,
            p_wolfe,
            next_alpha0: self.config.rule.propagate(t_accepted, self.config.alpha0_prev),
        }
    }
}
