//! Probabilistic Wolfe conditions.
//!
//! The sufficient-decrease and curvature conditions are positivity
//! constraints on two linear projections `(a_t, b_t)` of the jointly
//! Gaussian `(f(0), f'(0), f(t), f'(t))`, so under the GP posterior each `t`
//! carries a bivariate Gaussian belief over them. The acceptance probability
//! is the corresponding quadrant probability; the strong form caps the
//! curvature variable from above instead of treating `|f'|` exactly.

use crate::bvn::{self, BvnQuery};
use crate::gp::SurrogatePosterior;

/// Variances at or below this level are treated as collapsed: the Gaussian
/// factor degenerates to a hard indicator on the mean. Sits one order of
/// magnitude above the observation-noise floor so that a posterior built
/// from floored noiseless data (residual variance a small multiple of the
/// floor) still lands on the indicator path.
pub const DEGENERATE_VAR: f64 = 1e-11;

/// Design constants of the line search acceptance rule.
#[derive(Debug, Clone, Copy)]
pub struct WolfeParams {
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Acceptance threshold on the Wolfe probability.
    pub threshold: f64,
    /// Use the capped (approximate strong) form of the curvature condition.
    pub strong: bool,
}

impl Default for WolfeParams {
    fn default() -> Self {
        Self { c1: 0.05, c2: 0.8, threshold: 0.3, strong: true }
    }
}

impl WolfeParams {
    pub fn weak() -> Self {
        Self { strong: false, ..Self::default() }
    }
}

/// Bivariate Gaussian belief over the Wolfe variables at one location.
#[derive(Debug, Clone, Copy)]
pub struct WolfeBelief {
    pub m_a: f64,
    pub m_b: f64,
    pub c_aa: f64,
    pub c_bb: f64,
    pub c_ab: f64,
    pub rho: f64,
    /// Upper cap on `b` for the strong form; `None` under the weak form.
    pub b_bar: Option<f64>,
    /// Acceptance probability; `None` until evaluated.
    pub p_wolfe: Option<f64>,
}

/// Assembles the belief moments at `t > 0` from posterior queries.
pub fn wolfe_moments(posterior: &SurrogatePosterior, t: f64, params: &WolfeParams) -> WolfeBelief {
    debug_assert!(t > 0.0);
    let (mu0, dmu0, _, _) = posterior.mean_derivatives(0.0);
    let (mu_t, dmu_t, _, _) = posterior.mean_derivatives(t);
    let c1t = params.c1 * t;

    let m_a = mu0 - mu_t + c1t * dmu0;
    let m_b = dmu_t - params.c2 * dmu0;

    let v00 = posterior.covariance(0, 0, 0.0, 0.0);
    let vd0d0 = posterior.covariance(1, 1, 0.0, 0.0);
    let v0d0 = posterior.covariance(0, 1, 0.0, 0.0);
    let v0t = posterior.covariance(0, 0, 0.0, t);
    let vd0_t = posterior.covariance(1, 0, 0.0, t);
    let v0_dt = posterior.covariance(0, 1, 0.0, t);
    let vd0_dt = posterior.covariance(1, 1, 0.0, t);
    let vtt = posterior.covariance(0, 0, t, t);
    let vt_dt = posterior.covariance(0, 1, t, t);
    let vdt_dt = posterior.covariance(1, 1, t, t);

    let c_aa =
        (v00 + c1t * c1t * vd0d0 + vtt + 2.0 * (c1t * (v0d0 - vd0_t) - v0t)).max(0.0);
    let c_bb = (params.c2 * params.c2 * vd0d0 - 2.0 * params.c2 * vd0_dt + vdt_dt).max(0.0);
    let c_ab = -params.c2 * (v0d0 + c1t * vd0d0) + params.c2 * vd0_t + v0_dt
        + c1t * vd0_dt
        - vt_dt;

    let denom = (c_aa * c_bb).sqrt();
    let rho = if denom > 0.0 { (c_ab / denom).clamp(-1.0, 1.0) } else { 0.0 };

    let b_bar = params
        .strong
        .then(|| 2.0 * params.c2 * (dmu0.abs() + 2.0 * vd0d0.max(0.0).sqrt()));

    WolfeBelief { m_a, m_b, c_aa, c_bb, c_ab, rho, b_bar, p_wolfe: None }
}

/// Probability that both Wolfe variables are admissible under `belief`.
///
/// Collapsed variances contribute hard indicators on the corresponding
/// mean, matching the zero-variance limit of the Gaussian.
pub fn belief_probability(belief: &WolfeBelief, _params: &WolfeParams) -> f64 {
    let a_degenerate = belief.c_aa <= DEGENERATE_VAR;
    let b_degenerate = belief.c_bb <= DEGENERATE_VAR;
    let b_cap = belief.b_bar.unwrap_or(f64::INFINITY);

    let a_indicator = belief.m_a >= 0.0;
    let b_indicator = belief.m_b >= 0.0 && belief.m_b <= b_cap;

    match (a_degenerate, b_degenerate) {
        (true, true) => f64::from(a_indicator && b_indicator),
        (true, false) => {
            if !a_indicator {
                return 0.0;
            }
            let sb = belief.c_bb.sqrt();
            let lo = -belief.m_b / sb;
            let hi = if b_cap.is_finite() { (b_cap - belief.m_b) / sb } else { f64::INFINITY };
            ((bvn::phi(hi) - bvn::phi(lo)).max(0.0)).min(1.0)
        }
        (false, true) => {
            if !b_indicator {
                return 0.0;
            }
            bvn::phi(belief.m_a / belief.c_aa.sqrt())
        }
        (false, false) => {
            let sa = belief.c_aa.sqrt();
            let sb = belief.c_bb.sqrt();
            let rho = belief.rho.clamp(-(1.0 - 1e-12), 1.0 - 1e-12);
            bvn::bvn_prob(&BvnQuery {
                a_low: -belief.m_a / sa,
                a_high: f64::INFINITY,
                b_low: -belief.m_b / sb,
                b_high: if b_cap.is_finite() { (b_cap - belief.m_b) / sb } else { f64::INFINITY },
                rho,
            })
        }
    }
}

/// Belief at `t` with the acceptance probability filled in.
pub fn wolfe_belief(posterior: &SurrogatePosterior, t: f64, params: &WolfeParams) -> WolfeBelief {
    let mut belief = wolfe_moments(posterior, t, params);
    belief.p_wolfe = Some(belief_probability(&belief, params));
    belief
}

/// Probability that the Wolfe conditions hold at `t`.
pub fn p_wolfe(posterior: &SurrogatePosterior, t: f64, params: &WolfeParams) -> f64 {
    let belief = wolfe_moments(posterior, t, params);
    belief_probability(&belief, params)
}

/// Among the evaluated nodes, returns the one with the lowest posterior
/// mean whose Wolfe probability clears the threshold.
pub fn accept(
    observed_ts: &[f64],
    posterior: &SurrogatePosterior,
    params: &WolfeParams,
) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for &t in observed_ts {
        debug_assert!(t > 0.0);
        if p_wolfe(posterior, t, params) > params.threshold {
            let mu = posterior.mean(t);
            if best.is_none_or(|(_, best_mu)| mu < best_mu) {
                best = Some((t, mu));
            }
        }
    }
    best.map(|(t, _)| t)
}
