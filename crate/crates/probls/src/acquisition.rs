//! Candidate scoring: expected improvement weighted by Wolfe probability.

use crate::candidates::CandidateList;
use crate::gp::SurrogatePosterior;
use crate::wolfe::{self, WolfeParams};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const SQRT_2PI: f64 = 2.5066282746310002;

/// Expected amount by which a Gaussian `N(mu, var)` value undercuts the
/// incumbent `eta`. Zero variance reduces to `max(0, eta - mu)`.
pub fn expected_improvement(mu: f64, var: f64, eta: f64) -> f64 {
    debug_assert!(var >= 0.0);
    let gap = eta - mu;
    if var <= 0.0 {
        return gap.max(0.0);
    }
    let sd = var.sqrt();
    let ei = 0.5 * gap * (1.0 + libm::erf(gap / (sd * SQRT_2)))
        + sd / SQRT_2PI * (-gap * gap / (2.0 * var)).exp();
    ei.max(0.0)
}

/// Best posterior-mean value over the observed locations (including t = 0).
pub fn incumbent(posterior: &SurrogatePosterior) -> f64 {
    posterior
        .observations()
        .iter()
        .map(|o| posterior.mean(o.t))
        .fold(f64::INFINITY, f64::min)
}

/// Picks the candidate maximizing `EI * p_wolfe`; ties go to the smaller t.
pub fn select_next(
    candidates: &CandidateList,
    posterior: &SurrogatePosterior,
    params: &WolfeParams,
) -> f64 {
    let eta = incumbent(posterior);
    let mut best_t = f64::NAN;
    let mut best_score = f64::NEG_INFINITY;
    for t in candidates.iter_all() {
        let mu = posterior.mean(t);
        let var = posterior.variance(t).max(0.0);
        let score = expected_improvement(mu, var, eta) * wolfe::p_wolfe(posterior, t, params);
        if score > best_score {
            best_score = score;
            best_t = t;
        }
    }
    if !best_t.is_finite() {
        eprintln!("DIAG select_next: eta={eta}");
        for t in candidates.iter_all() {
            eprintln!(
                "DIAG   t={t} mu={} var={} p={}",
                posterior.mean(t),
                posterior.variance(t),
                wolfe::p_wolfe(posterior, t, params)
            );
        }
        eprintln!("DIAG   obs: {:?}", posterior.observations());
    }
    debug_assert!(best_t.is_finite(), "candidate list must not be empty");
    best_t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::{KernelParams, Observation, SurrogatePosterior};

    #[test]
    fn ei_at_the_incumbent_with_unit_variance() {
        let ei = expected_improvement(0.0, 1.0, 0.0);
        assert!((ei - 1.0 / SQRT_2PI).abs() < 1e-12, "got {ei}");
    }

    #[test]
    fn ei_with_vanishing_variance_is_the_positive_gap() {
        assert!((expected_improvement(-1.0, 0.0, 0.0) - 1.0).abs() < 1e-15);
        assert_eq!(expected_improvement(1.0, 0.0, 0.0), 0.0);
        // continuity: tiny variance approaches the deterministic limit
        assert!((expected_improvement(-1.0, 1e-18, 0.0) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_candidate_is_selected() {
        let post = SurrogatePosterior::new(
            KernelParams::default(),
            Observation::new(0.0, 0.0, -1.0, 0.0, 0.0),
        )
        .unwrap();
        let cands = crate::candidates::generate(&post, 1.0);
        assert_eq!(cands.points.len(), 0);
        let t = select_next(&cands, &post, &WolfeParams::default());
        assert_eq!(t, cands.extrapolation_point);
    }

    #[test]
    fn incumbent_tracks_lowest_mean() {
        let post = SurrogatePosterior::new(
            KernelParams::default(),
            Observation::new(0.0, 0.0, -1.0, 0.0, 0.0),
        )
        .unwrap()
        .update(Observation::new(1.0, -0.4, -0.2, 0.0, 0.0))
        .unwrap();
        let eta = incumbent(&post);
        assert!((eta - (-0.4)).abs() < 1e-6);
    }
}
