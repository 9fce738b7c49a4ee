//! Analytic enumeration of evaluation candidates.
//!
//! Between consecutive observations the posterior mean is a cubic, so its
//! derivative is a quadratic determined by the mean derivatives at the left
//! cell edge. Each cell therefore holds at most one interior minimum,
//! recoverable in closed form. The candidate list is those minima plus one
//! extrapolation node past the largest observed location.

use crate::gp::SurrogatePosterior;

/// Candidates closer than this to a cell edge belong to the cell on the
/// left of that edge; candidates below it are discarded outright.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Discrete candidate set for the next evaluation.
#[derive(Debug, Clone)]
pub struct CandidateList {
    /// Interior minimizers of the posterior mean, ascending.
    pub points: Vec<f64>,
    /// `t_max + alpha_ext`, always present.
    pub extrapolation_point: f64,
    /// Extrapolation step that produced the node.
    pub alpha_ext: f64,
}

impl CandidateList {
    /// Interior points followed by the extrapolation node, ascending.
    pub fn iter_all(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().copied().chain(std::iter::once(self.extrapolation_point))
    }
}

/// Locates the interior minimum of one spline cell, if any.
///
/// Inputs are the posterior mean derivatives at the left edge (right-sided),
/// so the slope inside the cell is
/// `mu'(t_left + x) = dmu + d2mu * x + 0.5 * d3mu * x^2`.
/// Returns the stationary point with positive curvature when it falls
/// inside `(t_left, t_right]` (the right edge itself is attributed to this
/// cell), clamped into the cell.
pub fn cell_minimum(dmu: f64, d2mu: f64, d3mu: f64, t_left: f64, t_right: f64) -> Option<f64> {
    debug_assert!(t_left < t_right);
    let width = t_right - t_left;

    let accept = |x: f64| -> Option<f64> {
        if !x.is_finite() || x <= BOUNDARY_TOL || x >= width + BOUNDARY_TOL {
            return None;
        }
        // curvature at the stationary point must be strictly positive
        if d2mu + d3mu * x > 0.0 {
            Some(t_left + x.min(width))
        } else {
            None
        }
    };

    if d3mu == 0.0 {
        // slope is linear; a minimum needs a downward-to-upward crossing
        if d2mu > 0.0 && dmu < 0.0 {
            return accept(-dmu / d2mu);
        }
        return None;
    }

    // roots of 0.5*d3mu*x^2 + d2mu*x + dmu, via the numerically stable form
    let disc = d2mu * d2mu - 2.0 * d3mu * dmu;
    if disc < 0.0 {
        return None;
    }
    let sqrt_disc = disc.sqrt();
    let q = -0.5 * (d2mu + d2mu.signum() * sqrt_disc);
    let x1 = 2.0 * q / d3mu;
    let x2 = if q != 0.0 { dmu / q } else { x1 };
    accept(x1).or_else(|| accept(x2))
}

/// All interior minimizers of the posterior mean over the observed cells,
/// plus the extrapolation node at `t_max + alpha_ext`.
pub fn generate(posterior: &SurrogatePosterior, alpha_ext: f64) -> CandidateList {
    debug_assert!(alpha_ext >= 1.0);
    let obs = posterior.observations();
    let mut points = Vec::new();
    for pair in obs.windows(2) {
        let (t_left, t_right) = (pair[0].t, pair[1].t);
        let (_, dmu, d2mu, d3mu) = posterior.mean_derivatives(t_left);
        if let Some(t_star) = cell_minimum(dmu, d2mu, d3mu, t_left, t_right) {
            if t_star > BOUNDARY_TOL
                && points.last().is_none_or(|&p: &f64| (t_star - p).abs() > BOUNDARY_TOL)
            {
                points.push(t_star);
            }
        }
    }
    let t_max = posterior.t_max();
    CandidateList { points, extrapolation_point: t_max + alpha_ext, alpha_ext }
}
