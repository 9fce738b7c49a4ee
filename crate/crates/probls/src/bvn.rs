//! Standard normal and bivariate normal probability kernels.
//!
//! `bvn_prob` evaluates rectangle probabilities of a standard bivariate
//! normal via the Drezner-Wesolowsky scheme with Genz's modifications: a
//! Gauss-Legendre quadrature whose order grows with `|rho|`, plus a Taylor
//! expansion around `|rho| = 1`. Rectangles are assembled from four
//! upper-orthant evaluations with compensated summation.

use crate::util::compensated_total;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Correlations this close to +-1 are collapsed onto the exact degenerate
/// (perfectly correlated) reduction.
pub const RHO_DEGENERATE: f64 = 1.0 - 1e-12;

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Rectangle query against a standard bivariate normal with correlation
/// `rho`. Infinite limits are allowed.
#[derive(Debug, Clone, Copy)]
pub struct BvnQuery {
    pub a_low: f64,
    pub a_high: f64,
    pub b_low: f64,
    pub b_high: f64,
    pub rho: f64,
}

impl BvnQuery {
    /// Upper-orthant query `P(A > a_low, B > b_low)`.
    pub fn orthant(a_low: f64, b_low: f64, rho: f64) -> Self {
        Self { a_low, a_high: f64::INFINITY, b_low, b_high: f64::INFINITY, rho }
    }
}

/// `P(a_low <= A <= a_high, b_low <= B <= b_high)` for standard bivariate
/// normal `(A, B)` with correlation `query.rho`.
///
/// Panics when the limits are out of order or `|rho| > 1`.
pub fn bvn_prob(query: &BvnQuery) -> f64 {
    assert!(query.a_low <= query.a_high && query.b_low <= query.b_high, "limits out of order");
    assert!(query.rho.abs() <= 1.0, "correlation must lie in [-1, 1]");

    let p = if query.rho >= RHO_DEGENERATE {
        // B = A: intersect the two intervals.
        let lo = query.a_low.max(query.b_low);
        let hi = query.a_high.min(query.b_high);
        (phi(hi) - phi(lo)).max(0.0)
    } else if query.rho <= -RHO_DEGENERATE {
        // B = -A: the B constraint becomes -b_high <= A <= -b_low.
        let lo = query.a_low.max(-query.b_high);
        let hi = query.a_high.min(-query.b_low);
        (phi(hi) - phi(lo)).max(0.0)
    } else {
        let r = query.rho;
        compensated_total(&[
            bvn_upper(query.a_low, query.b_low, r),
            -bvn_upper(query.a_low, query.b_high, r),
            -bvn_upper(query.a_high, query.b_low, r),
            bvn_upper(query.a_high, query.b_high, r),
        ])
    };
    p.clamp(0.0, 1.0)
}

// Gauss-Legendre abscissae/weights used by Genz's BVND, selected by |rho|.
const GL6: [(f64, f64); 3] = [
    (0.1713244923791705, 0.9324695142031522),
    (0.3607615730481384, 0.6612093864662647),
    (0.4679139345726904, 0.2386191860831970),
];
const GL12: [(f64, f64); 6] = [
    (0.04717533638651177, 0.9815606342467191),
    (0.1069393259953183, 0.9041172563704750),
    (0.1600783285433464, 0.7699026741943050),
    (0.2031674267230659, 0.5873179542866171),
    (0.2334925365383547, 0.3678314989981802),
    (0.2491470458134029, 0.1252334085114692),
];
const GL20: [(f64, f64); 10] = [
    (0.01761400713915212, 0.9931285991850949),
    (0.04060142980038694, 0.9639719272779138),
    (0.06267204833410906, 0.9122344282513259),
    (0.08327674157670475, 0.8391169718222188),
    (0.1019301198172404, 0.7463319064601508),
    (0.1181945319615184, 0.6360536807265150),
    (0.1316886384491766, 0.5108670019508271),
    (0.1420961093183821, 0.3737060887154196),
    (0.1491729864726037, 0.2277858511416451),
    (0.1527533871307259, 0.07652652113349733),
];

fn quadrature(rho_abs: f64) -> &'static [(f64, f64)] {
    if rho_abs < 0.3 {
        &GL6
    } else if rho_abs < 0.75 {
        &GL12
    } else {
        &GL20
    }
}

/// Upper-orthant probability `P(X > h, Y > k)` for standard bivariate
/// normal with correlation `r`, after Genz's BVND.
fn bvn_upper(dh: f64, dk: f64, r: f64) -> f64 {
    if dh == f64::INFINITY || dk == f64::INFINITY {
        return 0.0;
    }
    if dh == f64::NEG_INFINITY {
        return if dk == f64::NEG_INFINITY { 1.0 } else { phi(-dk) };
    }
    if dk == f64::NEG_INFINITY {
        return phi(-dh);
    }
    if r == 0.0 {
        return phi(-dh) * phi(-dk);
    }

    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = 0.0;
    let quad = quadrature(r.abs());

    if r.abs() < 0.925 {
        let hs = (h * h + k * k) / 2.0;
        let asr = 0.5 * r.asin();
        for &(w, x) in quad {
            for sign in [-1.0, 1.0] {
                let sn = (asr * (sign * x + 1.0)).sin();
                bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
            }
        }
        bvn = bvn * asr / TWO_PI + phi(-h) * phi(-k);
    } else {
        if r < 0.0 {
            k = -k;
            hk = -hk;
        }
        if r.abs() < 1.0 {
            let a_sq = (1.0 - r) * (1.0 + r);
            let mut a = a_sq.sqrt();
            let b_sq = (h - k) * (h - k);
            let c = (4.0 - hk) / 8.0;
            let d = (12.0 - hk) / 16.0;
            let asr = -(b_sq / a_sq + hk) / 2.0;
            if asr > -100.0 {
                bvn = a
                    * asr.exp()
                    * (1.0 - c * (b_sq - a_sq) * (1.0 - d * b_sq / 5.0) / 3.0
                        + c * d * a_sq * a_sq / 5.0);
            }
            if -hk < 100.0 {
                let b = b_sq.sqrt();
                bvn -= (-hk / 2.0).exp()
                    * TWO_PI.sqrt()
                    * phi(-b / a)
                    * b
                    * (1.0 - c * b_sq * (1.0 - d * b_sq / 5.0) / 3.0);
            }
            a /= 2.0;
            for &(w, x) in quad {
                for sign in [-1.0, 1.0] {
                    let xs = (a * (sign * x + 1.0)).powi(2);
                    let rs = (1.0 - xs).sqrt();
                    let asr = -(b_sq / xs + hk) / 2.0;
                    if asr > -100.0 {
                        bvn += a
                            * w
                            * asr.exp()
                            * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                                - (1.0 + c * xs * (1.0 + d * xs)));
                    }
                }
            }
            bvn = -bvn / TWO_PI;
        }
        if r > 0.0 {
            bvn += phi(-h.max(k));
        } else {
            bvn = -bvn;
            if k > h {
                bvn += phi(k) - phi(h);
            }
        }
    }
    bvn.clamp(0.0, 1.0)
}
