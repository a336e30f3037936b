//! Adversary prox steps over an ellipsoidal set.

use super::{check_prox_shapes, entropic_quadratic_row, entropy_prox_into, project_simplex_into, search_multiplier, SearchStats, ENTROPY_FLOOR};
use crate::error::Result;
use crate::uncertainty::{dot, half_sq_dist, StateUncertainty};

/// `argmin_{y in P_s} <g, y> + ||y - y_prev||^2 / (2 sigma)` for an ellipsoidal set.
pub fn prox_y_ellipsoid_l2(
    y_prev: &[f64],
    g: &[f64],
    sigma: f64,
    set: &StateUncertainty<'_>,
    tol: f64,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; set.center.len()];
    ellipsoid_l2_into(set, y_prev, g, sigma, tol, &mut out)?;
    Ok(out)
}

/// `argmin_{y in P_s} <g, y> + (beta / sigma) sum_a KL(y_a, y_prev_a)` for an ellipsoidal set.
pub fn prox_y_ellipsoid_l1(
    y_prev: &[f64],
    g: &[f64],
    sigma: f64,
    set: &StateUncertainty<'_>,
    beta: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; set.center.len()];
    ellipsoid_l1_into(set, y_prev, g, sigma, beta, tol, &mut out)?;
    Ok(out)
}

pub(crate) fn ellipsoid_l2_into(
    set: &StateUncertainty<'_>,
    y_prev: &[f64],
    g: &[f64],
    sigma: f64,
    tol: f64,
    out: &mut [f64],
) -> Result<SearchStats> {
    check_prox_shapes(set, y_prev, g, out)?;
    let ns = set.num_next;
    let center = set.center;
    let mut z = vec![0.0; ns];
    let mut scratch = Vec::with_capacity(ns);
    search_multiplier(
        "prox_y_ellipsoid_l2",
        set.spec.radius,
        tol,
        center,
        out,
        |mu, y| {
            let scale = 1.0 / (1.0 / sigma + mu);
            for (a, ya) in y.chunks_mut(ns).enumerate() {
                let rows = a * ns..(a + 1) * ns;
                for (((zi, &yp), &c), &gi) in z.iter_mut().zip(&y_prev[rows.clone()]).zip(&center[rows.clone()]).zip(&g[rows]) {
                    *zi = scale * (yp / sigma + mu * c - gi);
                }
                project_simplex_into(&z, ya, &mut scratch);
            }
            Ok(())
        },
        |y| dot(g, y) + half_sq_dist(y, y_prev) / sigma,
        |y| half_sq_dist(y, center),
    )
}

pub(crate) fn ellipsoid_l1_into(
    set: &StateUncertainty<'_>,
    y_prev: &[f64],
    g: &[f64],
    sigma: f64,
    beta: f64,
    tol: f64,
    out: &mut [f64],
) -> Result<SearchStats> {
    check_prox_shapes(set, y_prev, g, out)?;
    let ns = set.num_next;
    let center = set.center;
    let a_coef = beta / sigma;
    let log_prev: Vec<f64> = y_prev.iter().map(|p| p.max(ENTROPY_FLOOR).ln()).collect();
    let mut r = vec![0.0; ns];
    search_multiplier(
        "prox_y_ellipsoid_l1",
        set.spec.radius,
        tol,
        center,
        out,
        |mu, y| {
            for (a, ya) in y.chunks_mut(ns).enumerate() {
                let rows = a * ns..(a + 1) * ns;
                if mu == 0.0 {
                    entropy_prox_into(&y_prev[rows.clone()], &g[rows], sigma / beta, ya);
                    continue;
                }
                for (((ri, &lp), &c), &gi) in r.iter_mut().zip(&log_prev[rows.clone()]).zip(&center[rows.clone()]).zip(&g[rows]) {
                    *ri = -gi + a_coef * lp + mu * c - a_coef;
                }
                entropic_quadratic_row(a_coef, mu, &r, None, ya)?;
            }
            Ok(())
        },
        |y| {
            let kl: f64 = y
                .iter()
                .zip(&log_prev)
                .map(|(&v, &lp)| if v > 0.0 { v * (v.ln() - lp) } else { 0.0 })
                .sum();
            dot(g, y) + a_coef * kl
        },
        |y| half_sq_dist(y, center),
    )
}
