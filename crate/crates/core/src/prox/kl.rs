//! Adversary prox steps over a KL ball. Coordinates outside the support of
//! the nominal row are frozen at zero.

use super::{check_prox_shapes, entropic_quadratic_row, normalize_log_weights, project_simplex_into, search_multiplier, SearchStats, ENTROPY_FLOOR};
use crate::error::Result;
use crate::uncertainty::{dot, half_sq_dist, kl_sum, StateUncertainty};

/// `argmin_{y in P_s} <g, y> + ||y - y_prev||^2 / (2 sigma)` for a KL set.
pub fn prox_y_kl_l2(
    y_prev: &[f64],
    g: &[f64],
    sigma: f64,
    set: &StateUncertainty<'_>,
    tol: f64,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; set.center.len()];
    kl_l2_into(set, y_prev, g, sigma, tol, &mut out)?;
    Ok(out)
}

/// `argmin_{y in P_s} <g, y> + (beta / sigma) sum_a KL(y_a, y_prev_a)` for a KL set.
pub fn prox_y_kl_l1(
    y_prev: &[f64],
    g: &[f64],
    sigma: f64,
    set: &StateUncertainty<'_>,
    beta: f64,
    tol: f64,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; set.center.len()];
    kl_l1_into(set, y_prev, g, sigma, beta, tol, &mut out)?;
    Ok(out)
}

pub(crate) fn kl_l2_into(
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
    let log_center: Vec<f64> = center.iter().map(|c| c.max(ENTROPY_FLOOR).ln()).collect();
    let mut r = vec![0.0; ns];
    let mut z = Vec::with_capacity(ns);
    let mut proj = Vec::with_capacity(ns);
    let mut scratch = Vec::with_capacity(ns);
    search_multiplier(
        "prox_y_kl_l2",
        set.spec.radius,
        tol,
        center,
        out,
        |mu, y| {
            for (a, ya) in y.chunks_mut(ns).enumerate() {
                let rows = a * ns..(a + 1) * ns;
                let ca = &center[rows.clone()];
                if mu == 0.0 {
                    // Euclidean projection restricted to the support
                    z.clear();
                    for ((&c, &yp), &gi) in ca.iter().zip(&y_prev[rows.clone()]).zip(&g[rows.clone()]) {
                        if c > 0.0 {
                            z.push(yp - sigma * gi);
                        }
                    }
                    proj.resize(z.len(), 0.0);
                    project_simplex_into(&z, &mut proj, &mut scratch);
                    let mut k = 0;
                    for (yi, &c) in ya.iter_mut().zip(ca) {
                        if c > 0.0 {
                            *yi = proj[k];
                            k += 1;
                        } else {
                            *yi = 0.0;
                        }
                    }
                    continue;
                }
                for (((ri, &yp), &lc), &gi) in r.iter_mut().zip(&y_prev[rows.clone()]).zip(&log_center[rows.clone()]).zip(&g[rows]) {
                    *ri = -gi + yp / sigma + mu * lc - mu;
                }
                entropic_quadratic_row(mu, 1.0 / sigma, &r, Some(ca), ya)?;
            }
            Ok(())
        },
        |y| dot(g, y) + half_sq_dist(y, y_prev) / sigma,
        |y| kl_sum(y, center),
    )
}

pub(crate) fn kl_l1_into(
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
    let log_prev: Vec<f64> = y_prev.iter().map(|p| p.max(ENTROPY_FLOOR).ln()).collect();
    let a_coef = beta / sigma;
    search_multiplier(
        "prox_y_kl_l1",
        set.spec.radius,
        tol,
        center,
        out,
        |mu, y| {
            // the two KL terms merge into one against a geometric mean
            let denom = beta + sigma * mu;
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = if center[i] > 0.0 {
                    (beta * log_prev[i] + sigma * mu * center[i].ln() - sigma * g[i]) / denom
                } else {
                    f64::NEG_INFINITY
                };
            }
            y.chunks_mut(ns).for_each(normalize_log_weights);
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
        |y| kl_sum(y, center),
    )
}
