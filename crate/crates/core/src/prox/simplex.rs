//! Proximal primitives on a single probability simplex.

use crate::error::{Result, RmdpError};

/// Floor applied to probabilities before taking logarithms.
pub const ENTROPY_FLOOR: f64 = 1e-300;

/// Euclidean projection of `z` onto the probability simplex (sort and threshold).
pub fn project_simplex_l2(z: &[f64]) -> Result<Vec<f64>> {
    if z.is_empty() {
        return Err(RmdpError::Dimension("cannot project an empty vector".into()));
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(RmdpError::numerical("project_simplex_l2", "non-finite input"));
    }
    let mut out = vec![0.0; z.len()];
    let mut scratch = Vec::with_capacity(z.len());
    project_simplex_into(z, &mut out, &mut scratch);
    Ok(out)
}

/// Allocation-free projection; `scratch` is resized as needed.
pub fn project_simplex_into(z: &[f64], out: &mut [f64], scratch: &mut Vec<f64>) {
    debug_assert_eq!(z.len(), out.len());
    let theta = simplex_threshold(z, scratch);
    for (o, &v) in out.iter_mut().zip(z) {
        *o = (v - theta).max(0.0);
    }
}

/// Threshold `theta` such that `sum_i max(z_i - theta, 0) = 1`.
pub(crate) fn simplex_threshold(z: &[f64], scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.extend_from_slice(z);
    // stable descending sort; ties share the same threshold
    scratch.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = scratch[0] - 1.0;
    for (k, &u) in scratch.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (k as f64 + 1.0);
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }
    theta
}

/// Entropic prox step `argmin_{x' in simplex} <g, x'> + KL(x', x) / step`,
/// i.e. `x'_i ∝ x_i exp(-step * g_i)`.
pub fn prox_simplex_entropy(x: &[f64], g: &[f64], step: f64) -> Result<Vec<f64>> {
    if x.len() != g.len() {
        return Err(RmdpError::Dimension(format!(
            "x has length {}, gradient has length {}",
            x.len(),
            g.len()
        )));
    }
    if x.is_empty() || x.iter().all(|&p| p <= 0.0) {
        return Err(RmdpError::InvalidInstance(
            "entropy prox needs a point with positive mass".into(),
        ));
    }
    let mut out = vec![0.0; x.len()];
    entropy_prox_into(x, g, step, &mut out);
    Ok(out)
}

pub(crate) fn entropy_prox_into(x: &[f64], g: &[f64], step: f64, out: &mut [f64]) {
    for ((o, &p), &gi) in out.iter_mut().zip(x).zip(g) {
        *o = p.max(ENTROPY_FLOOR).ln() - step * gi;
    }
    normalize_log_weights(out);
}

/// Replaces log-weights by the normalized probabilities they define.
pub(crate) fn normalize_log_weights(w: &mut [f64]) {
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in w.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in w.iter_mut() {
        *v /= total;
    }
}
