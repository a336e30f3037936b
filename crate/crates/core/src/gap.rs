//! Duality gap of a policy/kernel pair, evaluated through two contractions:
//! the adversary's best response to `x` and the planner's best response to `y`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RmdpError};
use crate::model::{return_value, AdversarialKernel, Policy, RobustMdp, ValueVector};
use crate::uncertainty::{dot, linear_max_into};

/// Default cap on contraction sweeps per evaluation.
pub const DEFAULT_MAX_SWEEPS: usize = 100_000;

/// Result of iterating one of the two contractions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionResult {
    /// `<p0, v>` at the final iterate.
    pub value: f64,
    pub v: ValueVector,
    pub sweeps: usize,
    /// False if the sweep cap was hit first.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub worst_case_value: f64,
    pub best_response_value: f64,
    /// `worst_case_value - best_response_value`, unclamped.
    pub gap: f64,
    pub tolerance: f64,
    pub worst_case_sweeps: usize,
    pub best_response_sweeps: usize,
    /// Both contractions met their stopping rule within the sweep cap.
    pub complete: bool,
    /// The gap is below `-4 * tolerance`, which weak duality rules out.
    pub negative_flag: bool,
}

fn stop_threshold(instance: &RobustMdp, tol: f64) -> f64 {
    let lambda = instance.discount();
    tol * (1.0 - lambda) / (2.0 * lambda)
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(RmdpError::Config(format!("gap tolerance must be positive (got {tol})")))
    }
}

/// Worst-case value of `x`: fixed point of `v -> max_y F^{x,y}(v)`, scalarized by `p0`.
pub fn worst_case_value(instance: &RobustMdp, x: &Policy, tol: f64) -> Result<(f64, ValueVector)> {
    let r = worst_case_value_capped(instance, x, tol, DEFAULT_MAX_SWEEPS)?;
    Ok((r.value, r.v))
}

pub fn worst_case_value_capped(
    instance: &RobustMdp,
    x: &Policy,
    tol: f64,
    max_sweeps: usize,
) -> Result<ContractionResult> {
    check_tol(tol)?;
    check_policy(instance, x)?;
    let (ns, na) = (instance.num_states(), instance.num_actions());
    let lambda = instance.discount();
    let threshold = stop_threshold(instance, tol);
    // inner errors accumulate by at most 1 / (1 - lambda)
    let inner_tol = 0.05 * tol * (1.0 - lambda);
    let mut v = vec![0.0; ns];
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        let next: Vec<f64> = (0..ns)
            .into_par_iter()
            .map_init(
                || (vec![0.0; na * ns], vec![0.0; na * ns]),
                |(d, y), s| {
                    let xs = x.row(s);
                    for (row, &xa) in d.chunks_mut(ns).zip(xs) {
                        for (di, &vs) in row.iter_mut().zip(&v) {
                            *di = lambda * xa * vs;
                        }
                    }
                    let set = instance.state_uncertainty(s);
                    let (value, _, _) = linear_max_into(&set, d, inner_tol, y)?;
                    Ok(dot(xs, instance.state_costs(s)) + value)
                },
            )
            .collect::<Result<_>>()?;
        sweeps += 1;
        let delta = max_abs_diff(&v, &next);
        v = next;
        if delta < threshold {
            converged = true;
            break;
        }
    }
    Ok(ContractionResult {
        value: return_value(instance, &v),
        v: v.into(),
        sweeps,
        converged,
    })
}

/// Best-response value against `y`: nominal value iteration on the fixed kernel.
pub fn best_response_value(instance: &RobustMdp, y: &AdversarialKernel, tol: f64) -> Result<(f64, ValueVector)> {
    let r = best_response_value_capped(instance, y, tol, DEFAULT_MAX_SWEEPS)?;
    Ok((r.value, r.v))
}

pub fn best_response_value_capped(
    instance: &RobustMdp,
    y: &AdversarialKernel,
    tol: f64,
    max_sweeps: usize,
) -> Result<ContractionResult> {
    check_tol(tol)?;
    check_kernel(instance, y)?;
    let ns = instance.num_states();
    let lambda = instance.discount();
    let threshold = stop_threshold(instance, tol);
    let mut v = vec![0.0; ns];
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        let next: Vec<f64> = (0..ns)
            .into_par_iter()
            .map(|s| greedy_value(instance, y.block(s), s, lambda, &v).0)
            .collect();
        sweeps += 1;
        let delta = max_abs_diff(&v, &next);
        v = next;
        if delta < threshold {
            converged = true;
            break;
        }
    }
    Ok(ContractionResult {
        value: return_value(instance, &v),
        v: v.into(),
        sweeps,
        converged,
    })
}

/// `min_a (c_sa + lambda * y_sa . v)` and its smallest minimizing action.
pub(crate) fn greedy_value(instance: &RobustMdp, y_s: &[f64], s: usize, lambda: f64, v: &[f64]) -> (f64, usize) {
    let ns = v.len();
    instance
        .state_costs(s)
        .iter()
        .zip(y_s.chunks(ns))
        .map(|(&c, row)| c + lambda * dot(row, v))
        .enumerate()
        .fold((f64::INFINITY, 0), |(best, arg), (a, q)| if q < best { (q, a) } else { (best, arg) })
}

/// Greedy deterministic policy with respect to `v` under kernel `y`.
pub fn greedy_policy(instance: &RobustMdp, y: &AdversarialKernel, v: &[f64]) -> Policy {
    let (ns, na) = (instance.num_states(), instance.num_actions());
    let mut probs = vec![0.0; ns * na];
    for s in 0..ns {
        let (_, a) = greedy_value(instance, y.block(s), s, instance.discount(), v);
        probs[s * na + a] = 1.0;
    }
    Policy::from_rows_unchecked(ns, na, probs)
}

/// `max_y' R(x, y') - min_x' R(x', y)`.
pub fn duality_gap(instance: &RobustMdp, x: &Policy, y: &AdversarialKernel, tol: f64) -> Result<GapReport> {
    duality_gap_capped(instance, x, y, tol, DEFAULT_MAX_SWEEPS)
}

/// Budgeted variant: when a contraction hits `max_sweeps` the report is
/// returned with `complete = false`.
pub fn duality_gap_capped(
    instance: &RobustMdp,
    x: &Policy,
    y: &AdversarialKernel,
    tol: f64,
    max_sweeps: usize,
) -> Result<GapReport> {
    let worst = worst_case_value_capped(instance, x, tol, max_sweeps)?;
    let best = best_response_value_capped(instance, y, tol, max_sweeps)?;
    let gap = worst.value - best.value;
    Ok(GapReport {
        worst_case_value: worst.value,
        best_response_value: best.value,
        gap,
        tolerance: tol,
        worst_case_sweeps: worst.sweeps,
        best_response_sweeps: best.sweeps,
        complete: worst.converged && best.converged,
        negative_flag: gap < -4.0 * tol,
    })
}

fn check_policy(instance: &RobustMdp, x: &Policy) -> Result<()> {
    if x.num_states() != instance.num_states() || x.num_actions() != instance.num_actions() {
        return Err(RmdpError::Dimension("policy shape does not match instance".into()));
    }
    Ok(())
}

fn check_kernel(instance: &RobustMdp, y: &AdversarialKernel) -> Result<()> {
    if y.num_states() != instance.num_states() || y.num_actions() != instance.num_actions() {
        return Err(RmdpError::Dimension("kernel shape does not match instance".into()));
    }
    Ok(())
}

pub(crate) fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
