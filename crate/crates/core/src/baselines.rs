//! Robust Bellman oracle and value-iteration baselines (VI, Gauss-Seidel VI,
//! accelerated VI, Anderson VI).
//!
//! The Bellman oracle solves each state's static saddle-point problem with a
//! restarted primal-dual method and certifies the answer with an explicit
//! duality gap, so no external conic solver is needed. KL sets first try a
//! level-form solution built from per-action exponential tilts, which is
//! usually exact to rounding and otherwise warm-starts the primal-dual loop.

use std::collections::VecDeque;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RmdpError};
use crate::fomvi::{pda_step_ws, Workspace};
use crate::gap::{greedy_value, max_abs_diff};
use crate::model::{AdversarialKernel, Policy, RobustMdp, ValueVector};
use crate::prox::{NormPair, ProxSetup, DEFAULT_PROX_TOL};
use crate::report::{Method, SolveReport, StopReason, TraceRow};
use crate::uncertainty::{dot, kl_sum, linear_max_into, supported_max, tilt_row, UncertaintyKind};

/// Default PDA iteration budget of one Bellman evaluation.
pub const DEFAULT_BELLMAN_ITERS: usize = 200_000;
const CHECK_EVERY: usize = 10;
const RESTART_SUFFICIENT: f64 = 0.2;
const RESTART_NECESSARY: f64 = 0.8;
const RESTART_ARTIFICIAL: f64 = 0.36;

/// One state's robust Bellman update with its certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellmanResult {
    /// `max_y F^{x,y}(v)_s` at the returned `x`.
    pub value: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Upper bound on `max_y F^{x,y}(v)_s - min_x' F^{x',y}(v)_s`.
    pub certified_gap: f64,
    /// `min_a (c_sa + lambda y_sa . v)` at the returned `y`.
    pub lower_value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// `F(v)_s` to certified accuracy `tol`.
pub fn robust_bellman(instance: &RobustMdp, v: &[f64], s: usize, tol: f64) -> Result<BellmanResult> {
    robust_bellman_warm(instance, v, s, tol, None, DEFAULT_BELLMAN_ITERS)
}

/// Warm-started variant; `warm` is a previous `(x_s, y_s)` pair.
pub fn robust_bellman_warm(
    instance: &RobustMdp,
    v: &[f64],
    s: usize,
    tol: f64,
    warm: Option<(&[f64], &[f64])>,
    max_iters: usize,
) -> Result<BellmanResult> {
    let (ns, na) = (instance.num_states(), instance.num_actions());
    if s >= ns || v.len() != ns {
        return Err(RmdpError::Dimension(format!("state {s} / value length {} do not match the instance", v.len())));
    }
    if !(tol > 0.0) {
        return Err(RmdpError::Config(format!("Bellman tolerance must be positive (got {tol})")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(RmdpError::numerical("robust_bellman", "non-finite value vector"));
    }
    let lambda = instance.discount();
    let set = instance.state_uncertainty(s);

    // Singleton adversary or zero payoff: the min over the simplex sits at a vertex.
    let v_norm2 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if set.spec.radius == 0.0 || lambda * v_norm2 == 0.0 {
        let y = set.center.to_vec();
        let (value, a) = greedy_value(instance, &y, s, lambda, v);
        let mut x = vec![0.0; na];
        x[a] = 1.0;
        return Ok(BellmanResult {
            value,
            x,
            y,
            certified_gap: 0.0,
            lower_value: value,
            converged: true,
            iterations: 0,
        });
    }

    let setup = static_setup(instance, v);
    let lin_tol = 0.1 * tol;
    let mut ws = Workspace::new(na, ns);
    let mut buf = vec![0.0; na * ns];
    let (mut x, mut y) = match warm {
        Some((wx, wy)) if wx.len() == na && wy.len() == na * ns => (wx.to_vec(), wy.to_vec()),
        _ => (vec![1.0 / na as f64; na], set.center.to_vec()),
    };
    let mut best = certify(instance, s, v, &x, &y, lin_tol, &mut buf)?;
    if set.spec.kind == UncertaintyKind::KullbackLeibler {
        let w: Vec<f64> = v.iter().map(|vi| lambda * vi).collect();
        let (kx, ky) = kl_level_solution(instance.state_costs(s), set.center, ns, set.spec.radius, &w);
        let cand = certify(instance, s, v, &kx, &ky, lin_tol, &mut buf)?;
        if cand.gap < best.gap {
            best = cand;
            (x, y) = (kx, ky);
        }
    }
    let mut best_pair = (x.clone(), y.clone());
    let mut restart_gap = best.gap;
    let mut x_sum = vec![0.0; na];
    let mut y_sum = vec![0.0; na * ns];
    let mut count = 0usize;
    let mut prev_cand_gap = f64::INFINITY;
    let mut iterations = 0;

    while best.gap > tol && iterations < max_iters {
        pda_step_ws(instance, s, &setup, v, &mut x, &mut y, DEFAULT_PROX_TOL.min(0.01 * tol), &mut ws)?;
        iterations += 1;
        count += 1;
        x_sum.iter_mut().zip(&x).for_each(|(a, b)| *a += b);
        y_sum.iter_mut().zip(&y).for_each(|(a, b)| *a += b);
        if count % CHECK_EVERY != 0 {
            continue;
        }
        let x_avg: Vec<f64> = x_sum.iter().map(|a| a / count as f64).collect();
        let y_avg: Vec<f64> = y_sum.iter().map(|a| a / count as f64).collect();
        let c_avg = certify(instance, s, v, &x_avg, &y_avg, lin_tol, &mut buf)?;
        let c_last = certify(instance, s, v, &x, &y, lin_tol, &mut buf)?;
        let (cand, cx, cy) = if c_avg.gap <= c_last.gap {
            (c_avg, x_avg, y_avg)
        } else {
            (c_last, x.clone(), y.clone())
        };
        if cand.gap < best.gap {
            best = cand;
            best_pair = (cx.clone(), cy.clone());
        }
        // adaptive restarts: enough progress, stalled progress, or a long window
        let sufficient = cand.gap <= RESTART_SUFFICIENT * restart_gap;
        let stalled = cand.gap <= RESTART_NECESSARY * restart_gap && cand.gap > prev_cand_gap;
        let long_window = count as f64 >= RESTART_ARTIFICIAL * iterations as f64;
        prev_cand_gap = cand.gap;
        if sufficient || stalled || long_window {
            x = cx;
            y = cy;
            restart_gap = cand.gap;
            prev_cand_gap = f64::INFINITY;
            x_sum.iter_mut().for_each(|a| *a = 0.0);
            y_sum.iter_mut().for_each(|a| *a = 0.0);
            count = 0;
        }
    }
    Ok(BellmanResult {
        value: best.primal,
        x: best_pair.0,
        y: best_pair.1,
        certified_gap: best.gap,
        lower_value: best.lower,
        converged: best.gap <= tol,
        iterations,
    })
}

/// Step sizes for a fixed payoff: `tau * sigma * L^2 = 1` with the actual
/// operator norm of `K[v]`.
fn static_setup(instance: &RobustMdp, v: &[f64]) -> ProxSetup {
    let lambda = instance.discount();
    let na = instance.num_actions() as f64;
    match instance.uncertainty().kind {
        UncertaintyKind::Ellipsoidal => {
            let l = lambda * v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let theta = na.sqrt().recip();
            ProxSetup {
                norm_pair: NormPair::L2L2,
                tau: theta / l,
                sigma: 1.0 / (theta * l),
                omega: 0.0,
                beta: 1.0,
            }
        }
        UncertaintyKind::KullbackLeibler => {
            let l = lambda * v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            ProxSetup {
                norm_pair: NormPair::L1L1,
                tau: 1.0 / l,
                sigma: 1.0 / l,
                omega: 0.0,
                beta: 1.0,
            }
        }
    }
}

/// Least KL budget lifting one action's expected continuation `<y, w>` to
/// `b`, as `(kl, eta, y)` with `y ∝ c exp(eta w)`. `eta` is infinite when
/// only the argmax face reaches `b`, and `kl` is infinite when nothing does.
fn min_tilt(c: &[f64], w: &[f64], b: f64) -> (f64, f64, Vec<f64>) {
    let mut y = c.to_vec();
    let mean = dot(c, w);
    if b <= mean {
        return (0.0, 0.0, y);
    }
    let top = supported_max(c, w);
    if b >= top {
        if b > top {
            return (f64::INFINITY, f64::INFINITY, y);
        }
        let mut total = 0.0;
        for ((yi, &ci), &wi) in y.iter_mut().zip(c).zip(w) {
            *yi = if ci > 0.0 && wi == top { ci } else { 0.0 };
            total += *yi;
        }
        y.iter_mut().for_each(|v| *v /= total);
        return (kl_sum(&y, c), f64::INFINITY, y);
    }
    let mut lo = 0.0;
    let mut hi = 1.0 / (top - mean);
    loop {
        tilt_row(c, w, hi, &mut y);
        if dot(&y, w) >= b || !hi.is_finite() {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        tilt_row(c, w, mid, &mut y);
        if dot(&y, w) >= b {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    tilt_row(c, w, hi, &mut y);
    (kl_sum(&y, c), hi, y)
}

/// KL sets: `max_y min_a (c_a + <y_a, w>)` in level form. The budget needed to
/// lift every action to level `t` splits into per-action tilts, so bisection
/// on `t` finds the largest affordable level. The tilt exponents are
/// proportional to the minimizing policy.
fn kl_level_solution(costs: &[f64], center: &[f64], ns: usize, radius: f64, w: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let na = costs.len();
    let rows: Vec<&[f64]> = center.chunks(ns).collect();
    let budget = |t: f64| -> (f64, Vec<f64>, Vec<f64>) {
        let mut total = 0.0;
        let mut etas = Vec::with_capacity(na);
        let mut y = Vec::with_capacity(na * ns);
        for (a, row) in rows.iter().enumerate() {
            let (kl, eta, ya) = min_tilt(row, w, t - costs[a]);
            total += kl;
            etas.push(eta);
            y.extend(ya);
        }
        (total, etas, y)
    };
    let reach: Vec<f64> = rows.iter().zip(costs).map(|(row, c)| c + supported_max(row, w)).collect();
    let (a_top, &t_top) = reach.iter().enumerate().min_by(|p, q| p.1.total_cmp(q.1)).unwrap();
    let (kl_top, _, y_top) = budget(t_top);
    if kl_top <= radius {
        let mut x = vec![0.0; na];
        x[a_top] = 1.0;
        return (x, y_top);
    }
    let mut lo = rows.iter().zip(costs).map(|(row, c)| c + dot(row, w)).fold(f64::INFINITY, f64::min);
    let mut hi = t_top;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if budget(mid).0 <= radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (_, etas, y) = budget(lo);
    let total: f64 = etas.iter().filter(|e| e.is_finite()).sum();
    let x = if total > 0.0 {
        etas.iter().map(|e| if e.is_finite() { e / total } else { 0.0 }).collect()
    } else {
        let a = (0..na).min_by(|&p, &q| (costs[p] + dot(rows[p], w)).total_cmp(&(costs[q] + dot(rows[q], w)))).unwrap();
        let mut x = vec![0.0; na];
        x[a] = 1.0;
        x
    };
    (x, y)
}

#[derive(Clone, Copy)]
struct Certificate {
    gap: f64,
    primal: f64,
    lower: f64,
}

fn certify(
    instance: &RobustMdp,
    s: usize,
    v: &[f64],
    x: &[f64],
    y: &[f64],
    lin_tol: f64,
    buf: &mut [f64],
) -> Result<Certificate> {
    let ns = v.len();
    let lambda = instance.discount();
    let mut d = vec![0.0; buf.len()];
    for (row, &xa) in d.chunks_mut(ns).zip(x) {
        for (di, &vs) in row.iter_mut().zip(v) {
            *di = lambda * xa * vs;
        }
    }
    let set = instance.state_uncertainty(s);
    let (value, upper, _) = linear_max_into(&set, &d, lin_tol, buf)?;
    let cx = dot(x, instance.state_costs(s));
    let (lower, _) = greedy_value(instance, y, s, lambda, v);
    Ok(Certificate {
        gap: (cx + upper - lower).max(0.0),
        primal: cx + value,
        lower,
    })
}

/// Options shared by the value-iteration baselines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViOptions {
    pub epsilon: f64,
    /// Bellman accuracy; defaults to `epsilon (1 - lambda) / (20 lambda)`.
    pub inner_tol: Option<f64>,
    pub max_sweeps: usize,
    pub max_wall_seconds: Option<f64>,
    /// Anderson memory `m`.
    pub memory: usize,
}

impl ViOptions {
    pub fn new(epsilon: f64) -> Self {
        ViOptions {
            epsilon,
            inner_tol: None,
            max_sweeps: 10_000,
            max_wall_seconds: None,
            memory: 5,
        }
    }
}

/// `epsilon (1 - lambda) / (2 lambda)`, the sup-norm step size at which VI stops.
pub fn stopping_threshold(epsilon: f64, discount: f64) -> f64 {
    epsilon * (1.0 - discount) / (2.0 * discount)
}

/// `(alpha, gamma) = (1 / (1 + lambda), (1 - sqrt(1 - lambda^2)) / lambda)`.
pub fn avi_step_sizes(discount: f64) -> (f64, f64) {
    (1.0 / (1.0 + discount), (1.0 - (1.0 - discount * discount).sqrt()) / discount)
}

type Pair = Option<(Vec<f64>, Vec<f64>)>;

/// Per-run state: warm-start pairs and counters.
struct Runner<'a> {
    instance: &'a RobustMdp,
    inner_tol: f64,
    threshold: f64,
    pairs: Vec<Pair>,
    clock: Instant,
    trace: Vec<TraceRow>,
    sweeps: usize,
    inner_iterations: u64,
    options: &'a ViOptions,
}

impl<'a> Runner<'a> {
    fn new(instance: &'a RobustMdp, options: &'a ViOptions) -> Result<Self> {
        if !(options.epsilon > 0.0 && options.epsilon.is_finite()) {
            return Err(RmdpError::Config(format!("epsilon must be positive (got {})", options.epsilon)));
        }
        let lambda = instance.discount();
        let inner_tol = options.inner_tol.unwrap_or(options.epsilon * (1.0 - lambda) / (20.0 * lambda));
        Ok(Runner {
            instance,
            inner_tol,
            threshold: stopping_threshold(options.epsilon, lambda),
            pairs: vec![None; instance.num_states()],
            clock: Instant::now(),
            trace: Vec::new(),
            sweeps: 0,
            inner_iterations: 0,
            options,
        })
    }

    fn bellman(&mut self, v: &[f64], s: usize) -> Result<f64> {
        let warm = self.pairs[s].as_ref().map(|(x, y)| (x.as_slice(), y.as_slice()));
        let r = robust_bellman_warm(self.instance, v, s, self.inner_tol, warm, DEFAULT_BELLMAN_ITERS)?;
        self.inner_iterations += r.iterations as u64;
        self.pairs[s] = Some((r.x, r.y));
        Ok(r.value)
    }

    /// Full Jacobi sweep `F(v)`, parallel over states.
    fn sweep(&mut self, v: &[f64]) -> Result<Vec<f64>> {
        let instance = self.instance;
        let tol = self.inner_tol;
        let results: Vec<(f64, u64)> = self
            .pairs
            .par_iter_mut()
            .enumerate()
            .map(|(s, pair)| {
                let warm = pair.as_ref().map(|(x, y)| (x.as_slice(), y.as_slice()));
                let r = robust_bellman_warm(instance, v, s, tol, warm, DEFAULT_BELLMAN_ITERS)?;
                *pair = Some((r.x, r.y));
                Ok((r.value, r.iterations as u64))
            })
            .collect::<Result<_>>()?;
        self.inner_iterations += results.iter().map(|r| r.1).sum::<u64>();
        Ok(results.into_iter().map(|r| r.0).collect())
    }

    /// Records a sweep; returns the stop reason if the run should end.
    fn record(&mut self, residual: f64) -> Option<StopReason> {
        self.sweeps += 1;
        self.trace.push(TraceRow {
            epoch: self.sweeps,
            iteration: self.sweeps as u64,
            residual_inf: Some(residual),
            certified_gap: None,
            elapsed_seconds: self.clock.elapsed().as_secs_f64(),
        });
        if residual <= self.threshold {
            Some(StopReason::Converged)
        } else if self.sweeps >= self.options.max_sweeps {
            Some(StopReason::MaxIterations)
        } else if self.options.max_wall_seconds.is_some_and(|w| self.clock.elapsed().as_secs_f64() >= w) {
            Some(StopReason::WallTime)
        } else {
            None
        }
    }

    /// Extracts the pair from one extra Bellman solve at the final `v`.
    fn finish(mut self, method: Method, v: Vec<f64>, stop: StopReason) -> Result<SolveReport> {
        self.sweep(&v)?;
        let (ns, na) = (self.instance.num_states(), self.instance.num_actions());
        let mut x = Vec::with_capacity(ns * na);
        let mut y = Vec::with_capacity(ns * na * ns);
        for (s, pair) in self.pairs.iter().enumerate() {
            match pair {
                Some((px, py)) => {
                    x.extend_from_slice(px);
                    y.extend_from_slice(py);
                }
                None => {
                    x.extend(std::iter::repeat(1.0 / na as f64).take(na));
                    y.extend_from_slice(self.instance.nominal_block(s));
                }
            }
        }
        Ok(SolveReport {
            method,
            converged: stop == StopReason::Converged,
            stop_reason: stop,
            policy: Policy::from_rows_unchecked(ns, na, x),
            kernel: AdversarialKernel::from_rows_unchecked(ns, na, y),
            value: ValueVector::from(v),
            epochs: self.sweeps,
            iterations: self.sweeps as u64,
            prox_evaluations: self.inner_iterations,
            final_gap: None,
            trace: self.trace,
            elapsed_seconds: self.clock.elapsed().as_secs_f64(),
        })
    }
}

/// Robust value iteration `v <- F(v)` from `v = 0`.
pub fn vi_robust(instance: &RobustMdp, epsilon: f64) -> Result<SolveReport> {
    vi_robust_with(instance, &ViOptions::new(epsilon))
}

pub fn vi_robust_with(instance: &RobustMdp, options: &ViOptions) -> Result<SolveReport> {
    let mut run = Runner::new(instance, options)?;
    let mut v = vec![0.0; instance.num_states()];
    loop {
        let next = run.sweep(&v)?;
        let residual = max_abs_diff(&v, &next);
        v = next;
        if let Some(stop) = run.record(residual) {
            return run.finish(Method::Vi, v, stop);
        }
    }
}

/// Gauss-Seidel VI: states updated in ascending order, in place.
pub fn gs_vi(instance: &RobustMdp, epsilon: f64) -> Result<SolveReport> {
    gs_vi_with(instance, &ViOptions::new(epsilon))
}

pub fn gs_vi_with(instance: &RobustMdp, options: &ViOptions) -> Result<SolveReport> {
    let mut run = Runner::new(instance, options)?;
    let mut v = vec![0.0; instance.num_states()];
    loop {
        let mut residual = 0.0f64;
        for s in 0..v.len() {
            let value = run.bellman(&v, s)?;
            residual = residual.max((value - v[s]).abs());
            v[s] = value;
        }
        if let Some(stop) = run.record(residual) {
            return run.finish(Method::GsVi, v, stop);
        }
    }
}

/// Accelerated VI: `h = v_t + gamma (v_t - v_{t-1})`, `v_{t+1} = h - alpha (h - F(h))`.
///
/// If `||v||_inf` exceeds `10 r_inf / (1 - lambda)` the run falls back to
/// plain VI steps for the rest of the run.
pub fn avi(instance: &RobustMdp, epsilon: f64) -> Result<SolveReport> {
    avi_with(instance, &ViOptions::new(epsilon))
}

pub fn avi_with(instance: &RobustMdp, options: &ViOptions) -> Result<SolveReport> {
    let lambda = instance.discount();
    let (alpha, gamma) = avi_step_sizes(lambda);
    let guard = 10.0 * instance.value_bound();
    let mut run = Runner::new(instance, options)?;
    let ns = instance.num_states();
    let mut v_prev = vec![0.0; ns];
    let mut v = vec![0.0; ns];
    let mut plain = false;
    loop {
        let mut next = if plain {
            run.sweep(&v)?
        } else {
            let h: Vec<f64> = v.iter().zip(&v_prev).map(|(a, b)| a + gamma * (a - b)).collect();
            let fh = run.sweep(&h)?;
            h.iter().zip(&fh).map(|(hi, fi)| hi - alpha * (hi - fi)).collect()
        };
        if !plain && next.iter().any(|x| !x.is_finite() || x.abs() > guard) {
            plain = true;
            next = run.sweep(&v)?;
        }
        let residual = max_abs_diff(&v, &next);
        v_prev = std::mem::replace(&mut v, next);
        if let Some(stop) = run.record(residual) {
            return run.finish(Method::Avi, v, stop);
        }
    }
}

/// Weights minimizing `||sum_i a_i g_i||_2` subject to `sum_i a_i = 1`, from
/// the damped normal equations. `None` when the system is singular.
pub fn anderson_weights(residuals: &[Vec<f64>], damping: f64) -> Option<Vec<f64>> {
    let k = residuals.len();
    if k == 0 {
        return None;
    }
    let gram = DMatrix::from_fn(k, k, |i, j| {
        dot(&residuals[i], &residuals[j]) + if i == j { damping } else { 0.0 }
    });
    let z = gram.lu().solve(&DVector::from_element(k, 1.0))?;
    let total: f64 = z.iter().sum();
    if !(total.is_finite() && total.abs() > f64::MIN_POSITIVE) {
        return None;
    }
    let w: Vec<f64> = z.iter().map(|zi| zi / total).collect();
    w.iter().all(|x| x.is_finite()).then_some(w)
}

/// Anderson-accelerated VI with memory `m`: `v_{t+1} = sum_i a_i F(v_{t-m+i})`.
pub fn anderson_vi(instance: &RobustMdp, epsilon: f64, memory: usize) -> Result<SolveReport> {
    let mut options = ViOptions::new(epsilon);
    options.memory = memory;
    anderson_vi_with(instance, &options)
}

pub fn anderson_vi_with(instance: &RobustMdp, options: &ViOptions) -> Result<SolveReport> {
    if options.memory == 0 {
        return Err(RmdpError::Config("Anderson memory must be at least 1".into()));
    }
    let guard = 10.0 * instance.value_bound();
    let mut run = Runner::new(instance, options)?;
    let mut v = vec![0.0; instance.num_states()];
    let mut history: VecDeque<(Vec<f64>, Vec<f64>)> = VecDeque::with_capacity(options.memory + 1);
    loop {
        let fv = run.sweep(&v)?;
        let g: Vec<f64> = fv.iter().zip(&v).map(|(f, x)| f - x).collect();
        if history.len() == options.memory + 1 {
            history.pop_front();
        }
        history.push_back((fv.clone(), g));
        let residuals: Vec<Vec<f64>> = history.iter().map(|(_, g)| g.clone()).collect();
        let mut next = match anderson_weights(&residuals, 1e-10) {
            Some(w) => {
                let mut out = vec![0.0; v.len()];
                for (wi, (f, _)) in w.iter().zip(&history) {
                    out.iter_mut().zip(f).for_each(|(o, fi)| *o += wi * fi);
                }
                out
            }
            None => fv.clone(),
        };
        if next.iter().any(|x| !x.is_finite() || x.abs() > guard) {
            next = fv;
            history.clear();
        }
        let residual = max_abs_diff(&v, &next);
        v = next;
        if let Some(stop) = run.record(residual) {
            return run.finish(Method::AndersonVi, v, stop);
        }
    }
}

/// Dispatches one of the baseline methods.
pub fn run_baseline(instance: &RobustMdp, method: Method, options: &ViOptions) -> Result<SolveReport> {
    match method {
        Method::Vi => vi_robust_with(instance, options),
        Method::GsVi => gs_vi_with(instance, options),
        Method::Avi => avi_with(instance, options),
        Method::AndersonVi => anderson_vi_with(instance, options),
        Method::FomVi => Err(RmdpError::Config("FOM-VI is not a baseline".into())),
    }
}
