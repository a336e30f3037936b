//! First-order value iteration: epochs of primal-dual (Chambolle-Pock)
//! iterations on every state's saddle-point problem, followed by a value
//! update from the epoch's weighted averages.
//!
//! Epochs are Jacobi-synchronous: all states read the same `v` during an
//! epoch, so the per-state loops run in parallel.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, RmdpError};
use crate::gap::{duality_gap, GapReport};
use crate::model::{bilinear_value_unchecked, AdversarialKernel, Policy, RobustMdp, ValueVector};
use crate::prox::{prox_x, prox_y, NormPair, ProxSetup, SearchStats, DEFAULT_PROX_TOL};
use crate::report::{Method, SolveReport, StopReason, TraceRow};
use crate::uncertainty::{dot, UncertaintyKind};

/// Weight and epoch-length schedule, `w_t = t^p` and `T_l = l^q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub p: u32,
    pub q: u32,
    pub max_epochs: usize,
    /// Epochs between duality-gap evaluations.
    pub gap_check_period: usize,
    /// Target accuracy; the run stops once the gap is at most `target / 2`.
    pub target: f64,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            p: 2,
            q: 2,
            max_epochs: 100_000,
            gap_check_period: 5,
            target: 0.1,
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        if self.max_epochs == 0 || self.gap_check_period == 0 {
            return Err(RmdpError::Config("max_epochs and gap_check_period must be positive".into()));
        }
        if !(self.target > 0.0 && self.target.is_finite()) {
            return Err(RmdpError::Config(format!("target must be positive (got {})", self.target)));
        }
        Ok(())
    }

    /// `w_t = t^p` for `t >= 1`.
    pub fn weight(&self, t: u64) -> f64 {
        (t as f64).powi(self.p as i32)
    }

    /// `T_l = l^q` for `l >= 1`.
    pub fn epoch_length(&self, epoch: usize) -> u64 {
        (epoch as u64).saturating_pow(self.q)
    }
}

/// Starting iterates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitMode {
    /// Uniform rows; for KL sets the adversary is uniform on the nominal support.
    Uniform,
    /// Seeded random rows with the same support rule.
    Random { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FomViOptions {
    pub norm_pair: NormPair,
    pub schedule: Schedule,
    pub init: InitMode,
    /// Objective tolerance of each adversary prox step.
    pub prox_tol: f64,
    /// Evaluator tolerance for gap checks; defaults to `target / 100`.
    pub gap_tol: Option<f64>,
    pub max_iterations: Option<u64>,
    pub max_wall_seconds: Option<f64>,
    /// Retain every iterate (for bookkeeping checks on small instances).
    pub keep_history: bool,
}

impl Default for FomViOptions {
    fn default() -> Self {
        FomViOptions {
            norm_pair: NormPair::L2L2,
            schedule: Schedule::default(),
            init: InitMode::Uniform,
            prox_tol: DEFAULT_PROX_TOL,
            gap_tol: None,
            max_iterations: None,
            max_wall_seconds: None,
            keep_history: false,
        }
    }
}

/// Step sizes for the given norm pair, valid for every `v` with
/// `0 <= v <= r_inf / (1 - lambda)`.
///
/// In the `l1` setup with `A > S` the textbook pair violates
/// `tau * sigma * L^2 <= 1` by the factor `ln A / ln S`; both steps are then
/// shrunk by `sqrt(ln S / ln A)`.
pub fn make_step_sizes(instance: &RobustMdp, norm_pair: NormPair) -> Result<ProxSetup> {
    let lambda = instance.discount();
    let r_inf = instance.max_cost();
    if !(r_inf > 0.0) {
        return Err(RmdpError::Config("step sizes need a positive maximum cost".into()));
    }
    let s = instance.num_states() as f64;
    let a = instance.num_actions() as f64;
    let base = (1.0 - lambda) / (lambda * r_inf);
    let v_bound = r_inf / (1.0 - lambda);
    let (setup, l_k) = match norm_pair {
        NormPair::L2L2 => {
            let setup = ProxSetup {
                norm_pair,
                tau: base / (a * s).sqrt(),
                sigma: base * a.sqrt() / s.sqrt(),
                omega: 2.0 * (a * s).sqrt() / base,
                beta: 1.0,
            };
            (setup, lambda * v_bound * s.sqrt())
        }
        NormPair::L1L1 => {
            if instance.num_actions() < 2 || instance.num_states() < 2 {
                return Err(RmdpError::Config(
                    "the l1 setup needs at least two states and two actions".into(),
                ));
            }
            let ratio = (a.ln() / s.ln()).sqrt();
            let shrink = ratio.recip().min(1.0);
            let setup = ProxSetup {
                norm_pair,
                tau: base / a * ratio * shrink,
                sigma: base * a * ratio * shrink,
                omega: 2.0 * a / ratio / base,
                beta: a / 2.0,
            };
            (setup, lambda * v_bound)
        }
    };
    let product = setup.tau * setup.sigma * l_k * l_k;
    if product > 1.0 + 1e-12 {
        return Err(RmdpError::Config(format!(
            "step sizes violate tau * sigma * L^2 <= 1 (got {product})"
        )));
    }
    Ok(setup)
}

/// Scratch buffers for one state's PDA steps.
#[derive(Debug, Clone)]
pub(crate) struct Workspace {
    grad_x: Vec<f64>,
    x_new: Vec<f64>,
    g_y: Vec<f64>,
    y_new: Vec<f64>,
    scratch: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(na: usize, ns: usize) -> Self {
        Workspace {
            grad_x: vec![0.0; na],
            x_new: vec![0.0; na],
            g_y: vec![0.0; na * ns],
            y_new: vec![0.0; na * ns],
            scratch: Vec::with_capacity(na.max(ns)),
        }
    }
}

/// One primal-dual step on state `s` with payoff `K[v]`, in place.
///
/// `x <- prox_x(tau (c_s + K^T y), x)`, then
/// `y <- prox_y(sigma K (2 x_new - x), y)` (maximizing side).
pub fn pda_step(
    instance: &RobustMdp,
    s: usize,
    setup: &ProxSetup,
    v: &[f64],
    x_s: &mut [f64],
    y_s: &mut [f64],
    tol: f64,
) -> Result<SearchStats> {
    let (ns, na) = (instance.num_states(), instance.num_actions());
    if x_s.len() != na || y_s.len() != na * ns || v.len() != ns {
        return Err(RmdpError::Dimension("pda_step buffers do not match the instance".into()));
    }
    let mut ws = Workspace::new(na, ns);
    pda_step_ws(instance, s, setup, v, x_s, y_s, tol, &mut ws)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn pda_step_ws(
    instance: &RobustMdp,
    s: usize,
    setup: &ProxSetup,
    v: &[f64],
    x_s: &mut [f64],
    y_s: &mut [f64],
    tol: f64,
    ws: &mut Workspace,
) -> Result<SearchStats> {
    let ns = v.len();
    let lambda = instance.discount();
    for ((gx, &c), row) in ws.grad_x.iter_mut().zip(instance.state_costs(s)).zip(y_s.chunks(ns)) {
        *gx = c + lambda * dot(row, v);
    }
    prox_x(setup.norm_pair, x_s, &ws.grad_x, setup.tau, &mut ws.x_new, &mut ws.scratch);
    for ((row, &xn), &xo) in ws.g_y.chunks_mut(ns).zip(&ws.x_new).zip(x_s.iter()) {
        let scale = -lambda * (2.0 * xn - xo);
        for (g, &vs) in row.iter_mut().zip(v) {
            *g = scale * vs;
        }
    }
    let set = instance.state_uncertainty(s);
    let stats = prox_y(setup.norm_pair, &set, y_s, &ws.g_y, setup.sigma, setup.beta, tol, &mut ws.y_new)?;
    x_s.copy_from_slice(&ws.x_new);
    y_s.copy_from_slice(&ws.y_new);
    Ok(stats)
}

#[derive(Debug, Clone)]
struct StateIterates {
    x: Vec<f64>,
    y: Vec<f64>,
    x_avg: Vec<f64>,
    y_avg: Vec<f64>,
    x_epoch: Vec<f64>,
    y_epoch: Vec<f64>,
    evaluations: u64,
    history: Option<Vec<(Vec<f64>, Vec<f64>)>>,
}

/// Everything FOM-VI carries between epochs.
#[derive(Debug, Clone)]
pub struct FomViState {
    states: Vec<StateIterates>,
    v: ValueVector,
    epoch: usize,
    iteration: u64,
    weight_total: f64,
    num_actions: usize,
}

/// Outcome of one epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochSummary {
    pub epoch: usize,
    pub iterations: u64,
    /// `||v_new - v_old||_inf`.
    pub residual_inf: f64,
}

impl FomViState {
    pub fn new(instance: &RobustMdp, init: InitMode, keep_history: bool) -> Self {
        let (ns, na) = (instance.num_states(), instance.num_actions());
        let kl = instance.uncertainty().kind == UncertaintyKind::KullbackLeibler;
        let mut rng = match init {
            InitMode::Uniform => None,
            InitMode::Random { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        };
        let states = (0..ns)
            .map(|s| {
                let mut x = vec![1.0 / na as f64; na];
                let mut y = vec![0.0; na * ns];
                let center = instance.nominal_block(s);
                for (yrow, crow) in y.chunks_mut(ns).zip(center.chunks(ns)) {
                    for (yi, &c) in yrow.iter_mut().zip(crow) {
                        *yi = if kl && c <= 0.0 { 0.0 } else { 1.0 };
                    }
                    if let Some(rng) = rng.as_mut() {
                        yrow.iter_mut().filter(|v| **v > 0.0).for_each(|v| *v = rng.random::<f64>() + 1e-3);
                    }
                    let t: f64 = yrow.iter().sum();
                    yrow.iter_mut().for_each(|v| *v /= t);
                }
                if let Some(rng) = rng.as_mut() {
                    x.iter_mut().for_each(|v| *v = rng.random::<f64>() + 1e-3);
                    let t: f64 = x.iter().sum();
                    x.iter_mut().for_each(|v| *v /= t);
                }
                StateIterates {
                    x_avg: x.clone(),
                    y_avg: y.clone(),
                    x,
                    y,
                    x_epoch: vec![0.0; na],
                    y_epoch: vec![0.0; na * ns],
                    evaluations: 0,
                    history: keep_history.then(Vec::new),
                }
            })
            .collect();
        FomViState {
            states,
            v: ValueVector::zeros(ns),
            epoch: 0,
            iteration: 0,
            weight_total: 0.0,
            num_actions: na,
        }
    }

    pub fn value(&self) -> &ValueVector {
        &self.v
    }

    /// Completed epochs.
    pub fn epoch(&self) -> usize {
        self.epoch
    }

    /// PDA iterations performed per state.
    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn prox_evaluations(&self) -> u64 {
        self.states.iter().map(|st| st.evaluations).sum()
    }

    /// Weighted average of all iterates so far, rows renormalized.
    pub fn average_policy(&self) -> Policy {
        let probs = self.states.iter().flat_map(|st| normalized(&st.x_avg, self.num_actions)).collect();
        Policy::from_rows_unchecked(self.states.len(), self.num_actions, probs)
    }

    pub fn average_kernel(&self) -> AdversarialKernel {
        let ns = self.states.len();
        let probs = self.states.iter().flat_map(|st| normalized(&st.y_avg, ns)).collect();
        AdversarialKernel::from_rows_unchecked(ns, self.num_actions, probs)
    }

    pub fn current_policy(&self) -> Policy {
        let probs = self.states.iter().flat_map(|st| st.x.iter().copied()).collect();
        Policy::from_rows_unchecked(self.states.len(), self.num_actions, probs)
    }

    pub fn current_kernel(&self) -> AdversarialKernel {
        let probs = self.states.iter().flat_map(|st| st.y.iter().copied()).collect();
        AdversarialKernel::from_rows_unchecked(self.states.len(), self.num_actions, probs)
    }

    /// Iterates `(x_t, y_t)` of state `s` for `t = 1, 2, ...`, if retained.
    pub fn history(&self, s: usize) -> Option<&[(Vec<f64>, Vec<f64>)]> {
        self.states.get(s).and_then(|st| st.history.as_deref())
    }

    /// Runs epoch `l = epoch + 1`: `T_l` PDA steps per state against the
    /// current `v`, then `v_s <- F^{x_l, y_l}(v)_s` with the epoch averages.
    pub fn run_epoch(
        &mut self,
        instance: &RobustMdp,
        setup: &ProxSetup,
        schedule: &Schedule,
        prox_tol: f64,
    ) -> Result<EpochSummary> {
        let (ns, na) = (instance.num_states(), instance.num_actions());
        let lambda = instance.discount();
        let epoch = self.epoch + 1;
        let len = schedule.epoch_length(epoch);
        let start = self.iteration;
        let start_total = self.weight_total;
        let v = &self.v;

        let new_v: Vec<f64> = self
            .states
            .par_iter_mut()
            .enumerate()
            .map_init(
                || Workspace::new(na, ns),
                |ws, (s, st)| -> Result<f64> {
                    st.x_epoch.iter_mut().for_each(|e| *e = 0.0);
                    st.y_epoch.iter_mut().for_each(|e| *e = 0.0);
                    let mut epoch_weight = 0.0;
                    let mut total = start_total;
                    for k in 1..=len {
                        let t = start + k;
                        let stats = pda_step_ws(instance, s, setup, v, &mut st.x, &mut st.y, prox_tol, ws)?;
                        st.evaluations += stats.evaluations as u64;
                        let w = schedule.weight(t);
                        epoch_weight += w;
                        total += w;
                        let r = w / total;
                        accumulate(&mut st.x_epoch, &mut st.x_avg, &st.x, w, r);
                        accumulate(&mut st.y_epoch, &mut st.y_avg, &st.y, w, r);
                        if let Some(h) = st.history.as_mut() {
                            h.push((st.x.clone(), st.y.clone()));
                        }
                    }
                    let x_bar: Vec<f64> = st.x_epoch.iter().map(|e| e / epoch_weight).collect();
                    let y_bar: Vec<f64> = st.y_epoch.iter().map(|e| e / epoch_weight).collect();
                    Ok(bilinear_value_unchecked(instance.state_costs(s), lambda, &x_bar, &y_bar, v))
                },
            )
            .collect::<Result<_>>()?;

        for k in 1..=len {
            self.weight_total += schedule.weight(start + k);
        }
        let residual_inf = self.v.dist_inf(&new_v);
        self.v = new_v.into();
        self.iteration += len;
        self.epoch = epoch;
        Ok(EpochSummary {
            epoch,
            iterations: self.iteration,
            residual_inf,
        })
    }
}

fn accumulate(epoch_sum: &mut [f64], avg: &mut [f64], iterate: &[f64], w: f64, r: f64) {
    for ((e, a), &z) in epoch_sum.iter_mut().zip(avg.iter_mut()).zip(iterate) {
        *e += w * z;
        *a = (1.0 - r) * *a + r * z;
    }
}

fn normalized(rows: &[f64], width: usize) -> Vec<f64> {
    let mut out = rows.to_vec();
    for row in out.chunks_mut(width) {
        row.iter_mut().for_each(|p| *p = p.max(0.0));
        let t: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= t);
    }
    out
}

/// Runs FOM-VI until the duality gap of the global averages is at most
/// `target / 2` or a budget runs out. Budget exhaustion is reported through
/// `converged = false`, not as an error.
pub fn run_fom_vi(instance: &RobustMdp, options: &FomViOptions) -> Result<SolveReport> {
    let schedule = options.schedule;
    schedule.validate()?;
    let clock = Instant::now();
    let gap_tol = options.gap_tol.unwrap_or(schedule.target / 100.0);
    let mut state = FomViState::new(instance, options.init, options.keep_history);
    let mut trace = Vec::new();

    if instance.max_cost() == 0.0 {
        // every value is zero; the first check already certifies the pair
        let report = duality_gap(instance, &state.average_policy(), &state.average_kernel(), gap_tol)?;
        trace.push(TraceRow {
            epoch: 0,
            iteration: 0,
            residual_inf: None,
            certified_gap: Some(report.gap),
            elapsed_seconds: clock.elapsed().as_secs_f64(),
        });
        return Ok(finish(&state, StopReason::Converged, Some(report), trace, clock));
    }

    let setup = make_step_sizes(instance, options.norm_pair)?;
    let mut last_gap: Option<GapReport> = None;
    let stop = loop {
        if state.epoch() >= schedule.max_epochs {
            break StopReason::MaxEpochs;
        }
        if options.max_iterations.is_some_and(|m| state.iteration() >= m) {
            break StopReason::MaxIterations;
        }
        if options.max_wall_seconds.is_some_and(|w| clock.elapsed().as_secs_f64() >= w) {
            break StopReason::WallTime;
        }
        let summary = state.run_epoch(instance, &setup, &schedule, options.prox_tol)?;
        let mut certified_gap = None;
        let mut done = false;
        if summary.epoch % schedule.gap_check_period == 0 {
            let report = duality_gap(instance, &state.average_policy(), &state.average_kernel(), gap_tol)?;
            certified_gap = Some(report.gap);
            done = report.gap <= schedule.target / 2.0;
            last_gap = Some(report);
        } else {
            last_gap = None;
        }
        trace.push(TraceRow {
            epoch: summary.epoch,
            iteration: summary.iterations,
            residual_inf: Some(summary.residual_inf),
            certified_gap,
            elapsed_seconds: clock.elapsed().as_secs_f64(),
        });
        if done {
            break StopReason::Converged;
        }
    };
    if last_gap.is_none() {
        last_gap = Some(duality_gap(instance, &state.average_policy(), &state.average_kernel(), gap_tol)?);
    }
    Ok(finish(&state, stop, last_gap, trace, clock))
}

fn finish(
    state: &FomViState,
    stop: StopReason,
    gap: Option<GapReport>,
    trace: Vec<TraceRow>,
    clock: Instant,
) -> SolveReport {
    SolveReport {
        method: Method::FomVi,
        converged: stop == StopReason::Converged,
        stop_reason: stop,
        policy: state.average_policy(),
        kernel: state.average_kernel(),
        value: state.value().clone(),
        epochs: state.epoch(),
        iterations: state.iteration(),
        prox_evaluations: state.prox_evaluations(),
        final_gap: gap,
        trace,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
    }
}
