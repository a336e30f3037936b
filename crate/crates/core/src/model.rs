//! Robust MDP data model and the bilinear forms every solver is built on.
//!
//! Tensors are dense and row-major: costs are `S x A`, kernels are
//! `S x A x S` with the next-state index fastest. A per-state kernel block
//! `y_s` is therefore a contiguous `A x S` slice.

use std::ops::{Deref, DerefMut};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, RmdpError};
use crate::uncertainty::{UncertaintyKind, UncertaintySpec};

/// Row-sum tolerance for probability vectors.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Above this many states `policy_value` iterates instead of factorizing.
const DENSE_SOLVE_LIMIT: usize = 2000;

/// A finite s-rectangular robust MDP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustMdp {
    num_states: usize,
    num_actions: usize,
    discount: f64,
    costs: Vec<f64>,
    nominal_kernel: Vec<f64>,
    initial_distribution: Vec<f64>,
    uncertainty: UncertaintySpec,
}

impl RobustMdp {
    pub fn new(
        num_states: usize,
        num_actions: usize,
        discount: f64,
        costs: Vec<f64>,
        nominal_kernel: Vec<f64>,
        initial_distribution: Vec<f64>,
        uncertainty: UncertaintySpec,
    ) -> Result<Self> {
        let mdp = RobustMdp {
            num_states,
            num_actions,
            discount,
            costs,
            nominal_kernel,
            initial_distribution,
            uncertainty,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    /// Checks every structural invariant; called by `new` and after deserialization.
    pub fn validate(&self) -> Result<()> {
        let (s, a) = (self.num_states, self.num_actions);
        if s == 0 || a == 0 {
            return Err(RmdpError::InvalidInstance(
                "num_states and num_actions must be positive".into(),
            ));
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return Err(RmdpError::InvalidInstance(format!(
                "discount {} outside (0, 1)",
                self.discount
            )));
        }
        check_len("costs", &self.costs, s * a)?;
        check_len("nominal_kernel", &self.nominal_kernel, s * a * s)?;
        check_len("initial_distribution", &self.initial_distribution, s)?;
        if let Some(bad) = self.costs.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(RmdpError::InvalidInstance(format!(
                "cost at flat index {bad} is negative or non-finite"
            )));
        }
        for (row_idx, row) in self.nominal_kernel.chunks(s).enumerate() {
            if !is_distribution(row, SIMPLEX_TOL) {
                return Err(RmdpError::InvalidInstance(format!(
                    "nominal kernel row (s={}, a={}) is not a distribution",
                    row_idx / a,
                    row_idx % a
                )));
            }
        }
        if !is_distribution(&self.initial_distribution, SIMPLEX_TOL) {
            return Err(RmdpError::InvalidInstance(
                "initial distribution is not a distribution".into(),
            ));
        }
        if !(self.uncertainty.radius >= 0.0 && self.uncertainty.radius.is_finite()) {
            return Err(RmdpError::InvalidInstance(format!(
                "uncertainty radius {} must be finite and non-negative",
                self.uncertainty.radius
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mdp: RobustMdp = serde_json::from_str(text)
            .map_err(|e| RmdpError::InvalidInstance(format!("malformed instance JSON: {e}")))?;
        mdp.validate()?;
        Ok(mdp)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn uncertainty(&self) -> UncertaintySpec {
        self.uncertainty
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn nominal_kernel(&self) -> &[f64] {
        &self.nominal_kernel
    }

    pub fn initial_distribution(&self) -> &[f64] {
        &self.initial_distribution
    }

    /// Costs `c_s` of every action at state `s`.
    pub fn state_costs(&self, s: usize) -> &[f64] {
        &self.costs[s * self.num_actions..(s + 1) * self.num_actions]
    }

    /// Nominal block `y0_s` (`A x S`).
    pub fn nominal_block(&self, s: usize) -> &[f64] {
        let len = self.num_actions * self.num_states;
        &self.nominal_kernel[s * len..(s + 1) * len]
    }

    /// `r_inf = max c_sa`.
    pub fn max_cost(&self) -> f64 {
        self.costs.iter().copied().fold(0.0, f64::max)
    }

    /// Upper bound `r_inf / (1 - lambda)` on any value vector reachable from zero.
    pub fn value_bound(&self) -> f64 {
        self.max_cost() / (1.0 - self.discount)
    }

    /// Same instance with a different uncertainty set.
    pub fn with_uncertainty(&self, uncertainty: UncertaintySpec) -> Self {
        RobustMdp {
            uncertainty,
            ..self.clone()
        }
    }

    /// Same instance with all costs replaced.
    pub fn with_costs(&self, costs: Vec<f64>) -> Result<Self> {
        RobustMdp::new(
            self.num_states,
            self.num_actions,
            self.discount,
            costs,
            self.nominal_kernel.clone(),
            self.initial_distribution.clone(),
            self.uncertainty,
        )
    }

    pub fn with_initial_distribution(&self, p0: Vec<f64>) -> Result<Self> {
        RobustMdp::new(
            self.num_states,
            self.num_actions,
            self.discount,
            self.costs.clone(),
            self.nominal_kernel.clone(),
            p0,
            self.uncertainty,
        )
    }

    pub fn is_kl(&self) -> bool {
        self.uncertainty.kind == UncertaintyKind::KullbackLeibler
    }
}

fn check_len(name: &str, v: &[f64], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(RmdpError::Dimension(format!(
            "{name} has length {}, expected {expected}",
            v.len()
        )));
    }
    Ok(())
}

/// Entrywise non-negative with unit sum, within `tol`.
pub fn is_distribution(row: &[f64], tol: f64) -> bool {
    let mut sum = 0.0;
    for &p in row {
        if !(p >= -tol) || !p.is_finite() {
            return false;
        }
        sum += p;
    }
    (sum - 1.0).abs() <= tol
}

/// Value vector `v`, one entry per state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueVector(Vec<f64>);

impl ValueVector {
    pub fn zeros(num_states: usize) -> Self {
        ValueVector(vec![0.0; num_states])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `max_s |self_s - other_s|`.
    pub fn dist_inf(&self, other: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

impl From<Vec<f64>> for ValueVector {
    fn from(v: Vec<f64>) -> Self {
        ValueVector(v)
    }
}

impl Deref for ValueVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for ValueVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Stationary randomized policy: one point of `Delta(A)` per state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

impl Policy {
    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        Policy {
            num_states,
            num_actions,
            probs: vec![1.0 / num_actions as f64; num_states * num_actions],
        }
    }

    /// Builds a policy from row-major `S x A` probabilities, checking every row.
    pub fn from_rows(num_states: usize, num_actions: usize, probs: Vec<f64>) -> Result<Self> {
        check_len("policy", &probs, num_states * num_actions)?;
        for (s, row) in probs.chunks(num_actions).enumerate() {
            if !is_distribution(row, 1e-9) {
                return Err(RmdpError::InvalidInstance(format!(
                    "policy row {s} is not a distribution"
                )));
            }
        }
        Ok(Policy {
            num_states,
            num_actions,
            probs,
        })
    }

    pub(crate) fn from_rows_unchecked(num_states: usize, num_actions: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), num_states * num_actions);
        Policy {
            num_states,
            num_actions,
            probs,
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn row_mut(&mut self, s: usize) -> &mut [f64] {
        &mut self.probs[s * self.num_actions..(s + 1) * self.num_actions]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }
}

/// Transition kernel chosen by the adversary; block `s` is a point of `Delta(S)^A`.
///
/// Membership in the uncertainty set is deliberately not an invariant of
/// this type; see [`crate::uncertainty::is_member`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversarialKernel {
    num_states: usize,
    num_actions: usize,
    probs: Vec<f64>,
}

impl AdversarialKernel {
    /// Every row uniform over all next states.
    pub fn uniform(num_states: usize, num_actions: usize) -> Self {
        AdversarialKernel {
            num_states,
            num_actions,
            probs: vec![1.0 / num_states as f64; num_states * num_actions * num_states],
        }
    }

    /// The nominal kernel of `instance`.
    pub fn nominal(instance: &RobustMdp) -> Self {
        AdversarialKernel {
            num_states: instance.num_states(),
            num_actions: instance.num_actions(),
            probs: instance.nominal_kernel().to_vec(),
        }
    }

    pub fn from_rows(num_states: usize, num_actions: usize, probs: Vec<f64>) -> Result<Self> {
        check_len("kernel", &probs, num_states * num_actions * num_states)?;
        for (r, row) in probs.chunks(num_states).enumerate() {
            if !is_distribution(row, 1e-9) {
                return Err(RmdpError::InvalidInstance(format!(
                    "kernel row (s={}, a={}) is not a distribution",
                    r / num_actions,
                    r % num_actions
                )));
            }
        }
        Ok(AdversarialKernel {
            num_states,
            num_actions,
            probs,
        })
    }

    pub(crate) fn from_rows_unchecked(num_states: usize, num_actions: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), num_states * num_actions * num_states);
        AdversarialKernel {
            num_states,
            num_actions,
            probs,
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn block(&self, s: usize) -> &[f64] {
        let len = self.num_actions * self.num_states;
        &self.probs[s * len..(s + 1) * len]
    }

    pub fn block_mut(&mut self, s: usize) -> &mut [f64] {
        let len = self.num_actions * self.num_states;
        &mut self.probs[s * len..(s + 1) * len]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `F^{x,y}(v)_s = sum_a x_sa (c_sa + lambda * y_sa . v)`.
pub fn bilinear_value(
    instance: &RobustMdp,
    s: usize,
    x_s: &[f64],
    y_s: &[f64],
    v: &[f64],
) -> Result<f64> {
    let (ns, na) = (instance.num_states(), instance.num_actions());
    if s >= ns {
        return Err(RmdpError::Dimension(format!("state {s} out of range {ns}")));
    }
    check_len("x_s", x_s, na)?;
    check_len("y_s", y_s, na * ns)?;
    check_len("v", v, ns)?;
    Ok(bilinear_value_unchecked(
        instance.state_costs(s),
        instance.discount(),
        x_s,
        y_s,
        v,
    ))
}

pub(crate) fn bilinear_value_unchecked(
    costs: &[f64],
    discount: f64,
    x_s: &[f64],
    y_s: &[f64],
    v: &[f64],
) -> f64 {
    let ns = v.len();
    x_s.iter()
        .zip(costs)
        .zip(y_s.chunks(ns))
        .map(|((&x, &c), row)| x * (c + discount * dot(row, v)))
        .sum()
}

/// `(K[v] x_s)[a, s'] = lambda * x_sa * v_s'`, returned as a row-major `A x S` matrix.
pub fn apply_k(discount: f64, v: &[f64], x_s: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; x_s.len() * v.len()];
    apply_k_into(discount, v, x_s, &mut out);
    out
}

pub fn apply_k_into(discount: f64, v: &[f64], x_s: &[f64], out: &mut [f64]) {
    assert_eq!(out.len(), x_s.len() * v.len(), "apply_k output length");
    for (row, &x) in out.chunks_mut(v.len()).zip(x_s) {
        let scale = discount * x;
        for (o, &vs) in row.iter_mut().zip(v) {
            *o = scale * vs;
        }
    }
}

/// `(K[v]^T y_s)[a] = lambda * y_sa . v`.
pub fn apply_k_transpose(discount: f64, v: &[f64], y_s: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() || y_s.len() % v.len() != 0 {
        return Err(RmdpError::Dimension(format!(
            "y_s length {} is not a multiple of |v| = {}",
            y_s.len(),
            v.len()
        )));
    }
    let mut out = vec![0.0; y_s.len() / v.len()];
    apply_k_transpose_into(discount, v, y_s, &mut out);
    Ok(out)
}

pub fn apply_k_transpose_into(discount: f64, v: &[f64], y_s: &[f64], out: &mut [f64]) {
    assert_eq!(y_s.len(), out.len() * v.len(), "apply_k_transpose length");
    for (o, row) in out.iter_mut().zip(y_s.chunks(v.len())) {
        *o = discount * dot(row, v);
    }
}

/// Dimension-checked variant of [`apply_k`].
pub fn apply_k_checked(discount: f64, v: &[f64], x_s: &[f64], num_actions: usize) -> Result<Vec<f64>> {
    if x_s.len() != num_actions {
        return Err(RmdpError::Dimension(format!(
            "x_s has length {}, expected {num_actions}",
            x_s.len()
        )));
    }
    Ok(apply_k(discount, v, x_s))
}

/// Exact value `v^{x,y}` of policy `x` under kernel `y`: solves `(I - lambda P) v = c_x`.
pub fn policy_value(instance: &RobustMdp, x: &Policy, y: &AdversarialKernel) -> Result<ValueVector> {
    let (ns, na) = (instance.num_states(), instance.num_actions());
    if x.num_states() != ns || x.num_actions() != na {
        return Err(RmdpError::Dimension("policy shape does not match instance".into()));
    }
    if y.num_states() != ns || y.num_actions() != na {
        return Err(RmdpError::Dimension("kernel shape does not match instance".into()));
    }
    let lambda = instance.discount();
    let mut p = vec![0.0; ns * ns];
    let mut c_x = vec![0.0; ns];
    for s in 0..ns {
        let xs = x.row(s);
        c_x[s] = dot(xs, instance.state_costs(s));
        let prow = &mut p[s * ns..(s + 1) * ns];
        for (&xa, yrow) in xs.iter().zip(y.block(s).chunks(ns)) {
            for (pp, &yy) in prow.iter_mut().zip(yrow) {
                *pp += xa * yy;
            }
        }
    }

    if ns <= DENSE_SOLVE_LIMIT {
        let m = DMatrix::from_fn(ns, ns, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            id - lambda * p[i * ns + j]
        });
        let rhs = DVector::from_vec(c_x.clone());
        if let Some(sol) = m.lu().solve(&rhs) {
            return Ok(ValueVector(sol.iter().copied().collect()));
        }
    }

    // Fixed-point iteration v <- c_x + lambda P v.
    let mut v = vec![0.0; ns];
    let mut next = vec![0.0; ns];
    for _ in 0..1_000_000 {
        for s in 0..ns {
            next[s] = c_x[s] + lambda * dot(&p[s * ns..(s + 1) * ns], &v);
        }
        let delta = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        if delta <= 1e-10 * (1.0 - lambda) {
            break;
        }
    }
    Ok(ValueVector(v))
}

/// Scalarized value `<p0, v>`.
pub fn return_value(instance: &RobustMdp, v: &[f64]) -> f64 {
    dot(instance.initial_distribution(), v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uncertainty::UncertaintySpec;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let raw: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| x / total).collect()
    }

    fn random_instance(seed: u64, ns: usize, na: usize) -> RobustMdp {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let costs = (0..ns * na).map(|_| 10.0 * rng.random::<f64>()).collect();
        let kernel = (0..ns * na).flat_map(|_| random_simplex(&mut rng, ns)).collect();
        RobustMdp::new(
            ns,
            na,
            0.8,
            costs,
            kernel,
            vec![1.0 / ns as f64; ns],
            UncertaintySpec::ellipsoidal(0.5),
        )
        .unwrap()
    }

    #[test]
    fn bilinear_value_zero_costs_and_values() {
        let inst = random_instance(1, 3, 2).with_costs(vec![0.0; 6]).unwrap();
        let v = vec![0.0; 3];
        let val = bilinear_value(&inst, 1, &[0.3, 0.7], inst.nominal_block(1), &v).unwrap();
        assert_eq!(val, 0.0);
    }

    #[test]
    fn bilinear_value_degenerate_distributions() {
        let inst = random_instance(2, 3, 2);
        let v = vec![1.0, 2.0, 5.0];
        let mut y = vec![0.0; 6];
        y[3 + 2] = 1.0; // action 1 -> state 2
        y[0] = 1.0;
        let val = bilinear_value(&inst, 0, &[0.0, 1.0], &y, &v).unwrap();
        let expected = inst.state_costs(0)[1] + 0.8 * 5.0;
        assert!((val - expected).abs() < 1e-12);
    }

    #[test]
    fn bilinear_value_matches_double_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = random_instance(3, 3, 2);
        for s in 0..3 {
            let x = random_simplex(&mut rng, 2);
            let y: Vec<f64> = (0..2).flat_map(|_| random_simplex(&mut rng, 3)).collect();
            let v: Vec<f64> = (0..3).map(|_| 20.0 * rng.random::<f64>()).collect();
            let mut naive = 0.0;
            for a in 0..2 {
                let mut inner = 0.0;
                for sp in 0..3 {
                    inner += y[a * 3 + sp] * v[sp];
                }
                naive += x[a] * (inst.state_costs(s)[a] + 0.8 * inner);
            }
            let got = bilinear_value(&inst, s, &x, &y, &v).unwrap();
            assert!((got - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn bilinear_value_rejects_bad_dimensions() {
        let inst = random_instance(4, 3, 2);
        let err = bilinear_value(&inst, 0, &[1.0], inst.nominal_block(0), &[0.0; 3]);
        assert!(matches!(err, Err(RmdpError::Dimension(_))));
        assert!(bilinear_value(&inst, 9, &[0.5, 0.5], inst.nominal_block(0), &[0.0; 3]).is_err());
    }

    /// Dense `(A*S) x A` matrix with `K[(a', s'), a] = 1{a = a'} lambda v_s'`.
    fn dense_k(discount: f64, v: &[f64], na: usize) -> Vec<Vec<f64>> {
        let ns = v.len();
        let mut k = vec![vec![0.0; na]; na * ns];
        for ap in 0..na {
            for sp in 0..ns {
                k[ap * ns + sp][ap] = discount * v[sp];
            }
        }
        k
    }

    #[test]
    fn apply_k_trivial_cases() {
        assert!(apply_k(0.8, &[0.0; 4], &[0.5, 0.5]).iter().all(|&z| z == 0.0));
        let out = apply_k(0.8, &[1.0; 3], &[0.25; 4]);
        assert!(out.iter().all(|&z| (z - 0.8 / 4.0).abs() < 1e-15));
        let t = apply_k_transpose(0.8, &[0.0; 3], &[1.0 / 3.0; 6]).unwrap();
        assert_eq!(t, vec![0.0, 0.0]);
        let mut y = vec![0.0; 6];
        y[1] = 1.0;
        y[4] = 1.0;
        let t = apply_k_transpose(0.5, &[3.0, 7.0, 1.0], &y).unwrap();
        assert_eq!(t, vec![3.5, 3.5]);
    }

    #[test]
    fn apply_k_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let (ns, na) = (4, 3);
            let v: Vec<f64> = (0..ns).map(|_| 10.0 * rng.random::<f64>()).collect();
            let x = random_simplex(&mut rng, na);
            let y: Vec<f64> = (0..na).flat_map(|_| random_simplex(&mut rng, ns)).collect();
            let k = dense_k(0.7, &v, na);
            let kx: Vec<f64> = k.iter().map(|row| dot(row, &x)).collect();
            let got = apply_k(0.7, &v, &x);
            for (g, e) in got.iter().zip(&kx) {
                assert!((g - e).abs() < 1e-12);
            }
            let kty: Vec<f64> = (0..na)
                .map(|a| k.iter().zip(&y).map(|(row, yy)| row[a] * yy).sum())
                .collect();
            let got_t = apply_k_transpose(0.7, &v, &y).unwrap();
            for (g, e) in got_t.iter().zip(&kty) {
                assert!((g - e).abs() < 1e-12);
            }
        }
        assert!(apply_k_checked(0.7, &[1.0; 3], &[1.0], 2).is_err());
        assert!(apply_k_transpose(0.7, &[1.0; 3], &[1.0; 4]).is_err());
    }

    #[test]
    fn policy_value_trivial_cases() {
        let inst = random_instance(6, 3, 2).with_costs(vec![0.0; 6]).unwrap();
        let v = policy_value(&inst, &Policy::uniform(3, 2), &AdversarialKernel::nominal(&inst)).unwrap();
        assert!(v.iter().all(|&z| z == 0.0));

        let single = RobustMdp::new(
            1,
            2,
            0.9,
            vec![2.0, 4.0],
            vec![1.0, 1.0],
            vec![1.0],
            UncertaintySpec::ellipsoidal(0.0),
        )
        .unwrap();
        let x = Policy::from_rows(1, 2, vec![0.25, 0.75]).unwrap();
        let v = policy_value(&single, &x, &AdversarialKernel::nominal(&single)).unwrap();
        assert!((v[0] - 3.5 / 0.1).abs() < 1e-10);
    }

    #[test]
    fn policy_value_matches_fixed_point_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let inst = random_instance(7, 3, 2);
        let rows: Vec<f64> = (0..3).flat_map(|_| random_simplex(&mut rng, 2)).collect();
        let x = Policy::from_rows(3, 2, rows).unwrap();
        let y = AdversarialKernel::nominal(&inst);
        let v = policy_value(&inst, &x, &y).unwrap();

        let mut w = vec![0.0; 3];
        for _ in 0..2000 {
            let next: Vec<f64> = (0..3)
                .map(|s| bilinear_value(&inst, s, x.row(s), y.block(s), &w).unwrap())
                .collect();
            w = next;
        }
        assert!(v.dist_inf(&w) < 1e-8);
        let bound = inst.value_bound();
        assert!(v.iter().all(|&z| (0.0..=bound).contains(&z)));
    }

    #[test]
    fn return_value_examples() {
        let inst = random_instance(8, 4, 2);
        assert!((return_value(&inst, &[1.0; 4]) - 1.0).abs() < 1e-15);
        let e1 = inst.with_initial_distribution(vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(return_value(&e1, &[3.0, 1.0, 2.0, 9.0]), 3.0);
    }

    #[test]
    fn invalid_instances_are_rejected() {
        let good = random_instance(9, 2, 2);
        assert!(good.with_costs(vec![-1.0, 0.0, 0.0, 0.0]).is_err());
        assert!(good.with_initial_distribution(vec![0.6, 0.6]).is_err());
        let mut text = serde_json::to_string(&good).unwrap();
        text = text.replace("\"discount\":0.8", "\"discount\":1.5");
        assert!(RobustMdp::from_json(&text).is_err());
    }

    proptest::proptest! {
        #[test]
        fn bilinear_decomposition_and_adjoint(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let inst = random_instance(seed, 4, 3);
            let s = (seed % 4) as usize;
            let x = random_simplex(&mut rng, 3);
            let y: Vec<f64> = (0..3).flat_map(|_| random_simplex(&mut rng, 4)).collect();
            let v: Vec<f64> = (0..4).map(|_| 50.0 * rng.random::<f64>()).collect();
            let kx = apply_k(0.8, &v, &x);
            let kty = apply_k_transpose(0.8, &v, &y).unwrap();
            let lhs = dot(&kx, &y);
            let rhs = dot(&x, &kty);
            proptest::prop_assert!((lhs - rhs).abs() < 1e-12 * (1.0 + lhs.abs()));
            let direct = bilinear_value(&inst, s, &x, &y, &v).unwrap();
            let split = dot(&x, inst.state_costs(s)) + lhs;
            proptest::prop_assert!((direct - split).abs() < 1e-12 * (1.0 + direct.abs()));
        }
    }
}
