//! Proximal mappings used by the primal-dual iterations.
//!
//! The adversary's prox steps are all solved the same way: dualize the
//! uncertainty-set constraint with a multiplier `mu >= 0`, solve the
//! separable per-action problem for fixed `mu`, and search `mu` until the
//! constraint is met. The duality certificate `mu * (alpha - dist(y(mu)))`
//! bounds the objective suboptimality of the returned feasible point.

mod ellipsoid;
mod kl;
mod lambert;
mod simplex;

pub use ellipsoid::{prox_y_ellipsoid_l1, prox_y_ellipsoid_l2};
pub use kl::{prox_y_kl_l1, prox_y_kl_l2};
pub use lambert::lambert_w;
pub use simplex::{project_simplex_into, project_simplex_l2, prox_simplex_entropy, ENTROPY_FLOOR};

pub(crate) use lambert::lambert_w_of_exp;
pub(crate) use simplex::{entropy_prox_into, normalize_log_weights};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RmdpError};
use crate::uncertainty::{StateUncertainty, UncertaintyKind};

/// Iteration cap for each multiplier search.
pub const MAX_SEARCH_ITERS: usize = 200;
/// Relative bracket width at which a multiplier search stops.
pub const MULTIPLIER_TOL: f64 = 1e-10;
/// Default objective tolerance for prox steps.
pub const DEFAULT_PROX_TOL: f64 = 1e-10;

/// Norm pair of the proximal setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormPair {
    /// Entropic distances on both players (`l1` norms).
    #[serde(rename = "l1")]
    L1L1,
    /// Squared Euclidean distances on both players (`l2` norms).
    #[serde(rename = "l2")]
    L2L2,
}

impl NormPair {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormPair::L1L1 => "l1",
            NormPair::L2L2 => "l2",
        }
    }
}

impl std::str::FromStr for NormPair {
    type Err = RmdpError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" | "l1l1" => Ok(NormPair::L1L1),
            "l2" | "l2l2" => Ok(NormPair::L2L2),
            other => Err(RmdpError::Config(format!("unknown norm pair '{other}'"))),
        }
    }
}

/// Step sizes and constants of a proximal setup.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxSetup {
    pub norm_pair: NormPair,
    /// Step size of the policy player.
    pub tau: f64,
    /// Step size of the adversary.
    pub sigma: f64,
    /// Bound on the per-epoch descent potential.
    pub omega: f64,
    /// Entropy scaling of the adversary's distance in the `l1` setup.
    pub beta: f64,
}

/// Bookkeeping returned by a prox step or linear maximization.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SearchStats {
    /// Final multiplier of the set constraint (`0` when inactive, `inf` for a singleton set).
    pub multiplier: f64,
    /// Set distance of the returned point.
    pub distance: f64,
    /// Number of inner solves performed.
    pub evaluations: usize,
}

impl SearchStats {
    /// Duality certificate on the objective gap of the returned point.
    pub fn certificate(&self, radius: f64) -> f64 {
        if self.multiplier.is_finite() {
            (self.multiplier * (radius - self.distance)).max(0.0)
        } else {
            0.0
        }
    }
}

/// Minimizes `objective(y)` subject to `distance(y) <= alpha` given an
/// oracle `solve(mu, out)` for the Lagrangian `objective + mu * distance`.
///
/// `solve(0, ..)` must return a minimizer of the unconstrained problem
/// (the fast path). The returned point is always feasible.
#[allow(clippy::too_many_arguments)]
pub(crate) fn search_multiplier<S, O, D>(
    context: &'static str,
    alpha: f64,
    tol: f64,
    center: &[f64],
    out: &mut [f64],
    mut solve: S,
    objective: O,
    distance: D,
) -> Result<SearchStats>
where
    S: FnMut(f64, &mut [f64]) -> Result<()>,
    O: Fn(&[f64]) -> f64,
    D: Fn(&[f64]) -> f64,
{
    if alpha <= 0.0 {
        out.copy_from_slice(center);
        return Ok(SearchStats {
            multiplier: f64::INFINITY,
            distance: 0.0,
            evaluations: 0,
        });
    }
    solve(0.0, out)?;
    let mut evaluations = 1;
    let h0 = distance(out);
    if h0 <= alpha {
        return Ok(SearchStats {
            multiplier: 0.0,
            distance: h0,
            evaluations,
        });
    }

    // The dual function is bounded by -mu*alpha + objective(center), which
    // caps the optimal multiplier.
    let mut hi = (objective(center) - objective(out)) / alpha;
    if !(hi.is_finite() && hi > 0.0) {
        hi = 1.0;
    }
    hi *= 1.0 + 1e-9;
    let mut lo = 0.0;
    let mut f_lo = h0 - alpha;
    let mut h_lo = h0;
    let mut probe = vec![0.0; out.len()];
    solve(hi, &mut probe)?;
    evaluations += 1;
    let mut h_hi = distance(&probe);
    let mut doublings = 0;
    while h_hi > alpha {
        lo = hi;
        f_lo = h_hi - alpha;
        h_lo = h_hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > MAX_SEARCH_ITERS || !hi.is_finite() {
            return Err(RmdpError::numerical(
                context,
                format!("no feasible multiplier after {doublings} doublings (last mu = {lo:e}, dist = {h_hi:e}, radius = {alpha:e})"),
            ));
        }
        solve(hi, &mut probe)?;
        evaluations += 1;
        h_hi = distance(&probe);
    }
    out.copy_from_slice(&probe);
    let mut f_hi = h_hi - alpha;
    let mut last_side = 0i8;

    for _ in 0..MAX_SEARCH_ITERS {
        let cert = hi * (alpha - h_hi);
        if cert <= tol || hi - lo <= MULTIPLIER_TOL * hi.max(1.0) {
            return Ok(SearchStats {
                multiplier: hi,
                distance: h_hi,
                evaluations,
            });
        }
        // regula falsi (Illinois) with bisection safeguard
        let width = hi - lo;
        let mut mu = hi - f_hi * width / (f_hi - f_lo);
        if lo > 0.0 && hi > 16.0 * lo {
            mu = (lo * hi).sqrt();
        } else if !(mu > lo + 1e-3 * width && mu < hi - 1e-3 * width) {
            mu = lo + 0.5 * width;
        }
        solve(mu, &mut probe)?;
        evaluations += 1;
        let h = distance(&probe);
        debug_assert!(
            h <= h_lo + 1e-9 * (1.0 + h.abs()) && h >= h_hi - 1e-9 * (1.0 + h.abs()),
            "{context}: constraint residual not monotone in the multiplier"
        );
        if h <= alpha {
            hi = mu;
            h_hi = h;
            f_hi = h - alpha;
            out.copy_from_slice(&probe);
            if last_side == 1 {
                f_lo *= 0.5;
            }
            last_side = 1;
        } else {
            lo = mu;
            f_lo = h - alpha;
            h_lo = h;
            if last_side == -1 {
                f_hi *= 0.5;
            }
            last_side = -1;
        }
    }
    Err(RmdpError::numerical(
        context,
        format!(
            "multiplier search did not converge in {MAX_SEARCH_ITERS} steps (bracket [{lo:e}, {hi:e}])"
        ),
    ))
}

/// Solves `a ln y_i + b y_i = r_i - nu` for every coordinate, choosing `nu`
/// so that the row sums to one. Coordinates where `support` is zero stay
/// at zero. Returns `nu`.
///
/// The closed form is `y_i = (a / b) W((b / a) exp((r_i - nu) / a))`.
pub(crate) fn entropic_quadratic_row(
    a: f64,
    b: f64,
    r: &[f64],
    support: Option<&[f64]>,
    out: &mut [f64],
) -> Result<f64> {
    debug_assert!(a > 0.0 && b >= 0.0);
    let log_ratio = (b / a).ln();
    let active = |i: usize| support.map_or(true, |c| c[i] > 0.0);
    // shifting r by a constant shifts nu by the same constant
    let shift = r
        .iter()
        .enumerate()
        .filter(|(i, _)| active(*i))
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    if !shift.is_finite() {
        return Err(RmdpError::numerical("row multiplier", "empty support or non-finite data"));
    }

    let eval = |nu: f64, out: &mut [f64]| -> (f64, f64) {
        let mut sum = 0.0;
        let mut deriv = 0.0;
        for (i, (o, &ri)) in out.iter_mut().zip(r).enumerate() {
            if !active(i) {
                *o = 0.0;
                continue;
            }
            let t = (ri - shift - nu) / a;
            let l = log_ratio + t;
            let y = if l < -40.0 {
                t.exp() * (1.0 - l.exp())
            } else {
                (a / b) * lambert_w_of_exp(l)
            };
            *o = y;
            sum += y;
            deriv += y / (a + b * y);
        }
        (sum - 1.0, -deriv)
    };

    // Bracket by doubling over {-2^k} and then {2^k}.
    let mut lo: Option<f64> = None;
    let mut hi: Option<f64> = None;
    for k in 0..=60 {
        let nu = -(2f64.powi(k));
        let (phi, _) = eval(nu, out);
        if phi == 0.0 {
            return Ok(nu + shift);
        }
        if phi > 0.0 {
            lo = Some(nu);
            break;
        }
        hi = Some(nu);
    }
    let mut lo = lo.ok_or_else(|| {
        RmdpError::numerical("row multiplier", "no lower bracket in {-2^k : k <= 60}")
    })?;
    if hi.is_none() {
        for k in 0..=60 {
            let nu = 2f64.powi(k);
            let (phi, _) = eval(nu, out);
            if phi == 0.0 {
                return Ok(nu + shift);
            }
            if phi < 0.0 {
                hi = Some(nu);
                break;
            }
            lo = nu;
        }
    }
    let mut hi = hi.ok_or_else(|| {
        RmdpError::numerical("row multiplier", "no upper bracket in {2^k : k <= 60}")
    })?;

    // The row sum is convex and decreasing in nu, so Newton from the lower
    // end approaches the root monotonically; bisection guards the rest.
    let mut nu = lo;
    for _ in 0..MAX_SEARCH_ITERS {
        let (phi, dphi) = eval(nu, out);
        if phi.abs() <= 1e-14 {
            break;
        }
        if phi > 0.0 {
            lo = nu;
        } else {
            hi = nu;
        }
        if hi - lo <= 1e-15 * nu.abs().max(1.0) {
            break;
        }
        let newton = nu - phi / dphi;
        nu = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    let total: f64 = out.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(RmdpError::numerical(
            "row multiplier",
            format!("degenerate row sum {total}"),
        ));
    }
    for o in out.iter_mut() {
        *o /= total;
    }
    Ok(nu + shift)
}

/// Dispatches the adversary's prox step for the instance's set and norm pair.
///
/// Computes `argmin_{y in P_s} <g, y> + D_Y(y, y_prev) / sigma`.
#[allow(clippy::too_many_arguments)]
pub fn prox_y(
    norm_pair: NormPair,
    set: &StateUncertainty<'_>,
    y_prev: &[f64],
    g: &[f64],
    sigma: f64,
    beta: f64,
    tol: f64,
    out: &mut [f64],
) -> Result<SearchStats> {
    match (set.spec.kind, norm_pair) {
        (UncertaintyKind::Ellipsoidal, NormPair::L2L2) => {
            ellipsoid::ellipsoid_l2_into(set, y_prev, g, sigma, tol, out)
        }
        (UncertaintyKind::Ellipsoidal, NormPair::L1L1) => {
            ellipsoid::ellipsoid_l1_into(set, y_prev, g, sigma, beta, tol, out)
        }
        (UncertaintyKind::KullbackLeibler, NormPair::L2L2) => {
            kl::kl_l2_into(set, y_prev, g, sigma, tol, out)
        }
        (UncertaintyKind::KullbackLeibler, NormPair::L1L1) => {
            kl::kl_l1_into(set, y_prev, g, sigma, beta, tol, out)
        }
    }
}

/// Policy player's prox step `argmin_{x in simplex} <g, x> + D_X(x, x_prev) / tau`.
pub fn prox_x(norm_pair: NormPair, x_prev: &[f64], g: &[f64], tau: f64, out: &mut [f64], scratch: &mut Vec<f64>) {
    match norm_pair {
        NormPair::L2L2 => {
            let z: Vec<f64> = x_prev.iter().zip(g).map(|(x, gi)| x - tau * gi).collect();
            project_simplex_into(&z, out, scratch);
        }
        NormPair::L1L1 => entropy_prox_into(x_prev, g, tau, out),
    }
}

pub(crate) fn check_prox_shapes(set: &StateUncertainty<'_>, y_prev: &[f64], g: &[f64], out: &[f64]) -> Result<()> {
    let n = set.center.len();
    if y_prev.len() != n || g.len() != n || out.len() != n {
        return Err(RmdpError::Dimension(format!(
            "prox inputs must all have length {n} (got {}, {}, {})",
            y_prev.len(),
            g.len(),
            out.len()
        )));
    }
    if !(set.spec.radius >= 0.0) {
        return Err(RmdpError::Config("negative uncertainty radius".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn row_solver_recovers_entropic_limit() {
        // b = 0: y_i ∝ exp(r_i / a)
        let r = [0.3, -1.0, 2.0];
        let mut out = [0.0; 3];
        entropic_quadratic_row(0.5, 0.0, &r, None, &mut out).unwrap();
        let mut expect: Vec<f64> = r.iter().map(|x| x / 0.5).collect();
        normalize_log_weights(&mut expect);
        for (o, e) in out.iter().zip(&expect) {
            assert!((o - e).abs() < 1e-12);
        }
    }

    #[test]
    fn row_solver_satisfies_stationarity() {
        let r = [1.0, 0.2, -0.7, 3.0];
        let (a, b) = (0.3, 4.0);
        let mut out = [0.0; 4];
        let nu = entropic_quadratic_row(a, b, &r, None, &mut out).unwrap();
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        for (y, ri) in out.iter().zip(&r) {
            let lhs = a * y.ln() + b * y;
            assert!((lhs - (ri - nu)).abs() < 1e-9, "{lhs} vs {}", ri - nu);
        }
    }

    #[test]
    fn row_solver_freezes_outside_support() {
        let r = [1.0, 5.0, 0.0];
        let support = [0.5, 0.0, 0.5];
        let mut out = [0.0; 3];
        entropic_quadratic_row(1.0, 1.0, &r, Some(&support), &mut out).unwrap();
        assert_eq!(out[1], 0.0);
        assert!((out[0] + out[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn norm_pair_parsing() {
        assert_eq!("l2".parse::<NormPair>().unwrap(), NormPair::L2L2);
        assert_eq!("L1".parse::<NormPair>().unwrap(), NormPair::L1L1);
        assert!("l3".parse::<NormPair>().is_err());
    }
}
