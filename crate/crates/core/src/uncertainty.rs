//! s-rectangular uncertainty sets: ellipsoids and KL balls around the nominal kernel.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RmdpError};
use crate::model::{is_distribution, RobustMdp};
use crate::prox::{normalize_log_weights, project_simplex_into, search_multiplier, SearchStats};

/// Family of the per-state uncertainty set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UncertaintyKind {
    /// `sum_a 0.5 * ||y_a - y0_a||^2 <= radius`
    #[serde(rename = "ellipsoidal")]
    Ellipsoidal,
    /// `sum_a KL(y_a, y0_a) <= radius`
    #[serde(rename = "kl")]
    KullbackLeibler,
}

impl UncertaintyKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            UncertaintyKind::Ellipsoidal => "ellipsoidal",
            UncertaintyKind::KullbackLeibler => "kl",
        }
    }
}

impl std::str::FromStr for UncertaintyKind {
    type Err = RmdpError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ellipsoidal" | "ellipsoid" | "l2" => Ok(UncertaintyKind::Ellipsoidal),
            "kl" | "kullback-leibler" => Ok(UncertaintyKind::KullbackLeibler),
            other => Err(RmdpError::Config(format!("unknown uncertainty kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UncertaintySpec {
    pub kind: UncertaintyKind,
    pub radius: f64,
}

impl UncertaintySpec {
    pub fn ellipsoidal(radius: f64) -> Self {
        UncertaintySpec {
            kind: UncertaintyKind::Ellipsoidal,
            radius,
        }
    }

    pub fn kl(radius: f64) -> Self {
        UncertaintySpec {
            kind: UncertaintyKind::KullbackLeibler,
            radius,
        }
    }
}

/// The uncertainty set of one state: spec plus the nominal `A x S` block.
#[derive(Debug, Clone, Copy)]
pub struct StateUncertainty<'a> {
    pub spec: UncertaintySpec,
    pub center: &'a [f64],
    pub num_next: usize,
}

impl<'a> StateUncertainty<'a> {
    pub fn new(spec: UncertaintySpec, center: &'a [f64], num_next: usize) -> Result<Self> {
        if num_next == 0 || center.is_empty() || center.len() % num_next != 0 {
            return Err(RmdpError::Dimension(format!(
                "center of length {} is not a whole number of rows of length {num_next}",
                center.len()
            )));
        }
        Ok(StateUncertainty {
            spec,
            center,
            num_next,
        })
    }

    pub fn num_actions(&self) -> usize {
        self.center.len() / self.num_next
    }

    pub fn radius(&self) -> f64 {
        self.spec.radius
    }
}

impl RobustMdp {
    /// Uncertainty set of state `s`.
    pub fn state_uncertainty(&self, s: usize) -> StateUncertainty<'_> {
        StateUncertainty {
            spec: self.uncertainty(),
            center: self.nominal_block(s),
            num_next: self.num_states(),
        }
    }
}

/// Distance of a block to the center: half squared Euclidean or summed KL.
pub fn set_distance(set: &StateUncertainty<'_>, y_s: &[f64]) -> Result<f64> {
    if y_s.len() != set.center.len() {
        return Err(RmdpError::Dimension(format!(
            "block has length {}, expected {}",
            y_s.len(),
            set.center.len()
        )));
    }
    match set.spec.kind {
        UncertaintyKind::Ellipsoidal => Ok(half_sq_dist(y_s, set.center)),
        UncertaintyKind::KullbackLeibler => {
            for (i, (&y, &c)) in y_s.iter().zip(set.center).enumerate() {
                if y > 0.0 && c <= 0.0 {
                    return Err(RmdpError::KlSupport {
                        action: i / set.num_next,
                        next_state: i % set.num_next,
                    });
                }
            }
            Ok(kl_sum(y_s, set.center))
        }
    }
}

/// `set_distance <= radius + tol` and every row on the simplex within `tol`.
pub fn is_member(set: &StateUncertainty<'_>, y_s: &[f64], tol: f64) -> bool {
    if y_s.len() != set.center.len() {
        return false;
    }
    if !y_s.chunks(set.num_next).all(|row| is_distribution(row, tol)) {
        return false;
    }
    match set_distance(set, y_s) {
        Ok(d) => d <= set.spec.radius + tol,
        Err(_) => false,
    }
}

pub(crate) fn half_sq_dist(y: &[f64], c: &[f64]) -> f64 {
    0.5 * y.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

/// `sum_i y_i ln(y_i / c_i)` with `0 ln 0 = 0`; callers check support.
pub(crate) fn kl_sum(y: &[f64], c: &[f64]) -> f64 {
    y.iter()
        .zip(c)
        .map(|(&a, &b)| if a > 0.0 { a * (a / b).ln() } else { 0.0 })
        .sum()
}

/// Maximizer of a linear function over one state's uncertainty set.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMax {
    pub y: Vec<f64>,
    /// `<d, y>` at the returned feasible point.
    pub value: f64,
    /// Certified upper bound on the true maximum.
    pub upper_bound: f64,
    pub stats: SearchStats,
}

/// `max_{y in P_s} <d, y>`, returning a feasible maximizer within `tol`.
pub fn linear_max_over_set(set: &StateUncertainty<'_>, d: &[f64], tol: f64) -> Result<LinearMax> {
    let n = set.center.len();
    if d.len() != n {
        return Err(RmdpError::Dimension(format!(
            "direction has length {}, expected {n}",
            d.len()
        )));
    }
    if d.iter().any(|v| !v.is_finite()) {
        return Err(RmdpError::numerical("linear_max_over_set", "non-finite direction"));
    }
    let mut y = vec![0.0; n];
    linear_max_into(set, d, tol, &mut y).map(|(value, upper_bound, stats)| LinearMax {
        y,
        value,
        upper_bound,
        stats,
    })
}

/// Allocation-light variant writing the maximizer into `out`; returns
/// `(value, upper_bound, stats)`.
pub(crate) fn linear_max_into(
    set: &StateUncertainty<'_>,
    d: &[f64],
    tol: f64,
    out: &mut [f64],
) -> Result<(f64, f64, SearchStats)> {
    let ns = set.num_next;
    let center = set.center;
    let objective = |y: &[f64]| -dot(d, y);
    let stats = match set.spec.kind {
        UncertaintyKind::Ellipsoidal => {
            let mut scratch = Vec::with_capacity(ns);
            let mut z = vec![0.0; ns];
            search_multiplier(
                "linear_max_over_set",
                set.spec.radius,
                tol,
                center,
                out,
                |mu, y| {
                    for ((ya, ca), da) in y.chunks_mut(ns).zip(center.chunks(ns)).zip(d.chunks(ns)) {
                        if mu == 0.0 {
                            face_projection(ca, da, ya, &mut z, &mut scratch);
                        } else {
                            for ((zi, &c), &di) in z.iter_mut().zip(ca).zip(da) {
                                *zi = c + di / mu;
                            }
                            project_simplex_into(&z, ya, &mut scratch);
                        }
                    }
                    Ok(())
                },
                objective,
                |y| half_sq_dist(y, center),
            )?
        }
        UncertaintyKind::KullbackLeibler => search_multiplier(
            "linear_max_over_set",
            set.spec.radius,
            tol,
            center,
            out,
            |mu, y| {
                for ((ya, ca), da) in y.chunks_mut(ns).zip(center.chunks(ns)).zip(d.chunks(ns)) {
                    if mu == 0.0 {
                        // limit of the tilt: nominal mass restricted to the argmax
                        let best = supported_max(ca, da);
                        let mut total = 0.0;
                        for ((yi, &c), &di) in ya.iter_mut().zip(ca).zip(da) {
                            *yi = if c > 0.0 && di == best { c } else { 0.0 };
                            total += *yi;
                        }
                        ya.iter_mut().for_each(|v| *v /= total);
                    } else {
                        tilt_row(ca, da, 1.0 / mu, ya);
                    }
                }
                Ok(())
            },
            objective,
            |y| kl_sum(y, center),
        )?,
    };
    let value = dot(d, out);
    Ok((value, value + stats.certificate(set.spec.radius), stats))
}

/// `y_i ∝ c_i exp(scale * d_i)` on the support of `c`.
pub(crate) fn tilt_row(c: &[f64], d: &[f64], scale: f64, out: &mut [f64]) {
    let mut any = false;
    for ((o, &ci), &di) in out.iter_mut().zip(c).zip(d) {
        if ci > 0.0 {
            *o = ci.ln() + scale * di;
            any = true;
        } else {
            *o = f64::NEG_INFINITY;
        }
    }
    debug_assert!(any);
    normalize_log_weights(out);
}

pub(crate) fn supported_max(c: &[f64], d: &[f64]) -> f64 {
    c.iter()
        .zip(d)
        .filter(|(&ci, _)| ci > 0.0)
        .map(|(_, &di)| di)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Closest point to `c` on the face of the simplex maximizing `<d, .>`.
fn face_projection(c: &[f64], d: &[f64], out: &mut [f64], z: &mut [f64], scratch: &mut Vec<f64>) {
    let best = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let face: Vec<usize> = (0..d.len()).filter(|&i| d[i] == best).collect();
    let zf: Vec<f64> = face.iter().map(|&i| c[i]).collect();
    let pf = &mut z[..face.len()];
    project_simplex_into(&zf, pf, scratch);
    out.iter_mut().for_each(|v| *v = 0.0);
    for (k, &i) in face.iter().enumerate() {
        out[i] = pf[k];
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
