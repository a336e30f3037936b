//! Principal branch of the Lambert W function on the non-negative reals.

use crate::error::{Result, RmdpError};

const MAX_HALLEY_STEPS: usize = 64;

/// `W(z)`: the unique `w >= 0` with `w * exp(w) = z`, for `z >= 0`.
pub fn lambert_w(z: f64) -> Result<f64> {
    if z.is_nan() || z < 0.0 {
        return Err(RmdpError::Config(format!(
            "lambert_w is only defined here for z >= 0 (got {z})"
        )));
    }
    Ok(lambert_w_nonneg(z))
}

pub(crate) fn lambert_w_nonneg(z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    if z.is_infinite() {
        return f64::INFINITY;
    }
    let mut w = initial_guess(z);
    for _ in 0..MAX_HALLEY_STEPS {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = w - step;
        if (next - w).abs() <= 4.0 * f64::EPSILON * next.abs() {
            return next;
        }
        w = next;
    }
    w
}

fn initial_guess(z: f64) -> f64 {
    if z < 0.5 {
        // series around zero
        z * (1.0 - z + 1.5 * z * z)
    } else if z < 3.0 {
        0.5 * (1.0 + z).ln() + 0.1 * z
    } else {
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

/// `W(exp(l))` without forming `exp(l)`, valid for any real `l`.
pub(crate) fn lambert_w_of_exp(l: f64) -> f64 {
    if l < -40.0 {
        let e = l.exp();
        return e * (1.0 - e);
    }
    if l < 700.0 {
        return lambert_w_nonneg(l.exp());
    }
    // w + ln w = l, Newton from the asymptotic guess
    let mut w = l - l.ln();
    for _ in 0..MAX_HALLEY_STEPS {
        let next = w - (w + w.ln() - l) / (1.0 + 1.0 / w);
        if (next - w).abs() <= 4.0 * f64::EPSILON * next.abs() {
            return next;
        }
        w = next;
    }
    w
}
