//! Principal branch of the Lambert W function on the real line.

use std::f64::consts::E;

use crate::error::{Error, Result};

const INV_E: f64 = 1.0 / E;
/// Arguments this far below `-1/e` are treated as the branch point.
const BRANCH_SLACK: f64 = 1e-12;
const TOLERANCE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 100;

/// `W0(z)`: the solution `w >= -1` of `w e^w = z`, for `z >= -1/e`.
///
/// Halley iteration from a branch-aware starting point.
pub fn lambert_w0(z: f64) -> Result<f64> {
    if z.is_nan() {
        return Err(Error::Domain("Lambert W of NaN".into()));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if z == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let offset = z + INV_E;
    if offset < -BRANCH_SLACK {
        return Err(Error::Domain(format!(
            "Lambert W0 is real only for z >= -1/e, got {z}"
        )));
    }
    if offset <= 0.0 {
        return Ok(-1.0);
    }

    let mut w = initial_guess(z, offset);
    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - z;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        let next = (w - step).max(-1.0);
        let done = (next - w).abs() <= TOLERANCE * (1.0 + next.abs());
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

fn initial_guess(z: f64, offset: f64) -> f64 {
    if offset < 0.25 {
        // series about the branch point in r = sqrt(2 (e z + 1))
        let r = (2.0 * E * offset).sqrt();
        -1.0 + r - r * r / 3.0 + 11.0 / 72.0 * r * r * r
    } else if z < 3.0 {
        let l = z.ln_1p();
        l * (1.0 - (1.0 + l).ln() / (2.0 + l))
    } else {
        let l = z.ln();
        l - l.ln()
    }
}
