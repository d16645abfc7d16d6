//! Adaptive Dormand–Prince 5(4) integrator with output at prescribed times.

use crate::error::{LmgError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Smallest step relative to the remaining span before giving up.
    pub min_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-10, max_steps: 10_000_000, min_step: 1e-14 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[inline]
fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates y' = f(t, y) from `times[0]` and calls `sink(i, y)` at every
/// `times[i]` (ascending). Steps are shortened to land on output times.
pub fn integrate<const N: usize, F, S>(
    f: F,
    y0: [f64; N],
    times: &[f64],
    opts: &OdeOptions,
    mut sink: S,
) -> Result<usize>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: FnMut(usize, &[f64; N]),
{
    if times.is_empty() {
        return Ok(0);
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(LmgError::InvalidArgument("output times must be ascending".into()));
    }
    let mut t = times[0];
    let mut y = y0;
    sink(0, &y);
    let span = times[times.len() - 1] - t;
    if span == 0.0 {
        for i in 1..times.len() {
            sink(i, &y);
        }
        return Ok(0);
    }
    let mut k1 = f(t, &y);
    let mut h = (span * 1e-3).min(0.01);
    let mut steps = 0usize;
    let mut next = 1;
    while next < times.len() {
        let target = times[next];
        if target == t {
            sink(next, &y);
            next += 1;
            continue;
        }
        let remaining = target - t;
        let mut hit = false;
        let mut step = h;
        if step >= remaining {
            step = remaining;
            hit = true;
        }
        if step < opts.min_step * span.max(1.0) && !hit {
            return Err(LmgError::StepUnderflow { t });
        }
        steps += 1;
        if steps > opts.max_steps {
            return Err(LmgError::StepUnderflow { t });
        }
        let k2 = f(t + C2 * step, &axpy(&y, step, &[(A21, &k1)]));
        let k3 = f(t + C3 * step, &axpy(&y, step, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * step, &axpy(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(t + C5 * step, &axpy(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(t + step, &axpy(&y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y_new = axpy(&y, step, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + step, &y_new);
        let mut err = 0.0;
        for i in 0..N {
            let e = step * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            h = 0.1 * step;
            continue;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            t = if hit { target } else { t + step };
            y = y_new;
            k1 = k7;
            if hit {
                sink(next, &y);
                next += 1;
                // keep the natural step rather than the truncated one
                h = h.max(step * factor.min(1.0));
            } else {
                h = step * factor;
            }
        } else {
            h = step * factor.min(1.0);
        }
    }
    Ok(steps)
}
