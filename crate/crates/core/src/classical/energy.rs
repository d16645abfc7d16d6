use crate::spin::{CouplingParams, SpinSpace};

use super::PhasePoint;

/// A(φ) = γx cos²φ + γy sin²φ.
pub fn anisotropy(phi: f64, c: &CouplingParams) -> f64 {
    let (s, co) = phi.sin_cos();
    c.gamma_x * co * co + c.gamma_y * s * s
}

/// ε = h(Q,P) = z + ((1−z²)/2)(γx cos²φ + γy sin²φ), written as the
/// polynomial R/2 − 1 + (2 − R/2)(γx Q² + γy P²)/4 with R = Q² + P².
pub fn classical_energy(point: &PhasePoint, c: &CouplingParams) -> f64 {
    let (q2, p2) = (point.q * point.q, point.p * point.p);
    let r = q2 + p2;
    0.5 * r - 1.0 + (2.0 - 0.5 * r) * (c.gamma_x * q2 + c.gamma_y * p2) / 4.0
}

/// (∂h/∂Q, ∂h/∂P).
pub fn energy_gradient(point: &PhasePoint, c: &CouplingParams) -> (f64, f64) {
    let (q, p) = (point.q, point.p);
    let r = q * q + p * p;
    let s = (c.gamma_x * q * q + c.gamma_y * p * p) / 4.0;
    let u = 2.0 - 0.5 * r;
    (q * (1.0 - s) + 0.5 * u * c.gamma_x * q, p * (1.0 - s) + 0.5 * u * c.gamma_y * p)
}

/// Hessian [[h_QQ, h_QP], [h_QP, h_PP]].
pub fn energy_hessian(point: &PhasePoint, c: &CouplingParams) -> [[f64; 2]; 2] {
    let (q, p) = (point.q, point.p);
    let r = q * q + p * p;
    let s = (c.gamma_x * q * q + c.gamma_y * p * p) / 4.0;
    let u = 2.0 - 0.5 * r;
    let hqq = 1.0 - s - c.gamma_x * q * q + 0.5 * u * c.gamma_x;
    let hpp = 1.0 - s - c.gamma_y * p * p + 0.5 * u * c.gamma_y;
    let hqp = -0.5 * q * p * (c.gamma_x + c.gamma_y);
    [[hqq, hqp], [hqp, hpp]]
}

/// ⟨α|H|α⟩/(Jε0) − h(α) = (γx + γy)/(2(2J−1)), the finite-J shift of the
/// exact coherent-state energy from the classical surface.
pub fn coherent_energy_offset(space: &SpinSpace, c: &CouplingParams) -> f64 {
    let scale = space.coupling_scale();
    if scale == 0.0 {
        return 0.0;
    }
    (c.gamma_x + c.gamma_y) / (2.0 * scale)
}

/// D = 1 − A(2ε − A); the level set h = ε has real roots in z iff D ≥ 0.
pub fn discriminant(epsilon: f64, phi: f64, c: &CouplingParams) -> f64 {
    let a = anisotropy(phi, c);
    1.0 - a * (2.0 * epsilon - a)
}

/// Lowest ε ≥ `from` at which D(ε, φ) vanishes, located by bracketing and
/// bisection in ε. None if D stays positive up to ε = 1.
pub fn degenerate_discriminant_energy(phi: f64, c: &CouplingParams, from: f64) -> Option<f64> {
    let d = |e: f64| discriminant(e, phi, c);
    let n = 4000;
    let step = (1.0 - from) / n as f64;
    let mut a = from;
    let mut fa = d(a);
    if fa == 0.0 {
        return Some(a);
    }
    for i in 1..=n {
        let b = from + step * i as f64;
        let fb = d(b);
        if fb == 0.0 {
            return Some(b);
        }
        if fa.signum() != fb.signum() {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if d(mid).signum() == fa.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    None
}
