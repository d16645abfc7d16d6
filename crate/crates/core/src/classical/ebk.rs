use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LmgError, Result};
use crate::spin::{CouplingParams, SpinSpace};

use super::branches::{roots_for, trajectory_branches, Branch};
use super::dos::full_turn;

/// Couplings with Ã(φ) = (2J/(2J−1))A(φ).
fn rescaled(space: &SpinSpace, c: &CouplingParams) -> Result<CouplingParams> {
    let scale = space.coupling_scale();
    if scale == 0.0 {
        return Err(LmgError::SingularCouplingScale);
    }
    let f = 2.0 * space.j() / scale;
    CouplingParams::new(c.epsilon0, f * c.gamma_x, f * c.gamma_y)
}

/// EBK action of the given branch at energy ε, in units of ħ = 1/J:
/// inner (J/2π)∮(1 + z̃)dφ, outer (J/2π)∮(1 − z̃)dφ, single full-turn
/// orbits as outer, and a closed lobe its enclosed (J/2π)∫(z̃₂ − z̃₁)dφ.
/// Quantized orbits have action n + 1/2.
pub fn ebk_action(branch: Branch, epsilon: f64, space: &SpinSpace, c: &CouplingParams) -> Result<f64> {
    let ct = rescaled(space, c)?;
    let orbits = trajectory_branches(epsilon, &ct, 64)?;
    let j = space.j();
    let fail = || LmgError::NoTrajectory(format!("no closed {} branch at ε = {epsilon}", branch.label()));
    let wraps = orbits.iter().any(|o| o.wraps_around());
    let value = match branch {
        Branch::Inner => {
            if !(wraps && orbits.len() == 2) {
                return Err(fail());
            }
            full_turn(epsilon, &ct, |a| 1.0 + roots_for(epsilon, a)[0], 1e-12)
        }
        Branch::Outer | Branch::Single if wraps => full_turn(
            epsilon,
            &ct,
            |a| {
                let r = roots_for(epsilon, a);
                1.0 - r[r.len() - 1]
            },
            1e-12,
        ),
        Branch::Single if !orbits.is_empty() => {
            let total = full_turn(
                epsilon,
                &ct,
                |a| {
                    let r = roots_for(epsilon, a);
                    if r.len() == 2 {
                        r[1] - r[0]
                    } else {
                        0.0
                    }
                },
                1e-12,
            );
            total / orbits.len() as f64
        }
        _ => return Err(fail()),
    };
    Ok(j * value / (2.0 * PI))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EbkLevel {
    pub n: u32,
    pub epsilon: f64,
}

/// Energies in (lo, hi) where the branch action equals n + 1/2.
pub fn ebk_levels(branch: Branch, space: &SpinSpace, c: &CouplingParams, window: (f64, f64)) -> Result<Vec<EbkLevel>> {
    let (lo, hi) = window;
    let s = |e: f64| ebk_action(branch, e, space, c);
    let (s_lo, s_hi) = (s(lo)?, s(hi)?);
    let (min, max) = (s_lo.min(s_hi), s_lo.max(s_hi));
    let increasing = s_hi > s_lo;
    let mut out = Vec::new();
    let first = (min - 0.5).ceil().max(0.0) as u32;
    let mut n = first;
    while (n as f64 + 0.5) < max {
        let target = n as f64 + 0.5;
        if target > min {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                let below = s(m)? < target;
                if below == increasing {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push(EbkLevel { n, epsilon: 0.5 * (a + b) });
        }
        n += 1;
    }
    out.sort_by(|x, y| x.epsilon.total_cmp(&y.epsilon));
    Ok(out)
}

/// (J/π)∮ dφ/Ã(φ). When it equals the integer 2J − N, inner and outer
/// ladders are degenerate at every energy of the intermediate window.
pub fn ebk_sum_rule(space: &SpinSpace, c: &CouplingParams) -> Result<f64> {
    let ct = rescaled(space, c)?;
    if ct.gamma_x.signum() != ct.gamma_y.signum() || ct.gamma_x == 0.0 {
        return Err(LmgError::InvalidArgument("sum rule needs couplings of equal sign".into()));
    }
    // ε = 0 has no D breakpoints, so the quadrature runs over [0, π/2] whole
    let v = full_turn(0.0, &ct, |a| 1.0 / a, 1e-13);
    Ok(space.j() * v / PI)
}
