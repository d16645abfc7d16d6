use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{LmgError, Result};
use crate::quad::adaptive_endpoint_smooth;
use crate::spin::{CouplingParams, SpinSpace};

use super::branches::roots_for;
use super::energy::anisotropy;
use super::sector::{classify_sector, CriticalKind};

/// Value returned (and flagged) where the density diverges.
pub const DIVERGENCE_CAP: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DosValue {
    /// ρ_sc(E) in states per unit energy.
    pub rho: f64,
    pub divergent: bool,
}

/// Points of [0, π/2] where D(ε, φ) = 0. A(φ) is monotone there, and D < 0
/// exactly when A lies strictly between ε ± sqrt(ε² − 1).
pub(crate) fn phi_breakpoints(epsilon: f64, c: &CouplingParams) -> Vec<f64> {
    let mut out = vec![0.0];
    let span = c.gamma_y - c.gamma_x;
    if epsilon * epsilon > 1.0 && span != 0.0 {
        let s = (epsilon * epsilon - 1.0).sqrt();
        for a in [epsilon - s, epsilon + s] {
            let t = (a - c.gamma_x) / span;
            if t > 0.0 && t < 1.0 {
                out.push(t.sqrt().asin());
            }
        }
    }
    out.push(FRAC_PI_2);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// 4 ∫₀^{π/2} g(A(φ)) dφ, split where D vanishes.
pub(crate) fn full_turn<G: Fn(f64) -> f64>(epsilon: f64, c: &CouplingParams, g: G, tol: f64) -> f64 {
    let bp = phi_breakpoints(epsilon, c);
    let f = |phi: f64| g(anisotropy(phi, c));
    4.0 * bp.windows(2).map(|w| adaptive_endpoint_smooth(&f, w[0], w[1], tol, 40)).sum::<f64>()
}

fn critical_list(c: &CouplingParams) -> Vec<f64> {
    classify_sector(c)
        .critical_energies
        .iter()
        .filter(|x| x.kind == CriticalKind::EsqptLogDivergence)
        .map(|x| x.epsilon)
        .collect()
}

/// ρ_sc evaluator with the divergent energies computed once.
#[derive(Debug, Clone)]
pub struct DosModel {
    pub space: SpinSpace,
    pub couplings: CouplingParams,
    /// ε values of the saddle points.
    pub divergent_at: Vec<f64>,
}

impl DosModel {
    pub fn new(space: &SpinSpace, couplings: &CouplingParams) -> Self {
        Self { space: *space, couplings: *couplings, divergent_at: critical_list(couplings) }
    }

    pub fn rho(&self, energy: f64) -> Result<DosValue> {
        dos_with(energy, &self.space, &self.couplings, &self.divergent_at)
    }

    pub fn count(&self, energy: f64) -> f64 {
        semiclassical_count(energy, &self.space, &self.couplings)
    }
}

/// ρ_sc(E) = (1/(2πε0)) ∫ dφ Σ_roots 1/sqrt(D(φ, ε)), ε = E/(Jε0).
pub fn semiclassical_dos(energy: f64, space: &SpinSpace, c: &CouplingParams) -> Result<DosValue> {
    let critical = critical_list(c);
    dos_with(energy, space, c, &critical)
}

fn dos_with(energy: f64, space: &SpinSpace, c: &CouplingParams, divergent_at: &[f64]) -> Result<DosValue> {
    if !energy.is_finite() {
        return Err(LmgError::InvalidArgument("energy must be finite".into()));
    }
    let epsilon = energy / (space.j() * c.epsilon0);
    if divergent_at.iter().any(|&e| (e - epsilon).abs() <= 1e-12 * e.abs().max(1.0)) {
        return Ok(DosValue { rho: DIVERGENCE_CAP, divergent: true });
    }
    let integrand = |a: f64| {
        let d = 1.0 - a * (2.0 * epsilon - a);
        if d <= 0.0 {
            return 0.0;
        }
        roots_for(epsilon, a).len() as f64 / d.sqrt()
    };
    let rho = full_turn(epsilon, c, integrand, 1e-10) / (2.0 * PI * c.epsilon0);
    if rho.is_nan() || rho >= DIVERGENCE_CAP {
        return Ok(DosValue { rho: DIVERGENCE_CAP, divergent: true });
    }
    Ok(DosValue { rho, divergent: false })
}

/// Measure of {z ∈ [−1, 1] : z + A(1−z²)/2 < ε}.
fn sublevel_length(epsilon: f64, a: f64) -> f64 {
    let mut cuts = vec![-1.0];
    cuts.extend(roots_for(epsilon, a));
    cuts.push(1.0);
    cuts.windows(2)
        .filter(|w| {
            let m = 0.5 * (w[0] + w[1]);
            m + a * (1.0 - m * m) / 2.0 < epsilon
        })
        .map(|w| w[1] - w[0])
        .sum()
}

/// Semiclassical number of states below E: (2J/4π)·area{h < ε}. Computed
/// from the level-set roots directly, independently of ρ_sc.
pub fn semiclassical_count(energy: f64, space: &SpinSpace, c: &CouplingParams) -> f64 {
    let epsilon = energy / (space.j() * c.epsilon0);
    let area = full_turn(epsilon, c, |a| sublevel_length(epsilon, a), 1e-11);
    2.0 * space.j() * area / (4.0 * PI)
}
