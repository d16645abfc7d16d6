use serde::{Deserialize, Serialize};

use crate::spin::CouplingParams;

use super::fixed_points::{find_fixed_points, Stability};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    I,
    II,
    III,
    IV,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalKind {
    Ground,
    /// Saddle point: logarithmic divergence of the level density.
    EsqptLogDivergence,
    /// Non-global extremum: a family of orbits ends and the density jumps.
    EdosDiscontinuity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalEnergy {
    pub kind: CriticalKind,
    pub epsilon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorLabel {
    pub sector: Sector,
    /// Some |γ| sits on the boundary value 1.
    pub degenerate: bool,
    /// Ascending in ε; the global maximum is not listed.
    pub critical_energies: Vec<CriticalEnergy>,
    pub gamma_m: f64,
    pub gamma_big_m: f64,
}

impl SectorLabel {
    pub fn first(&self, kind: CriticalKind) -> Option<f64> {
        self.critical_energies.iter().find(|c| c.kind == kind).map(|c| c.epsilon)
    }
}

/// Sector by coupling magnitudes, critical energies from the fixed points.
pub fn classify_sector(c: &CouplingParams) -> SectorLabel {
    let (gx, gy) = (c.gamma_x, c.gamma_y);
    let big_x = gx.abs() > 1.0;
    let big_y = gy.abs() > 1.0;
    let sector = if !big_x && !big_y {
        Sector::I
    } else if big_x && big_y && gx.signum() == gy.signum() {
        Sector::III
    } else if big_x && big_y {
        Sector::IV
    } else {
        Sector::II
    };
    let degenerate = (gx.abs() - 1.0).abs() < 1e-12 || (gy.abs() - 1.0).abs() < 1e-12;

    let fps = find_fixed_points(c);
    let e_min = fps.iter().map(|f| f.energy).fold(f64::INFINITY, f64::min);
    let e_max = fps.iter().map(|f| f.energy).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-10;
    let mut crit: Vec<CriticalEnergy> = Vec::new();
    for f in &fps {
        let kind = match f.stability {
            Stability::Minimum if (f.energy - e_min).abs() < tol => CriticalKind::Ground,
            Stability::Saddle => CriticalKind::EsqptLogDivergence,
            Stability::Maximum if (f.energy - e_max).abs() < tol => continue,
            Stability::Minimum | Stability::Maximum => CriticalKind::EdosDiscontinuity,
            Stability::Degenerate => continue,
        };
        if !crit.iter().any(|x| x.kind == kind && (x.epsilon - f.energy).abs() < tol) {
            crit.push(CriticalEnergy { kind, epsilon: f.energy });
        }
    }
    crit.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let gamma_m = gx.min(gy);
    let gamma_big_m = gx.signum() * gx.abs().min(gy.abs());
    SectorLabel { sector, degenerate, critical_energies: crit, gamma_m, gamma_big_m }
}
