use serde::{Deserialize, Serialize};

use crate::spin::CouplingParams;

use super::energy::{classical_energy, energy_gradient, energy_hessian};
use super::PhasePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stability {
    Minimum,
    Maximum,
    Saddle,
    /// Singular Hessian (boundary couplings, isotropic rings).
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub location: PhasePoint,
    pub stability: Stability,
    pub energy: f64,
    /// The north pole is the whole boundary circle of the chart; its
    /// location is reported as (2, 0).
    pub north_pole: bool,
}

fn classify(h: [[f64; 2]; 2]) -> Stability {
    let tr = h[0][0] + h[1][1];
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    let disc = ((h[0][0] - h[1][1]).powi(2) + 4.0 * h[0][1] * h[1][0]).max(0.0).sqrt();
    let l1 = 0.5 * (tr - disc);
    let l2 = 0.5 * (tr + disc);
    let scale = 1e-9 * (1.0 + l1.abs().max(l2.abs()));
    if l1.abs() < scale || l2.abs() < scale || det.abs() < scale {
        Stability::Degenerate
    } else if l1 > 0.0 {
        Stability::Minimum
    } else if l2 < 0.0 {
        Stability::Maximum
    } else {
        Stability::Saddle
    }
}

fn newton(mut x: PhasePoint, c: &CouplingParams) -> Option<PhasePoint> {
    for _ in 0..100 {
        let (gq, gp) = energy_gradient(&x, c);
        if gq.hypot(gp) < 1e-14 {
            return Some(x);
        }
        let h = energy_hessian(&x, c);
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det.abs() < 1e-300 {
            return None;
        }
        let dq = (h[1][1] * gq - h[0][1] * gp) / det;
        let dp = (h[0][0] * gp - h[1][0] * gq) / det;
        x = PhasePoint { q: x.q - dq, p: x.p - dp };
        if !(x.q.is_finite() && x.p.is_finite()) || x.radius_sqr() > 4.0 {
            return None;
        }
    }
    let (gq, gp) = energy_gradient(&x, c);
    (gq.hypot(gp) < 1e-11).then_some(x)
}

/// Critical points of h: Newton from seeds on the symmetry axes and a coarse
/// disc grid, plus the north pole checked in its own chart.
pub fn find_fixed_points(c: &CouplingParams) -> Vec<FixedPoint> {
    let mut seeds = Vec::new();
    let n_axis = 40;
    for i in 0..=n_axis {
        let s = -1.98 + 3.96 * i as f64 / n_axis as f64;
        seeds.push(PhasePoint { q: s, p: 0.0 });
        seeds.push(PhasePoint { q: 0.0, p: s });
    }
    let n_grid = 12;
    for i in 0..n_grid {
        for j in 0..n_grid {
            let q = -1.9 + 3.8 * (i as f64 + 0.5) / n_grid as f64;
            let p = -1.9 + 3.8 * (j as f64 + 0.5) / n_grid as f64;
            if q * q + p * p < 3.9 {
                seeds.push(PhasePoint { q, p });
            }
        }
    }
    let mut found: Vec<FixedPoint> = Vec::new();
    for seed in seeds {
        let Some(x) = newton(seed, c) else { continue };
        if x.radius_sqr() > 4.0 - 1e-9 {
            continue;
        }
        if found.iter().any(|f| (f.location.q - x.q).hypot(f.location.p - x.p) < 1e-7) {
            continue;
        }
        found.push(FixedPoint {
            location: x,
            stability: classify(energy_hessian(&x, c)),
            energy: classical_energy(&x, c),
            north_pole: false,
        });
    }
    // Near z = 1, h ≈ 1 + (γx−1)X²/2 + (γy−1)Y²/2 in tangent coordinates.
    let north = classify([[c.gamma_x - 1.0, 0.0], [0.0, c.gamma_y - 1.0]]);
    found.push(FixedPoint { location: PhasePoint { q: 2.0, p: 0.0 }, stability: north, energy: 1.0, north_pole: true });
    found.sort_by(|a, b| {
        a.energy
            .total_cmp(&b.energy)
            .then(a.location.q.total_cmp(&b.location.q))
            .then(a.location.p.total_cmp(&b.location.p))
    });
    found
}
