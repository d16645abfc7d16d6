use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{LmgError, Result};
use crate::spin::CouplingParams;

use super::energy::anisotropy;
use super::PhasePoint;

pub const DEFAULT_BRANCH_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// The orbit family closer to the south pole when two coexist.
    Inner,
    Outer,
    /// The only orbit through its φ range (full circle or closed lobe).
    Single,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Inner => "inner",
            Branch::Outer => "outer",
            Branch::Single => "single",
        }
    }
}

/// Closed level-set curve h = ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalTrajectory {
    pub epsilon: f64,
    pub branch: Branch,
    /// Ordered points around the closed curve (last joins back to first).
    pub samples: Vec<PhasePoint>,
    /// φ intervals covered; a full turn is [0, 2π).
    pub phi_domain: Vec<(f64, f64)>,
}

impl ClassicalTrajectory {
    /// Euclidean length in the (Q, P) plane.
    pub fn length(&self) -> f64 {
        let n = self.samples.len();
        (0..n)
            .map(|i| {
                let a = self.samples[i];
                let b = self.samples[(i + 1) % n];
                (b.q - a.q).hypot(b.p - a.p)
            })
            .sum()
    }

    pub fn wraps_around(&self) -> bool {
        self.phi_domain.len() == 1 && (self.phi_domain[0].1 - self.phi_domain[0].0 - TAU).abs() < 1e-12
    }

    pub fn parity_image(&self) -> Self {
        Self {
            epsilon: self.epsilon,
            branch: self.branch,
            samples: self.samples.iter().map(|p| p.parity_image()).collect(),
            phi_domain: self.phi_domain.iter().map(|&(a, b)| (a + PI, b + PI)).collect(),
        }
    }

    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.samples.reverse();
        out
    }

    pub fn centroid(&self) -> (f64, f64) {
        let n = self.samples.len() as f64;
        let q = self.samples.iter().map(|p| p.q).sum::<f64>() / n;
        let p = self.samples.iter().map(|p| p.p).sum::<f64>() / n;
        (q, p)
    }

    /// `n` points equally spaced in arclength along the closed polyline.
    pub fn resample_arclength(&self, n: usize) -> Result<Vec<PhasePoint>> {
        let m = self.samples.len();
        let total = self.length();
        if m < 3 || total.is_nan() || total <= 0.0 {
            return Err(LmgError::InvalidArgument("degenerate orbit with zero length".into()));
        }
        let mut out = Vec::with_capacity(n);
        let step = total / n as f64;
        let mut seg = 0usize;
        let mut seg_start = 0.0;
        let seg_len = |i: usize| {
            let a = self.samples[i];
            let b = self.samples[(i + 1) % m];
            (b.q - a.q).hypot(b.p - a.p)
        };
        let mut len = seg_len(0);
        for i in 0..n {
            let s = i as f64 * step;
            while seg_start + len < s && seg + 1 < m {
                seg_start += len;
                seg += 1;
                len = seg_len(seg);
            }
            let a = self.samples[seg];
            let b = self.samples[(seg + 1) % m];
            let f = if len > 0.0 { ((s - seg_start) / len).clamp(0.0, 1.0) } else { 0.0 };
            out.push(PhasePoint { q: a.q + f * (b.q - a.q), p: a.p + f * (b.p - a.p) });
        }
        Ok(out)
    }
}

/// Admissible roots z ∈ [−1, 1] of h(z, φ) = ε, ascending. Uses the
/// cancellation-free pair (1+√D)/A and (2ε−A)/(1+√D); as A → 0 the second
/// tends to the linear solution z = ε.
pub fn level_set_roots(epsilon: f64, phi: f64, c: &CouplingParams) -> Vec<f64> {
    let a = anisotropy(phi, c);
    roots_for(epsilon, a)
}

pub(crate) fn roots_for(epsilon: f64, a: f64) -> Vec<f64> {
    let d = 1.0 - a * (2.0 * epsilon - a);
    let mut out = Vec::with_capacity(2);
    if d < 0.0 {
        return out;
    }
    let sq = d.sqrt();
    let stable = (2.0 * epsilon - a) / (1.0 + sq);
    let tol = 1e-14;
    if stable.abs() <= 1.0 + tol {
        out.push(stable.clamp(-1.0, 1.0));
    }
    if a != 0.0 {
        let far = (1.0 + sq) / a;
        if far.abs() <= 1.0 + tol && (d > 0.0 || out.is_empty()) {
            out.push(far.clamp(-1.0, 1.0));
        }
    }
    if out.len() == 2 && out[0] > out[1] {
        out.swap(0, 1);
    }
    out
}

fn count(epsilon: f64, phi: f64, c: &CouplingParams) -> usize {
    let a = anisotropy(phi, c);
    let d = 1.0 - a * (2.0 * epsilon - a);
    if d < 0.0 {
        return 0;
    }
    // the double root at D = 0 belongs to both arcs meeting there
    let r = roots_for(epsilon, a);
    if d == 0.0 && r.len() == 1 {
        return 2;
    }
    r.len()
}

/// Closed level-set curves h = ε grouped into connected branches.
pub fn trajectory_branches(epsilon: f64, c: &CouplingParams, samples: usize) -> Result<Vec<ClassicalTrajectory>> {
    if !epsilon.is_finite() {
        return Err(LmgError::InvalidArgument("energy must be finite".into()));
    }
    let samples = samples.max(16);
    let scan = 4096;
    let grid: Vec<f64> = (0..scan).map(|i| TAU * i as f64 / scan as f64).collect();
    let counts: Vec<usize> = grid.iter().map(|&phi| count(epsilon, phi, c)).collect();
    let full = TAU;

    if counts.iter().all(|&n| n == counts[0]) {
        let phis: Vec<f64> = (0..samples).map(|i| full * i as f64 / samples as f64).collect();
        let domain = vec![(0.0, full)];
        return Ok(match counts[0] {
            0 => Vec::new(),
            1 => {
                let pts =
                    phis.iter().map(|&phi| PhasePoint::from_z_phi(level_set_roots(epsilon, phi, c)[0], phi)).collect();
                vec![ClassicalTrajectory { epsilon, branch: Branch::Single, samples: pts, phi_domain: domain }]
            }
            _ => {
                let mut inner = Vec::with_capacity(samples);
                let mut outer = Vec::with_capacity(samples);
                for &phi in &phis {
                    let r = level_set_roots(epsilon, phi, c);
                    inner.push(PhasePoint::from_z_phi(r[0], phi));
                    outer.push(PhasePoint::from_z_phi(r[r.len() - 1], phi));
                }
                vec![
                    ClassicalTrajectory { epsilon, branch: Branch::Inner, samples: inner, phi_domain: domain.clone() },
                    ClassicalTrajectory { epsilon, branch: Branch::Outer, samples: outer, phi_domain: domain },
                ]
            }
        });
    }

    if counts.contains(&1) {
        return Err(LmgError::NoTrajectory(format!("inconsistent root structure at ε = {epsilon}")));
    }

    // Closed lobes: arcs of φ with two roots joined at D = 0 turning points.
    let start = counts.iter().position(|&n| n == 0).unwrap();
    let mut arcs = Vec::new();
    let mut i = 0;
    while i < scan {
        let idx = (start + i) % scan;
        if counts[idx] == 2 {
            let first = i;
            while i < scan && counts[(start + i) % scan] == 2 {
                i += 1;
            }
            let last = i - 1;
            let phi_in_first = grid[start] + TAU * first as f64 / scan as f64;
            let phi_in_last = grid[start] + TAU * last as f64 / scan as f64;
            let step = TAU / scan as f64;
            let a = turning_point(epsilon, c, phi_in_first - step, phi_in_first);
            let b = turning_point(epsilon, c, phi_in_last + step, phi_in_last);
            arcs.push((a, b));
        } else {
            i += 1;
        }
    }

    let half = samples / 2;
    Ok(arcs
        .into_iter()
        .map(|(a, b)| {
            let mut pts = Vec::with_capacity(2 * half);
            let at = |u: f64| a + (b - a) * u * u * (3.0 - 2.0 * u);
            for s in 0..half {
                let phi = at(s as f64 / half as f64);
                let r = lobe_roots(epsilon, phi, c);
                pts.push(PhasePoint::from_z_phi(r.1, phi));
            }
            for s in 0..half {
                let phi = at(1.0 - s as f64 / half as f64);
                let r = lobe_roots(epsilon, phi, c);
                pts.push(PhasePoint::from_z_phi(r.0, phi));
            }
            ClassicalTrajectory { epsilon, branch: Branch::Single, samples: pts, phi_domain: vec![(a, b)] }
        })
        .collect())
}

/// Both roots on a lobe, clamping D at the turning points.
fn lobe_roots(epsilon: f64, phi: f64, c: &CouplingParams) -> (f64, f64) {
    let a = anisotropy(phi, c);
    let d = (1.0 - a * (2.0 * epsilon - a)).max(0.0);
    let sq = d.sqrt();
    let r1 = ((2.0 * epsilon - a) / (1.0 + sq)).clamp(-1.0, 1.0);
    let r2 = if a != 0.0 { ((1.0 + sq) / a).clamp(-1.0, 1.0) } else { r1 };
    (r1.min(r2), r1.max(r2))
}

/// Bisects for D = 0 between φ_out (D < 0) and φ_in (D ≥ 0).
fn turning_point(epsilon: f64, c: &CouplingParams, mut phi_out: f64, mut phi_in: f64) -> f64 {
    let d = |phi: f64| {
        let a = anisotropy(phi, c);
        1.0 - a * (2.0 * epsilon - a)
    };
    for _ in 0..100 {
        let mid = 0.5 * (phi_out + phi_in);
        if mid == phi_out || mid == phi_in {
            break;
        }
        if d(mid) >= 0.0 {
            phi_in = mid;
        } else {
            phi_out = mid;
        }
    }
    phi_in
}
