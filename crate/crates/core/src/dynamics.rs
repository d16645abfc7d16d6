//! Quench dynamics of Bloch coherent states: exact evolution in the
//! eigenbasis and its truncated Wigner (TWA) classical counterpart.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{
    classical_energy, classify_sector, energy_gradient, flow_with, level_set_roots, trajectory_branches, Branch,
    ClassicalTrajectory, CriticalKind, FlowOptions, PhasePoint, DEFAULT_BRANCH_SAMPLES,
};
use crate::coherent::{jz_over_j, CoherentState};
use crate::error::{LmgError, Result};
use crate::phase_space::LineIntegrator;
use crate::spectral::{eigencomponents, predict_crossing_coupling, SpectralData};
use crate::spin::{build_parity_blocks, CouplingParams, Parity, SpinSpace};

/// Exact evolution of a coherent state, kept in eigen-components.
#[derive(Debug, Clone)]
pub struct QuantumEvolution {
    spectra: SpectralData,
    /// Per parity: c_k = ⟨E_k|α₀⟩.
    amplitudes: [Vec<Complex64>; 2],
    pub times: Vec<f64>,
    pub sp: Vec<f64>,
    pub jz: Vec<f64>,
}

fn sector_index(p: Parity) -> usize {
    match p {
        Parity::Positive => 0,
        Parity::Negative => 1,
    }
}

impl QuantumEvolution {
    /// |ψ(t)⟩ = Σ_k c_k e^(−iE_k t)|E_k⟩ on the full m basis.
    pub fn state_at(&self, t: f64) -> Vec<Complex64> {
        let dim = self.spectra.space.dim();
        let mut psi = vec![Complex64::new(0.0, 0.0); dim];
        for p in Parity::both() {
            let sec = self.spectra.sector(p);
            let amps = &self.amplitudes[sector_index(p)];
            for k in 1..=sec.len() {
                let c = amps[k - 1] * Complex64::from_polar(1.0, -sec.energy(k) * t);
                for (&i, &v) in sec.basis.iter().zip(sec.vector(k)) {
                    psi[i] += c * v;
                }
            }
        }
        psi
    }

    /// Σ_k |c_k|² over both sectors.
    pub fn total_weight(&self) -> f64 {
        self.amplitudes.iter().flatten().map(|c| c.norm_sqr()).sum()
    }

    /// Σ_k |c_k e^(−iE_k t)|², unitarity check.
    pub fn norm_at(&self, t: f64) -> f64 {
        let mut s = 0.0;
        for p in Parity::both() {
            let sec = self.spectra.sector(p);
            for (k, c) in self.amplitudes[sector_index(p)].iter().enumerate() {
                s += (c * Complex64::from_polar(1.0, -sec.energy(k + 1) * t)).norm_sqr();
            }
        }
        s
    }

    pub fn spectra(&self) -> &SpectralData {
        &self.spectra
    }
}

/// SP(t) = |Σ_k |c_k|² e^(−iE_k t)|² and ⟨Jz⟩(t)/J at the given times.
/// The initial value SP(0) = 1 is set exactly.
pub fn evolve_quantum(alpha0: &CoherentState, spectra: &SpectralData, times: &[f64]) -> Result<QuantumEvolution> {
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(LmgError::InvalidArgument("times must be ascending".into()));
    }
    if times.first().is_some_and(|&t| t < 0.0) {
        return Err(LmgError::InvalidArgument("times must start at or after 0".into()));
    }
    let comps = eigencomponents(alpha0, spectra)?;
    let mut amplitudes = [Vec::new(), Vec::new()];
    for c in &comps {
        amplitudes[sector_index(c.parity)].push(c.amplitude);
    }
    let mut evo = QuantumEvolution {
        spectra: spectra.clone(),
        amplitudes,
        times: times.to_vec(),
        sp: Vec::new(),
        jz: Vec::new(),
    };
    let total = evo.total_weight();
    let space = spectra.space;
    let (sp, jz): (Vec<f64>, Vec<f64>) = times
        .par_iter()
        .map(|&t| {
            let mut amp = Complex64::new(0.0, 0.0);
            for c in &comps {
                amp += c.amplitude.norm_sqr() * Complex64::from_polar(1.0, -c.energy * t);
            }
            let sp = if t == 0.0 { 1.0 } else { (amp.norm_sqr() / (total * total)).clamp(0.0, 1.0) };
            let psi = evo.state_at(t);
            (sp, (jz_over_j(&space, &psi) / total).clamp(-1.0, 1.0))
        })
        .unzip();
    evo.sp = sp;
    evo.jz = jz;
    Ok(evo)
}

/// Exact d⟨Jz⟩/dt / J at t = 0, i⟨[H, Jz]⟩/J, from the tridiagonal blocks.
pub fn ehrenfest_jz_slope(alpha0: &CoherentState, couplings: &CouplingParams) -> Result<f64> {
    let space = alpha0.space;
    let (bp, bn) = build_parity_blocks(&space, couplings)?;
    let a = &alpha0.amplitudes;
    let mut s = 0.0;
    for b in [&bp, &bn] {
        let idx = b.basis_indices();
        for (i, &o) in b.offdiag.iter().enumerate() {
            // ⟨m|H|m+2⟩ = o contributes −4·o·Im(conj(a_m)·a_{m+2})
            s += -4.0 * o * (a[idx[i]].conj() * a[idx[i + 1]]).im;
        }
    }
    Ok(s / space.j())
}

/// dz/dt of the classical flow at a point.
pub fn classical_jz_slope(point: &PhasePoint, couplings: &CouplingParams) -> f64 {
    let (gq, gp) = energy_gradient(point, couplings);
    point.q * gp - point.p * gq
}

/// Points drawn from w(u) = (J/π)e^(−JΘ²).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WignerSample {
    pub center: PhasePoint,
    pub points: Vec<PhasePoint>,
    /// Geodesic displacements beyond π, clipped to π.
    pub clipped: usize,
    /// Sampled Θ² values.
    pub theta_sqr: Vec<f64>,
}

/// Isotropic tangent-plane Gaussian (variance 1/(2J) per direction) at the
/// centre, mapped to the sphere with the geodesic exponential map.
pub fn sample_wigner(center: &PhasePoint, space: &SpinSpace, samples: usize, seed: u64) -> Result<WignerSample> {
    let j = space.j();
    if j < 10.0 {
        return Err(LmgError::InvalidArgument(format!("Gaussian Wigner sampling needs J ≥ 10, got {j}")));
    }
    let n0 = center.unit_vector();
    let helper = if n0[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
    let dot = helper[0] * n0[0] + helper[1] * n0[1] + helper[2] * n0[2];
    let mut e1 = [helper[0] - dot * n0[0], helper[1] - dot * n0[1], helper[2] - dot * n0[2]];
    let norm = (e1[0] * e1[0] + e1[1] * e1[1] + e1[2] * e1[2]).sqrt();
    e1.iter_mut().for_each(|x| *x /= norm);
    let e2 = [n0[1] * e1[2] - n0[2] * e1[1], n0[2] * e1[0] - n0[0] * e1[2], n0[0] * e1[1] - n0[1] * e1[0]];

    let normal = Normal::new(0.0, (0.5 / j).sqrt()).map_err(|e| LmgError::InvalidArgument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(samples);
    let mut theta_sqr = Vec::with_capacity(samples);
    let mut clipped = 0;
    for _ in 0..samples {
        let g1: f64 = normal.sample(&mut rng);
        let g2: f64 = normal.sample(&mut rng);
        let mut r = g1.hypot(g2);
        if r > PI {
            r = PI;
            clipped += 1;
        }
        let (s, c) = r.sin_cos();
        let (u1, u2) = if r > 0.0 { (g1 / g1.hypot(g2), g2 / g1.hypot(g2)) } else { (0.0, 0.0) };
        let v = [
            c * n0[0] + s * (u1 * e1[0] + u2 * e2[0]),
            c * n0[1] + s * (u1 * e1[1] + u2 * e2[1]),
            c * n0[2] + s * (u1 * e1[2] + u2 * e2[2]),
        ];
        points.push(PhasePoint::from_unit_vector(v));
        theta_sqr.push(r * r);
    }
    Ok(WignerSample { center: *center, points, clipped, theta_sqr })
}

/// w_{α₀}(u) = (J/π) e^(−JΘ²).
pub fn wigner_weight(center: &PhasePoint, point: &PhasePoint, space: &SpinSpace) -> f64 {
    let j = space.j();
    let th = center.sphere_angle(point);
    j / PI * (-j * th * th).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwaConfig {
    pub samples: usize,
    pub seed: u64,
    pub rtol: f64,
    pub atol: f64,
    /// Rolling-average window in units of 1/ε0.
    pub window: f64,
}

impl Default for TwaConfig {
    fn default() -> Self {
        Self { samples: 5000, seed: 7, rtol: 1e-10, atol: 1e-10, window: 10.0 }
    }
}

/// Ensemble estimates with Monte Carlo standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwaResult {
    pub times: Vec<f64>,
    pub sp: Vec<f64>,
    pub sp_err: Vec<f64>,
    pub jz: Vec<f64>,
    pub jz_err: Vec<f64>,
    /// Trajectories whose integration failed.
    pub dropped: usize,
    pub used: usize,
}

/// Evolves every sample point with the classical flow and averages
/// SP_cl(t) = (2π/J)·mean w(φᵗ(u)) and jz_cl(t) = mean z(φᵗ(u)).
pub fn twa(
    sample: &WignerSample,
    space: &SpinSpace,
    couplings: &CouplingParams,
    times: &[f64],
    cfg: &TwaConfig,
) -> Result<TwaResult> {
    if times.is_empty() {
        return Err(LmgError::InvalidArgument("empty time grid".into()));
    }
    let nt = times.len();
    let opts = FlowOptions { rtol: cfg.rtol, atol: cfg.atol, ..FlowOptions::default() };
    let j = space.j();
    let center = sample.center;
    struct Acc {
        w: Vec<f64>,
        w2: Vec<f64>,
        z: Vec<f64>,
        z2: Vec<f64>,
        used: usize,
        dropped: usize,
    }
    let chunk = 32;
    let parts: Vec<Acc> = sample
        .points
        .par_chunks(chunk)
        .map(|pts| {
            let mut acc =
                Acc { w: vec![0.0; nt], w2: vec![0.0; nt], z: vec![0.0; nt], z2: vec![0.0; nt], used: 0, dropped: 0 };
            let mut wbuf = vec![0.0; nt];
            let mut zbuf = vec![0.0; nt];
            for p in pts {
                let start = if p.radius_sqr() >= 4.0 {
                    let s = (4.0 * (1.0 - 1e-15) / p.radius_sqr()).sqrt();
                    PhasePoint { q: p.q * s, p: p.p * s }
                } else {
                    *p
                };
                let ok = flow_with(&start, times, couplings, &opts, |i, x| {
                    let th = center.sphere_angle(x);
                    // (2π/J)·w = 2 e^(−JΘ²)
                    wbuf[i] = 2.0 * (-j * th * th).exp();
                    zbuf[i] = x.z();
                });
                if ok.is_err() {
                    acc.dropped += 1;
                    continue;
                }
                acc.used += 1;
                for i in 0..nt {
                    acc.w[i] += wbuf[i];
                    acc.w2[i] += wbuf[i] * wbuf[i];
                    acc.z[i] += zbuf[i];
                    acc.z2[i] += zbuf[i] * zbuf[i];
                }
            }
            acc
        })
        .collect();
    let mut tot = Acc { w: vec![0.0; nt], w2: vec![0.0; nt], z: vec![0.0; nt], z2: vec![0.0; nt], used: 0, dropped: 0 };
    for a in &parts {
        tot.used += a.used;
        tot.dropped += a.dropped;
        for i in 0..nt {
            tot.w[i] += a.w[i];
            tot.w2[i] += a.w2[i];
            tot.z[i] += a.z[i];
            tot.z2[i] += a.z2[i];
        }
    }
    if tot.used < 2 {
        return Err(LmgError::EnsembleFailure { used: tot.used, requested: sample.points.len() });
    }
    let m = tot.used as f64;
    let stats = |s: &[f64], s2: &[f64]| -> (Vec<f64>, Vec<f64>) {
        s.iter()
            .zip(s2)
            .map(|(a, b)| {
                let mean = a / m;
                let var = ((b / m - mean * mean) * m / (m - 1.0)).max(0.0);
                (mean, (var / m).sqrt())
            })
            .unzip()
    };
    let (sp, sp_err) = stats(&tot.w, &tot.w2);
    let (jz, jz_err) = stats(&tot.z, &tot.z2);
    Ok(TwaResult { times: times.to_vec(), sp, sp_err, jz, jz_err, dropped: tot.dropped, used: tot.used })
}

/// Classical survival probability series with its standard error.
pub fn twa_sp(
    sample: &WignerSample,
    space: &SpinSpace,
    couplings: &CouplingParams,
    times: &[f64],
    cfg: &TwaConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = twa(sample, space, couplings, times, cfg)?;
    Ok((r.sp, r.sp_err))
}

/// Classical ⟨Jz⟩/J series with its standard error.
pub fn twa_jz(
    sample: &WignerSample,
    space: &SpinSpace,
    couplings: &CouplingParams,
    times: &[f64],
    cfg: &TwaConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let r = twa(sample, space, couplings, times, cfg)?;
    Ok((r.jz, r.jz_err))
}

/// Centered moving mean over |t − tᵢ| ≤ w/2, window truncated at the ends.
pub fn rolling_average(times: &[f64], series: &[f64], window: f64) -> Vec<f64> {
    assert_eq!(times.len(), series.len(), "times and series differ in length");
    let n = series.len();
    let half = 0.5 * window;
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + series[i];
    }
    let (mut lo, mut hi) = (0usize, 0usize);
    (0..n)
        .map(|i| {
            let eps = 1e-9 * window.abs().max(1e-300);
            while times[lo] < times[i] - half - eps {
                lo += 1;
            }
            while hi < n && times[hi] <= times[i] + half + eps {
                hi += 1;
            }
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// The eight quench setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioKind {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
}

impl ScenarioKind {
    pub fn all() -> [ScenarioKind; 8] {
        use ScenarioKind::*;
        [A, B, C, D, E, F, G, H]
    }

    pub fn letter(self) -> char {
        use ScenarioKind::*;
        match self {
            A => 'a',
            B => 'b',
            C => 'c',
            D => 'd',
            E => 'e',
            F => 'f',
            G => 'g',
            H => 'h',
        }
    }

    pub fn from_letter(c: char) -> Result<Self> {
        ScenarioKind::all()
            .into_iter()
            .find(|k| k.letter() == c.to_ascii_lowercase())
            .ok_or_else(|| LmgError::InvalidArgument(format!("unknown scenario '{c}', expected a-h")))
    }

    /// a and f start next to the separatrix at the avoided-crossing coupling.
    pub fn expects_tunneling(self) -> bool {
        matches!(self, ScenarioKind::A | ScenarioKind::F)
    }
}

/// Initial condition and couplings of one quench.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub space: SpinSpace,
    pub couplings: CouplingParams,
    /// N used in the crossing condition for the coupling.
    pub crossing_n: u32,
    pub epsilon: f64,
    pub esqpt_epsilon: f64,
    pub start: PhasePoint,
    pub branch: Branch,
    /// Disconnected orbit at the same energy, if any.
    pub partner: Option<ClassicalTrajectory>,
    pub t_max: f64,
}

/// N of the avoided-crossing coupling: 2J − N = 28 at J = 100, scaled to
/// 0.14·2J (rounded to an even number) for other J.
pub fn default_avoided_n(space: &SpinSpace) -> u32 {
    let two_j = space.twice_j();
    let gap = (0.07 * two_j as f64).round() as u32 * 2;
    two_j - gap.max(2)
}

/// Couplings and starting point for scenario `kind` at γy = ratio·γx < 0.
///
/// a–d start on the outer orbit of the intermediate window, f and g on the
/// inner one, each at the P = 0 crossing with Q > 0: a, c, f at ε_ESQPT + 0.05
/// and b, d, g at ε = −1.3. c and d use the real-crossing coupling, the rest
/// the avoided-crossing one. e sits halfway between the ground and ESQPT
/// energies at the Q = 0 outer crossing of the P > 0 lobe, with the mirrored
/// lobe as partner. h starts at ε = −0.5 where only one orbit exists.
pub fn scenario_builder(kind: ScenarioKind, space: &SpinSpace, ratio: f64) -> Result<Scenario> {
    use ScenarioKind::*;
    let n_ac = default_avoided_n(space);
    let n = if matches!(kind, C | D) { n_ac + 1 } else { n_ac };
    let pred = predict_crossing_coupling(space, ratio, n, true)?;
    let couplings = CouplingParams::new(1.0, pred.gamma_x, pred.gamma_y)?;
    let label = classify_sector(&couplings);
    let esqpt = label
        .first(CriticalKind::EsqptLogDivergence)
        .ok_or_else(|| LmgError::InvalidArgument("couplings have no ESQPT".into()))?;
    let ground = label.first(CriticalKind::Ground).unwrap_or(-1.0);
    let (epsilon, branch, partner_branch) = match kind {
        A | C => (esqpt + 0.05, Branch::Outer, Some(Branch::Inner)),
        B | D => (-1.3, Branch::Outer, Some(Branch::Inner)),
        F => (esqpt + 0.05, Branch::Inner, Some(Branch::Outer)),
        G => (-1.3, Branch::Inner, Some(Branch::Outer)),
        H => (-0.5, Branch::Single, None),
        E => (0.5 * (ground + esqpt), Branch::Single, Some(Branch::Single)),
    };
    let orbits = trajectory_branches(epsilon, &couplings, DEFAULT_BRANCH_SAMPLES)?;
    let infeasible = || {
        LmgError::NoTrajectory(format!("scenario {} has no {} orbit at ε = {epsilon}", kind.letter(), branch.label()))
    };

    let (start, partner) = if kind == E {
        // φ = −π/2 is the positive P half-axis
        let roots = level_set_roots(epsilon, -0.5 * PI, &couplings);
        let z = *roots.last().ok_or_else(infeasible)?;
        let start = PhasePoint::from_z_phi(z, -0.5 * PI);
        let partner = orbits.iter().find(|o| o.centroid().1 < 0.0).cloned().ok_or_else(infeasible)?;
        (PhasePoint { q: 0.0, p: start.p }, Some(partner))
    } else {
        let roots = level_set_roots(epsilon, 0.0, &couplings);
        let z = match branch {
            Branch::Inner if roots.len() == 2 => roots[0],
            Branch::Outer if roots.len() == 2 => roots[1],
            Branch::Single if roots.len() == 1 => roots[0],
            _ => return Err(infeasible()),
        };
        let start = PhasePoint { q: (2.0 * (1.0 + z)).sqrt(), p: 0.0 };
        let partner = match partner_branch {
            Some(b) => Some(orbits.iter().find(|o| o.branch == b).cloned().ok_or_else(infeasible)?),
            None => None,
        };
        (start, partner)
    };
    debug_assert!((classical_energy(&start, &couplings) - epsilon).abs() < 1e-9);
    Ok(Scenario {
        kind,
        space: *space,
        couplings,
        crossing_n: n,
        epsilon,
        esqpt_epsilon: esqpt,
        start,
        branch,
        partner,
        t_max: if kind == E { 200.0 } else { 50.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchConfig {
    pub t_max: f64,
    pub dt: f64,
    pub twa: TwaConfig,
    pub line_integral: bool,
}

impl Default for QuenchConfig {
    fn default() -> Self {
        Self { t_max: 50.0, dt: 0.05, twa: TwaConfig::default(), line_integral: true }
    }
}

impl QuenchConfig {
    pub fn times(&self) -> Vec<f64> {
        let n = (self.t_max / self.dt).round() as usize;
        (0..=n).map(|i| i as f64 * self.dt).collect()
    }
}

/// Quantum and TWA time series of one quench.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchResult {
    pub times: Vec<f64>,
    pub sp_quantum: Vec<f64>,
    pub jz_quantum: Vec<f64>,
    pub sp_classical: Vec<f64>,
    pub sp_classical_err: Vec<f64>,
    pub jz_classical: Vec<f64>,
    pub jz_classical_err: Vec<f64>,
    pub window: f64,
    pub sp_quantum_avg: Vec<f64>,
    pub sp_classical_avg: Vec<f64>,
    pub jz_quantum_avg: Vec<f64>,
    pub jz_classical_avg: Vec<f64>,
    /// L(t) on the partner orbit.
    pub line_integral: Option<Vec<f64>>,
    pub line_nodes: usize,
    pub twa_dropped: usize,
    pub wigner_clipped: usize,
}

impl QuenchResult {
    /// Mean |rolling jz_q − rolling jz_c| over t ∈ [t0, t1].
    pub fn mean_jz_gap(&self, t0: f64, t1: f64) -> f64 {
        let sel: Vec<f64> = self
            .times
            .iter()
            .zip(self.jz_quantum_avg.iter().zip(&self.jz_classical_avg))
            .filter(|(t, _)| **t >= t0 - 1e-9 && **t <= t1 + 1e-9)
            .map(|(_, (q, c))| (q - c).abs())
            .collect();
        sel.iter().sum::<f64>() / sel.len().max(1) as f64
    }

    /// max L(t) for t ≤ t1; 0 without a partner orbit.
    pub fn max_line_integral(&self, t1: f64) -> f64 {
        match &self.line_integral {
            None => 0.0,
            Some(l) => self.times.iter().zip(l).filter(|(t, _)| **t <= t1 + 1e-9).map(|(_, v)| *v).fold(0.0, f64::max),
        }
    }
}

/// Runs both evolutions from α₀ = `start` and, if given, the line integral
/// of the evolved Husimi function over `partner`.
pub fn run_quench(
    space: &SpinSpace,
    couplings: &CouplingParams,
    start: &PhasePoint,
    partner: Option<&ClassicalTrajectory>,
    cfg: &QuenchConfig,
) -> Result<QuenchResult> {
    if !(cfg.dt > 0.0 && cfg.t_max >= 0.0) {
        return Err(LmgError::InvalidArgument("need dt > 0 and t_max ≥ 0".into()));
    }
    if cfg.twa.samples < 1000 {
        return Err(LmgError::InvalidArgument("TWA needs at least 1000 samples".into()));
    }
    if cfg.twa.window <= cfg.dt {
        return Err(LmgError::InvalidArgument("rolling window must exceed the time step".into()));
    }
    let times = cfg.times();
    let spectra = SpectralData::compute(space, couplings)?;
    let alpha0 = CoherentState::from_phase_point(space, start)?;
    let quantum = evolve_quantum(&alpha0, &spectra, &times)?;
    let sample = sample_wigner(start, space, cfg.twa.samples, cfg.twa.seed)?;
    let classical = twa(&sample, space, couplings, &times, &cfg.twa)?;

    let (line_integral, line_nodes) = match (partner, cfg.line_integral) {
        (Some(orbit), true) => {
            let probe_times: Vec<f64> = times.iter().step_by(100.max(times.len() / 20)).copied().collect();
            let probes: Vec<Vec<Complex64>> = probe_times.iter().map(|&t| quantum.state_at(t)).collect();
            let refs: Vec<&[Complex64]> = probes.iter().map(|p| p.as_slice()).collect();
            let li = LineIntegrator::converged(space, orbit, &refs, 0.005)?;
            let l: Vec<f64> = times.par_iter().map(|&t| li.integrate(&quantum.state_at(t))).collect();
            (Some(l), li.len())
        }
        _ => (None, 0),
    };

    let w = cfg.twa.window;
    Ok(QuenchResult {
        sp_quantum_avg: rolling_average(&times, &quantum.sp, w),
        sp_classical_avg: rolling_average(&times, &classical.sp, w),
        jz_quantum_avg: rolling_average(&times, &quantum.jz, w),
        jz_classical_avg: rolling_average(&times, &classical.jz, w),
        times,
        sp_quantum: quantum.sp,
        jz_quantum: quantum.jz,
        sp_classical: classical.sp,
        sp_classical_err: classical.sp_err,
        jz_classical: classical.jz,
        jz_classical_err: classical.jz_err,
        window: w,
        line_integral,
        line_nodes,
        twa_dropped: classical.dropped,
        wigner_clipped: sample.clipped,
    })
}

/// Scenario wrapper around [`run_quench`] using the scenario's own t_max.
pub fn run_scenario(scenario: &Scenario, cfg: &QuenchConfig) -> Result<QuenchResult> {
    let cfg = QuenchConfig { t_max: scenario.t_max, ..*cfg };
    run_quench(&scenario.space, &scenario.couplings, &scenario.start, scenario.partner.as_ref(), &cfg)
}
