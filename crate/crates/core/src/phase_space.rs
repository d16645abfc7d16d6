//! Husimi functions, Monte Carlo Wehrl entropies and line integrals of the
//! Husimi density along classical orbits.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{ClassicalTrajectory, PhasePoint};
use crate::coherent::CoherentTable;
use crate::error::{LmgError, Result};
use crate::spectral::SpectralData;
use crate::spin::{CouplingParams, Parity, SpinSpace};

/// Regular (Q, P) lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub q_min: f64,
    pub q_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub nq: usize,
    pub np: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::square(201)
    }
}

impl GridSpec {
    /// n × n over [−2, 2]².
    pub fn square(n: usize) -> Self {
        Self { q_min: -2.0, q_max: 2.0, p_min: -2.0, p_max: 2.0, nq: n, np: n }
    }

    pub fn dq(&self) -> f64 {
        (self.q_max - self.q_min) / (self.nq.max(2) - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.np.max(2) - 1) as f64
    }

    pub fn q(&self, i: usize) -> f64 {
        self.q_min + self.dq() * i as f64
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + self.dp() * j as f64
    }

    pub fn len(&self) -> usize {
        self.nq * self.np
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A state restricted to its nonzero basis components.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceState {
    pub support: Vec<usize>,
    pub coeffs: Vec<Complex64>,
}

impl PhaseSpaceState {
    pub fn from_full(psi: &[Complex64]) -> Self {
        let (support, coeffs) =
            psi.iter().enumerate().filter(|(_, c)| c.norm_sqr() > 0.0).map(|(i, c)| (i, *c)).unzip();
        Self { support, coeffs }
    }

    pub fn from_eigenstate(spectra: &SpectralData, parity: Parity, k: usize) -> Self {
        let s = spectra.sector(parity);
        Self { support: s.basis.clone(), coeffs: s.vector(k).iter().map(|&v| Complex64::new(v, 0.0)).collect() }
    }

    /// |⟨α|ψ⟩|² given the full coherent amplitude vector of α.
    #[inline]
    pub fn husimi(&self, amplitudes: &[Complex64]) -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (&i, c) in self.support.iter().zip(&self.coeffs) {
            acc += amplitudes[i].conj() * c;
        }
        acc.norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HusimiField {
    pub grid: GridSpec,
    pub twice_j: u32,
    /// values[ip·nq + iq]; NaN outside the disc.
    pub values: Vec<f64>,
    pub tag: String,
}

impl HusimiField {
    pub fn at(&self, iq: usize, ip: usize) -> f64 {
        self.values[ip * self.grid.nq + iq]
    }

    /// ((2J+1)/4π) ∬ Q_ψ dQ dP by the grid rule (≈ 1).
    pub fn normalization(&self) -> f64 {
        let sum: f64 = self.values.iter().filter(|v| v.is_finite()).sum();
        (self.twice_j as f64 + 1.0) / (4.0 * PI) * sum * self.grid.dq() * self.grid.dp()
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max)
    }
}

/// Husimi density of a state on a grid; rows evaluated in parallel.
pub fn husimi_of_state(state: &PhaseSpaceState, space: &SpinSpace, grid: &GridSpec, tag: &str) -> HusimiField {
    let table = CoherentTable::new(space);
    let rows: Vec<Vec<f64>> = (0..grid.np)
        .into_par_iter()
        .map(|ip| {
            let mut amps = vec![Complex64::new(0.0, 0.0); space.dim()];
            (0..grid.nq)
                .map(|iq| {
                    let pt = PhasePoint { q: grid.q(iq), p: grid.p(ip) };
                    if pt.radius_sqr() > 4.0 {
                        return f64::NAN;
                    }
                    table.fill(pt.theta(), pt.phi(), &mut amps);
                    state.husimi(&amps)
                })
                .collect()
        })
        .collect();
    HusimiField { grid: *grid, twice_j: space.twice_j(), values: rows.concat(), tag: tag.to_string() }
}

/// Husimi density of eigenstate (parity, k).
pub fn husimi_eigenstate(spectra: &SpectralData, parity: Parity, k: usize, grid: &GridSpec) -> HusimiField {
    let state = PhaseSpaceState::from_eigenstate(spectra, parity, k);
    husimi_of_state(&state, &spectra.space, grid, &format!("{}{}", parity, k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WehrlConvention {
    /// Measure ((2J+1)/4π) dΩ; coherent states give 2J/(2J+1).
    Normalized,
    /// Bare solid angle dΩ.
    RawSolidAngle,
}

impl WehrlConvention {
    /// Multiplier applied to normalized-measure entropies.
    pub fn factor(self, space: &SpinSpace) -> f64 {
        match self {
            WehrlConvention::Normalized => 1.0,
            WehrlConvention::RawSolidAngle => 4.0 * PI / (space.twice_j() as f64 + 1.0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            WehrlConvention::Normalized => "normalized",
            WehrlConvention::RawSolidAngle => "raw",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WehrlResult {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
    pub convention: WehrlConvention,
}

impl WehrlResult {
    pub fn in_convention(&self, space: &SpinSpace, convention: WehrlConvention) -> Self {
        let f = convention.factor(space) / self.convention.factor(space);
        Self { value: f * self.value, stderr: f * self.stderr, samples: self.samples, convention }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    pub batch: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { samples: 200_000, seed: 20210611, batch: 4096 }
    }
}

/// Uniform sphere samples of one batch: (θ, φ). Batch b draws from the
/// ChaCha stream b of the seed, so results do not depend on scheduling.
fn batch_points(seed: u64, batch: usize, count: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    (0..count)
        .map(|_| {
            let z: f64 = rng.random_range(-1.0..1.0);
            let phi: f64 = rng.random_range(0.0..TAU);
            ((-z).acos(), phi)
        })
        .collect()
}

fn q_ln_q(q: f64) -> f64 {
    if q > 0.0 {
        q * q.ln()
    } else {
        0.0
    }
}

/// −(2J+1)·mean(f ln f) for several densities evaluated jointly at shared
/// uniform samples. `eval(θ, φ, out)` writes one density value per state.
fn entropy_mc<E>(space: &SpinSpace, n_states: usize, mc: &McConfig, eval: E) -> Result<Vec<WehrlResult>>
where
    E: Fn(f64, f64, &mut [f64], &mut Vec<Complex64>) + Sync,
{
    if mc.samples < 2 || mc.batch == 0 {
        return Err(LmgError::InvalidArgument("Monte Carlo needs at least two samples".into()));
    }
    let n_batches = mc.samples.div_ceil(mc.batch);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..n_batches)
        .into_par_iter()
        .map(|b| {
            let count = mc.batch.min(mc.samples - b * mc.batch);
            let mut sum = vec![0.0; n_states];
            let mut sq = vec![0.0; n_states];
            let mut vals = vec![0.0; n_states];
            let mut scratch = Vec::new();
            for (theta, phi) in batch_points(mc.seed, b, count) {
                eval(theta, phi, &mut vals, &mut scratch);
                for s in 0..n_states {
                    let x = q_ln_q(vals[s]);
                    sum[s] += x;
                    sq[s] += x * x;
                }
            }
            (sum, sq)
        })
        .collect();
    let mut sum = vec![0.0; n_states];
    let mut sq = vec![0.0; n_states];
    for (s, q) in &partial {
        for i in 0..n_states {
            sum[i] += s[i];
            sq[i] += q[i];
        }
    }
    let m = mc.samples as f64;
    let scale = space.twice_j() as f64 + 1.0;
    Ok((0..n_states)
        .map(|i| {
            let mean = sum[i] / m;
            let var = ((sq[i] / m - mean * mean) * m / (m - 1.0)).max(0.0);
            WehrlResult {
                value: -scale * mean,
                stderr: scale * (var / m).sqrt(),
                samples: mc.samples,
                convention: WehrlConvention::Normalized,
            }
        })
        .collect())
}

/// Wehrl entropies of several states from one set of samples (common random
/// numbers), normalized convention.
pub fn wehrl_many(states: &[PhaseSpaceState], space: &SpinSpace, mc: &McConfig) -> Result<Vec<WehrlResult>> {
    let table = CoherentTable::new(space);
    let dim = space.dim();
    entropy_mc(space, states.len(), mc, |theta, phi, out, amps| {
        if amps.len() != dim {
            amps.resize(dim, Complex64::new(0.0, 0.0));
        }
        table.fill(theta, phi, amps);
        for (o, s) in out.iter_mut().zip(states) {
            *o = s.husimi(amps);
        }
    })
}

pub fn wehrl_entropy(state: &PhaseSpaceState, space: &SpinSpace, mc: &McConfig) -> Result<WehrlResult> {
    Ok(wehrl_many(std::slice::from_ref(state), space, mc)?[0])
}

/// Entropy of an arbitrary density f(θ, φ) in the same estimator.
pub fn wehrl_of_density<F>(density: F, space: &SpinSpace, mc: &McConfig) -> Result<WehrlResult>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    Ok(entropy_mc(space, 1, mc, |theta, phi, out, _| out[0] = density(theta, phi))?[0])
}

/// One row of a Wehrl table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WehrlRow {
    pub gamma_x: f64,
    pub parity: Parity,
    pub k: usize,
    pub energy_over_j: f64,
    /// ⟨Jz⟩/J of the state.
    pub jz_over_j: f64,
    pub result: WehrlResult,
}

/// What to tabulate.
#[derive(Debug, Clone, PartialEq)]
pub enum WehrlSweep {
    /// States `ks` of one parity at each γx (γy = ratio·γx).
    Gamma { epsilon0: f64, ratio: f64, gammas: Vec<f64>, parity: Parity, ks: Vec<usize> },
    /// All states of the given parities with E/(Jε0) inside the window.
    Energy { couplings: CouplingParams, parities: Vec<Parity>, window: (f64, f64) },
}

/// Wehrl entropies over a γ grid or an energy window, all from the same
/// Monte Carlo samples. Rows come out in grid order, then by (parity, k).
pub fn wehrl_sweep(
    space: &SpinSpace,
    sweep: &WehrlSweep,
    mc: &McConfig,
    convention: WehrlConvention,
) -> Result<Vec<WehrlRow>> {
    let mut rows = Vec::new();
    let mut push = |spec: &SpectralData, picks: &[(Parity, usize)]| -> Result<()> {
        let states: Vec<PhaseSpaceState> =
            picks.iter().map(|&(p, k)| PhaseSpaceState::from_eigenstate(spec, p, k)).collect();
        let res = wehrl_many(&states, space, mc)?;
        let scale = space.j() * spec.couplings.epsilon0;
        for (&(p, k), r) in picks.iter().zip(res) {
            rows.push(WehrlRow {
                gamma_x: spec.couplings.gamma_x,
                parity: p,
                k,
                energy_over_j: spec.sector(p).energy(k) / scale,
                jz_over_j: spec.jz_over_j(p, k),
                result: r.in_convention(space, convention),
            });
        }
        Ok(())
    };
    match sweep {
        WehrlSweep::Gamma { epsilon0, ratio, gammas, parity, ks } => {
            for &g in gammas {
                let c = CouplingParams::new(*epsilon0, g, ratio * g)?;
                let spec = SpectralData::compute(space, &c)?;
                let n = spec.sector(*parity).len();
                if let Some(bad) = ks.iter().find(|&&k| k == 0 || k > n) {
                    return Err(LmgError::InvalidArgument(format!("state k = {bad} outside 1..={n}")));
                }
                let picks: Vec<_> = ks.iter().map(|&k| (*parity, k)).collect();
                push(&spec, &picks)?;
            }
        }
        WehrlSweep::Energy { couplings, parities, window } => {
            let spec = SpectralData::compute(space, couplings)?;
            let scale = space.j() * couplings.epsilon0;
            let mut picks = Vec::new();
            for &p in parities {
                let sec = spec.sector(p);
                for k in 1..=sec.len() {
                    let e = sec.energy(k) / scale;
                    if e >= window.0 && e <= window.1 {
                        picks.push((p, k));
                    }
                }
            }
            push(&spec, &picks)?;
        }
    }
    Ok(rows)
}

/// Line integrals ∮ Q_ψ dl along a fixed closed orbit, with the coherent
/// amplitudes of the quadrature nodes cached.
#[derive(Debug, Clone)]
pub struct LineIntegrator {
    pub nodes: Vec<PhasePoint>,
    pub segment: f64,
    amplitudes: Vec<Complex64>,
    dim: usize,
}

impl LineIntegrator {
    /// `n` nodes equally spaced in arclength (periodic trapezoid rule).
    pub fn new(space: &SpinSpace, orbit: &ClassicalTrajectory, n: usize) -> Result<Self> {
        if n < 8 {
            return Err(LmgError::InvalidArgument("line integral needs at least 8 nodes".into()));
        }
        let nodes = orbit.resample_arclength(n)?;
        let segment = orbit.length() / n as f64;
        let table = CoherentTable::new(space);
        let dim = space.dim();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n * dim];
        for (pt, chunk) in nodes.iter().zip(amplitudes.chunks_mut(dim)) {
            table.fill(pt.theta(), pt.phi(), chunk);
        }
        Ok(Self { nodes, segment, amplitudes, dim })
    }

    /// Doubles the node count from 64 until every probe state's integral
    /// changes by less than `rel_tol` (probes below 1e-12 of the largest are
    /// ignored).
    pub fn converged(
        space: &SpinSpace,
        orbit: &ClassicalTrajectory,
        probes: &[&[Complex64]],
        rel_tol: f64,
    ) -> Result<Self> {
        let mut n = 64;
        let mut current = Self::new(space, orbit, n)?;
        let mut last: Vec<f64> = probes.iter().map(|p| current.integrate(p)).collect();
        while n < 1 << 15 {
            n *= 2;
            let next = Self::new(space, orbit, n)?;
            let vals: Vec<f64> = probes.iter().map(|p| next.integrate(p)).collect();
            let top = vals.iter().copied().fold(0.0, f64::max);
            let ok = vals.iter().zip(&last).all(|(v, l)| *v < 1e-12 * top || (v - l).abs() <= rel_tol * v.abs());
            current = next;
            last = vals;
            if ok {
                break;
            }
        }
        Ok(current)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// ∮ |⟨α(s)|ψ⟩|² ds for a full-basis vector ψ.
    pub fn integrate(&self, psi: &[Complex64]) -> f64 {
        assert_eq!(psi.len(), self.dim, "state dimension mismatch");
        let sum: f64 = self
            .amplitudes
            .chunks(self.dim)
            .map(|a| a.iter().zip(psi).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr())
            .sum();
        sum * self.segment
    }
}

/// L = ∮ Q_ψ(α(s)) ds along the orbit, with the node count doubled until the
/// value changes by less than 0.5%.
pub fn line_integral(psi: &[Complex64], space: &SpinSpace, orbit: &ClassicalTrajectory) -> Result<f64> {
    let li = LineIntegrator::converged(space, orbit, &[psi], 0.005)?;
    Ok(li.integrate(psi))
}
