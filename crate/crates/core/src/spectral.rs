//! Parity-resolved spectra, crossing predictions and gap minimization.
//!
//! State labels k are 1-based within each parity sector: k = 1 is the lowest
//! state of the sector.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coherent::CoherentState;
use crate::error::{LmgError, Result};
use crate::spin::{build_parity_blocks, CouplingParams, Parity, ParityBlock, SpinSpace};
use crate::tridiag::symmetric_tridiagonal_eigen;

/// Eigenpairs of one parity block.
#[derive(Debug, Clone)]
pub struct SectorSpectrum {
    pub parity: Parity,
    pub m_list: Vec<f64>,
    /// Full-basis indices J + m of the sector states.
    pub basis: Vec<usize>,
    pub energies: Vec<f64>,
    /// Row-major, one eigenvector (over `m_list`) per row. Empty when only
    /// eigenvalues were requested.
    vectors: Vec<f64>,
}

impl SectorSpectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn has_vectors(&self) -> bool {
        !self.vectors.is_empty() || self.energies.is_empty()
    }

    fn slot(&self, k: usize) -> usize {
        assert!(k >= 1 && k <= self.len(), "state label k = {k} out of range 1..={}", self.len());
        k - 1
    }

    /// Energy of state k (1-based).
    pub fn energy(&self, k: usize) -> f64 {
        self.energies[self.slot(k)]
    }

    /// Eigenvector of state k over the sector's m list.
    pub fn vector(&self, k: usize) -> &[f64] {
        assert!(self.has_vectors(), "spectrum computed without eigenvectors");
        let i = self.slot(k);
        let n = self.len();
        &self.vectors[i * n..(i + 1) * n]
    }

    /// Eigenvector of state k zero-padded to the full 2J+1 basis.
    pub fn full_vector(&self, k: usize, dim: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (&i, &c) in self.basis.iter().zip(self.vector(k)) {
            out[i] = Complex64::new(c, 0.0);
        }
        out
    }
}

/// Both parity sectors at one coupling point.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub space: SpinSpace,
    pub couplings: CouplingParams,
    pub positive: SectorSpectrum,
    pub negative: SectorSpectrum,
}

impl SpectralData {
    pub fn compute(space: &SpinSpace, couplings: &CouplingParams) -> Result<Self> {
        Self::compute_with(space, couplings, true)
    }

    /// Eigenvalues only, for sweeps and gap searches.
    pub fn energies_only(space: &SpinSpace, couplings: &CouplingParams) -> Result<Self> {
        Self::compute_with(space, couplings, false)
    }

    fn compute_with(space: &SpinSpace, couplings: &CouplingParams, vectors: bool) -> Result<Self> {
        let (bp, bn) = build_parity_blocks(space, couplings)?;
        Ok(Self {
            space: *space,
            couplings: *couplings,
            positive: diagonalize_with(&bp, vectors)?,
            negative: diagonalize_with(&bn, vectors)?,
        })
    }

    pub fn sector(&self, parity: Parity) -> &SectorSpectrum {
        match parity {
            Parity::Positive => &self.positive,
            Parity::Negative => &self.negative,
        }
    }

    /// All energies of both sectors, ascending.
    pub fn all_energies(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.positive.energies.iter().chain(&self.negative.energies).copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    /// (parity, k) of the overall lowest state.
    pub fn ground_state(&self) -> (Parity, usize) {
        if self.negative.is_empty() || self.positive.energies[0] <= self.negative.energies[0] {
            (Parity::Positive, 1)
        } else {
            (Parity::Negative, 1)
        }
    }

    /// ⟨Jz⟩/J of state (parity, k).
    pub fn jz_over_j(&self, parity: Parity, k: usize) -> f64 {
        let s = self.sector(parity);
        s.vector(k).iter().zip(&s.m_list).map(|(c, m)| c * c * m).sum::<f64>() / self.space.j()
    }
}

/// Diagonalizes one block, with eigenvectors.
pub fn diagonalize(block: &ParityBlock) -> Result<SectorSpectrum> {
    diagonalize_with(block, true)
}

fn diagonalize_with(block: &ParityBlock, vectors: bool) -> Result<SectorSpectrum> {
    let fail = || LmgError::NoConvergence {
        block: format!("{} parity (2J = {})", block.parity.label(), block.space.twice_j()),
    };
    // Overflowing matrix elements would otherwise come back as inf or NaN levels.
    if block.diag.iter().chain(&block.offdiag).any(|x| !x.is_finite()) {
        return Err(fail());
    }
    let eig = symmetric_tridiagonal_eigen(&block.diag, &block.offdiag, vectors).ok_or_else(fail)?;
    if eig.values.iter().any(|x| !x.is_finite()) {
        return Err(fail());
    }
    Ok(SectorSpectrum {
        parity: block.parity,
        m_list: block.m_list.clone(),
        basis: block.basis_indices(),
        energies: eig.values,
        vectors: eig.vectors.unwrap_or_default(),
    })
}

/// Spectra over a list of γx values at fixed γy/γx, in input order.
pub fn sweep_spectra(space: &SpinSpace, epsilon0: f64, ratio: f64, gammas: &[f64]) -> Result<Vec<SpectralData>> {
    gammas
        .par_iter()
        .map(|&g| {
            let c = CouplingParams::new(epsilon0, g, ratio * g)?;
            SpectralData::energies_only(space, &c)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingKind {
    /// N odd: levels of opposite parity cross.
    Real,
    /// N even: levels of equal parity repel.
    Avoided,
}

impl CrossingKind {
    pub fn label(self) -> &'static str {
        match self {
            CrossingKind::Real => "real",
            CrossingKind::Avoided => "avoided",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingPrediction {
    pub n: u32,
    pub kind: CrossingKind,
    /// γxγy = ((2J−1)/(2J−N))².
    pub product: f64,
    pub ratio: f64,
    pub gamma_x: f64,
    pub gamma_y: f64,
}

/// Coupling at which inner- and outer-orbit ladders become degenerate,
/// (γxγy)^(1/2) = (2J−1)/(2J−N), resolved along γy = ratio·γx.
pub fn predict_crossing_coupling(space: &SpinSpace, ratio: f64, n: u32, negative: bool) -> Result<CrossingPrediction> {
    let two_j = space.twice_j();
    if n == 0 || n >= two_j {
        return Err(LmgError::InvalidArgument(format!("N must satisfy 0 < N < 2J = {two_j}, got {n}")));
    }
    if !(ratio.is_finite() && ratio > 0.0) {
        return Err(LmgError::OutsideDegenerateRegime(format!("ratio γy/γx = {ratio} must be positive")));
    }
    let root = space.coupling_scale() / (two_j - n) as f64;
    let magnitude = root / ratio.sqrt();
    let sign = if negative { -1.0 } else { 1.0 };
    let gamma_x = sign * magnitude;
    let gamma_y = ratio * gamma_x;
    if gamma_x.abs() < 1.0 || gamma_y.abs() < 1.0 {
        return Err(LmgError::OutsideDegenerateRegime(format!(
            "|γx| = {:.6}, |γy| = {:.6}; both must be at least 1",
            gamma_x.abs(),
            gamma_y.abs()
        )));
    }
    Ok(CrossingPrediction {
        n,
        kind: if n.is_multiple_of(2) { CrossingKind::Avoided } else { CrossingKind::Real },
        product: root * root,
        ratio,
        gamma_x,
        gamma_y,
    })
}

/// Which pair of levels a gap refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GapPair {
    /// E_{k+1} − E_k within one sector.
    SameParity { parity: Parity, k: usize },
    /// |E⁺_k − E⁻_k| across sectors.
    CrossParity { k: usize },
}

impl GapPair {
    fn gap(&self, s: &SpectralData) -> f64 {
        self.signed(s).abs()
    }

    fn signed(&self, s: &SpectralData) -> f64 {
        match *self {
            GapPair::SameParity { parity, k } => {
                let sec = s.sector(parity);
                sec.energy(k + 1) - sec.energy(k)
            }
            GapPair::CrossParity { k } => s.positive.energy(k) - s.negative.energy(k),
        }
    }

    fn mean_energy(&self, s: &SpectralData) -> f64 {
        match *self {
            GapPair::SameParity { parity, k } => {
                let sec = s.sector(parity);
                0.5 * (sec.energy(k + 1) + sec.energy(k))
            }
            GapPair::CrossParity { k } => 0.5 * (s.positive.energy(k) + s.negative.energy(k)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRecord {
    pub pair: GapPair,
    pub gamma_at_min: f64,
    pub gap_min: f64,
    pub mean_energy: f64,
    /// False when the minimum sits on an interval endpoint.
    pub interior: bool,
}

/// Minimizes the gap of `pair` over γx ∈ [lo, hi] at fixed γy/γx.
///
/// Golden-section search to `tol` in γ. For opposite-parity pairs whose
/// signed difference changes sign inside the interval the crossing is
/// instead bracketed and bisected down to machine precision.
pub fn locate_minimum_gap(
    space: &SpinSpace,
    epsilon0: f64,
    ratio: f64,
    pair: GapPair,
    interval: (f64, f64),
    tol: f64,
) -> Result<GapRecord> {
    let (mut a, mut b) = (interval.0.min(interval.1), interval.0.max(interval.1));
    if !(a.is_finite() && b.is_finite()) || a == b || tol <= 0.0 {
        return Err(LmgError::InvalidArgument("gap search needs a finite, non-empty interval".into()));
    }
    let spec = |g: f64| -> Result<SpectralData> {
        let c = CouplingParams::new(epsilon0, g, ratio * g)?;
        SpectralData::energies_only(space, &c)
    };
    let record = |g: f64, interior: bool| -> Result<GapRecord> {
        let s = spec(g)?;
        Ok(GapRecord { pair, gamma_at_min: g, gap_min: pair.gap(&s), mean_energy: pair.mean_energy(&s), interior })
    };
    let (lo, hi) = (a, b);

    if let GapPair::CrossParity { .. } = pair {
        let fa = pair.signed(&spec(a)?);
        let fb = pair.signed(&spec(b)?);
        if fa.signum() != fb.signum() && fa != 0.0 && fb != 0.0 {
            let mut fa = fa;
            while b - a > 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let fm = pair.signed(&spec(mid)?);
                if fm == 0.0 {
                    a = mid;
                    b = mid;
                    break;
                }
                if fm.signum() == fa.signum() {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            let ga = record(a, true)?;
            let gb = record(b, true)?;
            return Ok(if ga.gap_min <= gb.gap_min { ga } else { gb });
        }
    }

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = pair.gap(&spec(c)?);
    let mut fd = pair.gap(&spec(d)?);
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = pair.gap(&spec(c)?);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = pair.gap(&spec(d)?);
        }
    }
    let g = 0.5 * (a + b);
    let best = record(g, true)?;
    let f_lo = record(lo, false)?;
    let f_hi = record(hi, false)?;
    let edge = 2.0 * tol;
    if (g - lo) < edge || (hi - g) < edge || f_lo.gap_min < best.gap_min || f_hi.gap_min < best.gap_min {
        return Ok(if f_lo.gap_min <= f_hi.gap_min { f_lo } else { f_hi });
    }
    Ok(best)
}

/// Same-parity pairs (k, k+1) whose gap is smaller than both neighbouring
/// gaps, restricted to mean energies in `window` (in E/J units). These are
/// the avoided-crossing partners at an AC coupling.
pub fn avoided_crossing_pairs(spectra: &SpectralData, parity: Parity, window: (f64, f64)) -> Vec<usize> {
    let sec = spectra.sector(parity);
    let j = spectra.space.j();
    let n = sec.len();
    let gap = |k: usize| sec.energy(k + 1) - sec.energy(k);
    let mut out = Vec::new();
    let mut k = 2;
    while k + 2 <= n {
        let mean = 0.5 * (sec.energy(k) + sec.energy(k + 1)) / j;
        if mean > window.0 && mean < window.1 && gap(k) < gap(k - 1) && gap(k) < gap(k + 1) {
            out.push(k);
            k += 2;
        } else {
            k += 1;
        }
    }
    out
}

/// One eigen-component c_k = ⟨E_k|α⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub parity: Parity,
    pub k: usize,
    pub energy: f64,
    pub amplitude: Complex64,
}

/// Eigen-decomposition of a coherent state over both parity sectors.
pub fn eigencomponents(state: &CoherentState, spectra: &SpectralData) -> Result<Vec<Component>> {
    if state.space != spectra.space {
        return Err(LmgError::InvalidArgument("coherent state and spectrum have different J".into()));
    }
    let mut out = Vec::with_capacity(spectra.space.dim());
    for parity in Parity::both() {
        let sec = spectra.sector(parity);
        for k in 1..=sec.len() {
            let amplitude: Complex64 =
                sec.vector(k).iter().zip(&sec.basis).map(|(&v, &i)| state.amplitudes[i] * v).sum();
            out.push(Component { parity, k, energy: sec.energy(k), amplitude });
        }
    }
    Ok(out)
}

/// ⟨Jz + J⟩/J on the ground state.
pub fn order_parameter(spectra: &SpectralData) -> f64 {
    let (p, k) = spectra.ground_state();
    1.0 + spectra.jz_over_j(p, k)
}
