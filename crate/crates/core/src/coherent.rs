//! Bloch coherent states |α⟩, α = tan(θ/2)e^(−iφ), in the |J,m⟩ basis.

use num_complex::Complex64;

use crate::classical::PhasePoint;
use crate::error::{LmgError, Result};
use crate::spin::SpinSpace;

/// Precomputed half log-binomials for evaluating coherent amplitudes in
/// sin/cos power form. binom(2J, J+m) overflows f64 well before J = 100's
/// intermediate products would, so everything is done in logs.
#[derive(Debug, Clone)]
pub struct CoherentTable {
    space: SpinSpace,
    half_log_binom: Vec<f64>,
}

impl CoherentTable {
    pub fn new(space: &SpinSpace) -> Self {
        let n = space.twice_j() as usize;
        let mut ln_fact = vec![0.0; n + 1];
        for k in 1..=n {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        let half_log_binom = (0..=n).map(|i| 0.5 * (ln_fact[n] - ln_fact[i] - ln_fact[n - i])).collect();
        Self { space: *space, half_log_binom }
    }

    pub fn space(&self) -> &SpinSpace {
        &self.space
    }

    /// Magnitude of amplitude i = J+m, i.e. sqrt(binom)·sin^i(θ/2)·cos^(2J−i)(θ/2).
    #[inline]
    fn magnitude(&self, i: usize, ln_s: f64, ln_c: f64) -> f64 {
        let n = self.space.twice_j() as usize;
        let mut log = self.half_log_binom[i];
        // exponent 0 contributes a factor 1 even where the log is −∞
        if i > 0 {
            log += i as f64 * ln_s;
        }
        if i < n {
            log += (n - i) as f64 * ln_c;
        }
        log.exp()
    }

    /// Writes all 2J+1 amplitudes of the coherent state at (θ, φ).
    pub fn fill(&self, theta: f64, phi: f64, out: &mut [Complex64]) {
        let (ln_s, ln_c) = half_angle_logs(theta);
        let step = Complex64::from_polar(1.0, -phi);
        let mut phase = Complex64::new(1.0, 0.0);
        for (i, slot) in out.iter_mut().enumerate() {
            *slot = phase * self.magnitude(i, ln_s, ln_c);
            phase *= step;
        }
    }

    /// Amplitudes restricted to the given basis indices (ascending).
    pub fn fill_subset(&self, theta: f64, phi: f64, indices: &[usize], out: &mut [Complex64]) {
        let (ln_s, ln_c) = half_angle_logs(theta);
        for (slot, &i) in out.iter_mut().zip(indices) {
            let mag = self.magnitude(i, ln_s, ln_c);
            *slot = Complex64::from_polar(mag, -(i as f64) * phi);
        }
    }
}

fn half_angle_logs(theta: f64) -> (f64, f64) {
    let half = 0.5 * theta;
    (half.sin().abs().ln(), half.cos().abs().ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherentState {
    pub space: SpinSpace,
    pub theta: f64,
    pub phi: f64,
    /// Amplitudes over m = −J…J.
    pub amplitudes: Vec<Complex64>,
}

impl CoherentState {
    pub fn from_angles(space: &SpinSpace, theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() || !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(LmgError::InvalidArgument(format!("invalid coherent-state angles ({theta}, {phi})")));
        }
        let table = CoherentTable::new(space);
        Ok(Self::with_table(&table, theta, phi))
    }

    pub fn with_table(table: &CoherentTable, theta: f64, phi: f64) -> Self {
        let space = *table.space();
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); space.dim()];
        table.fill(theta, phi, &mut amplitudes);
        Self { space, theta, phi, amplitudes }
    }

    /// From the stereographic label α = tan(θ/2)e^(−iφ).
    pub fn from_alpha(space: &SpinSpace, alpha: Complex64) -> Result<Self> {
        if !alpha.re.is_finite() || !alpha.im.is_finite() {
            return Err(LmgError::InvalidArgument("alpha must be finite".into()));
        }
        let theta = 2.0 * alpha.norm().atan();
        let phi = if alpha.norm() == 0.0 { 0.0 } else { -alpha.arg() };
        Self::from_angles(space, theta, phi)
    }

    pub fn from_phase_point(space: &SpinSpace, point: &PhasePoint) -> Result<Self> {
        Self::from_angles(space, point.theta(), point.phi())
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar((0.5 * self.theta).tan(), -self.phi)
    }

    pub fn phase_point(&self) -> PhasePoint {
        PhasePoint::from_angles(self.theta, self.phi)
    }

    /// ⟨α|ψ⟩ for a full-basis vector ψ.
    pub fn overlap(&self, psi: &[Complex64]) -> Complex64 {
        self.amplitudes.iter().zip(psi).map(|(a, p)| a.conj() * p).sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// ⟨Jz⟩/J.
    pub fn jz_over_j(&self) -> f64 {
        jz_over_j(&self.space, &self.amplitudes)
    }
}

/// ⟨ψ|Jz|ψ⟩/J for a normalized full-basis vector.
pub fn jz_over_j(space: &SpinSpace, psi: &[Complex64]) -> f64 {
    let s: f64 = psi.iter().enumerate().map(|(i, a)| space.m_at(i) * a.norm_sqr()).sum();
    s / space.j()
}
