//! Finite-J representation of the Hamiltonian
//! H = ε0 [Jz + γx/(2J−1) Jx² + γy/(2J−1) Jy²]
//! split into its two parity blocks.

use serde::{Deserialize, Serialize};

use crate::error::{LmgError, Result};

/// Spin multiplet of length J, stored as 2J so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinSpace {
    twice_j: u32,
}

impl SpinSpace {
    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !twice.is_finite() || twice < 1.0 || (twice - twice.round()).abs() > 1e-9 {
            return Err(LmgError::InvalidSpin(j));
        }
        Ok(Self { twice_j: twice.round() as u32 })
    }

    pub fn from_twice_j(twice_j: u32) -> Result<Self> {
        if twice_j == 0 {
            return Err(LmgError::InvalidSpin(0.0));
        }
        Ok(Self { twice_j })
    }

    pub fn twice_j(&self) -> u32 {
        self.twice_j
    }

    pub fn j(&self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn dim(&self) -> usize {
        self.twice_j as usize + 1
    }

    /// m = −J, −J+1, …, J.
    pub fn m_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.m_at(i)).collect()
    }

    /// Magnetic number of basis index i (i = J + m).
    pub fn m_at(&self, index: usize) -> f64 {
        index as f64 - self.j()
    }

    /// Basis index J + m, validating m.
    pub fn index_of(&self, m: f64) -> Result<usize> {
        let i = m + self.j();
        if !(i > -1e-9 && i < self.dim() as f64 - 1.0 + 1e-9) || (i - i.round()).abs() > 1e-9 {
            return Err(LmgError::MagneticOutOfRange { j: self.j(), m });
        }
        Ok(i.round() as usize)
    }

    /// 2J − 1, the scale dividing the quadratic couplings.
    pub fn coupling_scale(&self) -> f64 {
        self.twice_j as f64 - 1.0
    }
}

/// The (ε0, γx, γy) triple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingParams {
    pub epsilon0: f64,
    pub gamma_x: f64,
    pub gamma_y: f64,
}

impl CouplingParams {
    pub fn new(epsilon0: f64, gamma_x: f64, gamma_y: f64) -> Result<Self> {
        if !(epsilon0.is_finite() && epsilon0 > 0.0) {
            return Err(LmgError::InvalidEnergyUnit(epsilon0));
        }
        if !gamma_x.is_finite() || !gamma_y.is_finite() {
            return Err(LmgError::InvalidArgument("couplings must be finite".into()));
        }
        Ok(Self { epsilon0, gamma_x, gamma_y })
    }

    /// Unit energy scale with γy = ratio·γx.
    pub fn with_ratio(gamma_x: f64, ratio: f64) -> Result<Self> {
        Self::new(1.0, gamma_x, ratio * gamma_x)
    }

    /// V = ε0(γx−γy)/(2(2J−1)).
    pub fn v(&self, space: &SpinSpace) -> Result<f64> {
        self.strength(space, self.gamma_x - self.gamma_y)
    }

    /// W = ε0(γx+γy)/(2(2J−1)).
    pub fn w(&self, space: &SpinSpace) -> Result<f64> {
        self.strength(space, self.gamma_x + self.gamma_y)
    }

    fn strength(&self, space: &SpinSpace, combo: f64) -> Result<f64> {
        let scale = space.coupling_scale();
        if scale == 0.0 {
            if combo == 0.0 {
                return Ok(0.0);
            }
            return Err(LmgError::SingularCouplingScale);
        }
        Ok(self.epsilon0 * combo / (2.0 * scale))
    }

    /// Inverse of (v, w): γx = (2J−1)(W+V)/ε0, γy = (2J−1)(W−V)/ε0.
    pub fn from_interaction(space: &SpinSpace, epsilon0: f64, v: f64, w: f64) -> Result<Self> {
        let scale = space.coupling_scale();
        Self::new(epsilon0, scale * (w + v) / epsilon0, scale * (w - v) / epsilon0)
    }

    /// γy/γx, undefined when γx = 0.
    pub fn ratio(&self) -> Option<f64> {
        (self.gamma_x != 0.0).then(|| self.gamma_y / self.gamma_x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Positive,
    Negative,
}

impl Parity {
    pub fn sign(self) -> i32 {
        match self {
            Parity::Positive => 1,
            Parity::Negative => -1,
        }
    }

    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            1 => Ok(Parity::Positive),
            -1 => Ok(Parity::Negative),
            _ => Err(LmgError::InvalidArgument(format!("parity must be ±1, got {sign}"))),
        }
    }

    pub fn both() -> [Parity; 2] {
        [Parity::Positive, Parity::Negative]
    }

    pub fn label(self) -> &'static str {
        match self {
            Parity::Positive => "positive",
            Parity::Negative => "negative",
        }
    }
}

impl std::fmt::Display for Parity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", if *self == Parity::Positive { "+" } else { "-" })
    }
}

/// (−1)^(J+m).
pub fn parity_of_basis_state(space: &SpinSpace, m: f64) -> Result<Parity> {
    let i = space.index_of(m)?;
    Ok(if i % 2 == 0 { Parity::Positive } else { Parity::Negative })
}

/// One parity sector as a real symmetric tridiagonal matrix over m, m+2, …
#[derive(Debug, Clone, PartialEq)]
pub struct ParityBlock {
    pub parity: Parity,
    pub space: SpinSpace,
    /// Magnetic numbers in ascending order.
    pub m_list: Vec<f64>,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl ParityBlock {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Full-basis indices J + m of the block's states.
    pub fn basis_indices(&self) -> Vec<usize> {
        let first = match self.parity {
            Parity::Positive => 0,
            Parity::Negative => 1,
        };
        (first..self.space.dim()).step_by(2).collect()
    }

    /// Frobenius norm, used as the scale for residual checks.
    pub fn norm(&self) -> f64 {
        let d: f64 = self.diag.iter().map(|x| x * x).sum();
        let o: f64 = self.offdiag.iter().map(|x| x * x).sum();
        (d + 2.0 * o).sqrt()
    }

    /// y = H x for this block.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.offdiag[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.offdiag[i] * x[i + 1];
            }
            y[i] = acc;
        }
    }
}

fn ladder_plus(j: f64, m: f64) -> f64 {
    (j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt()
}

/// Positive and negative parity blocks of H.
pub fn build_parity_blocks(space: &SpinSpace, couplings: &CouplingParams) -> Result<(ParityBlock, ParityBlock)> {
    let v = couplings.v(space)?;
    let w = couplings.w(space)?;
    let j = space.j();
    let build = |parity: Parity| {
        let start = if parity == Parity::Positive { 0 } else { 1 };
        let m_list: Vec<f64> = (start..space.dim()).step_by(2).map(|i| space.m_at(i)).collect();
        let diag = m_list.iter().map(|&m| couplings.epsilon0 * m + w * (j * (j + 1.0) - m * m)).collect();
        let offdiag =
            m_list.windows(2).map(|mm| 0.5 * v * ladder_plus(j, mm[0]) * ladder_plus(j, mm[0] + 1.0)).collect();
        ParityBlock { parity, space: *space, m_list, diag, offdiag }
    };
    Ok((build(Parity::Positive), build(Parity::Negative)))
}
