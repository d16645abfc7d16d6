#![allow(dead_code)]

use lmg_core::spin::{CouplingParams, SpinSpace};
use nalgebra::{DMatrix, SymmetricEigen};

/// Dense H = ε0[Jz + γx/(2J−1)Jx² + γy/(2J−1)Jy²] built from ladder
/// operators in the |J,m⟩ basis, m ascending.
pub fn dense_hamiltonian(space: &SpinSpace, c: &CouplingParams) -> DMatrix<f64> {
    let n = space.dim();
    let j = space.j();
    let mut jp = DMatrix::<f64>::zeros(n, n);
    for i in 0..n - 1 {
        let m = space.m_at(i);
        jp[(i + 1, i)] = (j * (j + 1.0) - m * (m + 1.0)).sqrt();
    }
    let jm = jp.transpose();
    let jx = (&jp + &jm) * 0.5;
    let d = &jp - &jm;
    // Jy = (J+ − J−)/(2i) ⇒ Jy² = −(J+ − J−)²/4
    let jy2 = -(&d * &d) * 0.25;
    let jz = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, (0..n).map(|i| space.m_at(i))));
    let scale = space.coupling_scale();
    if c.gamma_x == 0.0 && c.gamma_y == 0.0 {
        return jz * c.epsilon0;
    }
    (jz + (&jx * &jx) * (c.gamma_x / scale) + jy2 * (c.gamma_y / scale)) * c.epsilon0
}

pub fn dense_spectrum(space: &SpinSpace, c: &CouplingParams) -> Vec<f64> {
    let e = SymmetricEigen::new(dense_hamiltonian(space, c));
    let mut v: Vec<f64> = e.eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn j100() -> SpinSpace {
    SpinSpace::new(100.0).unwrap()
}

/// Couplings (ε0 = 1, γx, 3γx) at N of the crossing condition for J = 100.
pub fn crossing_couplings(n: u32) -> CouplingParams {
    let p = lmg_core::spectral::predict_crossing_coupling(&j100(), 3.0, n, true).unwrap();
    CouplingParams::new(1.0, p.gamma_x, p.gamma_y).unwrap()
}
