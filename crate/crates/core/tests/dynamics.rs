mod common;

use std::f64::consts::TAU;

use approx::assert_abs_diff_eq;
use common::{dense_hamiltonian, j100};
use lmg_core::classical::{classical_energy, PhasePoint};
use lmg_core::coherent::{jz_over_j, CoherentState};
use lmg_core::dynamics::*;
use lmg_core::spectral::SpectralData;
use lmg_core::spin::*;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use proptest::prelude::*;

/// e^(−iHt)ψ from a dense eigendecomposition.
fn dense_evolve(h: &DMatrix<f64>, psi: &[Complex64], t: f64) -> Vec<Complex64> {
    let eig = SymmetricEigen::new(h.clone());
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let phases = DVector::from_iterator(psi.len(), eig.eigenvalues.iter().map(|&e| Complex64::from_polar(1.0, -e * t)));
    let p = DVector::from_column_slice(psi);
    let c = v.adjoint() * p;
    let out = &v * c.component_mul(&phases);
    out.iter().copied().collect()
}

#[test]
fn evolution_matches_dense_propagator() {
    let s = SpinSpace::new(12.0).unwrap();
    let c = CouplingParams::new(1.0, -4.0, -12.0).unwrap();
    let spectra = SpectralData::compute(&s, &c).unwrap();
    let alpha = CoherentState::from_angles(&s, 1.0, 0.3).unwrap();
    let times = [0.0, 0.7, 3.1];
    let evo = evolve_quantum(&alpha, &spectra, &times).unwrap();
    let h = dense_hamiltonian(&s, &c);
    for (i, &t) in times.iter().enumerate() {
        let want = dense_evolve(&h, &alpha.amplitudes, t);
        let got = evo.state_at(t);
        let err = want.iter().zip(&got).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10, "t = {t}: {err}");
        let overlap: Complex64 = alpha.amplitudes.iter().zip(&want).map(|(a, b)| a.conj() * b).sum();
        assert_abs_diff_eq!(evo.sp[i], overlap.norm_sqr(), epsilon = 1e-10);
        assert_abs_diff_eq!(evo.jz[i], jz_over_j(&s, &want), epsilon = 1e-10);
        assert_abs_diff_eq!(evo.norm_at(t), 1.0, epsilon = 1e-12);
    }
    assert_eq!(evo.sp[0], 1.0);
}

#[test]
fn free_precession_survival_probability() {
    // γ = 0: SP(t) = (1 − sin²θ sin²(t/2))^{2J}, ⟨Jz⟩ constant.
    let s = SpinSpace::new(7.0).unwrap();
    let c = CouplingParams::new(1.0, 0.0, 0.0).unwrap();
    let spectra = SpectralData::compute(&s, &c).unwrap();
    let theta: f64 = 0.9;
    let alpha = CoherentState::from_angles(&s, theta, 1.3).unwrap();
    let times: Vec<f64> = (0..40).map(|i| 0.17 * i as f64).collect();
    let evo = evolve_quantum(&alpha, &spectra, &times).unwrap();
    for (i, &t) in times.iter().enumerate() {
        let want = (1.0 - theta.sin().powi(2) * (0.5 * t).sin().powi(2)).powi(14);
        assert_abs_diff_eq!(evo.sp[i], want, epsilon = 1e-12);
        assert_abs_diff_eq!(evo.jz[i], -theta.cos(), epsilon = 1e-12);
    }
}

#[test]
fn evolution_rejects_bad_times() {
    let s = SpinSpace::new(3.0).unwrap();
    let spectra = SpectralData::compute(&s, &CouplingParams::new(1.0, 1.0, 2.0).unwrap()).unwrap();
    let alpha = CoherentState::from_angles(&s, 1.0, 0.0).unwrap();
    assert!(evolve_quantum(&alpha, &spectra, &[1.0, 0.5]).is_err());
    assert!(evolve_quantum(&alpha, &spectra, &[-1.0, 0.5]).is_err());
}

#[test]
fn ehrenfest_slope_matches_finite_difference() {
    let s = SpinSpace::new(20.0).unwrap();
    let c = CouplingParams::new(1.0, -4.0, -12.0).unwrap();
    let spectra = SpectralData::compute(&s, &c).unwrap();
    let alpha = CoherentState::from_phase_point(&s, &PhasePoint::new(0.7, 0.9).unwrap()).unwrap();
    let h = 1e-5;
    let evo = evolve_quantum(&alpha, &spectra, &[0.0, h, 2.0 * h]).unwrap();
    // one-sided second-order difference
    let fd = (-3.0 * evo.jz[0] + 4.0 * evo.jz[1] - evo.jz[2]) / (2.0 * h);
    let slope = ehrenfest_jz_slope(&alpha, &c).unwrap();
    assert!((fd - slope).abs() < 1e-6, "{fd} vs {slope}");
}

#[test]
fn ehrenfest_slope_approaches_classical_flow() {
    let s = j100();
    let c = CouplingParams::new(1.0, -4.0, -12.0).unwrap();
    for &(q, p) in &[(0.7, 0.9), (1.1, -0.4), (-0.3, 1.2)] {
        let pt = PhasePoint::new(q, p).unwrap();
        let alpha = CoherentState::from_phase_point(&s, &pt).unwrap();
        let quantum = ehrenfest_jz_slope(&alpha, &c).unwrap();
        let classical = classical_jz_slope(&pt, &c);
        assert!((quantum / classical - 1.0).abs() < 0.01, "({q}, {p}): {quantum} vs {classical}");
    }
}

#[test]
fn wigner_sample_statistics() {
    let s = j100();
    let center = PhasePoint::new(0.8, -0.3).unwrap();
    let w = sample_wigner(&center, &s, 20_000, 3).unwrap();
    assert_eq!(w.points.len(), 20_000);
    assert_eq!(w.clipped, 0);
    let mean_t2 = w.theta_sqr.iter().sum::<f64>() / w.theta_sqr.len() as f64;
    // Θ² of a 2D Gaussian with variance 1/(2J) per axis is exponential, mean 1/J
    assert!((mean_t2 * 100.0 - 1.0).abs() < 0.03, "{mean_t2}");
    for (pt, t2) in w.points.iter().zip(&w.theta_sqr).take(200) {
        assert_abs_diff_eq!(center.sphere_angle(pt).powi(2), *t2, epsilon = 1e-10);
    }
    assert_eq!(w, sample_wigner(&center, &s, 20_000, 3).unwrap());
    assert!(sample_wigner(&center, &SpinSpace::new(5.0).unwrap(), 10, 1).is_err());
}

#[test]
fn twa_free_precession_keeps_z() {
    let s = SpinSpace::new(50.0).unwrap();
    let c = CouplingParams::new(1.0, 0.0, 0.0).unwrap();
    let center = PhasePoint::new(1.0, 0.2).unwrap();
    let sample = sample_wigner(&center, &s, 2000, 11).unwrap();
    let times: Vec<f64> = (0..=20).map(|i| 0.5 * i as f64).collect();
    let r = twa(&sample, &s, &c, &times, &TwaConfig::default()).unwrap();
    assert_eq!(r.dropped, 0);
    for &z in &r.jz {
        assert_abs_diff_eq!(z, r.jz[0], epsilon = 1e-8);
    }
    // the rigid rotation returns every sample to its start at t = 2π
    let back = twa(&sample, &s, &c, &[0.0, TAU], &TwaConfig::default()).unwrap();
    assert_abs_diff_eq!(back.sp[1], back.sp[0], epsilon = 1e-7);
}

#[test]
fn twa_initial_survival_is_one_within_error() {
    let s = j100();
    let c = CouplingParams::new(1.0, -4.0, -12.0).unwrap();
    let sample = sample_wigner(&PhasePoint::new(1.2, 0.0).unwrap(), &s, 5000, 7).unwrap();
    let (sp, err) = twa_sp(&sample, &s, &c, &[0.0, 1.0], &TwaConfig::default()).unwrap();
    assert!((sp[0] - 1.0).abs() < 3.0 * err[0], "{} ± {}", sp[0], err[0]);
    let again = twa_sp(&sample, &s, &c, &[0.0, 1.0], &TwaConfig::default()).unwrap();
    assert_eq!((sp, err), again);
}

#[test]
fn rolling_average_basics() {
    let t: Vec<f64> = (0..=100).map(|i| 0.1 * i as f64).collect();
    let flat = vec![2.5; t.len()];
    assert!(rolling_average(&t, &flat, 2.0).iter().all(|&v| (v - 2.5).abs() < 1e-14));
    // a linear series is reproduced away from the ends
    let lin: Vec<f64> = t.iter().map(|x| 3.0 * x - 1.0).collect();
    let avg = rolling_average(&t, &lin, 2.0);
    for i in 10..=90 {
        assert_abs_diff_eq!(avg[i], lin[i], epsilon = 1e-12);
    }
    // window clipped at the start: mean of 0..=1
    assert_abs_diff_eq!(avg[0], 3.0 * 0.5 - 1.0, epsilon = 1e-12);
}

#[test]
fn scenarios_start_on_their_orbits() {
    let s = j100();
    for kind in ScenarioKind::all() {
        let sc = scenario_builder(kind, &s, 3.0).unwrap();
        assert!((classical_energy(&sc.start, &sc.couplings) - sc.epsilon).abs() < 1e-9, "{kind:?}");
        assert_eq!(sc.partner.is_none(), kind == ScenarioKind::H);
        let want_n = if matches!(kind, ScenarioKind::C | ScenarioKind::D) { 173 } else { 172 };
        assert_eq!(sc.crossing_n, want_n);
        assert_eq!(sc.t_max, if kind == ScenarioKind::E { 200.0 } else { 50.0 });
        if let Some(partner) = &sc.partner {
            // partner orbit is disjoint from the start
            let gap = partner
                .samples
                .iter()
                .map(|p| (p.q - sc.start.q).hypot(p.p - sc.start.p))
                .fold(f64::INFINITY, f64::min);
            assert!(gap > 0.05, "{kind:?}: {gap}");
        }
    }
    assert!(ScenarioKind::from_letter('z').is_err());
    assert_eq!(ScenarioKind::from_letter('F').unwrap(), ScenarioKind::F);
    assert_eq!(default_avoided_n(&s), 172);
}

#[test]
fn quench_config_validation() {
    let s = SpinSpace::new(10.0).unwrap();
    let c = CouplingParams::new(1.0, -2.0, -6.0).unwrap();
    let start = PhasePoint::new(0.5, 0.0).unwrap();
    let few = QuenchConfig { twa: TwaConfig { samples: 10, ..Default::default() }, ..Default::default() };
    assert!(run_quench(&s, &c, &start, None, &few).is_err());
    let bad_dt = QuenchConfig { dt: 0.0, ..Default::default() };
    assert!(run_quench(&s, &c, &start, None, &bad_dt).is_err());
}

#[test]
fn short_quench_is_deterministic() {
    let s = SpinSpace::new(20.0).unwrap();
    let c = CouplingParams::new(1.0, -2.0, -6.0).unwrap();
    let start = PhasePoint::new(0.9, 0.0).unwrap();
    let cfg = QuenchConfig {
        t_max: 2.0,
        dt: 0.1,
        twa: TwaConfig { samples: 1000, window: 1.0, ..Default::default() },
        ..Default::default()
    };
    let a = run_quench(&s, &c, &start, None, &cfg).unwrap();
    let b = run_quench(&s, &c, &start, None, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.times.len(), 21);
    assert_eq!(a.sp_quantum[0], 1.0);
    assert!(a.line_integral.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn survival_probability_in_unit_interval(theta in 0.1f64..3.0, phi in 0.0f64..TAU, t in 0.0f64..30.0) {
        let s = SpinSpace::new(10.0).unwrap();
        let spectra = SpectralData::compute(&s, &CouplingParams::new(1.0, -4.0, -12.0).unwrap()).unwrap();
        let alpha = CoherentState::from_angles(&s, theta, phi).unwrap();
        let evo = evolve_quantum(&alpha, &spectra, &[0.0, t]).unwrap();
        prop_assert!((0.0..=1.0).contains(&evo.sp[1]));
        prop_assert!((evo.norm_at(t) - 1.0).abs() < 1e-12);
        prop_assert!(evo.jz[1].abs() <= 1.0);
    }

    #[test]
    fn ehrenfest_agrees_with_finite_difference(q in -1.3f64..1.3, p in -1.3f64..1.3) {
        let s = SpinSpace::new(8.0).unwrap();
        let c = CouplingParams::new(1.0, -3.0, 2.0).unwrap();
        let spectra = SpectralData::compute(&s, &c).unwrap();
        let alpha = CoherentState::from_phase_point(&s, &PhasePoint { q, p }).unwrap();
        let h = 1e-5;
        let evo = evolve_quantum(&alpha, &spectra, &[0.0, h, 2.0 * h]).unwrap();
        let fd = (-3.0 * evo.jz[0] + 4.0 * evo.jz[1] - evo.jz[2]) / (2.0 * h);
        prop_assert!((fd - ehrenfest_jz_slope(&alpha, &c).unwrap()).abs() < 1e-6);
    }
}
