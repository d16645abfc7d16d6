mod common;

use approx::assert_abs_diff_eq;
use common::{dense_spectrum, j100};
use lmg_core::classical::{classify_sector, CriticalKind};
use lmg_core::coherent::CoherentState;
use lmg_core::spectral::*;
use lmg_core::spin::*;
use proptest::prelude::*;

fn block_energies(space: &SpinSpace, c: &CouplingParams) -> Vec<f64> {
    let mut e = SpectralData::energies_only(space, c).unwrap().all_energies();
    e.sort_by(f64::total_cmp);
    e
}

#[test]
fn free_spin_levels() {
    let s = SpinSpace::new(3.0).unwrap();
    let c = CouplingParams::new(2.0, 0.0, 0.0).unwrap();
    let e = block_energies(&s, &c);
    let want: Vec<f64> = (-3..=3).map(|m| 2.0 * m as f64).collect();
    for (a, b) in e.iter().zip(&want) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-13);
    }
}

#[test]
fn spin_one_closed_form() {
    // For J = 1 the negative block is the single m = 0 level with energy 2W,
    // and the positive block is [[−ε0 + W, V], [V, ε0 + W]].
    let s = SpinSpace::new(1.0).unwrap();
    let c = CouplingParams::new(1.0, -0.8, 2.5).unwrap();
    let (v, w) = (c.v(&s).unwrap(), c.w(&s).unwrap());
    let sd = SpectralData::compute(&s, &c).unwrap();
    assert_abs_diff_eq!(sd.negative.energy(1), 2.0 * w, epsilon = 1e-14);
    let r = (1.0 + v * v).sqrt();
    assert_abs_diff_eq!(sd.positive.energy(1), w - r, epsilon = 1e-14);
    assert_abs_diff_eq!(sd.positive.energy(2), w + r, epsilon = 1e-14);
}

#[test]
fn blocks_match_dense_oracle() {
    for twice_j in 2..=20u32 {
        let s = SpinSpace::from_twice_j(twice_j).unwrap();
        for &(gx, gy) in &[(-4.0, -12.0), (-4.1033, -12.31), (0.5, 0.5), (3.0, -7.0), (20.0, 1.0)] {
            let c = CouplingParams::new(1.0, gx, gy).unwrap();
            let mine = block_energies(&s, &c);
            let dense = dense_spectrum(&s, &c);
            let diff = mine.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(diff < 1e-10, "2J = {twice_j} ({gx}, {gy}): {diff}");
        }
    }
}

#[test]
fn eigenvectors_are_orthonormal_and_solve_the_block() {
    let s = SpinSpace::new(40.0).unwrap();
    let c = CouplingParams::new(1.0, -4.0, -12.0).unwrap();
    let (p, _) = build_parity_blocks(&s, &c).unwrap();
    let sec = diagonalize(&p).unwrap();
    let mut worst_resid = 0.0f64;
    let mut worst_ortho = 0.0f64;
    for k in 1..=sec.len() {
        let v = sec.vector(k);
        let mut hv = vec![0.0; v.len()];
        p.apply(v, &mut hv);
        let r = hv.iter().zip(v).map(|(a, b)| (a - sec.energy(k) * b).abs()).fold(0.0, f64::max);
        worst_resid = worst_resid.max(r);
        for l in k..=sec.len() {
            let d: f64 = v.iter().zip(sec.vector(l)).map(|(a, b)| a * b).sum();
            let want = if k == l { 1.0 } else { 0.0 };
            worst_ortho = worst_ortho.max((d - want).abs());
        }
    }
    assert!(worst_resid < 1e-11, "{worst_resid}");
    assert!(worst_ortho < 1e-12, "{worst_ortho}");
}

#[test]
fn ground_state_order_parameter() {
    let s = j100();
    // Free spin: ground state m = −J, order parameter 0.
    let free = SpectralData::compute(&s, &CouplingParams::new(1.0, 0.0, 0.0).unwrap()).unwrap();
    assert_abs_diff_eq!(order_parameter(&free), 0.0, epsilon = 1e-14);
    // Deep in the broken phase the ground state moves off the south pole;
    // the classical minimum sits at z = −1/|γ| for the −12 direction.
    let broken = SpectralData::compute(&s, &CouplingParams::new(1.0, -4.0, -12.0).unwrap()).unwrap();
    let op = order_parameter(&broken);
    assert!((op - (1.0 - 1.0 / 12.0)).abs() < 0.02, "{op}");
}

#[test]
fn crossing_prediction_values() {
    let s = j100();
    let ac = predict_crossing_coupling(&s, 3.0, 172, true).unwrap();
    let c = predict_crossing_coupling(&s, 3.0, 173, true).unwrap();
    assert_eq!(ac.kind, CrossingKind::Avoided);
    assert_eq!(c.kind, CrossingKind::Real);
    assert!((ac.gamma_x + 4.10331).abs() < 5e-6, "{}", ac.gamma_x);
    assert!((c.gamma_x + 4.25529).abs() < 5e-6, "{}", c.gamma_x);
    assert_abs_diff_eq!(ac.gamma_x * ac.gamma_y, ac.product, epsilon = 1e-12);
    assert_abs_diff_eq!(ac.product, (199.0f64 / 28.0).powi(2), epsilon = 1e-12);
}

#[test]
fn crossing_prediction_rejects_bad_input() {
    let s = j100();
    assert!(predict_crossing_coupling(&s, 3.0, 0, true).is_err());
    assert!(predict_crossing_coupling(&s, 3.0, 200, true).is_err());
    assert!(predict_crossing_coupling(&s, -3.0, 172, true).is_err());
    // N = 1 gives sqrt(γxγy) = 1, so γx = 1/sqrt(3) < 1.
    assert!(matches!(predict_crossing_coupling(&s, 3.0, 1, true), Err(lmg_core::LmgError::OutsideDegenerateRegime(_))));
}

#[test]
fn opposite_parity_levels_cross_at_prediction() {
    let s = j100();
    let pred = predict_crossing_coupling(&s, 3.0, 173, true).unwrap();
    for k in [70, 80] {
        let rec = locate_minimum_gap(
            &s,
            1.0,
            3.0,
            GapPair::CrossParity { k },
            (pred.gamma_x - 0.02, pred.gamma_x + 0.02),
            1e-9,
        )
        .unwrap();
        assert!(rec.interior);
        assert!((rec.gamma_at_min - pred.gamma_x).abs() < 1e-6, "k = {k}: {}", rec.gamma_at_min);
        assert!(rec.gap_min < 1e-9);
    }
}

#[test]
fn same_parity_minimum_near_prediction() {
    let s = j100();
    let pred = predict_crossing_coupling(&s, 3.0, 172, true).unwrap();
    let rec = locate_minimum_gap(
        &s,
        1.0,
        3.0,
        GapPair::SameParity { parity: Parity::Positive, k: 70 },
        (pred.gamma_x - 0.02, pred.gamma_x + 0.02),
        1e-8,
    )
    .unwrap();
    assert!(rec.interior);
    assert!((rec.gamma_at_min - pred.gamma_x).abs() < 1e-4);
    assert!(rec.gap_min < 1e-4);
}

#[test]
fn gap_search_flags_endpoint_minima() {
    let s = SpinSpace::new(10.0).unwrap();
    let rec =
        locate_minimum_gap(&s, 1.0, 1.0, GapPair::SameParity { parity: Parity::Positive, k: 1 }, (0.0, 0.5), 1e-6)
            .unwrap();
    assert!(!rec.interior);
}

#[test]
fn eigencomponents_resolve_a_coherent_state() {
    let s = SpinSpace::new(15.0).unwrap();
    let c = CouplingParams::new(1.0, -2.0, -5.0).unwrap();
    let sd = SpectralData::compute(&s, &c).unwrap();
    let cs = CoherentState::from_angles(&s, 1.1, 0.7).unwrap();
    let comps = eigencomponents(&cs, &sd).unwrap();
    assert_eq!(comps.len(), s.dim());
    let total: f64 = comps.iter().map(|x| x.amplitude.norm_sqr()).sum();
    assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    // ⟨H⟩ from the components matches the dense expectation value
    let h = common::dense_hamiltonian(&s, &c);
    let mut dense = 0.0;
    for a in 0..s.dim() {
        for b in 0..s.dim() {
            dense += (cs.amplitudes[a].conj() * cs.amplitudes[b]).re * h[(a, b)];
        }
    }
    let mean: f64 = comps.iter().map(|x| x.amplitude.norm_sqr() * x.energy).sum();
    assert_abs_diff_eq!(mean, dense, epsilon = 1e-10);
}

#[test]
fn sweep_matches_pointwise() {
    let s = SpinSpace::new(8.0).unwrap();
    let gammas = [-3.0, -2.0, 0.5];
    let sw = sweep_spectra(&s, 1.0, 2.0, &gammas).unwrap();
    for (g, sd) in gammas.iter().zip(&sw) {
        let one = block_energies(&s, &CouplingParams::new(1.0, *g, 2.0 * g).unwrap());
        let mut e = sd.all_energies();
        e.sort_by(f64::total_cmp);
        assert_eq!(e, one);
    }
}

#[test]
fn avoided_crossing_gaps_fall_with_energy() {
    // Pairs sit on the inner and outer orbits; the barrier between them
    // widens above the saddle, so the splitting at the crossing coupling
    // shrinks until it reaches rounding level.
    let s = j100();
    let c = common::crossing_couplings(172);
    let es = classify_sector(&c).first(CriticalKind::EsqptLogDivergence).unwrap();
    let spec = SpectralData::energies_only(&s, &c).unwrap();
    for parity in Parity::both() {
        let sec = spec.sector(parity);
        let gaps: Vec<f64> = avoided_crossing_pairs(&spec, parity, (es, -1.0))
            .into_iter()
            .map(|k| sec.energy(k + 1) - sec.energy(k))
            .take_while(|&g| g > 1e-10)
            .collect();
        assert!(gaps.len() >= 5, "{parity:?}: {gaps:?}");
        assert!(gaps.windows(2).all(|w| w[1] < 0.2 * w[0]), "{parity:?}: {gaps:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn trace_is_preserved(tj in 2u32..=60, gx in -15.0f64..15.0, gy in -15.0f64..15.0) {
        let s = SpinSpace::from_twice_j(tj).unwrap();
        let c = CouplingParams::new(1.0, gx, gy).unwrap();
        let (p, n) = build_parity_blocks(&s, &c).unwrap();
        let trace: f64 = p.diag.iter().chain(&n.diag).sum();
        let sum: f64 = block_energies(&s, &c).iter().sum();
        prop_assert!((trace - sum).abs() < 1e-10 * (1.0 + trace.abs()));
    }

    #[test]
    fn sectors_are_sorted_and_count_2j_plus_1(tj in 2u32..=120, gx in -15.0f64..15.0, gy in -15.0f64..15.0) {
        let s = SpinSpace::from_twice_j(tj).unwrap();
        let sd = SpectralData::energies_only(&s, &CouplingParams::new(1.0, gx, gy).unwrap()).unwrap();
        prop_assert_eq!(sd.positive.len() + sd.negative.len(), s.dim());
        for sec in [&sd.positive, &sd.negative] {
            prop_assert!(sec.energies.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn dense_agreement_small_j(tj in 2u32..=20, gx in -10.0f64..10.0, gy in -10.0f64..10.0) {
        let s = SpinSpace::from_twice_j(tj).unwrap();
        let c = CouplingParams::new(1.0, gx, gy).unwrap();
        let dense = dense_spectrum(&s, &c);
        let mine = block_energies(&s, &c);
        let diff = mine.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-10);
    }

    #[test]
    fn swapping_axes_keeps_the_spectrum(tj in 2u32..=40, gx in -10.0f64..10.0, gy in -10.0f64..10.0) {
        // Rotation by π/2 about z exchanges Jx and Jy.
        let s = SpinSpace::from_twice_j(tj).unwrap();
        let a = block_energies(&s, &CouplingParams::new(1.0, gx, gy).unwrap());
        let b = block_energies(&s, &CouplingParams::new(1.0, gy, gx).unwrap());
        let diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-10);
    }
}
