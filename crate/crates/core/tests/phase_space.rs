mod common;

use std::f64::consts::{PI, TAU};

use approx::assert_abs_diff_eq;
use lmg_core::classical::{trajectory_branches, PhasePoint};
use lmg_core::coherent::CoherentState;
use lmg_core::phase_space::*;
use lmg_core::spectral::SpectralData;
use lmg_core::spin::*;
use num_complex::Complex64;
use proptest::prelude::*;

/// Gauss–Legendre rule on [−1, 1] by Newton iteration on P_n.
fn gauss(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    return (z, 2.0 / ((1.0 - z * z) * dp * dp));
                }
            }
        })
        .collect()
}

/// Wehrl entropy of |J, m⟩ by deterministic quadrature in z: the Husimi
/// function is C(2J, J+m) ((1+z)/2)^{J+m} ((1−z)/2)^{J−m}.
fn basis_state_wehrl(twice_j: u32, twice_m: i32) -> f64 {
    let n = twice_j as i32;
    let up = (n + twice_m) / 2;
    let down = n - up;
    let ln_binom = ln_fact(n) - ln_fact(up) - ln_fact(down);
    let rule = gauss(200);
    let integral: f64 = rule
        .iter()
        .map(|&(z, w)| {
            let ln_q = ln_binom + up as f64 * ((1.0 + z) / 2.0).ln() + down as f64 * ((1.0 - z) / 2.0).ln();
            w * ln_q.exp() * ln_q
        })
        .sum();
    // measure ((2J+1)/4π) dΩ with the φ integral giving 2π
    -(n as f64 + 1.0) / 2.0 * integral
}

fn ln_fact(n: i32) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn basis_state(space: &SpinSpace, m: f64) -> PhaseSpaceState {
    let mut psi = vec![Complex64::new(0.0, 0.0); space.dim()];
    psi[space.index_of(m).unwrap()] = Complex64::new(1.0, 0.0);
    PhaseSpaceState::from_full(&psi)
}

#[test]
fn coherent_state_wehrl_closed_form() {
    for twice_j in [2u32, 9, 40] {
        let s = SpinSpace::from_twice_j(twice_j).unwrap();
        let cs = CoherentState::from_angles(&s, 1.2, 0.4).unwrap();
        let r = wehrl_entropy(&PhaseSpaceState::from_full(&cs.amplitudes), &s, &McConfig::default()).unwrap();
        let want = twice_j as f64 / (twice_j as f64 + 1.0);
        assert!((r.value - want).abs() < 3.0 * r.stderr, "2J = {twice_j}: {} ± {} vs {want}", r.value, r.stderr);
        assert_abs_diff_eq!(basis_state_wehrl(twice_j, -(twice_j as i32)), want, epsilon = 1e-10);
    }
}

#[test]
fn basis_state_wehrl_against_quadrature() {
    let s = SpinSpace::new(6.0).unwrap();
    for m in [-6.0, -2.0, 0.0, 3.0] {
        let r = wehrl_entropy(&basis_state(&s, m), &s, &McConfig::default()).unwrap();
        let want = basis_state_wehrl(12, (2.0 * m) as i32);
        assert!((r.value - want).abs() < 3.0 * r.stderr + 1e-12, "m = {m}: {} ± {} vs {want}", r.value, r.stderr);
    }
}

#[test]
fn wehrl_estimator_is_seed_deterministic() {
    let s = SpinSpace::new(5.0).unwrap();
    let st = basis_state(&s, 1.0);
    let mc = McConfig { samples: 20_000, ..Default::default() };
    let a = wehrl_entropy(&st, &s, &mc).unwrap();
    let b = wehrl_entropy(&st, &s, &mc).unwrap();
    assert_eq!(a, b);
    let c = wehrl_entropy(&st, &s, &McConfig { seed: 99, ..mc }).unwrap();
    assert_ne!(a.value, c.value);
    // batching does not change the values when batch divides the count
    let many = wehrl_many(&[st.clone(), basis_state(&s, -5.0)], &s, &mc).unwrap();
    assert_eq!(many[0], a);
}

#[test]
fn wehrl_stderr_scales_as_inverse_root() {
    let s = SpinSpace::new(20.0).unwrap();
    let st = basis_state(&s, 4.0);
    let small = wehrl_entropy(&st, &s, &McConfig { samples: 50_000, ..Default::default() }).unwrap();
    let big = wehrl_entropy(&st, &s, &McConfig { samples: 200_000, ..Default::default() }).unwrap();
    let ratio = small.stderr / big.stderr;
    assert!((ratio - 2.0).abs() < 0.4, "{ratio}");
}

#[test]
fn wehrl_conventions_convert() {
    let s = SpinSpace::new(4.0).unwrap();
    let r = WehrlResult { value: 0.7, stderr: 0.01, samples: 10, convention: WehrlConvention::Normalized };
    let raw = r.in_convention(&s, WehrlConvention::RawSolidAngle);
    assert_abs_diff_eq!(raw.value, 0.7 * 4.0 * PI / 9.0, epsilon = 1e-15);
    let back = raw.in_convention(&s, WehrlConvention::Normalized);
    assert_abs_diff_eq!(back.value, 0.7, epsilon = 1e-15);
}

#[test]
fn wehrl_of_density_matches_state_estimator() {
    let s = SpinSpace::new(3.0).unwrap();
    let mc = McConfig { samples: 30_000, ..Default::default() };
    let via_state = wehrl_entropy(&basis_state(&s, -3.0), &s, &mc).unwrap();
    // south-pole basis state: Q = cos^{4J}(θ/2) with θ from the south pole
    let via_density = wehrl_of_density(|theta, _| (theta / 2.0).cos().powi(12), &s, &mc).unwrap();
    assert_abs_diff_eq!(via_state.value, via_density.value, epsilon = 1e-10);
}

#[test]
fn husimi_field_of_a_coherent_state() {
    let s = SpinSpace::new(10.0).unwrap();
    let center = PhasePoint::new(0.6, -0.4).unwrap();
    let cs = CoherentState::from_phase_point(&s, &center).unwrap();
    let grid = GridSpec::square(161);
    let f = husimi_of_state(&PhaseSpaceState::from_full(&cs.amplitudes), &s, &grid, "cs");
    assert_abs_diff_eq!(f.max_value(), 1.0, epsilon = 5e-3);
    assert!((f.normalization() - 1.0).abs() < 5e-3, "{}", f.normalization());
    assert!(f.values.iter().filter(|v| v.is_finite()).all(|&v| (0.0..=1.0 + 1e-12).contains(&v)));
    for iq in (0..161).step_by(7) {
        for ip in (0..161).step_by(11) {
            let pt = PhasePoint { q: grid.q(iq), p: grid.p(ip) };
            if pt.radius_sqr() > 4.0 {
                assert!(f.at(iq, ip).is_nan());
                continue;
            }
            let cos_half_sqr = 0.5 * (1.0 + (pt.sphere_angle(&center)).cos());
            assert_abs_diff_eq!(f.at(iq, ip), cos_half_sqr.powi(20), epsilon = 1e-10);
        }
    }
}

#[test]
fn eigenstate_husimi_is_normalized() {
    let s = SpinSpace::new(12.0).unwrap();
    let spec = SpectralData::compute(&s, &CouplingParams::new(1.0, -4.0, -12.0).unwrap()).unwrap();
    let f = husimi_eigenstate(&spec, Parity::Negative, 3, &GridSpec::square(201));
    assert!((f.normalization() - 1.0).abs() < 5e-3, "{}", f.normalization());
    // parity: Q(−Q, −P) = Q(Q, P) on a symmetric grid
    let n = 201;
    for iq in (0..n).step_by(13) {
        for ip in (0..n).step_by(17) {
            let a = f.at(iq, ip);
            let b = f.at(n - 1 - iq, n - 1 - ip);
            if a.is_finite() {
                assert_abs_diff_eq!(a, b, epsilon = 1e-12);
            }
        }
    }
}

#[test]
fn wehrl_sweep_select_by_energy() {
    let s = SpinSpace::new(8.0).unwrap();
    let c = CouplingParams::new(1.0, -4.0, -12.0).unwrap();
    let rows = wehrl_sweep(
        &s,
        &WehrlSweep::Energy { couplings: c, parities: vec![Parity::Positive], window: (-3.0, -1.0) },
        &McConfig { samples: 4096, ..Default::default() },
        WehrlConvention::Normalized,
    )
    .unwrap();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.energy_over_j >= -3.0 && r.energy_over_j <= -1.0 && r.parity == Parity::Positive));
    let bad = wehrl_sweep(
        &s,
        &WehrlSweep::Gamma { epsilon0: 1.0, ratio: 3.0, gammas: vec![-4.0], parity: Parity::Positive, ks: vec![0] },
        &McConfig::default(),
        WehrlConvention::Normalized,
    );
    assert!(bad.is_err());
}

#[test]
fn line_integral_on_a_free_precession_ring() {
    // γ = 0 orbits are circles of constant z; for the south-pole state
    // Q = ((1−z)/2)^{2J} along the whole ring, of length 2π sqrt(2(1+z)).
    let s = SpinSpace::new(5.0).unwrap();
    let c = CouplingParams::new(1.0, 0.0, 0.0).unwrap();
    let eps = -0.6;
    let orbit = &trajectory_branches(eps, &c, 512).unwrap()[0];
    let mut psi = vec![Complex64::new(0.0, 0.0); s.dim()];
    psi[0] = Complex64::new(1.0, 0.0);
    let want = TAU * (2.0f64 * (1.0 + eps)).sqrt() * ((1.0 - eps) / 2.0).powi(10);
    let got = line_integral(&psi, &s, orbit).unwrap();
    assert!((got / want - 1.0).abs() < 1e-3, "{got} vs {want}");
}

#[test]
fn line_integral_ignores_traversal_direction() {
    let s = SpinSpace::new(10.0).unwrap();
    let c = CouplingParams::new(1.0, -4.0, -12.0).unwrap();
    let alpha = CoherentState::from_phase_point(&s, &PhasePoint { q: 0.9, p: 0.3 }).unwrap();
    for orbit in trajectory_branches(-2.0, &c, 8192).unwrap() {
        let a = LineIntegrator::new(&s, &orbit, 2048).unwrap().integrate(&alpha.amplitudes);
        let b = LineIntegrator::new(&s, &orbit.reversed(), 2048).unwrap().integrate(&alpha.amplitudes);
        // nodes land in different places after reversal, so only quadrature error remains
        assert!((a - b).abs() <= 1e-6 * a.abs(), "{a} vs {b}");
    }
}

/// Husimi mass within geodesic distance `radius` of any branch at the
/// eigenstate's energy.
fn tube_mass(spec: &SpectralData, parity: Parity, k: usize, radius: f64) -> f64 {
    let j = spec.space.j();
    let eps = spec.sector(parity).energy(k) / j;
    let orbit: Vec<PhasePoint> = trajectory_branches(eps, &spec.couplings, 4096)
        .unwrap()
        .iter()
        .flat_map(|o| o.resample_arclength(600).unwrap())
        .collect();
    let grid = GridSpec::square(201);
    let f = husimi_eigenstate(spec, parity, k, &grid);
    let w = (2.0 * j + 1.0) / (4.0 * PI) * grid.dq() * grid.dp();
    let mut inside = 0.0;
    for ip in 0..grid.np {
        for iq in 0..grid.nq {
            let v = f.at(iq, ip);
            if !v.is_finite() {
                continue;
            }
            let x = PhasePoint { q: grid.q(iq), p: grid.p(ip) };
            if orbit.iter().any(|o| o.sphere_angle(&x) < radius) {
                inside += v * w;
            }
        }
    }
    inside / f.normalization()
}

#[test]
fn mid_spectrum_husimi_lies_on_its_level_set() {
    let s = SpinSpace::new(100.0).unwrap();
    let spec = SpectralData::compute(&s, &CouplingParams::new(1.0, -4.0, -12.0).unwrap()).unwrap();
    let radius = 3.0 / (2.0 * s.j()).sqrt();
    for (parity, k) in [(Parity::Positive, 40), (Parity::Negative, 50), (Parity::Positive, 70), (Parity::Negative, 85)]
    {
        let m = tube_mass(&spec, parity, k, radius);
        assert!(m >= 0.8, "{parity:?} k={k}: {m}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn husimi_bounded(theta in 0.0f64..PI, phi in 0.0f64..TAU, k in 1usize..6) {
        let s = SpinSpace::new(5.0).unwrap();
        let spec = SpectralData::compute(&s, &CouplingParams::new(1.0, -2.0, -5.0).unwrap()).unwrap();
        let cs = CoherentState::from_angles(&s, theta, phi).unwrap();
        let q = PhaseSpaceState::from_eigenstate(&spec, Parity::Positive, k).husimi(&cs.amplitudes);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&q));
    }

    #[test]
    fn wehrl_not_below_coherent_value(k in 1usize..=6) {
        let s = SpinSpace::new(5.0).unwrap();
        let spec = SpectralData::compute(&s, &CouplingParams::new(1.0, -2.0, -5.0).unwrap()).unwrap();
        let r = wehrl_entropy(&PhaseSpaceState::from_eigenstate(&spec, Parity::Positive, k), &s,
            &McConfig { samples: 20_000, ..Default::default() }).unwrap();
        prop_assert!(r.value > 10.0 / 11.0 - 3.0 * r.stderr);
    }
}
