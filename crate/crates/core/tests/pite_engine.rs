use num_complex::Complex64;
use pite_core::hamiltonian::{shift_energy, HermitianOperator};
use pite_core::pite::{
    approx_pite_step, build_theta, exact_pite_step, run_trajectory, survival_probability,
    Evolution, ExactRte, MatrixRte, PiteConfig, TrajectoryMode,
};
use pite_core::statevector::StateVector;
use pite_core::two_level::{theta_level, TwoLevelParams};
use pite_testkit as tk;

fn random_case(seed: u64, n: usize) -> (tk::CMatrix, HermitianOperator, StateVector) {
    let mut r = tk::rng(seed);
    let dim = 1 << n;
    let hm = tk::random_shifted_hamiltonian(&mut r, dim, 1.0);
    let h = HermitianOperator::new(hm.clone()).unwrap();
    let psi = StateVector::from_amplitudes(tk::random_vector(&mut r, dim)).unwrap();
    (hm, h, psi)
}

/// Splits a register-plus-ancilla state (ancilla last) into its two blocks.
fn blocks(s: &StateVector) -> (Vec<Complex64>, Vec<Complex64>) {
    let a = s.amplitudes();
    (
        a.iter().step_by(2).copied().collect(),
        a.iter().skip(1).step_by(2).copied().collect(),
    )
}

#[test]
fn exact_step_matches_dense_exponential() {
    for seed in 0..20 {
        let (hm, h, psi) = random_case(seed, 2);
        let cfg = PiteConfig::exact(0.9, 0.3).unwrap();
        let r = exact_pite_step(&psi, &h, &cfg).unwrap();
        let want = tk::normalize(&tk::mat_vec(&tk::expm_ite(&hm, 0.3), psi.amplitudes()));
        assert!(tk::distance(r.success_state.amplitudes(), &want) < 1e-10);
    }
}

#[test]
fn exact_pre_measurement_state() {
    let (hm, h, psi) = random_case(7, 3);
    let (m0, dtau) = (0.7, 0.25);
    let cfg = PiteConfig::exact(m0, dtau).unwrap();
    let r = exact_pite_step(&psi, &h, &cfg).unwrap();
    let m = tk::expm_ite(&hm, dtau) * Complex64::new(m0, 0.0);
    let dim = m.nrows();
    let rest = tk::hermitian_fn(&(tk::identity(dim) - &m * &m), |x| x.max(0.0).sqrt());
    let (top, bottom) = blocks(&r.pre_measurement_state);
    assert!(tk::distance(&top, &tk::mat_vec(&m, psi.amplitudes())) < 1e-10);
    assert!(tk::distance(&bottom, &tk::mat_vec(&rest, psi.amplitudes())) < 1e-10);
    let want_p = tk::norm(&tk::mat_vec(&m, psi.amplitudes())).powi(2);
    assert!((r.success_probability - want_p).abs() < 1e-12);
    assert!((r.success_probability + r.failure_probability - 1.0).abs() < 1e-12);
}

#[test]
fn exact_pre_measurement_map_is_unitary() {
    let (_, h, _) = random_case(3, 2);
    let cfg = PiteConfig::exact(0.8, 0.4).unwrap();
    let dim = h.dim();
    let columns: Vec<Vec<Complex64>> = (0..dim)
        .map(|j| {
            let psi = StateVector::basis(2, j).unwrap();
            exact_pite_step(&psi, &h, &cfg)
                .unwrap()
                .pre_measurement_state
                .into_amplitudes()
        })
        .collect();
    for a in 0..dim {
        for b in 0..dim {
            let ip: Complex64 = columns[a]
                .iter()
                .zip(&columns[b])
                .map(|(x, y)| x.conj() * y)
                .sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((ip - want).norm() < 1e-10);
        }
    }
}

#[test]
fn theta_spectral_identities() {
    let (_, h, _) = random_case(11, 3);
    let cfg = PiteConfig::exact(0.85, 0.2).unwrap();
    let theta = build_theta(&h, &cfg).unwrap();
    let c = theta.spectral_map(|t| Complex64::new(t.cos().powi(2), 0.0));
    let s = theta.spectral_map(|t| Complex64::new(t.sin().powi(2), 0.0));
    assert!(tk::max_abs_diff(&(c + s), &tk::identity(8)) < 1e-12);
    for &t in theta.eigenvalues() {
        assert!(t > 0.0 && t < std::f64::consts::PI);
    }
}

#[test]
fn theta_matches_two_level_closed_form() {
    let h = HermitianOperator::diagonal(&[0.0, 1.0]).unwrap();
    for dtau in [0.1, 0.3, 0.5] {
        let cfg = PiteConfig::exact(0.8, dtau).unwrap();
        let theta = build_theta(&h, &cfg).unwrap();
        let p = TwoLevelParams::new(0.0, 1.0, 0.8, dtau).unwrap();
        let mut want = [theta_level(0.0, &p).unwrap(), theta_level(1.0, &p).unwrap()];
        want.sort_by(f64::total_cmp);
        for (a, b) in theta.eigenvalues().iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn zero_step_approx_limit() {
    let (_, h, psi) = random_case(5, 2);
    let rte = ExactRte::new(&h);
    let cfg = PiteConfig::approx(0.8, 1e-9).unwrap();
    let r = approx_pite_step(&psi, &rte, &cfg).unwrap();
    assert!((r.success_probability - 0.64).abs() < 1e-8);
    assert!(tk::ray_distance(r.success_state.amplitudes(), psi.amplitudes()) < 1e-8);
}

fn first_order_reference(
    hm: &tk::CMatrix,
    psi: &[Complex64],
    m0: f64,
    dtau: f64,
) -> Vec<Complex64> {
    let hpsi = tk::mat_vec(hm, psi);
    let s = (1.0 - m0 * m0).sqrt();
    let mut out = Vec::with_capacity(2 * psi.len());
    for (p, hp) in psi.iter().zip(&hpsi) {
        out.push((p - hp * dtau) * m0);
        out.push(p * s + hp * (m0 * m0 * dtau / s));
    }
    out
}

#[test]
fn approx_pre_measurement_is_first_order() {
    let (hm, h, psi) = random_case(21, 3);
    let rte = ExactRte::new(&h);
    let m0 = 0.8;
    let dev = |dtau: f64| {
        let cfg = PiteConfig::approx(m0, dtau).unwrap();
        let r = approx_pite_step(&psi, &rte, &cfg).unwrap();
        let want = first_order_reference(&hm, psi.amplitudes(), m0, dtau);
        tk::distance(r.pre_measurement_state.amplitudes(), &want)
    };
    let (a, b, c) = (dev(0.02), dev(0.01), dev(0.005));
    assert!((a / b - 4.0).abs() < 0.8, "{a} {b}");
    assert!((b / c - 4.0).abs() < 0.8, "{b} {c}");
}

#[test]
fn approx_with_dense_rte_provider() {
    let (hm, h, psi) = random_case(2, 2);
    let rte = MatrixRte::new(2, move |dt| tk::expm_rte(&hm, dt));
    let cfg = PiteConfig::approx(0.75, 0.1).unwrap();
    let a = approx_pite_step(&psi, &rte, &cfg).unwrap();
    let b = approx_pite_step(&psi, &ExactRte::new(&h), &cfg).unwrap();
    assert!(
        a.pre_measurement_state
            .distance(&b.pre_measurement_state)
            .unwrap()
            < 1e-10
    );
}

#[test]
fn approx_global_error_is_first_order() {
    let (hm, h, psi) = random_case(33, 3);
    let rte = ExactRte::new(&h);
    let total = 0.8;
    let want = tk::normalize(&tk::mat_vec(&tk::expm_ite(&hm, total), psi.amplitudes()));
    let err = |n: usize| {
        let cfg = PiteConfig::approx(0.8, total / n as f64).unwrap();
        let t = run_trajectory(
            &psi,
            Evolution::Approx(&rte),
            &cfg,
            n,
            TrajectoryMode::Postselect,
            None,
        )
        .unwrap();
        tk::ray_distance(t.final_state.amplitudes(), &want)
    };
    let (a, b, c) = (err(8), err(16), err(32));
    assert!((a / b - 2.0).abs() < 0.4, "{a} {b}");
    assert!((b / c - 2.0).abs() < 0.4, "{b} {c}");
}

#[test]
fn survival_matches_trajectory_product() {
    let (_, h, psi) = random_case(8, 2);
    let cfg = PiteConfig::exact(0.9, 0.2).unwrap();
    let t = run_trajectory(
        &psi,
        Evolution::Exact(&h),
        &cfg,
        5,
        TrajectoryMode::Postselect,
        Some(&h),
    )
    .unwrap();
    let product: f64 = t.success_probabilities().iter().product();
    assert!((t.survival() - product).abs() < 1e-12);
    assert!((survival_probability(&psi, &h, &cfg, 5).unwrap() - t.survival()).abs() < 1e-10);
}

#[test]
fn eigenstate_weights_are_constant() {
    let (_, h, _) = random_case(9, 2);
    let psi = h.eigenstate(2).unwrap();
    let cfg = PiteConfig::exact(0.9, 0.2).unwrap();
    let t = run_trajectory(
        &psi,
        Evolution::Exact(&h),
        &cfg,
        6,
        TrajectoryMode::Postselect,
        Some(&h),
    )
    .unwrap();
    for step in &t.steps {
        let w = step.weights.as_ref().unwrap();
        assert!((w[2] - 1.0).abs() < 1e-10);
    }
}

#[test]
fn shift_keeps_ray_and_rescales_probability() {
    let (_, h, psi) = random_case(13, 2);
    let e0 = -0.37;
    let shifted = shift_energy(&h, e0);
    let dtau = 0.2;
    let cfg = PiteConfig::exact(0.8, dtau).unwrap();
    let a = exact_pite_step(&psi, &h, &cfg).unwrap();
    let b = exact_pite_step(&psi, &shifted, &cfg).unwrap();
    assert!(tk::ray_distance(a.success_state.amplitudes(), b.success_state.amplitudes()) < 1e-10);
    assert!(
        (b.success_probability - a.success_probability * (2.0 * e0 * dtau).exp()).abs() < 1e-12
    );
}

#[test]
fn sampled_mode_truncates_at_failure() {
    let h = HermitianOperator::diagonal(&[0.0, 1.0]).unwrap();
    let psi = StateVector::from_real(&[1.0, 1.0]).unwrap();
    let cfg = PiteConfig::exact(0.6, 0.3).unwrap();
    let mut saw_failure = false;
    for seed in 0..20 {
        let t = run_trajectory(
            &psi,
            Evolution::Exact(&h),
            &cfg,
            10,
            TrajectoryMode::Sampled { seed },
            None,
        )
        .unwrap();
        if let Some(k) = t.failed_at {
            saw_failure = true;
            assert_eq!(t.steps.len(), k + 1);
            assert!(!t.steps[k].succeeded);
            assert!(t.steps[..k].iter().all(|s| s.succeeded));
        } else {
            assert_eq!(t.steps.len(), 10);
        }
        let again = run_trajectory(
            &psi,
            Evolution::Exact(&h),
            &cfg,
            10,
            TrajectoryMode::Sampled { seed },
            None,
        )
        .unwrap();
        assert_eq!(t.steps, again.steps);
    }
    assert!(saw_failure);
}
