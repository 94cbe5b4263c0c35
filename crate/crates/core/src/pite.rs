//! Single-ancilla PITE steps and the multi-step trajectory driver.
//!
//! The ancilla is appended as the least significant qubit. Every step runs
//! the gate sequence `H, W, (anti-)controlled register gates, [R_z], W^†` on
//! the ancilla and then reads the `|0>` (success) branch:
//!
//! - exact circuit: anti-controlled `exp(+i k Theta)`, controlled
//!   `exp(-i k Theta)`, which yields `M|psi>|0> + sqrt(1 - M^2)|psi>|1>` with
//!   `M = m0 exp(-H dtau)`;
//! - first-order circuit: anti-controlled `U(s1 dtau)`, controlled
//!   `U(s1 dtau)^†`, `R_z(-2 theta0)`, where `U` is any real-time evolution.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hamiltonian::HermitianOperator;
use crate::statevector::{gates, Control, Matrix, StateVector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CircuitKind {
    Exact,
    #[default]
    Approx,
}

/// Parameters of one PITE step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PiteConfig {
    m0: f64,
    dtau: f64,
    circuit: CircuitKind,
}

impl PiteConfig {
    /// Requires `0 < m0 < 1`, `m0 != 1/sqrt(2)` and a finite `dtau >= 0`.
    pub fn new(m0: f64, dtau: f64, circuit: CircuitKind) -> Result<Self> {
        if !(m0 > 0.0 && m0 < 1.0) {
            return Err(Error::Domain {
                what: "m0",
                value: m0,
            });
        }
        if (m0 - FRAC_1_SQRT_2).abs() < 1e-12 {
            return Err(Error::InvalidParameter(
                "m0 must differ from 1/sqrt(2)".to_string(),
            ));
        }
        if !(dtau >= 0.0 && dtau.is_finite()) {
            return Err(Error::Domain {
                what: "dtau",
                value: dtau,
            });
        }
        Ok(PiteConfig { m0, dtau, circuit })
    }

    pub fn exact(m0: f64, dtau: f64) -> Result<Self> {
        Self::new(m0, dtau, CircuitKind::Exact)
    }

    pub fn approx(m0: f64, dtau: f64) -> Result<Self> {
        Self::new(m0, dtau, CircuitKind::Approx)
    }

    pub fn with_dtau(self, dtau: f64) -> Result<Self> {
        Self::new(self.m0, dtau, self.circuit)
    }

    pub fn with_circuit(self, circuit: CircuitKind) -> Self {
        PiteConfig { circuit, ..self }
    }

    pub fn m0(&self) -> f64 {
        self.m0
    }

    pub fn dtau(&self) -> f64 {
        self.dtau
    }

    pub fn circuit(&self) -> CircuitKind {
        self.circuit
    }

    /// `sign(m0 - 1/sqrt(2))`.
    pub fn kappa(&self) -> f64 {
        if self.m0 > FRAC_1_SQRT_2 {
            1.0
        } else {
            -1.0
        }
    }

    /// `kappa * arccos((m0 + sqrt(1 - m0^2)) / sqrt(2))`.
    pub fn theta0(&self) -> f64 {
        self.kappa() * theta_of(self.m0)
    }

    /// `m0 / sqrt(1 - m0^2)`.
    pub fn s1(&self) -> f64 {
        self.m0 / (1.0 - self.m0 * self.m0).sqrt()
    }

    /// Real-time step used by the first-order circuit, `s1 * dtau`.
    pub fn rescaled_time(&self) -> f64 {
        self.s1() * self.dtau
    }
}

/// `arccos((m + sqrt(1 - m^2)) / sqrt(2))` for `0 <= m <= 1`.
pub(crate) fn theta_of(m: f64) -> f64 {
    ((m + (1.0 - m * m).sqrt()) * FRAC_1_SQRT_2)
        .clamp(-1.0, 1.0)
        .acos()
}

/// Dilation angle whose `(cos + sin)/sqrt(2)` is `m` and `(cos - sin)/sqrt(2)`
/// is `sqrt(1 - m^2)`. Its modulus is [`theta_of`]`(m)` and its sign is
/// `sign(m - 1/sqrt(2))`.
pub(crate) fn signed_angle(m: f64) -> f64 {
    let s = (1.0 - m * m).sqrt();
    (m - s).atan2(m + s)
}

#[derive(Clone, Debug)]
pub struct StepResult {
    pub success_probability: f64,
    pub failure_probability: f64,
    /// Register state after an ancilla outcome `0`.
    pub success_state: StateVector,
    /// Register state after an ancilla outcome `1`; `None` when that branch
    /// has vanishing weight.
    pub failure_state: Option<StateVector>,
    /// Register plus ancilla immediately before the measurement.
    pub pre_measurement_state: StateVector,
}

/// A real-time evolution `U(dt) ≈ exp(-i H dt)` usable as a black box by
/// the first-order circuit.
pub trait RealTimeEvolution: Sync {
    /// Width of the register the evolution acts on.
    fn n_qubits(&self) -> usize;

    /// Applies `U(dt)` to `register` in the branch where `controls` hold.
    fn forward(
        &self,
        state: &StateVector,
        register: &[usize],
        dt: f64,
        controls: &[Control],
    ) -> Result<StateVector>;

    /// Applies `U(dt)^†`.
    fn backward(
        &self,
        state: &StateVector,
        register: &[usize],
        dt: f64,
        controls: &[Control],
    ) -> Result<StateVector>;
}

/// Real-time evolution given by a matrix-valued function of the time step.
pub struct MatrixRte<F> {
    n_qubits: usize,
    unitary: F,
}

impl<F> MatrixRte<F>
where
    F: Fn(f64) -> Matrix + Sync,
{
    pub fn new(n_qubits: usize, unitary: F) -> Self {
        MatrixRte { n_qubits, unitary }
    }
}

impl<F> RealTimeEvolution for MatrixRte<F>
where
    F: Fn(f64) -> Matrix + Sync,
{
    fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    fn forward(
        &self,
        state: &StateVector,
        register: &[usize],
        dt: f64,
        controls: &[Control],
    ) -> Result<StateVector> {
        state.apply_multi_controlled(&(self.unitary)(dt), controls, register)
    }

    fn backward(
        &self,
        state: &StateVector,
        register: &[usize],
        dt: f64,
        controls: &[Control],
    ) -> Result<StateVector> {
        state.apply_multi_controlled(&(self.unitary)(dt).adjoint(), controls, register)
    }
}

/// `exp(-i H dt)` evaluated through the spectrum of `H`.
pub struct ExactRte<'a> {
    h: &'a HermitianOperator,
}

impl<'a> ExactRte<'a> {
    pub fn new(h: &'a HermitianOperator) -> Self {
        ExactRte { h }
    }
}

impl RealTimeEvolution for ExactRte<'_> {
    fn n_qubits(&self) -> usize {
        self.h.n_qubits().unwrap_or(0)
    }

    fn forward(
        &self,
        state: &StateVector,
        register: &[usize],
        dt: f64,
        controls: &[Control],
    ) -> Result<StateVector> {
        state.apply_multi_controlled(&self.h.real_time_evolution(dt), controls, register)
    }

    fn backward(
        &self,
        state: &StateVector,
        register: &[usize],
        dt: f64,
        controls: &[Control],
    ) -> Result<StateVector> {
        state.apply_multi_controlled(&self.h.real_time_evolution(-dt), controls, register)
    }
}

/// `m0 exp(-lambda dtau)` for every eigenvalue, checked to stay below 1.
fn scaled_spectrum(h: &HermitianOperator, cfg: &PiteConfig) -> Result<Vec<f64>> {
    h.eigenvalues()
        .iter()
        .map(|&l| {
            let m = cfg.m0 * (-l * cfg.dtau).exp();
            if m < 1.0 && m.is_finite() {
                Ok(m)
            } else {
                Err(Error::SpectralBound {
                    eigenvalue: l,
                    value: m,
                })
            }
        })
        .collect()
}

/// `Theta = arccos((M + sqrt(1 - M^2)) / sqrt(2))` with `M = m0 exp(-H dtau)`,
/// built spectrally. All eigenvalues lie in `[0, pi/2)`.
pub fn build_theta(h: &HermitianOperator, cfg: &PiteConfig) -> Result<HermitianOperator> {
    let thetas = scaled_spectrum(h, cfg)?.into_iter().map(theta_of).collect();
    Ok(HermitianOperator::from_spectrum(
        thetas,
        h.eigenvectors().clone(),
    ))
}

/// `exp(i sign * Phi)` where `Phi` carries the signed dilation angles.
///
/// `Phi = kappa Theta` whenever every `m0 exp(-lambda dtau)` lies on the
/// same side of `1/sqrt(2)` as `m0`. When the spectrum straddles that
/// point, the sign is taken per eigenvalue so the dilation stays exact.
fn dilation_rotation(h: &HermitianOperator, cfg: &PiteConfig, sign: f64) -> Result<Matrix> {
    let angles: Vec<f64> = scaled_spectrum(h, cfg)?
        .into_iter()
        .map(signed_angle)
        .collect();
    Ok(crate::hamiltonian::spectral_matrix(
        h.eigenvectors(),
        &angles,
        |phi| Complex64::from_polar(1.0, sign * phi),
    ))
}

/// Runs the exact dilation on `register` with `ancilla`, every gate
/// additionally conditioned on `extra`. The ancilla must start in `|0>`.
pub(crate) fn exact_dilation(
    state: &StateVector,
    register: &[usize],
    ancilla: usize,
    extra: &[Control],
    h: &HermitianOperator,
    cfg: &PiteConfig,
) -> Result<StateVector> {
    let plus = dilation_rotation(h, cfg, 1.0)?;
    let minus = dilation_rotation(h, cfg, -1.0)?;
    let anti: Vec<Control> = [extra, &[(ancilla, false)]].concat();
    let on: Vec<Control> = [extra, &[(ancilla, true)]].concat();
    state
        .apply_multi_controlled(&gates::hadamard(), extra, &[ancilla])?
        .apply_multi_controlled(&gates::w(), extra, &[ancilla])?
        .apply_multi_controlled(&plus, &anti, register)?
        .apply_multi_controlled(&minus, &on, register)?
        .apply_multi_controlled(&gates::w().adjoint(), extra, &[ancilla])
}

/// First-order dilation with a real-time-evolution black box.
pub(crate) fn approx_dilation(
    state: &StateVector,
    register: &[usize],
    ancilla: usize,
    rte: &dyn RealTimeEvolution,
    cfg: &PiteConfig,
) -> Result<StateVector> {
    let dt = cfg.rescaled_time();
    let s = state
        .apply_unitary(&gates::hadamard(), &[ancilla])?
        .apply_unitary(&gates::w(), &[ancilla])?;
    let s = rte.forward(&s, register, dt, &[(ancilla, false)])?;
    let s = rte.backward(&s, register, dt, &[(ancilla, true)])?;
    s.apply_unitary(&gates::rz(-2.0 * cfg.theta0()), &[ancilla])?
        .apply_unitary(&gates::w().adjoint(), &[ancilla])
}

/// Splits a pre-measurement state on its last qubit.
pub(crate) fn read_ancilla(pre: StateVector) -> Result<StepResult> {
    let anc = pre.n_qubits() - 1;
    let (success_probability, success_state) = pre.branch(&[anc], &[false])?;
    let (failure_probability, failure_state) = match pre.branch(&[anc], &[true]) {
        Ok((p, s)) => (p, Some(s)),
        Err(Error::ZeroProbability { probability }) => (probability, None),
        Err(e) => return Err(e),
    };
    Ok(StepResult {
        success_probability,
        failure_probability,
        success_state,
        failure_state,
        pre_measurement_state: pre,
    })
}

fn with_ancilla(psi: &StateVector) -> Result<(StateVector, Vec<usize>, usize)> {
    let n = psi.n_qubits();
    let full = psi.tensor(&StateVector::zero(1)?)?;
    Ok((full, (0..n).collect(), n))
}

/// One step of the exact circuit.
pub fn exact_pite_step(
    psi: &StateVector,
    h: &HermitianOperator,
    cfg: &PiteConfig,
) -> Result<StepResult> {
    if h.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: psi.dim(),
        });
    }
    let (full, register, ancilla) = with_ancilla(psi)?;
    read_ancilla(exact_dilation(&full, &register, ancilla, &[], h, cfg)?)
}

/// One step of the first-order circuit built from `rte`.
pub fn approx_pite_step(
    psi: &StateVector,
    rte: &dyn RealTimeEvolution,
    cfg: &PiteConfig,
) -> Result<StepResult> {
    if cfg.circuit != CircuitKind::Approx {
        return Err(Error::InvalidParameter(
            "first-order step requires an approximate-circuit config".to_string(),
        ));
    }
    if rte.n_qubits() != psi.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: rte.n_qubits(),
            found: psi.n_qubits(),
        });
    }
    let (full, register, ancilla) = with_ancilla(psi)?;
    read_ancilla(approx_dilation(&full, &register, ancilla, rte, cfg)?)
}

/// What drives each step of a trajectory.
#[derive(Clone, Copy)]
pub enum Evolution<'a> {
    /// Exact circuit for this Hamiltonian.
    Exact(&'a HermitianOperator),
    /// First-order circuit around a real-time evolution.
    Approx(&'a dyn RealTimeEvolution),
    /// A caller-supplied step (for circuits with their own gate layout).
    Custom(&'a (dyn Fn(&StateVector) -> Result<StepResult> + Sync)),
}

impl Evolution<'_> {
    pub fn step(&self, psi: &StateVector, cfg: &PiteConfig) -> Result<StepResult> {
        match self {
            Evolution::Exact(h) => exact_pite_step(psi, h, cfg),
            Evolution::Approx(rte) => {
                approx_pite_step(psi, *rte, &cfg.with_circuit(CircuitKind::Approx))
            }
            Evolution::Custom(f) => f(psi),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TrajectoryMode {
    /// Always follow the success branch, recording its probability.
    #[default]
    Postselect,
    /// Draw each outcome; stop at the first failure.
    Sampled { seed: u64 },
}

/// Record of step `k`, describing the input state `psi_k` and the
/// measurement that followed it.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryStep {
    pub k: usize,
    /// `p_k`, the success probability of this measurement.
    pub success_probability: f64,
    /// `P_k = prod_{k' <= k} p_k'`.
    pub survival_probability: f64,
    /// Eigenstate weights of `psi_k`, when an oracle was supplied.
    pub weights: Option<Vec<f64>>,
    /// `<psi_k|H|psi_k>`, when an oracle was supplied.
    pub energy: Option<f64>,
    pub succeeded: bool,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub steps: Vec<TrajectoryStep>,
    /// State after the last recorded measurement (the failure state if the
    /// run was cut short).
    pub final_state: StateVector,
    pub final_weights: Option<Vec<f64>>,
    /// Step at which a sampled run failed.
    pub failed_at: Option<usize>,
}

impl Trajectory {
    pub fn success_probabilities(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.success_probability).collect()
    }

    pub fn survival(&self) -> f64 {
        self.steps.last().map_or(1.0, |s| s.survival_probability)
    }
}

/// Iterates `n_steps` PITE steps from `psi0`. With an `oracle`, each step
/// also records eigenstate weights and the energy of its input state.
pub fn run_trajectory(
    psi0: &StateVector,
    evolution: Evolution<'_>,
    cfg: &PiteConfig,
    n_steps: usize,
    mode: TrajectoryMode,
    oracle: Option<&HermitianOperator>,
) -> Result<Trajectory> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter(
            "a trajectory needs at least one step".to_string(),
        ));
    }
    let mut rng = match mode {
        TrajectoryMode::Sampled { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        TrajectoryMode::Postselect => None,
    };
    let mut psi = psi0.clone();
    let mut survival = 1.0;
    let mut steps = Vec::with_capacity(n_steps);
    let mut failed_at = None;
    for k in 0..n_steps {
        let (weights, energy) = match oracle {
            Some(h) => {
                let w = h.weights(&psi)?;
                let e = w.iter().zip(h.eigenvalues()).map(|(w, l)| w * l).sum();
                (Some(w), Some(e))
            }
            None => (None, None),
        };
        let step = evolution.step(&psi, cfg)?;
        survival *= step.success_probability;
        let succeeded = match rng.as_mut() {
            None => true,
            Some(rng) => {
                let anc = step.pre_measurement_state.n_qubits() - 1;
                let record = step.pre_measurement_state.measure_with_rng(&[anc], rng)?;
                !record.outcome[0]
            }
        };
        steps.push(TrajectoryStep {
            k,
            success_probability: step.success_probability,
            survival_probability: survival,
            weights,
            energy,
            succeeded,
        });
        if succeeded {
            psi = step.success_state;
        } else {
            psi = step
                .failure_state
                .expect("a sampled failure has nonzero weight");
            failed_at = Some(k);
            break;
        }
    }
    let final_weights = oracle.map(|h| h.weights(&psi)).transpose()?;
    Ok(Trajectory {
        steps,
        final_state: psi,
        final_weights,
        failed_at,
    })
}

/// Probability that `n_steps` exact-circuit measurements all succeed,
/// `<psi0| M^(2 n_steps) |psi0>`.
pub fn survival_probability(
    psi0: &StateVector,
    h: &HermitianOperator,
    cfg: &PiteConfig,
    n_steps: usize,
) -> Result<f64> {
    let m = scaled_spectrum(h, cfg)?;
    Ok(h.weights(psi0)?
        .iter()
        .zip(m)
        .map(|(w, m)| w * m.powi(2 * n_steps as i32))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn config_validation() {
        assert!(PiteConfig::exact(0.0, 0.1).is_err());
        assert!(PiteConfig::exact(1.0, 0.1).is_err());
        assert!(PiteConfig::exact(FRAC_1_SQRT_2, 0.1).is_err());
        assert!(PiteConfig::exact(0.8, -0.1).is_err());
        assert!(PiteConfig::exact(0.8, f64::NAN).is_err());
        let c = PiteConfig::approx(0.8, 0.1).unwrap();
        assert_eq!(c.kappa(), 1.0);
        assert_eq!(PiteConfig::approx(0.6, 0.1).unwrap().kappa(), -1.0);
        assert!(c.s1() > 0.0 && c.theta0().is_finite());
    }

    #[test]
    fn theta0_matches_quarter_pi_minus_arccos() {
        for m0 in [0.1, 0.3, 0.6, 0.75, 0.8, 0.9, 0.99] {
            let c = PiteConfig::exact(m0, 0.1).unwrap();
            assert_abs_diff_eq!(
                c.theta0(),
                std::f64::consts::FRAC_PI_4 - f64::acos(m0),
                epsilon = 1e-12
            );
            assert_abs_diff_eq!(signed_angle(m0), c.theta0(), epsilon = 1e-12);
        }
    }

    #[test]
    fn theta_at_zero_dtau_is_uniform() {
        let h = HermitianOperator::diagonal(&[0.3, -1.0, 2.0, 5.0]).unwrap();
        let cfg = PiteConfig::exact(0.8, 0.0).unwrap();
        let theta = build_theta(&h, &cfg).unwrap();
        for &t in theta.eigenvalues() {
            assert_abs_diff_eq!(t, (1.4 * FRAC_1_SQRT_2).acos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn spectral_bound_names_eigenvalue() {
        let h = HermitianOperator::diagonal(&[-5.0, 1.0]).unwrap();
        let cfg = PiteConfig::exact(0.9, 0.5).unwrap();
        match build_theta(&h, &cfg) {
            Err(Error::SpectralBound { eigenvalue, .. }) => assert_eq!(eigenvalue, -5.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_hamiltonian_step() {
        let h = HermitianOperator::diagonal(&[0.0; 4]).unwrap();
        let psi = StateVector::from_real(&[0.1, 0.5, -0.3, 0.7]).unwrap();
        let cfg = PiteConfig::exact(0.8, 0.3).unwrap();
        let r = exact_pite_step(&psi, &h, &cfg).unwrap();
        assert_abs_diff_eq!(r.success_probability, 0.64, epsilon = 1e-12);
        assert_abs_diff_eq!(
            r.success_state.fidelity(&psi).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            r.success_probability + r.failure_probability,
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn eigenstate_step_probability() {
        let h = HermitianOperator::diagonal(&[0.0, 0.7]).unwrap();
        let psi = StateVector::basis(1, 1).unwrap();
        let cfg = PiteConfig::exact(0.9, 0.2).unwrap();
        let r = exact_pite_step(&psi, &h, &cfg).unwrap();
        assert_abs_diff_eq!(
            r.success_probability,
            0.81 * (-2.0 * 0.7 * 0.2f64).exp(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn straddling_spectrum_still_exact() {
        // m0 e^{-lambda dtau} crosses 1/sqrt(2) inside the spectrum
        let h = HermitianOperator::diagonal(&[0.0, 4.0]).unwrap();
        let psi = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let cfg = PiteConfig::exact(0.9, 0.5).unwrap();
        let r = exact_pite_step(&psi, &h, &cfg).unwrap();
        let m = [0.9, 0.9 * (-2.0f64).exp()];
        let expected = 0.36 * m[0] * m[0] + 0.64 * m[1] * m[1];
        assert_abs_diff_eq!(r.success_probability, expected, epsilon = 1e-12);
    }

    #[test]
    fn approx_requires_approx_config() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0]).unwrap();
        let rte = ExactRte::new(&h);
        let psi = StateVector::zero(1).unwrap();
        let cfg = PiteConfig::exact(0.8, 0.1).unwrap();
        assert!(approx_pite_step(&psi, &rte, &cfg).is_err());
    }

    #[test]
    fn non_unitary_rte_rejected() {
        let rte = MatrixRte::new(1, |_dt| {
            Matrix::from_element(2, 2, Complex64::new(0.5, 0.0))
        });
        let psi = StateVector::zero(1).unwrap();
        let cfg = PiteConfig::approx(0.8, 0.1).unwrap();
        assert!(matches!(
            approx_pite_step(&psi, &rte, &cfg),
            Err(Error::NonUnitary { .. })
        ));
    }

    #[test]
    fn survival_edge_cases() {
        let h = HermitianOperator::diagonal(&[0.0, 0.0]).unwrap();
        let psi = StateVector::from_real(&[0.3, 0.7]).unwrap();
        let cfg = PiteConfig::exact(0.8, 0.3).unwrap();
        assert_eq!(survival_probability(&psi, &h, &cfg, 0).unwrap(), 1.0);
        assert_abs_diff_eq!(
            survival_probability(&psi, &h, &cfg, 4).unwrap(),
            0.8f64.powi(8),
            epsilon = 1e-14
        );
    }

    #[test]
    fn trajectory_needs_steps() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0]).unwrap();
        let psi = StateVector::zero(1).unwrap();
        let cfg = PiteConfig::exact(0.8, 0.1).unwrap();
        assert!(run_trajectory(
            &psi,
            Evolution::Exact(&h),
            &cfg,
            0,
            TrajectoryMode::Postselect,
            None
        )
        .is_err());
    }
}
