//! Real-space dynamics on a qubit grid: the centered QFT, diagonal phase
//! gates, first-order split-operator real-time evolution and the PITE
//! circuit built from it.
//!
//! Registers are lists of qubits with the first entry holding the most
//! significant bit of the grid index. Position `|k>` sits at `x = k dx`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::Grid1D;
use crate::pite::{read_ancilla, CircuitKind, PiteConfig, RealTimeEvolution, StepResult};
use crate::statevector::{gates, Control, StateVector};

/// Largest per-particle register for the two-particle demo.
pub const MAX_PARTICLE_QUBITS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

enum Gate {
    H(usize),
    CPhase {
        control: usize,
        target: usize,
        angle: f64,
    },
    Swap(usize, usize),
    X(usize),
}

/// Elementary gates of `CQFT = QFT (X on the MSB)` in application order.
fn cqft_gates(register: &[usize]) -> Vec<Gate> {
    let n = register.len();
    let mut out = vec![Gate::X(register[0])];
    for i in 0..n {
        out.push(Gate::H(register[i]));
        for j in i + 1..n {
            out.push(Gate::CPhase {
                control: register[j],
                target: register[i],
                angle: 2.0 * PI / (1u64 << (j - i + 1)) as f64,
            });
        }
    }
    for i in 0..n / 2 {
        out.push(Gate::Swap(register[i], register[n - 1 - i]));
    }
    out
}

/// Centered QFT on `register`, built from Hadamards, controlled phases and
/// swaps. Forward maps `|k>` to the momentum eigenstate with amplitude
/// `exp(2 pi i (k - N/2) j / N) / sqrt(N)` at `|j>`.
pub fn cqft(state: &StateVector, register: &[usize], direction: Direction) -> Result<StateVector> {
    cqft_controlled(state, register, direction, &[])
}

/// [`cqft`] acting only where every control holds.
pub fn cqft_controlled(
    state: &StateVector,
    register: &[usize],
    direction: Direction,
    controls: &[Control],
) -> Result<StateVector> {
    if register.is_empty() {
        return Err(Error::InvalidParameter("empty register".to_string()));
    }
    let mut seq = cqft_gates(register);
    let sign = match direction {
        Direction::Forward => 1.0,
        Direction::Inverse => {
            seq.reverse();
            -1.0
        }
    };
    let mut s = state.clone();
    for gate in seq {
        s = match gate {
            Gate::H(q) => s.apply_multi_controlled(&gates::hadamard(), controls, &[q])?,
            Gate::X(q) => s.apply_multi_controlled(&gates::pauli_x(), controls, &[q])?,
            Gate::Swap(a, b) => s.apply_multi_controlled(&gates::swap(), controls, &[a, b])?,
            Gate::CPhase {
                control,
                target,
                angle,
            } => {
                let ctrl: Vec<Control> = [controls, &[(control, true)]].concat();
                s.apply_multi_controlled(&gates::phase(sign * angle), &ctrl, &[target])?
            }
        };
    }
    Ok(s)
}

/// What a diagonal phase gate encodes.
#[derive(Clone, Debug, PartialEq)]
pub enum PhaseKind {
    /// `E_j` on the centered momentum index `j`.
    Kinetic(Grid1D),
    /// `V(x_k)`, one value per grid point.
    Potential(Vec<f64>),
    /// `v(x_k, x_k')` on a two-particle register, row-major in `(k, k')`.
    Interaction(Vec<f64>),
}

/// `exp(-i value * time)` per basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseGateSpec {
    pub kind: PhaseKind,
    pub time: f64,
}

impl PhaseGateSpec {
    pub fn diagonal(&self) -> Vec<Complex64> {
        let phase = |e: f64| Complex64::from_polar(1.0, -e * self.time);
        match &self.kind {
            PhaseKind::Kinetic(grid) => grid.kinetic_energies().into_iter().map(phase).collect(),
            PhaseKind::Potential(v) | PhaseKind::Interaction(v) => {
                v.iter().copied().map(phase).collect()
            }
        }
    }

    pub fn apply(
        &self,
        state: &StateVector,
        register: &[usize],
        controls: &[Control],
    ) -> Result<StateVector> {
        state.apply_diagonal(&self.diagonal(), register, controls)
    }
}

/// `U_kin(dt) |j> = exp(-i E_j dt) |j>`.
pub fn kinetic_phase(
    state: &StateVector,
    register: &[usize],
    dt: f64,
    grid: &Grid1D,
    controls: &[Control],
) -> Result<StateVector> {
    check_register(register, grid)?;
    PhaseGateSpec {
        kind: PhaseKind::Kinetic(*grid),
        time: dt,
    }
    .apply(state, register, controls)
}

/// `U_pot(dt) |k> = exp(-i V(x_k) dt) |k>` for a tabulated potential.
pub fn potential_phase(
    state: &StateVector,
    register: &[usize],
    dt: f64,
    potential: &[f64],
    controls: &[Control],
) -> Result<StateVector> {
    PhaseGateSpec {
        kind: PhaseKind::Potential(potential.to_vec()),
        time: dt,
    }
    .apply(state, register, controls)
}

/// `exp(-i v(x_k, x_k') dt)` on `|k>_a |k'>_b`.
pub fn interaction_phase(
    state: &StateVector,
    registers: (&[usize], &[usize]),
    dt: f64,
    grid: &Grid1D,
    v_int: impl Fn(f64, f64) -> f64,
    controls: &[Control],
) -> Result<StateVector> {
    let (a, b) = registers;
    check_register(a, grid)?;
    check_register(b, grid)?;
    if let Some(&q) = a.iter().find(|q| b.contains(q)) {
        return Err(Error::DuplicateQubit(q));
    }
    let xs = grid.positions();
    let table = xs
        .iter()
        .flat_map(|&x| xs.iter().map(move |&y| (x, y)))
        .map(|(x, y)| v_int(x, y))
        .collect();
    PhaseGateSpec {
        kind: PhaseKind::Interaction(table),
        time: dt,
    }
    .apply(state, &[a, b].concat(), controls)
}

/// `1 / sqrt((x - y)^2 + 1)`.
pub fn soft_coulomb(x: f64, y: f64) -> f64 {
    1.0 / ((x - y).powi(2) + 1.0).sqrt()
}

fn check_register(register: &[usize], grid: &Grid1D) -> Result<()> {
    if register.len() != grid.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: grid.n_qubits(),
            found: register.len(),
        });
    }
    Ok(())
}

/// First-order split-operator step `CQFT U_kin(dt) CQFT^† U_pot(dt)`.
pub fn rte_st1(
    state: &StateVector,
    register: &[usize],
    dt: f64,
    grid: &Grid1D,
    potential: &[f64],
) -> Result<StateVector> {
    St1Rte::new(*grid, potential.to_vec())?.forward(state, register, dt, &[])
}

/// Split-operator real-time evolution for one particle.
#[derive(Clone, Debug)]
pub struct St1Rte {
    grid: Grid1D,
    potential: Vec<f64>,
}

impl St1Rte {
    pub fn new(grid: Grid1D, potential: Vec<f64>) -> Result<Self> {
        if potential.len() != grid.n_points() {
            return Err(Error::DimensionMismatch {
                expected: grid.n_points(),
                found: potential.len(),
            });
        }
        Ok(St1Rte { grid, potential })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }
}

impl RealTimeEvolution for St1Rte {
    fn n_qubits(&self) -> usize {
        self.grid.n_qubits()
    }

    fn forward(
        &self,
        state: &StateVector,
        register: &[usize],
        dt: f64,
        controls: &[Control],
    ) -> Result<StateVector> {
        check_register(register, &self.grid)?;
        let s = potential_phase(state, register, dt, &self.potential, controls)?;
        let s = cqft_controlled(&s, register, Direction::Inverse, controls)?;
        let s = kinetic_phase(&s, register, dt, &self.grid, controls)?;
        cqft_controlled(&s, register, Direction::Forward, controls)
    }

    fn backward(
        &self,
        state: &StateVector,
        register: &[usize],
        dt: f64,
        controls: &[Control],
    ) -> Result<StateVector> {
        check_register(register, &self.grid)?;
        let s = cqft_controlled(state, register, Direction::Inverse, controls)?;
        let s = kinetic_phase(&s, register, -dt, &self.grid, controls)?;
        let s = cqft_controlled(&s, register, Direction::Forward, controls)?;
        potential_phase(&s, register, -dt, &self.potential, controls)
    }
}

/// First-order PITE step around [`St1Rte`] with the CQFT pair between the
/// forward and backward branches merged into uncontrolled transforms.
/// The ancilla is appended as the least significant qubit.
pub fn st1_pite_step(psi: &StateVector, rte: &St1Rte, cfg: &PiteConfig) -> Result<StepResult> {
    if cfg.circuit() != CircuitKind::Approx {
        return Err(Error::InvalidParameter(
            "split-operator step requires an approximate-circuit config".to_string(),
        ));
    }
    if psi.n_qubits() != rte.grid.n_qubits() {
        return Err(Error::DimensionMismatch {
            expected: rte.grid.n_qubits(),
            found: psi.n_qubits(),
        });
    }
    let n = psi.n_qubits();
    let reg: Vec<usize> = (0..n).collect();
    let anc = n;
    let dt = cfg.rescaled_time();
    let s = psi
        .tensor(&StateVector::zero(1)?)?
        .apply_unitary(&gates::hadamard(), &[anc])?
        .apply_unitary(&gates::w(), &[anc])?;
    let s = potential_phase(&s, &reg, dt, &rte.potential, &[(anc, false)])?;
    let s = cqft(&s, &reg, Direction::Inverse)?;
    let s = kinetic_phase(&s, &reg, dt, &rte.grid, &[(anc, false)])?;
    let s = kinetic_phase(&s, &reg, -dt, &rte.grid, &[(anc, true)])?;
    let s = cqft(&s, &reg, Direction::Forward)?;
    let s = potential_phase(&s, &reg, -dt, &rte.potential, &[(anc, true)])?;
    let pre = s
        .apply_unitary(&gates::rz(-2.0 * cfg.theta0()), &[anc])?
        .apply_unitary(&gates::w().adjoint(), &[anc])?;
    read_ancilla(pre)
}

/// `J(l; lambda) = exp(-i pi l) / N * sum_s exp(-i lambda (s - N/2)^2 + 2 pi i l s / N)`,
/// the position-basis amplitude of free evolution over a distance `l`.
pub fn kinetic_propagator(ell: i64, lambda: f64, n: usize) -> Result<Complex64> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "grid size must be a power of two, got {n}"
        )));
    }
    let big = n as i64;
    if ell <= -big || ell >= big {
        return Err(Error::IndexOutOfRange {
            index: ell,
            lo: -big + 1,
            hi: big,
        });
    }
    let sum: Complex64 = (0..big)
        .map(|s| {
            let centered = (s - big / 2) as f64;
            let wrap = (ell * s).rem_euclid(big) as f64;
            Complex64::from_polar(
                1.0,
                -lambda * centered * centered + 2.0 * PI * wrap / n as f64,
            )
        })
        .sum();
    let sign = if ell.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Ok(sum * (sign / n as f64))
}

/// Single-particle terms shared by both particles plus a pair interaction.
pub struct TwoParticleRte<F> {
    single: St1Rte,
    interaction: F,
}

impl<F> TwoParticleRte<F>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    pub fn new(single: St1Rte, interaction: F) -> Result<Self> {
        if single.grid.n_qubits() > MAX_PARTICLE_QUBITS {
            return Err(Error::Capacity {
                requested: single.grid.n_qubits(),
                limit: MAX_PARTICLE_QUBITS,
            });
        }
        Ok(TwoParticleRte {
            single,
            interaction,
        })
    }

    fn split<'r>(&self, register: &'r [usize]) -> Result<(&'r [usize], &'r [usize])> {
        let n = self.single.grid.n_qubits();
        if register.len() != 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 * n,
                found: register.len(),
            });
        }
        Ok(register.split_at(n))
    }

    fn both(
        &self,
        state: &StateVector,
        (a, b): (&[usize], &[usize]),
        direction: Direction,
        controls: &[Control],
    ) -> Result<StateVector> {
        let s = cqft_controlled(state, a, direction, controls)?;
        cqft_controlled(&s, b, direction, controls)
    }

    fn potentials(
        &self,
        state: &StateVector,
        (a, b): (&[usize], &[usize]),
        dt: f64,
        controls: &[Control],
    ) -> Result<StateVector> {
        let v = &self.single.potential;
        let s = potential_phase(state, a, dt, v, controls)?;
        let s = potential_phase(&s, b, dt, v, controls)?;
        interaction_phase(
            &s,
            (a, b),
            dt,
            &self.single.grid,
            &self.interaction,
            controls,
        )
    }

    fn kinetics(
        &self,
        state: &StateVector,
        (a, b): (&[usize], &[usize]),
        dt: f64,
        controls: &[Control],
    ) -> Result<StateVector> {
        let g = &self.single.grid;
        let s = kinetic_phase(state, a, dt, g, controls)?;
        kinetic_phase(&s, b, dt, g, controls)
    }
}

impl<F> RealTimeEvolution for TwoParticleRte<F>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    fn n_qubits(&self) -> usize {
        2 * self.single.grid.n_qubits()
    }

    fn forward(
        &self,
        state: &StateVector,
        register: &[usize],
        dt: f64,
        controls: &[Control],
    ) -> Result<StateVector> {
        let regs = self.split(register)?;
        let s = self.potentials(state, regs, dt, controls)?;
        let s = self.both(&s, regs, Direction::Inverse, controls)?;
        let s = self.kinetics(&s, regs, dt, controls)?;
        self.both(&s, regs, Direction::Forward, controls)
    }

    fn backward(
        &self,
        state: &StateVector,
        register: &[usize],
        dt: f64,
        controls: &[Control],
    ) -> Result<StateVector> {
        let regs = self.split(register)?;
        let s = self.both(state, regs, Direction::Inverse, controls)?;
        let s = self.kinetics(&s, regs, -dt, controls)?;
        let s = self.both(&s, regs, Direction::Forward, controls)?;
        self.potentials(&s, regs, -dt, controls)
    }
}

/// Exchanges two equal-width registers qubit by qubit.
pub fn swap_registers(state: &StateVector, a: &[usize], b: &[usize]) -> Result<StateVector> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    a.iter().zip(b).try_fold(state.clone(), |s, (&qa, &qb)| {
        s.apply_unitary(&gates::swap(), &[qa, qb])
    })
}

/// Normalized `(1 - SWAP)/2` projection across two particle registers.
pub fn antisymmetrize(state: &StateVector, a: &[usize], b: &[usize]) -> Result<StateVector> {
    let swapped = swap_registers(state, a, b)?;
    let amps: Vec<Complex64> = state
        .amplitudes()
        .iter()
        .zip(swapped.amplitudes())
        .map(|(x, y)| (x - y) * 0.5)
        .collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm <= 1e-12 {
        return Err(Error::VanishingAntisymmetric { norm });
    }
    StateVector::from_amplitudes(amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn basis_amplitude_check(n: usize) {
        let dim = 1usize << n;
        let reg: Vec<usize> = (0..n).collect();
        for k in 0..dim {
            let out = cqft(&StateVector::basis(n, k).unwrap(), &reg, Direction::Forward).unwrap();
            let kt = k as f64 - (dim / 2) as f64;
            for j in 0..dim {
                let want = Complex64::from_polar(
                    1.0 / (dim as f64).sqrt(),
                    2.0 * PI * kt * j as f64 / dim as f64,
                );
                assert!((out.amplitude(j) - want).norm() < 1e-12, "k={k} j={j}");
            }
        }
    }

    #[test]
    fn cqft_basis_states() {
        for n in 1..=4 {
            basis_amplitude_check(n);
        }
    }

    #[test]
    fn cqft_single_qubit() {
        let out = cqft(&StateVector::zero(1).unwrap(), &[0], Direction::Forward).unwrap();
        assert_abs_diff_eq!(
            out.amplitude(0).re,
            std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            out.amplitude(1).re,
            -std::f64::consts::FRAC_1_SQRT_2,
            epsilon = 1e-15
        );
    }

    #[test]
    fn cqft_roundtrip() {
        let psi = StateVector::from_real(&[0.3, -0.1, 0.7, 0.2, 0.0, 0.5, -0.4, 0.1]).unwrap();
        let reg = [0, 1, 2];
        let back = cqft(
            &cqft(&psi, &reg, Direction::Forward).unwrap(),
            &reg,
            Direction::Inverse,
        )
        .unwrap();
        assert!(back.distance(&psi).unwrap() < 1e-12);
    }

    #[test]
    fn controlled_cqft_leaves_other_branch() {
        let psi = StateVector::basis(3, 0b010).unwrap();
        let out = cqft_controlled(&psi, &[0, 1], Direction::Forward, &[(2, true)]).unwrap();
        assert!(out.distance(&psi).unwrap() < 1e-15);
    }

    #[test]
    fn kinetic_phase_at_zero_momentum() {
        let grid = Grid1D::new(3, 5.0, 1.0).unwrap();
        let psi = StateVector::from_real(&[1.0; 8]).unwrap();
        let out = kinetic_phase(&psi, &[0, 1, 2], 0.7, &grid, &[]).unwrap();
        assert!((out.amplitude(4) - psi.amplitude(4)).norm() < 1e-15);
        let same = kinetic_phase(&psi, &[0, 1, 2], 0.0, &grid, &[]).unwrap();
        assert_eq!(same, psi);
    }

    #[test]
    fn constant_potential_is_global_phase() {
        let psi = StateVector::from_real(&[0.2, 0.4, -0.6, 0.3]).unwrap();
        let out = potential_phase(&psi, &[0, 1], 0.5, &[2.0; 4], &[]).unwrap();
        let g = Complex64::from_polar(1.0, -1.0);
        for j in 0..4 {
            assert!((out.amplitude(j) - g * psi.amplitude(j)).norm() < 1e-15);
        }
    }

    #[test]
    fn wrong_register_width() {
        let grid = Grid1D::new(3, 5.0, 1.0).unwrap();
        let psi = StateVector::zero(3).unwrap();
        assert!(kinetic_phase(&psi, &[0, 1], 0.1, &grid, &[]).is_err());
        assert!(St1Rte::new(grid, vec![0.0; 4]).is_err());
    }

    #[test]
    fn propagator_range() {
        assert!(kinetic_propagator(32, 0.01, 32).is_err());
        assert!(kinetic_propagator(-32, 0.01, 32).is_err());
        assert!(kinetic_propagator(31, 0.01, 32).is_ok());
        assert!(kinetic_propagator(0, 0.01, 12).is_err());
    }

    #[test]
    fn propagator_at_zero_lambda() {
        assert!((kinetic_propagator(0, 0.0, 16).unwrap() - 1.0).norm() < 1e-12);
        assert!(kinetic_propagator(3, 0.0, 16).unwrap().norm() < 1e-12);
    }

    #[test]
    fn interaction_rejects_overlap() {
        let grid = Grid1D::new(2, 4.0, 1.0).unwrap();
        let psi = StateVector::zero(4).unwrap();
        let r = interaction_phase(&psi, (&[0, 1], &[1, 2]), 0.1, &grid, soft_coulomb, &[]);
        assert_eq!(r.unwrap_err(), Error::DuplicateQubit(1));
    }

    #[test]
    fn slater_determinant() {
        let a = StateVector::basis(2, 1).unwrap();
        let b = StateVector::basis(2, 2).unwrap();
        let ab = a.tensor(&b).unwrap();
        let out = antisymmetrize(&ab, &[0, 1], &[2, 3]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(out.amplitude(0b0110).re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(out.amplitude(0b1001).re, -h, epsilon = 1e-15);
        let again = antisymmetrize(&out, &[0, 1], &[2, 3]).unwrap();
        assert!(again.distance(&out).unwrap() < 1e-15);
    }

    #[test]
    fn symmetric_state_has_no_antisymmetric_part() {
        let aa = StateVector::basis(4, 0b0101).unwrap();
        assert!(matches!(
            antisymmetrize(&aa, &[0, 1], &[2, 3]),
            Err(Error::VanishingAntisymmetric { .. })
        ));
    }

    #[test]
    fn st1_needs_approx() {
        let grid = Grid1D::new(2, 4.0, 1.0).unwrap();
        let rte = St1Rte::new(grid, vec![0.0; 4]).unwrap();
        let cfg = PiteConfig::exact(0.8, 0.1).unwrap();
        assert!(st1_pite_step(&StateVector::zero(2).unwrap(), &rte, &cfg).is_err());
    }

    #[test]
    fn two_particle_limit() {
        let grid = Grid1D::new(6, 4.0, 1.0).unwrap();
        let rte = St1Rte::new(grid, vec![0.0; 64]).unwrap();
        assert!(TwoParticleRte::new(rte, soft_coulomb).is_err());
    }
}
