//! Dense statevector over `n` qubits.
//!
//! Qubit ordering is big-endian: qubit 0 is the most significant bit of the
//! basis index, qubit `n - 1` the least significant. A gate acting on an
//! ordered target list reads the first target as the most significant bit
//! of its own matrix index.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{self, Exec};

/// Default register capacity.
pub const DEFAULT_MAX_QUBITS: usize = 24;

const NORM_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;
const MIN_POSTSELECT_PROBABILITY: f64 = 1e-15;

pub type Matrix = DMatrix<Complex64>;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureMode {
    /// Draw the outcome from the Born distribution with a seeded generator.
    Sampled { seed: u64 },
    /// Follow the given outcome deterministically.
    Postselect(Vec<bool>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    /// Outcome bits, in the order the qubits were listed.
    pub outcome: Vec<bool>,
    pub probability: f64,
    /// Full register, collapsed onto the outcome and renormalized.
    pub post_state: StateVector,
}

/// A control condition: `(qubit, required value)`.
pub type Control = (usize, bool);

impl StateVector {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_capacity(n_qubits, DEFAULT_MAX_QUBITS)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::IndexOutOfRange {
                index: index as i64,
                lo: 0,
                hi: dim as i64,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n_qubits, amps })
    }

    /// Builds a state from raw amplitudes, normalizing them. The length must
    /// be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n_qubits = qubits_for_len(amps.len())?;
        check_capacity(n_qubits, DEFAULT_MAX_QUBITS)?;
        let mut state = StateVector { n_qubits, amps };
        state.normalize_in_place()?;
        Ok(state)
    }

    /// Real-valued amplitudes, normalized.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_amplitudes(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Wraps amplitudes that are already normalized by construction.
    pub(crate) fn from_normalized_unchecked(n_qubits: usize, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), 1usize << n_qubits);
        StateVector { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Returns a normalized copy.
    pub fn normalized(&self) -> Result<Self> {
        let mut out = self.clone();
        out.normalize_in_place()?;
        Ok(out)
    }

    fn normalize_in_place(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let inv = 1.0 / norm;
        for a in &mut self.amps {
            *a *= inv;
        }
        Ok(())
    }

    /// Normalized `sum_i c_i |state_i>`. All states must share a qubit count.
    pub fn linear_combination(terms: &[(Complex64, &StateVector)]) -> Result<Self> {
        let first = terms.first().ok_or(Error::ZeroNorm)?.1;
        let mut amps = vec![Complex64::new(0.0, 0.0); first.dim()];
        for (coef, state) in terms {
            if state.n_qubits != first.n_qubits {
                return Err(Error::DimensionMismatch {
                    expected: first.n_qubits,
                    found: state.n_qubits,
                });
            }
            for (acc, a) in amps.iter_mut().zip(&state.amps) {
                *acc += coef * a;
            }
        }
        Self::from_amplitudes(amps)
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().clamp(0.0, 1.0))
    }

    /// Euclidean distance between amplitude vectors.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                found: other.n_qubits,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }

    /// `self ⊗ other`; `self` occupies the leading (most significant) qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        self.tensor_with_capacity(other, DEFAULT_MAX_QUBITS)
    }

    pub fn tensor_with_capacity(&self, other: &StateVector, max_qubits: usize) -> Result<Self> {
        let n = self.n_qubits + other.n_qubits;
        check_capacity(n, max_qubits)?;
        let shift = other.n_qubits;
        let low = other.dim() - 1;
        let amps = exec::build(Exec::Auto, 1usize << n, |i| {
            self.amps[i >> shift] * other.amps[i & low]
        });
        Ok(StateVector::from_normalized_unchecked(n, amps))
    }

    /// Applies `u` to the ordered `targets`.
    pub fn apply_unitary(&self, u: &Matrix, targets: &[usize]) -> Result<Self> {
        self.apply_multi_controlled(u, &[], targets)
    }

    /// Applies `u` on `targets` in the branch where `control` equals
    /// `control_value`; the other branch is untouched.
    pub fn apply_controlled(
        &self,
        u: &Matrix,
        control: usize,
        control_value: bool,
        targets: &[usize],
    ) -> Result<Self> {
        self.apply_multi_controlled(u, &[(control, control_value)], targets)
    }

    /// Applies `u` on `targets` where every control condition holds.
    pub fn apply_multi_controlled(
        &self,
        u: &Matrix,
        controls: &[Control],
        targets: &[usize],
    ) -> Result<Self> {
        self.apply_with(Exec::Auto, u, controls, targets)
    }

    /// Same as [`apply_multi_controlled`](Self::apply_multi_controlled) with
    /// an explicit execution policy.
    pub fn apply_with(
        &self,
        exec: Exec,
        u: &Matrix,
        controls: &[Control],
        targets: &[usize],
    ) -> Result<Self> {
        let k = targets.len();
        let sub = 1usize << k;
        if u.nrows() != sub || u.ncols() != sub {
            return Err(Error::DimensionMismatch {
                expected: sub,
                found: u.nrows(),
            });
        }
        let deviation = unitarity_deviation(u);
        if deviation > UNITARY_TOL {
            return Err(Error::NonUnitary { deviation });
        }
        let ctrl_qubits: Vec<usize> = controls.iter().map(|c| c.0).collect();
        self.check_qubits(&[targets, &ctrl_qubits].concat())?;

        let masks: Vec<usize> = targets.iter().map(|&q| self.mask(q)).collect();
        let target_mask: usize = masks.iter().sum();
        let spread: Vec<usize> = (0..sub)
            .map(|c| {
                (0..k)
                    .filter(|&t| c >> (k - 1 - t) & 1 == 1)
                    .map(|t| masks[t])
                    .sum()
            })
            .collect();
        let (ctrl_mask, ctrl_want) = self.control_pattern(controls);
        // row-major copy for cache-friendly access
        let rows: Vec<Complex64> = (0..sub)
            .flat_map(|r| (0..sub).map(move |c| (r, c)))
            .map(|(r, c)| u[(r, c)])
            .collect();

        let amps = exec::build(exec, self.dim(), |i| {
            if i & ctrl_mask != ctrl_want {
                return self.amps[i];
            }
            let base = i & !target_mask;
            let row = gather(i, &masks);
            let coeffs = &rows[row * sub..(row + 1) * sub];
            coeffs
                .iter()
                .zip(&spread)
                .map(|(c, &s)| c * self.amps[base | s])
                .sum()
        });
        Ok(StateVector::from_normalized_unchecked(self.n_qubits, amps))
    }

    /// Multiplies the amplitude at register index `j` by `phases[j]`, where
    /// `j` is read from `register` (first qubit most significant). Entries
    /// must have unit modulus.
    pub fn apply_diagonal(
        &self,
        phases: &[Complex64],
        register: &[usize],
        controls: &[Control],
    ) -> Result<Self> {
        self.apply_diagonal_with(Exec::Auto, phases, register, controls)
    }

    pub fn apply_diagonal_with(
        &self,
        exec: Exec,
        phases: &[Complex64],
        register: &[usize],
        controls: &[Control],
    ) -> Result<Self> {
        let sub = 1usize << register.len();
        if phases.len() != sub {
            return Err(Error::DimensionMismatch {
                expected: sub,
                found: phases.len(),
            });
        }
        let deviation = phases
            .iter()
            .map(|p| (p.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        if deviation > NORM_TOL {
            return Err(Error::NonUnitary { deviation });
        }
        let ctrl_qubits: Vec<usize> = controls.iter().map(|c| c.0).collect();
        self.check_qubits(&[register, &ctrl_qubits].concat())?;
        let masks: Vec<usize> = register.iter().map(|&q| self.mask(q)).collect();
        let (ctrl_mask, ctrl_want) = self.control_pattern(controls);
        let amps = exec::build(exec, self.dim(), |i| {
            if i & ctrl_mask != ctrl_want {
                return self.amps[i];
            }
            self.amps[i] * phases[gather(i, &masks)]
        });
        Ok(StateVector::from_normalized_unchecked(self.n_qubits, amps))
    }

    /// Index of the register value encoded in basis index `i`.
    pub fn register_value(&self, i: usize, register: &[usize]) -> usize {
        let masks: Vec<usize> = register.iter().map(|&q| self.mask(q)).collect();
        gather(i, &masks)
    }

    /// Born weights of every outcome on `qubits` (outcome index reads the
    /// first listed qubit as most significant).
    pub fn outcome_probabilities(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        self.check_qubits(qubits)?;
        let masks: Vec<usize> = qubits.iter().map(|&q| self.mask(q)).collect();
        let mut probs = vec![0.0; 1usize << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            probs[gather(i, &masks)] += a.norm_sqr();
        }
        Ok(probs)
    }

    pub fn measure(&self, qubits: &[usize], mode: &MeasureMode) -> Result<MeasurementRecord> {
        match mode {
            MeasureMode::Sampled { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                self.measure_with_rng(qubits, &mut rng)
            }
            MeasureMode::Postselect(outcome) => self.postselect(qubits, outcome),
        }
    }

    /// Samples an outcome with the caller's generator.
    pub fn measure_with_rng<R: Rng + ?Sized>(
        &self,
        qubits: &[usize],
        rng: &mut R,
    ) -> Result<MeasurementRecord> {
        let probs = self.outcome_probabilities(qubits)?;
        let index = sample_index(&probs, rng.random::<f64>());
        let outcome = index_to_bits(index, qubits.len());
        self.postselect(qubits, &outcome)
    }

    fn postselect(&self, qubits: &[usize], outcome: &[bool]) -> Result<MeasurementRecord> {
        let (probability, amps) = self.project(qubits, outcome)?;
        let inv = 1.0 / probability.sqrt();
        let amps = amps.into_iter().map(|a| a * inv).collect();
        Ok(MeasurementRecord {
            outcome: outcome.to_vec(),
            probability,
            post_state: StateVector::from_normalized_unchecked(self.n_qubits, amps),
        })
    }

    /// Unnormalized projection onto `outcome`, with its Born weight.
    fn project(&self, qubits: &[usize], outcome: &[bool]) -> Result<(f64, Vec<Complex64>)> {
        if outcome.len() != qubits.len() {
            return Err(Error::DimensionMismatch {
                expected: qubits.len(),
                found: outcome.len(),
            });
        }
        self.check_qubits(qubits)?;
        let (mask, want) = self.control_pattern(
            &qubits
                .iter()
                .copied()
                .zip(outcome.iter().copied())
                .collect::<Vec<_>>(),
        );
        let amps: Vec<Complex64> = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                if i & mask == want {
                    a
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let probability: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if probability <= MIN_POSTSELECT_PROBABILITY {
            return Err(Error::ZeroProbability { probability });
        }
        Ok((probability, amps))
    }

    /// Born weight of `outcome` on `qubits` together with the normalized
    /// state of the remaining qubits (measured qubits removed).
    pub fn branch(&self, qubits: &[usize], outcome: &[bool]) -> Result<(f64, StateVector)> {
        let (probability, amps) = self.project(qubits, outcome)?;
        let keep: Vec<usize> = (0..self.n_qubits).filter(|q| !qubits.contains(q)).collect();
        let keep_masks: Vec<usize> = keep.iter().map(|&q| self.mask(q)).collect();
        let (mask, want) = self.control_pattern(
            &qubits
                .iter()
                .copied()
                .zip(outcome.iter().copied())
                .collect::<Vec<_>>(),
        );
        let mut reduced = vec![Complex64::new(0.0, 0.0); 1usize << keep.len()];
        let inv = 1.0 / probability.sqrt();
        for (i, a) in amps.iter().enumerate() {
            if i & mask == want {
                reduced[gather(i, &keep_masks)] = a * inv;
            }
        }
        Ok((
            probability,
            StateVector::from_normalized_unchecked(keep.len(), reduced),
        ))
    }

    /// Unnormalized branch amplitudes on the remaining qubits.
    pub fn branch_amplitudes(&self, qubits: &[usize], outcome: &[bool]) -> Result<Vec<Complex64>> {
        self.check_qubits(qubits)?;
        let keep: Vec<usize> = (0..self.n_qubits).filter(|q| !qubits.contains(q)).collect();
        let keep_masks: Vec<usize> = keep.iter().map(|&q| self.mask(q)).collect();
        let (mask, want) = self.control_pattern(
            &qubits
                .iter()
                .copied()
                .zip(outcome.iter().copied())
                .collect::<Vec<_>>(),
        );
        let mut reduced = vec![Complex64::new(0.0, 0.0); 1usize << keep.len()];
        for (i, &a) in self.amps.iter().enumerate() {
            if i & mask == want {
                reduced[gather(i, &keep_masks)] = a;
            }
        }
        Ok(reduced)
    }

    fn mask(&self, qubit: usize) -> usize {
        1usize << (self.n_qubits - 1 - qubit)
    }

    fn control_pattern(&self, controls: &[Control]) -> (usize, usize) {
        controls.iter().fold((0, 0), |(m, w), &(q, v)| {
            let bit = self.mask(q);
            (m | bit, if v { w | bit } else { w })
        })
    }

    fn check_qubits(&self, qubits: &[usize]) -> Result<()> {
        for (i, &q) in qubits.iter().enumerate() {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
            if qubits[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        Ok(())
    }
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    a.fidelity(b)
}

/// `a ⊗ b`.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    a.tensor(b)
}

/// Max-norm of `u^† u - I`.
pub fn unitarity_deviation(u: &Matrix) -> f64 {
    let prod = u.adjoint() * u;
    let mut dev: f64 = 0.0;
    for r in 0..prod.nrows() {
        for c in 0..prod.ncols() {
            let ideal = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((prod[(r, c)] - Complex64::new(ideal, 0.0)).norm());
        }
    }
    dev
}

fn gather(i: usize, masks: &[usize]) -> usize {
    masks
        .iter()
        .fold(0, |acc, &m| (acc << 1) | usize::from(i & m != 0))
}

fn index_to_bits(index: usize, width: usize) -> Vec<bool> {
    (0..width)
        .map(|t| index >> (width - 1 - t) & 1 == 1)
        .collect()
}

fn sample_index(probs: &[f64], u: f64) -> usize {
    let total: f64 = probs.iter().sum();
    let target = u * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_nonzero = i;
        }
        acc += p;
        if target < acc && p > 0.0 {
            return i;
        }
    }
    last_nonzero
}

fn qubits_for_len(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidParameter(format!(
            "amplitude vector length {len} is not a power of two"
        )));
    }
    Ok(len.trailing_zeros() as usize)
}

fn check_capacity(n: usize, limit: usize) -> Result<()> {
    if n > limit {
        Err(Error::Capacity {
            requested: n,
            limit,
        })
    } else {
        Ok(())
    }
}

/// Standard single-qubit gates.
pub mod gates {
    use super::Matrix;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn identity(dim: usize) -> Matrix {
        Matrix::identity(dim, dim)
    }

    pub fn hadamard() -> Matrix {
        let h = FRAC_1_SQRT_2;
        Matrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)])
    }

    pub fn pauli_x() -> Matrix {
        Matrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
    }

    /// `W = [[1, -i], [1, i]] / sqrt(2)`; takes `H|0>` to
    /// `((1-i)|0> + (1+i)|1>)/2`.
    pub fn w() -> Matrix {
        let h = FRAC_1_SQRT_2;
        Matrix::from_row_slice(2, 2, &[c(h, 0.0), c(0.0, -h), c(h, 0.0), c(0.0, h)])
    }

    /// `R_z(angle) = diag(e^{-i angle/2}, e^{i angle/2})`.
    pub fn rz(angle: f64) -> Matrix {
        let half = angle / 2.0;
        Matrix::from_row_slice(
            2,
            2,
            &[
                Complex64::from_polar(1.0, -half),
                c(0.0, 0.0),
                c(0.0, 0.0),
                Complex64::from_polar(1.0, half),
            ],
        )
    }

    /// `R_y(angle) = exp(-i angle Y / 2)`.
    pub fn ry(angle: f64) -> Matrix {
        let (s, co) = (angle / 2.0).sin_cos();
        Matrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
    }

    /// Phase on `|1>`.
    pub fn phase(angle: f64) -> Matrix {
        Matrix::from_row_slice(
            2,
            2,
            &[
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                Complex64::from_polar(1.0, angle),
            ],
        )
    }

    pub fn swap() -> Matrix {
        let mut m = Matrix::zeros(4, 4);
        m[(0, 0)] = c(1.0, 0.0);
        m[(1, 2)] = c(1.0, 0.0);
        m[(2, 1)] = c(1.0, 0.0);
        m[(3, 3)] = c(1.0, 0.0);
        m
    }
}
