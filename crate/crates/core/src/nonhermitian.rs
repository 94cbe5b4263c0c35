//! Probabilistic evolution under `exp(L dt)` for a non-Hermitian generator
//! `L`, using two ancillas.
//!
//! Qubit layout: register `0..n`, branch ancilla `A = n`, dilation ancilla
//! `B = n + 1`. The circuit is
//!
//! 1. `H` on `A`;
//! 2. for `A = 0`, the exact PITE dilation of `M = m0 exp((L + L^†) dt)` on
//!    the register with `B` as its ancilla;
//! 3. for `A = 1`, `U = exp((L - L^†) dt)` on the register and
//!    `R_y(2 arccos m0)` on `B`;
//! 4. `H` on `A`,
//!
//! which leaves `(M + m0 U)|psi> / 2` on `|A B> = |00>`. To first order in
//! `dt` that is `m0 (1 + L dt)|psi>`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::HermitianOperator;
use crate::pite::{exact_dilation, PiteConfig, StepResult};
use crate::statevector::{gates, Matrix, StateVector};

/// A square generator together with `L + L^†` and `L - L^†`.
#[derive(Clone, Debug)]
pub struct GeneratorL {
    matrix: Matrix,
    hermitian_part: Matrix,
    antihermitian_part: Matrix,
}

impl GeneratorL {
    pub fn new(matrix: Matrix) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || dim < 2 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim.next_power_of_two().max(2),
                found: matrix.ncols(),
            });
        }
        if matrix
            .iter()
            .any(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::InvalidParameter(
                "generator has non-finite entries".to_string(),
            ));
        }
        let adj = matrix.adjoint();
        let hermitian_part = &matrix + &adj;
        let antihermitian_part = &matrix - &adj;
        Ok(GeneratorL {
            matrix,
            hermitian_part,
            antihermitian_part,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// `L + L^†`.
    pub fn hermitian_part(&self) -> &Matrix {
        &self.hermitian_part
    }

    /// `L - L^†`.
    pub fn antihermitian_part(&self) -> &Matrix {
        &self.antihermitian_part
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }
}

/// `M = m0 exp((L + L^†) dt)` and `U = exp((L - L^†) dt)`.
pub fn build_nonhermitian_ops(
    l: &GeneratorL,
    dt: f64,
    m0: f64,
) -> Result<(HermitianOperator, Matrix)> {
    let cfg = PiteConfig::exact(m0, dt)?;
    let minus_h = pite_hamiltonian(l)?;
    let values = minus_h
        .eigenvalues()
        .iter()
        .map(|&lam| {
            let m = cfg.m0() * (-lam * dt).exp();
            if m < 1.0 {
                Ok(m)
            } else {
                Err(Error::SpectralBound {
                    eigenvalue: lam,
                    value: m,
                })
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let m = HermitianOperator::from_spectrum(values, minus_h.eigenvectors().clone());
    // L - L^† = -i K with K Hermitian
    let k = HermitianOperator::new(&l.antihermitian_part * Complex64::i())?;
    Ok((m, k.real_time_evolution(dt)))
}

/// `-(L + L^†)`, whose imaginary-time step reproduces `M`.
fn pite_hamiltonian(l: &GeneratorL) -> Result<HermitianOperator> {
    HermitianOperator::new(-l.hermitian_part.clone())
}

/// The map applied to the register on success, `(M + m0 U) / 2`.
pub fn effective_map(l: &GeneratorL, dt: f64, m0: f64) -> Result<Matrix> {
    let (m, u) = build_nonhermitian_ops(l, dt, m0)?;
    Ok((m.matrix() + u * Complex64::new(m0, 0.0)) * Complex64::new(0.5, 0.0))
}

/// One step of the two-ancilla circuit. Success is `|A B> = |00>`; the
/// failure branch spans three outcomes, so `failure_state` is `None`.
pub fn nonhermitian_step(
    psi: &StateVector,
    l: &GeneratorL,
    dt: f64,
    m0: f64,
) -> Result<StepResult> {
    let n = psi.n_qubits();
    if l.dim() != psi.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            found: psi.dim(),
        });
    }
    let (_, u) = build_nonhermitian_ops(l, dt, m0)?;
    let cfg = PiteConfig::exact(m0, dt)?;
    let h = pite_hamiltonian(l)?;
    let (a, b) = (n, n + 1);
    let register: Vec<usize> = (0..n).collect();

    let s = psi
        .tensor(&StateVector::zero(2)?)?
        .apply_unitary(&gates::hadamard(), &[a])?;
    let s = exact_dilation(&s, &register, b, &[(a, false)], &h, &cfg)?;
    let s = s
        .apply_controlled(&u, a, true, &register)?
        .apply_controlled(&gates::ry(2.0 * m0.acos()), a, true, &[b])?
        .apply_unitary(&gates::hadamard(), &[a])?;
    let (p, success) = s.branch(&[a, b], &[false, false])?;
    Ok(StepResult {
        success_probability: p,
        failure_probability: (1.0 - p).max(0.0),
        success_state: success,
        failure_state: None,
        pre_measurement_state: s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_generator() {
        let l = GeneratorL::new(Matrix::zeros(2, 2)).unwrap();
        let psi = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let r = nonhermitian_step(&psi, &l, 0.1, 0.8).unwrap();
        assert_abs_diff_eq!(r.success_probability, 0.64, epsilon = 1e-12);
        assert!(r.success_state.distance(&psi).unwrap() < 1e-12);
    }

    #[test]
    fn antihermitian_generator() {
        let l = GeneratorL::new(Matrix::from_row_slice(
            2,
            2,
            &[c(0.0, 0.3), c(0.5, 0.1), c(-0.5, 0.1), c(0.0, -0.2)],
        ))
        .unwrap();
        let (m, u) = build_nonhermitian_ops(&l, 0.2, 0.6).unwrap();
        for &v in m.eigenvalues() {
            assert_abs_diff_eq!(v, 0.6, epsilon = 1e-12);
        }
        assert!(crate::statevector::unitarity_deviation(&u) < 1e-12);
    }

    #[test]
    fn spectral_bound() {
        let l = GeneratorL::new(Matrix::from_diagonal_element(2, 2, c(3.0, 0.0))).unwrap();
        assert!(matches!(
            build_nonhermitian_ops(&l, 0.5, 0.9),
            Err(Error::SpectralBound { .. })
        ));
    }

    #[test]
    fn rejects_non_square() {
        assert!(GeneratorL::new(Matrix::zeros(2, 3)).is_err());
        assert!(GeneratorL::new(Matrix::zeros(3, 3)).is_err());
    }
}
