//! Gibbs states from one exact PITE step on half of a maximally entangled
//! register.
//!
//! Qubit layout for `n` system qubits: environment `0..n`, system `n..2n`,
//! ancilla `2n`. The environment is traced out, so the reduced density is
//! indexed by the system register alone.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::hamiltonian::HermitianOperator;
use crate::pite::{exact_dilation, PiteConfig};
use crate::statevector::{gates, Matrix, StateVector, DEFAULT_MAX_QUBITS};

/// Shots per independently seeded batch in [`estimate_partition_sampled`].
pub const SHOT_BATCH: usize = 1024;

#[derive(Clone, Debug)]
pub struct GibbsResult {
    pub reduced_density: Matrix,
    pub success_probability: f64,
    pub z_estimate: f64,
    pub free_energy: f64,
}

/// `2^{-n/2} sum_j |j>_env |j>_sys`, prepared with Hadamards on the
/// environment and CNOTs onto the system.
pub fn max_entangled_state(n: usize) -> Result<StateVector> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "need at least one qubit pair".to_string(),
        ));
    }
    if 2 * n > DEFAULT_MAX_QUBITS {
        return Err(Error::Capacity {
            requested: 2 * n,
            limit: DEFAULT_MAX_QUBITS,
        });
    }
    let mut s = StateVector::zero(2 * n)?;
    for q in 0..n {
        s = s.apply_unitary(&gates::hadamard(), &[q])?;
    }
    for q in 0..n {
        s = s.apply_controlled(&gates::pauli_x(), q, true, &[n + q])?;
    }
    Ok(s)
}

/// `-ln(z) / beta`.
pub fn free_energy(z: f64, beta: f64) -> f64 {
    -z.ln() / beta
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain {
            what: "beta",
            value: beta,
        });
    }
    Ok(())
}

/// Pre-measurement state of the Gibbs circuit and the system width.
fn gibbs_circuit(h: &HermitianOperator, beta: f64, m0: f64) -> Result<(StateVector, usize)> {
    check_beta(beta)?;
    let n = h.n_qubits()?;
    if 2 * n + 1 > DEFAULT_MAX_QUBITS {
        return Err(Error::Capacity {
            requested: 2 * n + 1,
            limit: DEFAULT_MAX_QUBITS,
        });
    }
    let cfg = PiteConfig::exact(m0, beta / 2.0)?;
    let input = max_entangled_state(n)?.tensor(&StateVector::zero(1)?)?;
    let system: Vec<usize> = (n..2 * n).collect();
    Ok((exact_dilation(&input, &system, 2 * n, &[], h, &cfg)?, n))
}

/// Runs the circuit at `dtau = beta / 2` and post-selects the ancilla on
/// `|0>`; the success weight is `m0^2 Z / 2^n`.
pub fn gibbs_prepare(h: &HermitianOperator, beta: f64, m0: f64) -> Result<GibbsResult> {
    let (pre, n) = gibbs_circuit(h, beta, m0)?;
    let (p, post) = pre.branch(&[2 * n], &[false])?;
    let dim = 1usize << n;
    let amps = post.amplitudes();
    let rho = DMatrix::from_fn(dim, dim, |a, b| {
        (0..dim)
            .map(|e| amps[e * dim + a] * amps[e * dim + b].conj())
            .sum::<Complex64>()
    });
    let z = dim as f64 * p / (m0 * m0);
    Ok(GibbsResult {
        reduced_density: rho,
        success_probability: p,
        z_estimate: z,
        free_energy: free_energy(z, beta),
    })
}

/// Estimates `Z` from `shots` simulated ancilla readouts. Returns the
/// estimate and its binomial standard error. Shots are drawn in batches of
/// [`SHOT_BATCH`], each from its own stream of a generator seeded with
/// `seed`, so the result does not depend on the thread count.
pub fn estimate_partition_sampled(
    h: &HermitianOperator,
    beta: f64,
    m0: f64,
    shots: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    estimate_partition_sampled_with(Exec::Auto, h, beta, m0, shots, seed)
}

pub fn estimate_partition_sampled_with(
    exec: Exec,
    h: &HermitianOperator,
    beta: f64,
    m0: f64,
    shots: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if shots == 0 {
        return Err(Error::InvalidParameter(
            "shots must be positive".to_string(),
        ));
    }
    let (pre, n) = gibbs_circuit(h, beta, m0)?;
    let p = pre.outcome_probabilities(&[2 * n])?[0].clamp(0.0, 1.0);
    let batches: Vec<(u64, usize)> = (0..shots.div_ceil(SHOT_BATCH))
        .map(|b| (b as u64, SHOT_BATCH.min(shots - b * SHOT_BATCH)))
        .collect();
    let successes: usize = exec::map_items(exec, batches, |(stream, count)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        (0..count).filter(|_| rng.random_bool(p)).count()
    })
    .into_iter()
    .sum();
    let q = successes as f64 / shots as f64;
    let scale = (1usize << n) as f64 / (m0 * m0);
    Ok((scale * q, scale * (q * (1.0 - q) / shots as f64).sqrt()))
}

/// `-Tr rho ln rho`, from the spectrum of `rho`.
pub fn von_neumann_entropy(rho: &Matrix) -> Result<f64> {
    let op = HermitianOperator::new(rho.clone())?;
    Ok(op
        .eigenvalues()
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn bell_pair() {
        let s = max_entangled_state(1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(s.amplitude(0).re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(s.amplitude(3).re, h, epsilon = 1e-15);
        assert!(s.amplitude(1).norm() < 1e-15 && s.amplitude(2).norm() < 1e-15);
    }

    #[test]
    fn diagonal_pairs() {
        let s = max_entangled_state(3).unwrap();
        for e in 0..8 {
            for j in 0..8 {
                let want = if e == j { 1.0 / 8f64.sqrt() } else { 0.0 };
                assert!((s.amplitude(e * 8 + j) - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn capacity() {
        assert!(matches!(
            max_entangled_state(13),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn zero_hamiltonian() {
        let h = HermitianOperator::diagonal(&[0.0; 4]).unwrap();
        let g = gibbs_prepare(&h, 1.0, 0.5).unwrap();
        assert_abs_diff_eq!(g.success_probability, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(g.z_estimate, 4.0, epsilon = 1e-12);
        for a in 0..4 {
            for b in 0..4 {
                let want = if a == b { 0.25 } else { 0.0 };
                assert!((g.reduced_density[(a, b)] - want).norm() < 1e-12);
            }
        }
        assert_abs_diff_eq!(
            von_neumann_entropy(&g.reduced_density).unwrap(),
            4f64.ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn certain_success() {
        let h = HermitianOperator::diagonal(&[0.0; 2]).unwrap();
        let m0 = 1.0 - 1e-15;
        let (z, err) = estimate_partition_sampled(&h, 1.0, m0, 500, 3).unwrap();
        assert_eq!(z, 2.0 / (m0 * m0));
        assert_eq!(err, 0.0);
    }

    #[test]
    fn free_energy_definition() {
        let z = 3.7;
        assert_abs_diff_eq!((-2.0 * free_energy(z, 2.0)).exp(), z, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let h = HermitianOperator::diagonal(&[0.0, 1.0]).unwrap();
        assert!(gibbs_prepare(&h, 0.0, 0.5).is_err());
        assert!(estimate_partition_sampled(&h, 1.0, 0.5, 0, 1).is_err());
    }

    #[test]
    fn seeded_estimate_is_reproducible() {
        let h = HermitianOperator::diagonal(&[0.0, 0.3, 1.0, 2.0]).unwrap();
        let a = estimate_partition_sampled_with(Exec::Sequential, &h, 1.0, 0.5, 5000, 11).unwrap();
        let b = estimate_partition_sampled_with(Exec::Parallel, &h, 1.0, 0.5, 5000, 11).unwrap();
        assert_eq!(a, b);
    }
}
