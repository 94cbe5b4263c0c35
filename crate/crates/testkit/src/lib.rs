//! Dense reference constructions for the test suites.
//!
//! Nothing here goes through the simulator or a cached spectrum: matrix
//! exponentials use nalgebra's scaling-and-squaring Padé routine and gates
//! are embedded with explicit Kronecker products.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type CMatrix = DMatrix<Complex64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `(A + A^†) / 2` with Gaussian entries, scaled by `scale`.
pub fn random_hermitian<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> CMatrix {
    let a = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    (&a + a.adjoint()) * Complex64::new(0.5 * scale, 0.0)
}

/// Complex Gaussian matrix with no symmetry.
pub fn random_matrix<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> CMatrix {
    DMatrix::from_fn(dim, dim, |_, _| gaussian(rng) * scale)
}

/// Normalized complex Gaussian vector.
pub fn random_vector<R: Rng>(rng: &mut R, dim: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim).map(|_| gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Haar-ish unitary from the QR factorization of a Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, dim: usize) -> CMatrix {
    random_matrix(rng, dim, 1.0).qr().q()
}

pub fn expm(a: &CMatrix) -> CMatrix {
    a.clone().exp()
}

/// `exp(-i h t)`.
pub fn expm_rte(h: &CMatrix, t: f64) -> CMatrix {
    expm(&(h * Complex64::new(0.0, -t)))
}

/// `exp(-h tau)`.
pub fn expm_ite(h: &CMatrix, tau: f64) -> CMatrix {
    expm(&(h * Complex64::new(-tau, 0.0)))
}

pub fn mat_vec(m: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum())
        .collect()
}

pub fn normalize(v: &[Complex64]) -> Vec<Complex64> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter().map(|z| z / norm).collect()
}

pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `|| a - b ||_2`.
pub fn distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Distance between rays: `min_phi || a - e^{i phi} b ||`.
pub fn ray_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let overlap: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap.conj() / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn identity(dim: usize) -> CMatrix {
    DMatrix::identity(dim, dim)
}

/// Full `2^n`-dimensional matrix of `gate` acting on the ordered `targets`
/// (first target most significant), built as a sum over computational
/// basis projectors. Qubit 0 is the most significant bit.
pub fn embed(gate: &CMatrix, targets: &[usize], n_qubits: usize) -> CMatrix {
    let dim = 1usize << n_qubits;
    let k = targets.len();
    let bit = |i: usize, q: usize| (i >> (n_qubits - 1 - q)) & 1;
    DMatrix::from_fn(dim, dim, |r, c| {
        let rest_equal = (0..n_qubits)
            .filter(|q| !targets.contains(q))
            .all(|q| bit(r, q) == bit(c, q));
        if !rest_equal {
            return Complex64::new(0.0, 0.0);
        }
        let sub = |i: usize| {
            targets
                .iter()
                .enumerate()
                .map(|(t, &q)| bit(i, q) << (k - 1 - t))
                .sum::<usize>()
        };
        gate[(sub(r), sub(c))]
    })
}

/// Block-diagonal `a ⊕ b` selected by one qubit: the least significant one
/// when `selector_last`, the most significant one otherwise.
pub fn block_select(a: &CMatrix, b: &CMatrix, selector_last: bool) -> CMatrix {
    let p0 = DMatrix::from_row_slice(2, 2, &[one(), zero(), zero(), zero()]);
    let p1 = DMatrix::from_row_slice(2, 2, &[zero(), zero(), zero(), one()]);
    if selector_last {
        kron(a, &p0) + kron(b, &p1)
    } else {
        kron(&p0, a) + kron(&p1, b)
    }
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Unitary DFT `F[j, k] = exp(2 pi i j k / N) / sqrt(N)`.
pub fn dft(n: usize) -> CMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    DMatrix::from_fn(n, n, |j, k| {
        let phase = 2.0 * std::f64::consts::PI * ((j * k) % n) as f64 / n as f64;
        Complex64::from_polar(scale, phase)
    })
}

/// DFT with its columns shifted by `N/2`, i.e. column `k` is DFT column
/// `(k + N/2) mod N`.
pub fn centered_dft(n: usize) -> CMatrix {
    let f = dft(n);
    DMatrix::from_fn(n, n, |j, k| f[(j, (k + n / 2) % n)])
}

/// Dense kinetic operator `F_c diag(E) F_c^†`.
pub fn kinetic_operator(energies: &[f64]) -> CMatrix {
    let f = centered_dft(energies.len());
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        energies.len(),
        energies.iter().map(|&e| Complex64::new(e, 0.0)),
    ));
    &f * d * f.adjoint()
}

pub fn diag(values: &[f64]) -> CMatrix {
    DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        values.len(),
        values.iter().map(|&e| Complex64::new(e, 0.0)),
    ))
}

/// `Tr exp(-beta h)`.
pub fn partition_function(h: &CMatrix, beta: f64) -> f64 {
    expm_ite(h, beta).trace().re
}

/// `f(m)` for Hermitian `m` via nalgebra's eigensolver.
pub fn hermitian_fn(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let eig = m.clone().symmetric_eigen();
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(f(l), 0.0)));
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    m.clone().symmetric_eigen().eigenvalues.min()
}

/// Random Hermitian matrix shifted so its lowest eigenvalue is zero.
pub fn random_shifted_hamiltonian<R: Rng>(rng: &mut R, dim: usize, scale: f64) -> CMatrix {
    let h = random_hermitian(rng, dim, scale);
    let e0 = min_eigenvalue(&h);
    h - identity(dim) * Complex64::new(e0, 0.0)
}
