//! Hamiltonians, 1-D grids and model potentials.
//!
//! [`HermitianOperator`] caches its eigendecomposition; it is the classical
//! oracle behind exact PITE and behind the eigenstate weights reported by
//! the trajectory driver. The first-order circuits never consult it.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::statevector::{Matrix, StateVector};

const HERMITIAN_TOL: f64 = 1e-10;

/// Largest grid register supported by the dense Hamiltonian builder.
pub const MAX_GRID_QUBITS: usize = 12;

#[derive(Clone, Debug)]
pub struct HermitianOperator {
    matrix: Matrix,
    eigenvalues: Vec<f64>,
    eigenvectors: Matrix,
}

impl HermitianOperator {
    /// Diagonalizes `matrix`. Fails if it is not square or deviates from its
    /// adjoint by more than `1e-10` in max-norm.
    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let deviation = hermiticity_deviation(&matrix);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NonHermitian { deviation });
        }
        let symmetric = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = symmetric.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let eigenvectors = Matrix::from_fn(symmetric.nrows(), order.len(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        Ok(HermitianOperator {
            matrix: symmetric,
            eigenvalues,
            eigenvectors,
        })
    }

    /// Real diagonal operator; eigenvectors are the computational basis.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let n = values.len();
        Self::new(Matrix::from_fn(n, n, |r, c| {
            if r == c {
                Complex64::new(values[r], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Assembles `V diag(values) V^†` without diagonalizing; `eigenvectors`
    /// must be unitary. Pairs are re-sorted by ascending value.
    pub(crate) fn from_spectrum(values: Vec<f64>, vectors: Matrix) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| values[i]).collect();
        let eigenvectors =
            Matrix::from_fn(vectors.nrows(), order.len(), |r, c| vectors[(r, order[c])]);
        let matrix = spectral_matrix(&eigenvectors, &eigenvalues, |l| Complex64::new(l, 0.0));
        HermitianOperator {
            matrix,
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Columns are eigenvectors, in the order of [`eigenvalues`](Self::eigenvalues).
    pub fn eigenvectors(&self) -> &Matrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Register width, when the dimension is a power of two.
    pub fn n_qubits(&self) -> Result<usize> {
        let d = self.dim();
        if d.is_power_of_two() {
            Ok(d.trailing_zeros() as usize)
        } else {
            Err(Error::InvalidParameter(format!(
                "operator dimension {d} is not a power of two"
            )))
        }
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Eigenvector `index` (ascending energy) as a state.
    pub fn eigenstate(&self, index: usize) -> Result<StateVector> {
        if index >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index: index as i64,
                lo: 0,
                hi: self.dim() as i64,
            });
        }
        StateVector::from_amplitudes(self.eigenvectors.column(index).iter().copied().collect())
    }

    pub fn ground_state(&self) -> Result<StateVector> {
        self.eigenstate(0)
    }

    /// `f(H)` through the cached spectrum.
    pub fn spectral_map<F: Fn(f64) -> Complex64>(&self, f: F) -> Matrix {
        spectral_matrix(&self.eigenvectors, &self.eigenvalues, f)
    }

    /// `exp(-i H t)`.
    pub fn real_time_evolution(&self, t: f64) -> Matrix {
        self.spectral_map(|l| Complex64::from_polar(1.0, -l * t))
    }

    /// `exp(-H tau)`.
    pub fn imaginary_time_evolution(&self, tau: f64) -> Matrix {
        self.spectral_map(|l| Complex64::new((-l * tau).exp(), 0.0))
    }

    /// Squared overlaps of `psi` with each eigenvector.
    pub fn weights(&self, psi: &StateVector) -> Result<Vec<f64>> {
        Ok(self
            .eigen_coefficients(psi)?
            .iter()
            .map(|c| c.norm_sqr())
            .collect())
    }

    /// `V^† psi`.
    pub fn eigen_coefficients(&self, psi: &StateVector) -> Result<Vec<Complex64>> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        Ok((self.eigenvectors.adjoint() * v).iter().copied().collect())
    }

    /// `<psi|H|psi>`.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        Ok(self
            .weights(psi)?
            .iter()
            .zip(&self.eigenvalues)
            .map(|(w, l)| w * l)
            .sum())
    }

    /// Max over eigenpairs of `|H v - lambda v|`.
    pub fn residual(&self) -> f64 {
        let hv = &self.matrix * &self.eigenvectors;
        (0..self.dim())
            .map(|c| {
                (0..self.dim())
                    .map(|r| {
                        (hv[(r, c)] - self.eigenvectors[(r, c)] * self.eigenvalues[c]).norm_sqr()
                    })
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max)
    }

    /// `H - e0 I`.
    pub fn shifted(&self, e0: f64) -> Self {
        shift_energy(self, e0)
    }
}

/// `H - e0 I`: eigenvalues move by `-e0`, eigenvectors are kept.
pub fn shift_energy(h: &HermitianOperator, e0: f64) -> HermitianOperator {
    let n = h.dim();
    let mut matrix = h.matrix.clone();
    for i in 0..n {
        matrix[(i, i)] -= Complex64::new(e0, 0.0);
    }
    HermitianOperator {
        matrix,
        eigenvalues: h.eigenvalues.iter().map(|l| l - e0).collect(),
        eigenvectors: h.eigenvectors.clone(),
    }
}

pub(crate) fn spectral_matrix<F: Fn(f64) -> Complex64>(
    vectors: &Matrix,
    values: &[f64],
    f: F,
) -> Matrix {
    let mut scaled = vectors.clone();
    for (c, &l) in values.iter().enumerate() {
        let fl = f(l);
        scaled.column_mut(c).iter_mut().for_each(|x| *x *= fl);
    }
    scaled * vectors.adjoint()
}

/// Max-norm of `M - M^†`.
pub fn hermiticity_deviation(m: &Matrix) -> f64 {
    let mut dev: f64 = 0.0;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            dev = dev.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    dev
}

/// Uniform grid of `N = 2^n_qubits` points on `[0, length)` for a particle
/// of mass `mass`. Momenta are centered: `p = (s - N/2) dp`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    n_qubits: usize,
    length: f64,
    mass: f64,
}

impl Grid1D {
    pub fn new(n_qubits: usize, length: f64, mass: f64) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_GRID_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "grid register must have 1..={MAX_GRID_QUBITS} qubits, got {n_qubits}"
            )));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Domain {
                what: "cell length",
                value: length,
            });
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::Domain {
                what: "mass",
                value: mass,
            });
        }
        Ok(Grid1D {
            n_qubits,
            length,
            mass,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_points(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_points() as f64
    }

    pub fn dp(&self) -> f64 {
        2.0 * PI / self.length
    }

    pub fn position(&self, k: usize) -> f64 {
        k as f64 * self.dx()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points()).map(|k| self.position(k)).collect()
    }

    /// `s - N/2`.
    pub fn centered_index(&self, s: usize) -> i64 {
        s as i64 - (self.n_points() / 2) as i64
    }

    pub fn momentum(&self, s: usize) -> f64 {
        self.centered_index(s) as f64 * self.dp()
    }

    /// `E_s = (s - N/2)^2 dp^2 / (2 m)`.
    pub fn kinetic_energy(&self, s: usize) -> f64 {
        let p = self.momentum(s);
        p * p / (2.0 * self.mass)
    }

    pub fn kinetic_energies(&self) -> Vec<f64> {
        (0..self.n_points())
            .map(|s| self.kinetic_energy(s))
            .collect()
    }

    /// `dp^2 / (2 m)`, the unit of the kinetic propagator argument.
    pub fn kinetic_unit(&self) -> f64 {
        self.dp() * self.dp() / (2.0 * self.mass)
    }
}

/// Parameters of the asymmetric double well. The lower minimum sits at
/// `L/2 + d/2` (value 0), the higher one at `L/2 - d/2` (value `delta`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoubleWell {
    pub length: f64,
    pub separation: f64,
    pub delta: f64,
    pub barrier: f64,
}

impl Default for DoubleWell {
    fn default() -> Self {
        DoubleWell {
            length: 18.0,
            separation: 3.0,
            delta: 0.25,
            barrier: 0.5,
        }
    }
}

impl DoubleWell {
    /// Breakpoints between the four pieces.
    pub fn breakpoints(&self) -> [f64; 3] {
        let (l, d) = (self.length, self.separation);
        [(l - d) / 2.0, l / 2.0, (l + d) / 2.0]
    }

    /// Piecewise value; each piece owns its right endpoint.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=self.length).contains(&x) {
            return Err(Error::Domain {
                what: "double-well position",
                value: x,
            });
        }
        let [left, mid, right] = self.breakpoints();
        Ok(if x <= left {
            self.left_parabola(x)
        } else if x <= mid {
            self.left_cosine(x)
        } else if x <= right {
            self.right_cosine(x)
        } else {
            self.right_parabola(x)
        })
    }

    /// The four pieces, evaluated without the domain split; used to check
    /// continuity at the breakpoints.
    pub fn pieces(&self, x: f64) -> [f64; 4] {
        [
            self.left_parabola(x),
            self.left_cosine(x),
            self.right_cosine(x),
            self.right_parabola(x),
        ]
    }

    fn left_parabola(&self, x: f64) -> f64 {
        let u = x - self.length / 2.0 + self.separation / 2.0;
        u * u / 2.0 + self.delta
    }

    fn left_cosine(&self, x: f64) -> f64 {
        self.barrier / 2.0 * (1.0 + self.cos_arg(x)) + self.delta
    }

    fn right_cosine(&self, x: f64) -> f64 {
        (self.barrier + self.delta) / 2.0 * (1.0 + self.cos_arg(x))
    }

    fn right_parabola(&self, x: f64) -> f64 {
        let u = x - self.length / 2.0 - self.separation / 2.0;
        u * u / 2.0
    }

    fn cos_arg(&self, x: f64) -> f64 {
        (2.0 * PI / self.separation * (x - self.length / 2.0)).cos()
    }
}

/// Double well with the default parameters (L = 18, d = 3, delta = 0.25,
/// barrier 0.5).
pub fn eval_double_well(x: f64) -> Result<f64> {
    DoubleWell::default().eval(x)
}

/// `mass * omega^2 (x - L/2)^2 / 2`.
pub fn eval_harmonic(x: f64, omega: f64, length: f64, mass: f64) -> f64 {
    let u = x - length / 2.0;
    mass * omega * omega * u * u / 2.0
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSpec {
    /// Parabola centered at `length / 2`; the mass comes from the grid.
    Harmonic {
        omega: f64,
        length: f64,
    },
    DoubleWell(DoubleWell),
    /// One value per grid point.
    Tabulated(Vec<f64>),
}

impl PotentialSpec {
    /// Potential sampled at the grid points.
    pub fn table(&self, grid: &Grid1D) -> Result<Vec<f64>> {
        match self {
            PotentialSpec::Harmonic { omega, length } => Ok(grid
                .positions()
                .into_iter()
                .map(|x| eval_harmonic(x, *omega, *length, grid.mass()))
                .collect()),
            PotentialSpec::DoubleWell(dw) => {
                grid.positions().into_iter().map(|x| dw.eval(x)).collect()
            }
            PotentialSpec::Tabulated(values) => {
                if values.len() != grid.n_points() {
                    return Err(Error::DimensionMismatch {
                        expected: grid.n_points(),
                        found: values.len(),
                    });
                }
                Ok(values.clone())
            }
        }
    }
}

/// `<k|T|k'>` in the position basis:
/// `(-1)^(k-k') / N * sum_s E_s exp(2 pi i (k-k') s / N)`.
pub fn kinetic_matrix_element(k: usize, k_prime: usize, grid: &Grid1D) -> Result<Complex64> {
    let n = grid.n_points();
    for idx in [k, k_prime] {
        if idx >= n {
            return Err(Error::IndexOutOfRange {
                index: idx as i64,
                lo: 0,
                hi: n as i64,
            });
        }
    }
    let ell = k as i64 - k_prime as i64;
    let sign = if ell.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let sum: Complex64 = (0..n)
        .map(|s| {
            let phase = 2.0 * PI * ((ell * s as i64).rem_euclid(n as i64)) as f64 / n as f64;
            Complex64::from_polar(grid.kinetic_energy(s), phase)
        })
        .sum();
    Ok(sum * (sign / n as f64))
}

/// Dense kinetic-energy matrix in the position basis.
pub fn kinetic_matrix(grid: &Grid1D) -> Matrix {
    let n = grid.n_points();
    // depends only on k - k' mod N
    let row: Vec<Complex64> = (0..n)
        .map(|d| kinetic_matrix_element(d, 0, grid).expect("index in range"))
        .collect();
    DMatrix::from_fn(n, n, |r, c| row[(r + n - c) % n])
}

/// `T + V(x)` on the grid, diagonalized.
pub fn build_grid_hamiltonian(grid: &Grid1D, pot: &PotentialSpec) -> Result<HermitianOperator> {
    let mut m = kinetic_matrix(grid);
    for (k, v) in pot.table(grid)?.into_iter().enumerate() {
        m[(k, k)] += Complex64::new(v, 0.0);
    }
    HermitianOperator::new(m)
}

/// Normalized Gaussian with `|psi(x)|^2` of standard deviation `sigma`
/// centered at `center`.
pub fn gaussian_state(grid: &Grid1D, center: f64, sigma: f64) -> Result<StateVector> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain {
            what: "gaussian width",
            value: sigma,
        });
    }
    let values: Vec<f64> = grid
        .positions()
        .into_iter()
        .map(|x| (-(x - center).powi(2) / (4.0 * sigma * sigma)).exp())
        .collect();
    StateVector::from_real(&values)
}
