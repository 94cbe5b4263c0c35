//! Probabilistic imaginary-time evolution on a dense statevector simulator.
//!
//! A single ancilla qubit dilates the nonunitary map `m0 exp(-H dtau)`;
//! measuring the ancilla in `|0>` leaves the register in the
//! imaginary-time-evolved state. The crate provides
//!
//! - [`statevector`]: the dense simulator (big-endian qubit order),
//! - [`hamiltonian`]: Hermitian operators with cached spectra, 1-D grids and
//!   potentials,
//! - [`pite`]: exact and first-order PITE steps and the trajectory driver,
//! - [`grid`]: centered QFT, phase gates, split-operator real-time evolution
//!   and the grid PITE circuit,
//! - [`two_level`]: closed forms for a two-level system,
//! - [`gibbs`]: Gibbs-state preparation and partition-function estimates,
//! - [`nonhermitian`]: two-ancilla evolution under a non-Hermitian generator.
//!
//! Gate kernels run on rayon when the `parallel` feature (default) is on and
//! fall back to plain iterators otherwise; both paths give identical bits.

pub mod error;
pub mod exec;
pub mod gibbs;
pub mod grid;
pub mod hamiltonian;
pub mod nonhermitian;
pub mod pite;
pub mod statevector;
pub mod two_level;

pub use error::{Error, Result};
pub use hamiltonian::{Grid1D, HermitianOperator, PotentialSpec};
pub use pite::{CircuitKind, PiteConfig, StepResult, Trajectory, TrajectoryMode};
pub use statevector::{Matrix, MeasureMode, MeasurementRecord, StateVector};
