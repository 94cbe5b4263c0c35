//! The experiment recipes. Each one turns a [`RunConfig`] into tables and a
//! JSON summary; [`run_experiment`] writes them to disk.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::{json, Value};

use pite_core::gibbs::{
    estimate_partition_sampled, gibbs_prepare, von_neumann_entropy, SHOT_BATCH,
};
use pite_core::grid::{kinetic_propagator, st1_pite_step, St1Rte};
use pite_core::hamiltonian::{build_grid_hamiltonian, gaussian_state, DoubleWell};
use pite_core::nonhermitian::{build_nonhermitian_ops, nonhermitian_step, GeneratorL};
use pite_core::pite::{build_theta, run_trajectory, Evolution, ExactRte};
use pite_core::two_level::TwoLevelParams;
use pite_core::{
    Grid1D, HermitianOperator, Matrix, PiteConfig, PotentialSpec, Result as CoreResult,
    StateVector, StepResult, Trajectory, TrajectoryMode,
};

use crate::config::{
    DoubleWellConfig, ExperimentKind, GibbsConfig, HarmonicConfig, InitialShape, ModeName,
    NonHermitianConfig, PropagatorConfig, RunConfig, TwoLevelConfig,
};
use crate::output::{trajectory_columns, trajectory_table, write_csv, Table, WEIGHT_COLUMNS};
use crate::LabError;

/// Everything an experiment produces, before it touches the disk.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub trajectory: Table,
    /// Additional named tables, written as `<name>.csv`.
    pub tables: Vec<(String, Table)>,
    pub summary: Value,
}

/// Ground-state fidelity that counts as converged in summaries.
pub const CONVERGED_FIDELITY: f64 = 0.99;

/// Checks the config and every numeric precondition without running the
/// experiment.
pub fn validate(cfg: &RunConfig) -> Result<(), LabError> {
    cfg.check_structure()?;
    match cfg.experiment {
        ExperimentKind::TwoLevel => {
            let c = cfg.two_level();
            for &dtau in &c.dtau {
                two_level_problem(&c, dtau)?;
            }
        }
        ExperimentKind::DoubleWell => {
            GridProblem::double_well(&cfg.double_well())?;
        }
        ExperimentKind::Harmonic => {
            GridProblem::harmonic(&cfg.harmonic())?;
        }
        ExperimentKind::HarmonicOdd => {
            GridProblem::harmonic(&cfg.harmonic_odd())?;
        }
        ExperimentKind::Gibbs => {
            let c = cfg.gibbs();
            let h = gibbs_hamiltonian(&c)?;
            build_theta(&h, &PiteConfig::exact(c.m0, c.beta / 2.0)?)?;
            if !(c.beta > 0.0 && c.beta.is_finite()) {
                return Err(pite_core::Error::Domain {
                    what: "beta",
                    value: c.beta,
                }
                .into());
            }
        }
        ExperimentKind::Nonhermitian => {
            let c = cfg.nonhermitian();
            let (l, _) = nonhermitian_problem(&c)?;
            build_nonhermitian_ops(&l, c.dt, c.m0)?;
        }
        ExperimentKind::Propagator => {
            let c = cfg.propagator();
            for &lambda in &c.lambdas {
                if !lambda.is_finite() {
                    return Err(pite_core::Error::Domain {
                        what: "lambda",
                        value: lambda,
                    }
                    .into());
                }
            }
            kinetic_propagator(0, 0.0, c.n_points)?;
        }
    }
    Ok(())
}

pub fn compute(cfg: &RunConfig) -> Result<Artifacts, LabError> {
    validate(cfg)?;
    let mode = match cfg.mode {
        ModeName::Postselect => TrajectoryMode::Postselect,
        ModeName::Sampled => TrajectoryMode::Sampled { seed: cfg.seed },
    };
    let mut artifacts = match cfg.experiment {
        ExperimentKind::TwoLevel => two_level(&cfg.two_level())?,
        ExperimentKind::DoubleWell => GridProblem::double_well(&cfg.double_well())?.run(mode)?,
        ExperimentKind::Harmonic => GridProblem::harmonic(&cfg.harmonic())?.run(mode)?,
        ExperimentKind::HarmonicOdd => GridProblem::harmonic(&cfg.harmonic_odd())?.run(mode)?,
        ExperimentKind::Gibbs => gibbs(&cfg.gibbs(), cfg.seed)?,
        ExperimentKind::Nonhermitian => nonhermitian(&cfg.nonhermitian())?,
        ExperimentKind::Propagator => propagator(&cfg.propagator())?,
    };
    if let Value::Object(map) = &mut artifacts.summary {
        map.insert("experiment".into(), json!(cfg.experiment.name()));
        map.insert("seed".into(), json!(cfg.seed));
        map.insert("mode".into(), json!(cfg.mode));
    }
    Ok(artifacts)
}

/// Runs the experiment and writes `trajectory.csv`, `summary.json` and any
/// additional tables to `out_dir`. Returns the written paths.
pub fn run_experiment(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, LabError> {
    let artifacts = compute(cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| LabError::io(out_dir, e))?;
    let mut written = Vec::new();
    let path = out_dir.join("trajectory.csv");
    write_csv(&artifacts.trajectory, &path)?;
    written.push(path);
    for (name, table) in &artifacts.tables {
        let path = out_dir.join(format!("{name}.csv"));
        write_csv(table, &path)?;
        written.push(path);
    }
    let path = out_dir.join("summary.json");
    let mut text = serde_json::to_string_pretty(&artifacts.summary).expect("summary serializes");
    text.push('\n');
    std::fs::write(&path, text).map_err(|e| LabError::io(&path, e))?;
    written.push(path);
    Ok(written)
}

fn two_level_problem(
    c: &TwoLevelConfig,
    dtau: f64,
) -> CoreResult<(HermitianOperator, TwoLevelParams)> {
    let params = TwoLevelParams::new(c.eps_gs, c.eps_ex, c.m0, dtau)?;
    if !(c.w0 >= 0.0 && c.w0.is_finite()) {
        return Err(pite_core::Error::Domain {
            what: "w0",
            value: c.w0,
        });
    }
    let h = HermitianOperator::diagonal(&[c.eps_gs, c.eps_ex])?;
    build_theta(&h, &PiteConfig::exact(c.m0, dtau)?)?;
    Ok((h, params))
}

fn relative_weight(weights: &[f64]) -> f64 {
    weights[1] / weights[0]
}

fn two_level(c: &TwoLevelConfig) -> Result<Artifacts, LabError> {
    let mut table = Table::new([
        "dtau", "k", "p_exact", "p_approx", "P_exact", "P_approx", "w_exact", "w_approx",
    ]);
    let mut sweeps = Vec::new();
    let psi = StateVector::from_real(&[1.0, c.w0.sqrt()])?;
    for &dtau in &c.dtau {
        let (h, params) = two_level_problem(c, dtau)?;
        let rte = ExactRte::new(&h);
        let run = |evolution: Evolution<'_>| {
            run_trajectory(
                &psi,
                evolution,
                &PiteConfig::approx(c.m0, dtau)?,
                c.n_steps,
                TrajectoryMode::Postselect,
                Some(&h),
            )
        };
        let exact = run(Evolution::Exact(&h))?;
        let approx = run(Evolution::Approx(&rte))?;
        for (e, a) in exact.steps.iter().zip(&approx.steps) {
            table.push(vec![
                dtau.into(),
                e.k.into(),
                e.success_probability.into(),
                a.success_probability.into(),
                e.survival_probability.into(),
                a.survival_probability.into(),
                relative_weight(e.weights.as_ref().expect("oracle weights")).into(),
                relative_weight(a.weights.as_ref().expect("oracle weights")).into(),
            ]);
        }
        sweeps.push(json!({
            "dtau": dtau,
            "alpha": params.alpha(),
            "alpha_prime": params.alpha_prime().ok(),
            "p_final_exact": exact.steps.last().map(|s| s.success_probability),
            "p_final_approx": approx.steps.last().map(|s| s.success_probability),
            "P_final_exact": exact.survival(),
            "P_final_approx": approx.survival(),
            "w_final_exact": relative_weight(exact.final_weights.as_ref().expect("oracle weights")),
            "w_final_approx": relative_weight(approx.final_weights.as_ref().expect("oracle weights")),
        }));
    }
    Ok(Artifacts {
        trajectory: table,
        tables: Vec::new(),
        summary: json!({
            "saturated_probability": c.m0 * c.m0,
            "sweeps": sweeps,
        }),
    })
}

/// A grid Hamiltonian shifted so its ground energy is zero, with the
/// matching split-operator evolution and an initial state.
struct GridProblem {
    h: HermitianOperator,
    ground_energy: f64,
    rte: St1Rte,
    psi0: StateVector,
    cfg: PiteConfig,
    n_steps: usize,
}

impl GridProblem {
    fn new(
        grid: Grid1D,
        pot: &PotentialSpec,
        m0: f64,
        dtau: f64,
        n_steps: usize,
        psi0: StateVector,
    ) -> CoreResult<Self> {
        let h = build_grid_hamiltonian(&grid, pot)?;
        let e0 = h.ground_energy();
        let shifted = pot.table(&grid)?.into_iter().map(|v| v - e0).collect();
        let cfg = PiteConfig::approx(m0, dtau)?;
        let h = h.shifted(e0);
        build_theta(&h, &cfg)?;
        Ok(GridProblem {
            rte: St1Rte::new(grid, shifted)?,
            h,
            ground_energy: e0,
            psi0,
            cfg,
            n_steps,
        })
    }

    fn double_well(c: &DoubleWellConfig) -> CoreResult<Self> {
        let grid = Grid1D::new(c.n_qubits, c.length, c.mass)?;
        let dw = DoubleWell {
            length: c.length,
            separation: c.separation,
            delta: c.delta,
            barrier: c.barrier,
        };
        let (l, d) = (c.length, c.separation);
        let sigma = d / 3.0;
        let lower = gaussian_state(&grid, (l + d) / 2.0, sigma)?;
        let psi0 = match c.initial {
            InitialShape::SinglePeak => lower,
            InitialShape::DoublePeak => {
                let upper = gaussian_state(&grid, (l - d) / 2.0, sigma)?;
                StateVector::linear_combination(&[(1.0.into(), &lower), (0.5.into(), &upper)])?
            }
        };
        GridProblem::new(
            grid,
            &PotentialSpec::DoubleWell(dw),
            c.m0,
            c.dtau,
            c.n_steps,
            psi0,
        )
    }

    fn harmonic(c: &HarmonicConfig) -> CoreResult<Self> {
        let grid = Grid1D::new(c.n_qubits, c.length, c.mass)?;
        let pot = PotentialSpec::Harmonic {
            omega: c.omega,
            length: c.length,
        };
        let h = build_grid_hamiltonian(&grid, &pot)?;
        let states = c
            .eigenstates
            .iter()
            .map(|&i| h.eigenstate(i))
            .collect::<CoreResult<Vec<_>>>()?;
        let terms: Vec<_> = states
            .iter()
            .map(|s| (Complex64::new(1.0, 0.0), s))
            .collect();
        let psi0 = StateVector::linear_combination(&terms)?;
        GridProblem::new(grid, &pot, c.m0, c.dtau, c.n_steps, psi0)
    }

    fn trajectory(&self, mode: TrajectoryMode) -> CoreResult<Trajectory> {
        let step =
            |s: &StateVector| -> CoreResult<StepResult> { st1_pite_step(s, &self.rte, &self.cfg) };
        run_trajectory(
            &self.psi0,
            Evolution::Custom(&step),
            &self.cfg,
            self.n_steps,
            mode,
            Some(&self.h),
        )
    }

    fn run(&self, mode: TrajectoryMode) -> Result<Artifacts, LabError> {
        let traj = self.trajectory(mode)?;
        let final_weights = traj.final_weights.clone().expect("oracle weights");
        let fidelities: Vec<f64> = traj
            .steps
            .iter()
            .map(|s| s.weights.as_ref().expect("oracle weights")[0])
            .chain(std::iter::once(final_weights[0]))
            .collect();
        let summary = json!({
            "final_fidelity": final_weights[0],
            "steps_to_converged_fidelity": fidelities.iter().position(|&f| f >= CONVERGED_FIDELITY),
            "saturated_probability": traj.steps.last().map(|s| s.success_probability),
            "P_final": traj.survival(),
            "failed_at": traj.failed_at,
            "ground_energy": self.ground_energy,
            "eigenvalues": self.h.eigenvalues().iter().take(WEIGHT_COLUMNS).map(|e| e + self.ground_energy).collect::<Vec<_>>(),
            "final_weights": final_weights.iter().take(WEIGHT_COLUMNS).collect::<Vec<_>>(),
        });
        Ok(Artifacts {
            trajectory: trajectory_table(&traj),
            tables: Vec::new(),
            summary,
        })
    }
}

fn gaussian_matrix(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Matrix {
    DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(scale * re, scale * im)
    })
}

/// Random Hermitian matrix from the seed, shifted to ground energy zero.
pub fn gibbs_hamiltonian(c: &GibbsConfig) -> CoreResult<HermitianOperator> {
    let mut rng = ChaCha8Rng::seed_from_u64(c.hamiltonian_seed);
    let a = gaussian_matrix(&mut rng, 1 << c.n_qubits, c.scale);
    let h = HermitianOperator::new((&a + a.adjoint()) * Complex64::new(0.5, 0.0))?;
    Ok(h.shifted(h.ground_energy()))
}

fn gibbs(c: &GibbsConfig, seed: u64) -> Result<Artifacts, LabError> {
    let h = gibbs_hamiltonian(c)?;
    let z_exact: f64 = h.eigenvalues().iter().map(|l| (-c.beta * l).exp()).sum();
    let g = gibbs_prepare(&h, c.beta, c.m0)?;
    let mut table = Table::new(["shots", "z_hat", "stderr", "z_exact"]);
    let mut counts: Vec<usize> = (1..=c.shots / SHOT_BATCH).map(|b| b * SHOT_BATCH).collect();
    if !c.shots.is_multiple_of(SHOT_BATCH) {
        counts.push(c.shots);
    }
    let mut last = (f64::NAN, f64::NAN);
    for shots in counts {
        last = estimate_partition_sampled(&h, c.beta, c.m0, shots, seed)?;
        table.push(vec![
            shots.into(),
            last.0.into(),
            last.1.into(),
            z_exact.into(),
        ]);
    }
    Ok(Artifacts {
        trajectory: table,
        tables: Vec::new(),
        summary: json!({
            "z_exact": z_exact,
            "z_circuit": g.z_estimate,
            "z_sampled": last.0,
            "z_sampled_stderr": last.1,
            "free_energy": g.free_energy,
            "success_probability": g.success_probability,
            "entropy": von_neumann_entropy(&g.reduced_density)?,
            "eigenvalues": h.eigenvalues(),
        }),
    })
}

fn nonhermitian_problem(c: &NonHermitianConfig) -> CoreResult<(GeneratorL, StateVector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(c.generator_seed);
    let dim = 1 << c.n_qubits;
    let l = GeneratorL::new(gaussian_matrix(&mut rng, dim, c.scale))?;
    let v = gaussian_matrix(&mut rng, dim, 1.0);
    let psi = StateVector::from_amplitudes(v.column(0).iter().copied().collect())?;
    Ok((l, psi))
}

fn nonhermitian(c: &NonHermitianConfig) -> Result<Artifacts, LabError> {
    let (l, psi0) = nonhermitian_problem(c)?;
    let step_map = (l.matrix() * Complex64::new(c.dt, 0.0)).exp();
    let mut table = Table::new(["k", "p", "P", "error"]);
    let (mut psi, mut reference) = (psi0.clone(), psi0.amplitudes().to_vec());
    let mut survival = 1.0;
    for k in 0..c.n_steps {
        let r = nonhermitian_step(&psi, &l, c.dt, c.m0)?;
        survival *= r.success_probability;
        let v = &step_map * nalgebra::DVector::from_vec(reference);
        let norm = v.norm();
        reference = v.iter().map(|a| a / norm).collect();
        psi = r.success_state;
        let overlap: Complex64 = psi
            .amplitudes()
            .iter()
            .zip(&reference)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let error = (1.0 - overlap.norm().min(1.0)).max(0.0).sqrt() * std::f64::consts::SQRT_2;
        table.push(vec![
            k.into(),
            r.success_probability.into(),
            survival.into(),
            error.into(),
        ]);
    }
    let final_fidelity: f64 = psi
        .amplitudes()
        .iter()
        .zip(&reference)
        .map(|(a, b)| a.conj() * b)
        .sum::<Complex64>()
        .norm_sqr();
    Ok(Artifacts {
        trajectory: table,
        tables: Vec::new(),
        summary: json!({
            "P_final": survival,
            "final_fidelity_with_exact_flow": final_fidelity,
        }),
    })
}

fn propagator(c: &PropagatorConfig) -> Result<Artifacts, LabError> {
    let n = c.n_points as i64;
    let mut table = Table::new(["lambda", "ell", "re", "im", "abs"]);
    let mut checks = Vec::new();
    for &lambda in &c.lambdas {
        let values = (-n + 1..n)
            .map(|ell| kinetic_propagator(ell, lambda, c.n_points))
            .collect::<CoreResult<Vec<Complex64>>>()?;
        let at = |ell: i64| values[(ell + n - 1) as usize];
        for ell in -n + 1..n {
            let j = at(ell);
            table.push(vec![
                lambda.into(),
                ell.into(),
                j.re.into(),
                j.im.into(),
                j.norm().into(),
            ]);
        }
        let symmetry = (1..n)
            .map(|ell| (at(ell) - at(-ell)).norm())
            .fold(0.0, f64::max);
        let column_sum = (0..n)
            .map(|k| ((0..n).map(|kp| at(kp - k)).sum::<Complex64>() - 1.0).norm())
            .fold(0.0, f64::max);
        checks.push(json!({
            "lambda": lambda,
            "max_symmetry_deviation": symmetry,
            "max_column_sum_deviation": column_sum,
        }));
    }
    Ok(Artifacts {
        trajectory: Table::new(trajectory_columns()),
        tables: vec![("propagator".to_string(), table)],
        summary: json!({
            "n_points": c.n_points,
            "checks": checks,
        }),
    })
}
