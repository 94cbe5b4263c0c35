use std::path::{Path, PathBuf};
use std::process::Command;

use pite_core::pite::{Trajectory, TrajectoryStep};
use pite_core::two_level::{approx_step_closed_form, exact_step_closed_form, TwoLevelParams};
use pite_core::StateVector;
use pite_lab::config::{
    DoubleWellConfig, GibbsConfig, HarmonicConfig, PropagatorConfig, TwoLevelConfig,
};
use pite_lab::{
    compute, emit_csv, run_experiment, Cell, ExperimentKind, ModeName, RunConfig, Table,
};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn real(c: Cell) -> f64 {
    match c {
        Cell::Real(v) => v,
        Cell::Int(v) => v as f64,
    }
}

#[test]
fn defaults_match_the_reference_parameters() {
    let tl = TwoLevelConfig::default();
    assert_eq!((tl.eps_gs, tl.eps_ex, tl.m0), (0.0, 1.0, 0.8));
    assert_eq!(tl.dtau, vec![0.1, 0.3, 0.5]);

    let dw = DoubleWellConfig::default();
    assert_eq!(
        (dw.n_qubits, dw.length, dw.m0, dw.dtau),
        (6, 18.0, 0.9, 0.1)
    );
    assert_eq!(
        (dw.separation, dw.delta, dw.barrier, dw.mass),
        (3.0, 0.25, 0.5, 1.0)
    );

    let h = HarmonicConfig::ground_run();
    assert_eq!(
        (h.n_qubits, h.length, h.omega, h.mass, h.m0, h.dtau),
        (6, 10.0, 1.0, 1.0, 0.85, 0.15)
    );
    assert_eq!(h.eigenstates, vec![0, 1, 2, 3]);

    let odd = HarmonicConfig::odd_run();
    assert_eq!((odd.m0, odd.dtau), (0.85, 0.1));
    assert_eq!(odd.eigenstates, vec![1, 3, 5]);

    let g = GibbsConfig::default();
    assert_eq!((g.n_qubits, g.beta, g.m0, g.shots), (2, 1.0, 0.5, 10_000));

    let p = PropagatorConfig::default();
    assert_eq!(p.n_points, 32);
    assert_eq!(p.lambdas, vec![0.01, 0.04]);

    // the shipped configs select exactly these defaults
    for kind in ExperimentKind::ALL {
        let cfg = RunConfig::load(&configs_dir().join(format!("{}.toml", kind.name()))).unwrap();
        assert_eq!(cfg, RunConfig::new(kind));
    }
}

#[test]
fn two_level_first_rows_match_closed_forms() {
    let t = compute(&RunConfig::new(ExperimentKind::TwoLevel))
        .unwrap()
        .trajectory;
    assert_eq!(
        t.columns,
        ["dtau", "k", "p_exact", "p_approx", "P_exact", "P_approx", "w_exact", "w_approx"]
    );
    for row in t.rows.iter().filter(|r| r[1] == Cell::Int(0)) {
        let p = TwoLevelParams::new(0.0, 1.0, 0.8, real(row[0])).unwrap();
        assert!((real(row[2]) - exact_step_closed_form(1.0, &p).unwrap().0).abs() < 1e-12);
        assert!((real(row[3]) - approx_step_closed_form(1.0, &p).unwrap().0).abs() < 1e-12);
        assert_eq!(real(row[6]), 1.0);
    }
}

#[test]
fn two_level_csv_matches_golden_file() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&RunConfig::new(ExperimentKind::TwoLevel), dir.path()).unwrap();
    let got = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let golden = include_str!("golden/two_level.csv");
    assert_eq!(got, golden);
}

#[test]
fn csv_round_trips_bit_for_bit() {
    let t = compute(&RunConfig::new(ExperimentKind::DoubleWell))
        .unwrap()
        .trajectory;
    let back = Table::from_csv(&t.to_csv()).unwrap();
    assert_eq!(back.columns, t.columns);
    for (a, b) in t.rows.iter().flatten().zip(back.rows.iter().flatten()) {
        match (a, b) {
            (Cell::Real(x), Cell::Real(y)) => assert_eq!(x.to_bits(), y.to_bits()),
            _ => assert_eq!(a, b),
        }
    }
}

#[test]
fn empty_trajectory_is_header_only() {
    let traj = Trajectory {
        steps: Vec::<TrajectoryStep>::new(),
        final_state: StateVector::zero(1).unwrap(),
        final_weights: None,
        failed_at: None,
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    emit_csv(&traj, &path).unwrap();
    assert_eq!(
        std::fs::read_to_string(path).unwrap(),
        "k,p,P,succeeded,energy,fidelity_gs,w0,w1,w2,w3,w4,w5\n"
    );
}

#[test]
fn seeded_runs_are_byte_identical() {
    let mut sampled = RunConfig::new(ExperimentKind::DoubleWell);
    sampled.mode = ModeName::Sampled;
    sampled.seed = 99;
    let mut gibbs = RunConfig::new(ExperimentKind::Gibbs);
    gibbs.seed = 5;
    for cfg in [sampled, gibbs] {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let files_a = run_experiment(&cfg, a.path()).unwrap();
        run_experiment(&cfg, b.path()).unwrap();
        for f in files_a {
            let name = f.file_name().unwrap();
            assert_eq!(
                std::fs::read(&f).unwrap(),
                std::fs::read(b.path().join(name)).unwrap()
            );
        }
    }
}

#[test]
fn propagator_run_writes_its_table() {
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&RunConfig::new(ExperimentKind::Propagator), dir.path()).unwrap();
    let table =
        Table::from_csv(&std::fs::read_to_string(dir.path().join("propagator.csv")).unwrap())
            .unwrap();
    assert_eq!(table.columns, ["lambda", "ell", "re", "im", "abs"]);
    assert_eq!(table.rows.len(), 2 * 63);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    for check in summary["checks"].as_array().unwrap() {
        assert!(check["max_symmetry_deviation"].as_f64().unwrap() < 1e-12);
        assert!(check["max_column_sum_deviation"].as_f64().unwrap() < 1e-12);
    }
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pite-lab"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    };

    let (code, stdout, _) = cli(&["list-experiments"]);
    assert_eq!(code, 0);
    for kind in ExperimentKind::ALL {
        assert!(stdout.contains(kind.name()));
    }

    let good = configs_dir().join("propagator.toml");
    let out = dir.path().join("out");
    let (code, _, _) = cli(&[
        "run",
        "--config",
        good.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.join("summary.json").exists() && out.join("trajectory.csv").exists());

    let unknown = write("unknown.toml", "experiment = \"gibbs\"\ncolour = 3\n");
    assert_eq!(cli(&["validate", "--config", &unknown]).0, 2);

    let bad_m0 = write(
        "m0.toml",
        "experiment = \"double_well\"\n[double_well]\nm0 = 1.5\n",
    );
    let (code, _, stderr) = cli(&["validate", "--config", &bad_m0]);
    assert_eq!(code, 3, "{stderr}");

    let bound = write(
        "bound.toml",
        "experiment = \"two_level\"\n[two_level]\neps_gs = -2.0\n",
    );
    let (code, _, _) = cli(&["run", "--config", &bound, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 3);

    let sampled_gibbs = configs_dir().join("gibbs.toml");
    let (code, _, _) = cli(&[
        "run",
        "--config",
        sampled_gibbs.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--mode",
        "sampled",
    ]);
    assert_eq!(code, 2);
}

#[test]
fn json_configs_are_accepted() {
    let cfg = RunConfig::load(&configs_dir().join("double_well_sampled.json")).unwrap();
    assert_eq!(cfg.mode, ModeName::Sampled);
    pite_lab::validate(&cfg).unwrap();
}
