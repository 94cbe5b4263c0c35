//! CSV tables. Reals are written in scientific notation with 17
//! significant digits, which parses back to the same `f64`.

use std::fmt::Write as _;
use std::path::Path;

use pite_core::Trajectory;

use crate::LabError;

/// Number of eigenstate weight columns in grid trajectories.
pub const WEIGHT_COLUMNS: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            for (i, cell) in row.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                match cell {
                    Cell::Int(v) => write!(out, "{v}"),
                    Cell::Real(v) => write!(out, "{v:.16e}"),
                }
                .expect("writing to a String");
            }
            out.push('\n');
        }
        out
    }

    /// Reads a table written by [`to_csv`](Self::to_csv). Cells without a
    /// decimal point or exponent come back as integers.
    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let header = lines.next().ok_or("missing header")?;
        let mut table = Table::new(header.split(','));
        for (n, line) in lines.enumerate() {
            let row = line
                .split(',')
                .map(|s| {
                    if s.contains(['.', 'e', 'E', 'n', 'N']) {
                        s.parse::<f64>().map(Cell::Real).map_err(|e| e.to_string())
                    } else {
                        s.parse::<i64>().map(Cell::Int).map_err(|e| e.to_string())
                    }
                })
                .collect::<Result<Vec<Cell>, String>>()
                .map_err(|e| format!("row {}: {e}", n + 1))?;
            if row.len() != table.columns.len() {
                return Err(format!("row {} has {} cells", n + 1, row.len()));
            }
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn column(&self, name: &str) -> Option<Vec<Cell>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

pub fn write_csv(table: &Table, path: &Path) -> Result<(), LabError> {
    std::fs::write(path, table.to_csv()).map_err(|e| LabError::io(path, e))
}

/// Columns of a grid trajectory: `k, p, P, succeeded, energy, fidelity_gs,
/// w0 .. w5`.
pub fn trajectory_columns() -> Vec<String> {
    let fixed = ["k", "p", "P", "succeeded", "energy", "fidelity_gs"];
    fixed
        .iter()
        .map(|s| s.to_string())
        .chain((0..WEIGHT_COLUMNS).map(|i| format!("w{i}")))
        .collect()
}

/// One row per recorded step. Weight and energy columns need a trajectory
/// run with an oracle Hamiltonian; missing values are written as NaN.
pub fn trajectory_table(traj: &Trajectory) -> Table {
    let mut table = Table::new(trajectory_columns());
    for s in &traj.steps {
        let weight = |i: usize| {
            s.weights
                .as_ref()
                .and_then(|w| w.get(i).copied())
                .unwrap_or(f64::NAN)
        };
        let mut row: Vec<Cell> = vec![
            s.k.into(),
            s.success_probability.into(),
            s.survival_probability.into(),
            Cell::Int(s.succeeded as i64),
            s.energy.unwrap_or(f64::NAN).into(),
            weight(0).into(),
        ];
        row.extend((0..WEIGHT_COLUMNS).map(|i| Cell::Real(weight(i))));
        table.push(row);
    }
    table
}

pub fn emit_csv(traj: &Trajectory, path: &Path) -> Result<(), LabError> {
    write_csv(&trajectory_table(traj), path)
}
