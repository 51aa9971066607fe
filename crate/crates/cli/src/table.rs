use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use riesz_tau::preconditioners::PreconditionerKind;
use riesz_tau::problems::{Axis, RhsKind};
use riesz_tau::{pcg, PcgOptions};

use crate::problem::{ProblemSpec, System};
use crate::CliError;

/// Layout of one reproducible table: rows are (orders, 2^k) pairs and
/// columns are preconditioners.
pub struct TableDef {
    pub groups: &'static [&'static [f64]],
    pub exponents: std::ops::RangeInclusive<u32>,
    pub methods: &'static [PreconditionerKind],
    pub default_max_size: usize,
    pub omitted: &'static [&'static str],
}

use PreconditionerKind::{Banded, Circulant, None as Plain, Tau, TauNatural};

pub fn table_def(id: u8) -> Result<TableDef, CliError> {
    Ok(match id {
        1 => TableDef {
            groups: &[&[1.2], &[1.5], &[1.8]],
            exponents: 6..=10,
            methods: &[Tau, Circulant, Banded, Plain],
            default_max_size: 1024,
            omitted: &[],
        },
        2 => TableDef {
            groups: &[&[1.1, 1.2], &[1.4, 1.5], &[1.8, 1.9], &[1.2, 1.8]],
            exponents: 6..=10,
            methods: &[Tau, Circulant, Plain],
            default_max_size: 256,
            omitted: &["multigrid-preconditioned", "algebraic multigrid"],
        },
        3 => TableDef {
            groups: &[&[1.1, 1.2, 1.3], &[1.4, 1.5, 1.6], &[1.7, 1.8, 1.9]],
            exponents: 4..=8,
            methods: &[Tau, Circulant, Plain],
            default_max_size: 64,
            omitted: &[],
        },
        4 => TableDef {
            groups: &[&[1.9, 1.5], &[1.9, 1.7], &[1.9, 1.9]],
            exponents: 6..=12,
            methods: &[Tau, TauNatural, Circulant, Plain],
            default_max_size: 512,
            omitted: &["algebraic multigrid"],
        },
        _ => return Err(CliError::Usage(format!("no table {id}; choose 1-4"))),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub method: &'static str,
    /// `None` when the cell was skipped.
    pub iterations: Option<usize>,
    pub converged: bool,
    pub wall_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Cell {
    fn csv_value(&self) -> String {
        match self.iterations {
            None => "-".into(),
            Some(_) if !self.converged => "*".into(),
            Some(k) => k.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub alpha: Vec<f64>,
    pub size: usize,
    pub cells: Vec<Cell>,
}

fn row_problem(table: u8, alpha: &[f64], size: usize) -> ProblemSpec {
    if table == 4 {
        // Matrix order equals the size label here.
        ProblemSpec::Toeplitz2 {
            alpha: [alpha[0], alpha[1]],
            n: [size, size],
            rhs: RhsKind::default(),
        }
    } else {
        // The size label counts intervals.
        ProblemSpec::Riesz {
            example: Some(alpha.len() as u8),
            axes: alpha.iter().map(|&a| Axis::unit(a, size - 1)).collect(),
        }
    }
}

fn run_row(table: u8, def: &TableDef, alpha: &[f64], size: usize, tol: f64) -> Row {
    let skipped = |method: &'static str, note: String| Cell {
        method,
        iterations: None,
        converged: false,
        wall_ms: 0.0,
        note: Some(note),
    };
    let system = match row_problem(table, alpha, size).build() {
        Ok(s) => s,
        Err(e) => {
            return Row {
                alpha: alpha.to_vec(),
                size,
                cells: def
                    .methods
                    .iter()
                    .map(|m| skipped(m.name(), e.to_string()))
                    .collect(),
            }
        }
    };
    let opts = PcgOptions {
        tol,
        max_iter: riesz_tau::krylov::TABLE_MAX_ITER,
        allow_indefinite: matches!(system, System::Toeplitz2(_)),
    };
    let cells = def
        .methods
        .iter()
        .map(|&kind| {
            let start = Instant::now();
            let result = system.preconditioner(kind).and_then(|p| {
                Ok(pcg(
                    system.operator(),
                    p.as_ref(),
                    system.rhs(),
                    None,
                    &opts,
                )?)
            });
            match result {
                Ok(rep) => Cell {
                    method: kind.name(),
                    iterations: Some(rep.iterations),
                    converged: rep.converged,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                    note: None,
                },
                Err(e) => skipped(kind.name(), e.to_string()),
            }
        })
        .collect();
    Row {
        alpha: alpha.to_vec(),
        size,
        cells,
    }
}

/// Runs every row whose size label is at most `max_size`. Rows run in
/// parallel; the output order is the table order.
pub fn run_table(table: u8, max_size: usize, tol: f64) -> Result<Vec<Row>, CliError> {
    let def = table_def(table)?;
    let jobs: Vec<(&[f64], usize)> = def
        .groups
        .iter()
        .flat_map(|g| {
            def.exponents
                .clone()
                .map(|k| 1usize << k)
                .filter(|&s| s <= max_size)
                .map(move |s| (*g, s))
        })
        .collect();
    Ok(jobs
        .par_iter()
        .map(|&(alpha, size)| run_row(table, &def, alpha, size, tol))
        .collect())
}

fn alpha_label(alpha: &[f64]) -> String {
    if alpha.len() == 1 {
        alpha[0].to_string()
    } else {
        let parts: Vec<String> = alpha.iter().map(f64::to_string).collect();
        format!("({})", parts.join(","))
    }
}

pub fn write_csv<W: std::io::Write>(rows: &[Row], table: u8, out: W) -> Result<(), CliError> {
    let def = table_def(table)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["alpha".to_string(), "size".to_string()];
    header.extend(def.methods.iter().map(|m| m.name().to_string()));
    header.extend(def.methods.iter().map(|m| format!("{}_ms", m.name())));
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![alpha_label(&row.alpha), row.size.to_string()];
        rec.extend(row.cells.iter().map(Cell::csv_value));
        rec.extend(row.cells.iter().map(|c| match c.iterations {
            Some(_) => format!("{:.2}", c.wall_ms),
            None => "-".into(),
        }));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
