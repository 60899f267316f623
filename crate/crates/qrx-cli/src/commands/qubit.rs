//! Minimum-error discrimination of two to four qubit states read from CSV.

use crate::error::{CliError, CliResult};
use crate::table::{Sink, Table};
use clap::Args;
use nalgebra::Vector3;
use qrx::qubit_disc::{psucc, BlochOperator, FMethod, WeightedStateSet};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const COLUMNS: [&str; 8] = ["states", "p_succ", "q_c", "q_rx", "q_ry", "q_rz", "ordering", "method"];

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct QubitArgs {
    /// CSV of states with header `c,rx,ry,rz,p`: operator `c·1 + r·σ` with prior `p`.
    #[arg(long = "in")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON mirror output path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct StateRow {
    c: f64,
    rx: f64,
    ry: f64,
    rz: f64,
    p: f64,
}

pub fn read_states(path: &Path) -> CliResult<WeightedStateSet> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers().map_err(|e| CliError::config(format!("{}: {e}", path.display())))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["c", "rx", "ry", "rz", "p"] {
        return Err(CliError::config(format!("{}: header must be c,rx,ry,rz,p", path.display())));
    }
    let mut states = Vec::new();
    for row in reader.deserialize::<StateRow>() {
        let row = row.map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        states.push((BlochOperator::new(row.c, Vector3::new(row.rx, row.ry, row.rz)), row.p));
    }
    WeightedStateSet::new(states).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

pub fn table(set: &WeightedStateSet) -> CliResult<Table> {
    if !(2..=4).contains(&set.len()) {
        return Err(CliError::config(format!("qubit discrimination takes 2 to 4 states, got {}", set.len())));
    }
    let best = psucc(set).map_err(CliError::numerical)?;
    let ordering = best.ordering.iter().map(usize::to_string).collect::<Vec<_>>().join(" ");
    let method = match best.method {
        FMethod::ClosedForm => "closed-form",
        FMethod::Numerical => "numerical",
    };
    let mut table = Table::new(&COLUMNS);
    table.push(vec![
        set.len().into(),
        best.p_succ.into(),
        best.q.c.into(),
        best.q.r.x.into(),
        best.q.r.y.into(),
        best.q.r.z.into(),
        ordering.into(),
        method.into(),
    ]);
    Ok(table)
}

pub fn run(args: &QubitArgs) -> CliResult<()> {
    let input = args.input.as_deref().ok_or_else(|| CliError::config("qubit-disc needs --in"))?;
    let table = table(&read_states(input)?)?;
    Sink { csv: args.out.as_deref(), json: args.json.as_deref() }.emit(&table)
}
