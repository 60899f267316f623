//! Hadamard-code rates over `(E, N, M)` grids.

use crate::commands::require;
use crate::error::{CliError, CliResult};
use crate::grid::{parse_counts, parse_reals};
use crate::table::{Sink, Table};
use clap::{Args, ValueEnum};
use qrx::hadamard::{classical_capacity, EnergyConvention, RateKind, RateSweep, Splitting};
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub const COLUMNS: [&str; 6] = ["E", "N", "M", "kind", "rate", "capacity"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    Literal,
    Physical,
}

impl From<Convention> for EnergyConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Literal => EnergyConvention::Literal,
            Convention::Physical => EnergyConvention::Physical,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct HadamardArgs {
    /// Numbers of phases M.
    #[arg(long = "M", default_value = "3")]
    #[serde(rename = "M")]
    pub phases: String,
    /// Code lengths N, powers of two.
    #[arg(long = "N", default_value = "2,4,...,1024")]
    #[serde(rename = "N")]
    pub lengths: String,
    /// Mean photon numbers per mode E.
    #[arg(long = "E-grid", default_value = "log:1e-4:1:200")]
    #[serde(rename = "E-grid")]
    pub energies: String,
    /// Comma-separated rate kinds: optimal, helstrom, realistic, separable.
    #[arg(long, default_value = "helstrom")]
    pub kernel: String,
    /// Splitting steps of the Vacuum-or-Pulse stage, a positive integer or `inf`.
    #[arg(long = "J", default_value = "inf")]
    #[serde(rename = "J")]
    pub splitting: String,
    /// Energy argument of the binary stage in the realistic cascade.
    #[arg(long, value_enum, default_value = "literal")]
    pub convention: Convention,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON mirror output path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

pub fn parse_kinds(spec: &str) -> CliResult<Vec<RateKind>> {
    let kinds = spec
        .split(',')
        .map(|s| match s.trim() {
            "optimal" => Ok(RateKind::Optimal),
            "helstrom" => Ok(RateKind::Helstrom),
            "realistic" => Ok(RateKind::Realistic),
            "separable" => Ok(RateKind::Separable),
            other => Err(CliError::config(format!("unknown rate kind '{other}', expected optimal, helstrom, realistic or separable"))),
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(kinds)
}

pub fn parse_splitting(spec: &str) -> CliResult<Splitting> {
    spec.trim().parse().map_err(CliError::Config)
}

/// Validated sweep from grid strings.
pub fn sweep(energies: &str, lengths: &str, phases: &str, kinds: &[RateKind], splitting: Splitting, convention: EnergyConvention) -> CliResult<RateSweep> {
    let energies = parse_reals(energies)?;
    let lengths = parse_counts(lengths)?;
    let phases = parse_counts(phases)?;
    require(energies.iter().all(|&e| e >= 0.0), || "energies must be nonnegative".into())?;
    if let Some(n) = lengths.iter().find(|n| !n.is_power_of_two()) {
        return Err(CliError::config(format!("code length {n} is not a power of two")));
    }
    if kinds.contains(&RateKind::Realistic) {
        if let Some(m) = phases.iter().find(|&&m| m > 4) {
            return Err(CliError::config(format!("realistic detection supports M ≤ 4, got {m}")));
        }
    }
    Ok(RateSweep { energies, lengths, phases, kinds: kinds.to_vec(), splitting, convention })
}

pub fn rate_table(sweep: &RateSweep) -> CliResult<Table> {
    let rates = sweep.run().map_err(CliError::numerical)?;
    let mut table = Table::new(&COLUMNS);
    for r in rates.rows {
        table.push(vec![r.energy.into(), r.n.into(), r.m.into(), r.kind.to_string().into(), r.rate.into(), classical_capacity(r.energy).into()]);
    }
    Ok(table)
}

pub fn table(args: &HadamardArgs) -> CliResult<Table> {
    let kinds = parse_kinds(&args.kernel)?;
    let splitting = parse_splitting(&args.splitting)?;
    rate_table(&sweep(&args.energies, &args.lengths, &args.phases, &kinds, splitting, args.convention.into())?)
}

pub fn run(args: &HadamardArgs) -> CliResult<()> {
    let table = table(args)?;
    Sink { csv: args.out.as_deref(), json: args.json.as_deref() }.emit(&table)
}
