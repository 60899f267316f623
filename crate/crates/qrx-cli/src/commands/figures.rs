//! Datasets of the Hadamard-code rate plots.

use crate::commands::hadamard::{rate_table, sweep};
use crate::commands::require;
use crate::error::{CliError, CliResult};
use crate::grid::{parse_counts, parse_reals};
use crate::table::{write_file, Table};
use clap::Args;
use qrx::hadamard::{envelope, DetectionKernel, EnergyConvention, RateKind, Splitting};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct FiguresArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = "figures")]
    pub out_dir: PathBuf,
    /// Mean photon numbers per mode E.
    #[arg(long = "E-grid", default_value = "log:1e-4:1:100")]
    #[serde(rename = "E-grid")]
    pub energies: String,
    /// Code lengths of the envelopes.
    #[arg(long = "N", default_value = "2,4,...,1024")]
    #[serde(rename = "N")]
    pub lengths: String,
    /// Finite splitting steps compared with the infinite limit.
    #[arg(long = "J", default_value = "10,30,100")]
    #[serde(rename = "J")]
    pub splittings: String,
}

pub const ADVANTAGE_COLUMNS: [&str; 9] =
    ["E", "M", "J", "envelope_helstrom", "envelope_realistic", "envelope_m2", "delta_helstrom", "delta_realistic", "best_N_helstrom"];

const TILE_ENERGY: &str = "0.05";

fn emit(dir: &Path, stem: &str, table: &Table) -> CliResult<()> {
    write_file(&dir.join(format!("{stem}.csv")), &table.csv_bytes())?;
    write_file(&dir.join(format!("{stem}.json")), &table.json_bytes())?;
    println!("{}", dir.join(format!("{stem}.csv")).display());
    Ok(())
}

/// Envelope rates relative to the two-phase envelope, one row per `(E, M, J)`.
pub fn advantage_table(energies: &[f64], lengths: &[usize], phases: &[usize], splittings: &[Splitting]) -> CliResult<Table> {
    let mut points = Vec::new();
    for &e in energies {
        for &m in phases {
            for &j in splittings {
                points.push((e, m, j));
            }
        }
    }
    let env = |m, e, kernel, j| envelope(lengths, m, e, kernel, j).map_err(CliError::numerical);
    let rows = points
        .par_iter()
        .map(|&(e, m, j)| {
            let (reference, _) = env(2, e, DetectionKernel::Helstrom, Splitting::Infinite)?;
            let (hel, best_n) = env(m, e, DetectionKernel::Helstrom, j)?;
            let (real, _) = env(m, e, DetectionKernel::Realistic(EnergyConvention::Literal), j)?;
            Ok(vec![
                e.into(),
                m.into(),
                j.to_string().into(),
                hel.into(),
                real.into(),
                reference.into(),
                ((hel - reference) / reference).into(),
                ((real - reference) / reference).into(),
                best_n.into(),
            ])
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(&ADVANTAGE_COLUMNS);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

pub fn run(args: &FiguresArgs) -> CliResult<()> {
    let energies = parse_reals(&args.energies)?;
    let lengths = parse_counts(&args.lengths)?;
    require(energies.iter().all(|&e| e > 0.0), || "figure energies must be positive".into())?;
    require(lengths.iter().all(|n| n.is_power_of_two()), || "code lengths must be powers of two".into())?;
    let mut splittings: Vec<Splitting> = parse_counts(&args.splittings)?.into_iter().map(Splitting::Finite).collect();
    splittings.push(Splitting::Infinite);
    std::fs::create_dir_all(&args.out_dir).map_err(|e| CliError::io(&args.out_dir, e))?;
    let dir = args.out_dir.as_path();
    let e_grid = args.energies.as_str();
    let helstrom_lengths = lengths.iter().filter(|&&n| n >= 8).map(usize::to_string).collect::<Vec<_>>().join(",");
    require(!helstrom_lengths.is_empty(), || "code lengths must include at least one N ≥ 8".into())?;

    let optimal = sweep(e_grid, "2,16", "1,4", &[RateKind::Optimal], Splitting::Infinite, EnergyConvention::Literal)?;
    emit(dir, "optimal_rates", &rate_table(&optimal)?)?;
    let tiles = sweep(TILE_ENERGY, "1,2,...,64", "1,2,3,...,8", &[RateKind::Optimal], Splitting::Infinite, EnergyConvention::Literal)?;
    emit(dir, "optimal_rate_tiles", &rate_table(&tiles)?)?;
    let helstrom = sweep(e_grid, &helstrom_lengths, "3", &[RateKind::Helstrom, RateKind::Optimal], Splitting::Infinite, EnergyConvention::Literal)?;
    emit(dir, "helstrom_rates", &rate_table(&helstrom)?)?;
    let separable = sweep(e_grid, "1", "3", &[RateKind::Separable], Splitting::Infinite, EnergyConvention::Literal)?;
    emit(dir, "separable_rates", &rate_table(&separable)?)?;
    emit(dir, "psk_advantage", &advantage_table(&energies, &lengths, &[3, 4], &splittings)?)?;
    Ok(())
}
