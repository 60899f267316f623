//! Phase-insensitive Gaussian channels: physicality, loss-amplifier decomposition and capacity.

use crate::commands::require;
use crate::error::{CliError, CliResult};
use crate::grid::parse_reals;
use crate::table::{Sink, Table};
use clap::Args;
use qrx::gaussian::{decompose_phase_insensitive, GaussianChannel};
use qrx::info::pi_capacity;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub const COLUMNS: [&str; 9] =
    ["eta", "nbar", "physical", "single_mode_physical", "margin", "eta_loss", "kappa", "composition_error", "capacity"];

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct GaussianArgs {
    /// Transmissivities or gains η.
    #[arg(long, default_value = "0:2:9")]
    pub eta_grid: String,
    /// Environment photon numbers n̄.
    #[arg(long, default_value = "0,0.5,1")]
    pub nbar_grid: String,
    /// Input mean photon number for the capacity column.
    #[arg(long, default_value_t = 1.0)]
    pub energy: f64,
    /// Largest accepted deviation between the channel and its decomposition.
    #[arg(long, default_value_t = 1e-12)]
    pub tolerance: f64,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON mirror output path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

struct Check {
    row: Vec<crate::table::Cell>,
    error: f64,
    agree: bool,
}

fn check(eta: f64, nbar: f64, energy: f64) -> CliResult<Check> {
    let channel = GaussianChannel::phase_insensitive(eta, nbar).map_err(CliError::numerical)?;
    let (eta_loss, kappa) = decompose_phase_insensitive(eta, nbar).map_err(CliError::numerical)?;
    let composed = GaussianChannel::attenuator(eta_loss, 0.0)
        .and_then(|loss| GaussianChannel::amplifier(kappa, 0.0).and_then(|amp| loss.then(&amp)))
        .map_err(CliError::numerical)?;
    let error = (&composed.a - &channel.a).amax().max((&composed.b - &channel.b).amax());
    let physical = channel.is_physical();
    let single = channel.is_physical_single_mode().map_err(CliError::numerical)?;
    let capacity = pi_capacity(eta, nbar, energy).map_err(CliError::numerical)?;
    let row = vec![
        eta.into(),
        nbar.into(),
        physical.into(),
        single.into(),
        channel.physicality_margin().into(),
        eta_loss.into(),
        kappa.into(),
        error.into(),
        capacity.into(),
    ];
    Ok(Check { row, error, agree: physical == single })
}

pub fn run(args: &GaussianArgs) -> CliResult<()> {
    let etas = parse_reals(&args.eta_grid)?;
    let nbars = parse_reals(&args.nbar_grid)?;
    require(etas.iter().all(|&e| e >= 0.0), || "eta must be nonnegative".into())?;
    require(nbars.iter().all(|&n| n >= 0.0), || "nbar must be nonnegative".into())?;
    require(args.energy.is_finite() && args.energy >= 0.0, || "energy must be finite and nonnegative".into())?;
    require(args.tolerance > 0.0, || "tolerance must be positive".into())?;
    let points: Vec<(f64, f64)> = etas.iter().flat_map(|&e| nbars.iter().map(move |&n| (e, n))).collect();
    let checks = points.par_iter().map(|&(e, n)| check(e, n, args.energy)).collect::<CliResult<Vec<_>>>()?;
    let worst = checks.iter().map(|c| c.error).fold(0.0, f64::max);
    let agree = checks.iter().all(|c| c.agree);
    let mut table = Table::new(&COLUMNS);
    checks.into_iter().for_each(|c| table.push(c.row));
    Sink { csv: args.out.as_deref(), json: args.json.as_deref() }.emit(&table)?;
    if worst > args.tolerance {
        return Err(CliError::Numerical(format!("decomposition error {worst:e} exceeds tolerance {:e}", args.tolerance)));
    }
    if !agree {
        return Err(CliError::Numerical("physicality criteria disagree".into()));
    }
    Ok(())
}
