//! Binary coherent-state receivers over an amplitude grid.

use crate::commands::require;
use crate::error::{CliError, CliResult};
use crate::grid::parse_reals;
use crate::table::{Cell, Sink, Table};
use clap::{Args, ValueEnum};
use qrx::receivers::{
    dolinar_multistep, gain_percent, helstrom_bpsk, homodyne_perr, nhpa_optimize, optimize_base, optimized_kennedy, BaseReceiver,
    ReceiverOptimum,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

pub const COLUMNS: [&str; 9] = ["alpha_sq", "p_succ", "p_helstrom", "gap", "gain_over_kennedy_pct", "beta", "gain", "cutoff", "squeezing"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReceiverKind {
    Homodyne,
    Kennedy,
    Nhpa,
    Dephaser,
    PartialDephaser,
    Cavity,
    Ts,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct BpskArgs {
    /// Receiver family.
    #[arg(long, value_enum, default_value = "nhpa")]
    pub receiver: ReceiverKind,
    /// Grid of real coherent amplitudes α.
    #[arg(long, default_value = "0.05:1.0:40")]
    pub alpha_grid: String,
    /// Adaptive measurement steps on copies |±α/√N⟩; 1 optimizes a single measurement.
    #[arg(long, default_value_t = 1)]
    pub steps: usize,
    /// Photon cutoff n of the amplifier, dephaser or squeezer; NHPA searches 1 to 3 when absent, others use 2.
    #[arg(long)]
    pub cutoff: Option<u32>,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON mirror output path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

const DEFAULT_CUTOFF: u32 = 2;

fn base(kind: ReceiverKind, cutoff: Option<u32>) -> Option<BaseReceiver> {
    let n = cutoff.unwrap_or(DEFAULT_CUTOFF);
    match kind {
        ReceiverKind::Homodyne => None,
        ReceiverKind::Kennedy => Some(BaseReceiver::Kennedy),
        ReceiverKind::Nhpa => Some(BaseReceiver::Nhpa { cutoff: n }),
        ReceiverKind::Dephaser => Some(BaseReceiver::Dephaser { cutoff: n }),
        ReceiverKind::PartialDephaser => Some(BaseReceiver::PartialDephaser { cutoff: n }),
        ReceiverKind::Cavity => Some(BaseReceiver::Cavity),
        ReceiverKind::Ts => Some(BaseReceiver::Ts { cutoff: n }),
    }
}

fn point(args: &BpskArgs, alpha: f64) -> CliResult<Vec<Cell>> {
    let p_helstrom = 1.0 - helstrom_bpsk(alpha, 0.5);
    let (p_succ, params): (f64, Option<ReceiverOptimum>) = match (args.receiver, args.steps) {
        (ReceiverKind::Homodyne, _) => (1.0 - homodyne_perr(alpha), None),
        (ReceiverKind::Nhpa, 1) if args.cutoff.is_none() => {
            let opt = nhpa_optimize(alpha).map_err(CliError::numerical)?;
            (opt.psucc, Some(opt))
        }
        (kind, 1) => {
            let opt = optimize_base(alpha, base(kind, args.cutoff).expect("non-homodyne")).map_err(CliError::numerical)?;
            (opt.psucc, Some(opt))
        }
        (kind, steps) => (dolinar_multistep(alpha, steps, base(kind, args.cutoff).expect("non-homodyne")).map_err(CliError::numerical)?, None),
    };
    let kennedy = optimized_kennedy(alpha).psucc;
    let mut row: Vec<Cell> = vec![
        (alpha * alpha).into(),
        p_succ.into(),
        p_helstrom.into(),
        (p_helstrom - p_succ).into(),
        gain_percent(p_succ, kennedy).into(),
    ];
    match params {
        Some(o) => row.extend([o.beta.into(), o.gain.into(), o.cutoff.into(), o.squeezing.into()]),
        None => row.extend(std::iter::repeat_n(Cell::Empty, 4)),
    }
    Ok(row)
}

pub fn table(args: &BpskArgs) -> CliResult<Table> {
    let alphas = parse_reals(&args.alpha_grid)?;
    require(alphas.iter().all(|&a| a >= 0.0), || format!("alpha grid '{}' has negative amplitudes", args.alpha_grid))?;
    require(args.steps >= 1, || "steps must be at least 1".into())?;
    require(args.receiver != ReceiverKind::Homodyne || args.steps == 1, || "homodyne detection has no adaptive steps".into())?;
    require(args.cutoff != Some(0), || "cutoff must be at least 1".into())?;
    let rows = alphas.par_iter().map(|&a| point(args, a)).collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(&COLUMNS);
    rows.into_iter().for_each(|r| table.push(r));
    Ok(table)
}

pub fn run(args: &BpskArgs) -> CliResult<()> {
    let table = table(args)?;
    Sink { csv: args.out.as_deref(), json: args.json.as_deref() }.emit(&table)
}
