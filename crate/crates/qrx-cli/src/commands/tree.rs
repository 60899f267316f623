//! Binary-tree decomposition round trips for POVMs read from JSON or sampled from a seed.

use crate::commands::require;
use crate::error::{CliError, CliResult};
use crate::table::{Sink, Table};
use clap::Args;
use qrx::linalg::{max_abs_diff, pinv_sqrt_psd, CMatrix, C64};
use qrx::povm::{binary_tree_decompose, reconstruct, Povm};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const COLUMNS: [&str; 8] =
    ["index", "dim", "outcomes", "depth", "padded_outcomes", "max_reconstruction_error", "weak_completeness_defect", "gray_zone_warnings"];

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub struct TreeArgs {
    /// POVM JSON: a list of matrices, each a list of rows of `[re, im]` pairs, or `{"elements": ..., "labels": ...}`.
    #[arg(long = "in", conflicts_with = "random")]
    #[serde(rename = "in")]
    pub input: Option<PathBuf>,
    /// Number of random POVMs to sample instead of reading a file.
    #[arg(long)]
    pub random: Option<usize>,
    /// Largest Hilbert-space dimension of sampled POVMs.
    #[arg(long, default_value_t = 6)]
    pub max_dim: usize,
    /// Largest number of outcomes of sampled POVMs.
    #[arg(long, default_value_t = 8)]
    pub max_outcomes: usize,
    /// Seed for sampling; required with --random.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Largest accepted reconstruction error.
    #[arg(long, default_value_t = 1e-9)]
    pub tolerance: f64,
    /// CSV output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON mirror output path.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum PovmFile {
    Bare(Vec<RawMatrix>),
    Labeled {
        elements: Vec<RawMatrix>,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
}

fn matrix(raw: &RawMatrix, index: usize) -> CliResult<CMatrix> {
    let d = raw.len();
    if d == 0 || raw.iter().any(|row| row.len() != d) {
        return Err(CliError::config(format!("element {index} is not a nonempty square matrix")));
    }
    Ok(CMatrix::from_fn(d, d, |i, j| C64::new(raw[i][j][0], raw[i][j][1])))
}

pub fn parse_povm(text: &str) -> CliResult<Povm> {
    let file: PovmFile = serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid POVM JSON: {e}")))?;
    let (raw, labels) = match file {
        PovmFile::Bare(elements) => (elements, None),
        PovmFile::Labeled { elements, labels } => (elements, labels),
    };
    let elements = raw.iter().enumerate().map(|(k, m)| matrix(m, k)).collect::<CliResult<Vec<_>>>()?;
    let povm = match labels {
        Some(labels) => Povm::with_labels(elements, labels),
        None => Povm::new(elements),
    };
    povm.map_err(|e| CliError::config(format!("invalid POVM: {e}")))
}

/// JSON form accepted by [`parse_povm`].
pub fn povm_json(povm: &Povm) -> serde_json::Value {
    let elements: Vec<RawMatrix> = povm
        .elements()
        .iter()
        .map(|e| (0..e.nrows()).map(|i| (0..e.ncols()).map(|j| [e[(i, j)].re, e[(i, j)].im]).collect()).collect())
        .collect();
    serde_json::json!({ "elements": elements, "labels": povm.labels() })
}

fn read_povm(path: &Path) -> CliResult<Povm> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_povm(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

/// Random POVM with `m` elements of random rank, normalized by `S^{-1/2} · S^{-1/2}`.
pub fn random_povm(rng: &mut ChaCha8Rng, d: usize, m: usize) -> Povm {
    let raw: Vec<CMatrix> = (0..m)
        .map(|k| {
            let rank = if k == 0 { d } else { rng.random_range(1..=d) };
            let g = random_matrix(rng, d, rank);
            &g * g.adjoint()
        })
        .collect();
    let total = raw.iter().fold(CMatrix::zeros(d, d), |acc, e| acc + e);
    let w = pinv_sqrt_psd(&total, 1e-14);
    Povm::new(raw.iter().map(|e| &w * e * &w).collect()).expect("normalized random POVM")
}

pub fn sample(count: usize, max_dim: usize, max_outcomes: usize, seed: u64) -> Vec<Povm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let d = rng.random_range(1..=max_dim);
            let m = rng.random_range(2..=max_outcomes);
            random_povm(&mut rng, d, m)
        })
        .collect()
}

/// Largest elementwise deviation of the rebuilt POVM, padding leaves compared with zero.
pub fn round_trip_row(index: usize, povm: &Povm) -> CliResult<(Vec<crate::table::Cell>, f64)> {
    let tree = binary_tree_decompose(povm).map_err(CliError::numerical)?;
    let rebuilt = reconstruct(&tree);
    let zero = CMatrix::zeros(povm.dim(), povm.dim());
    let error = rebuilt
        .elements()
        .iter()
        .enumerate()
        .map(|(k, e)| max_abs_diff(e, povm.elements().get(k).unwrap_or(&zero)))
        .fold(0.0, f64::max);
    let row = vec![
        index.into(),
        povm.dim().into(),
        povm.len().into(),
        tree.depth().into(),
        tree.padded_outcomes().into(),
        error.into(),
        tree.weak_completeness_defect().into(),
        tree.warnings().len().into(),
    ];
    Ok((row, error))
}

pub fn run(args: &TreeArgs) -> CliResult<()> {
    require(args.tolerance > 0.0, || "tolerance must be positive".into())?;
    let povms = match (&args.input, args.random) {
        (Some(path), None) => vec![read_povm(path)?],
        (None, Some(count)) => {
            let seed = args.seed.ok_or_else(|| CliError::config("--random needs an explicit --seed"))?;
            require(count >= 1, || "--random needs at least one POVM".into())?;
            require(args.max_dim >= 1 && args.max_outcomes >= 2, || "sampling needs max-dim ≥ 1 and max-outcomes ≥ 2".into())?;
            sample(count, args.max_dim, args.max_outcomes, seed)
        }
        (Some(_), Some(_)) => return Err(CliError::config("--in and --random are exclusive")),
        (None, None) => return Err(CliError::config("tree-decompose needs --in or --random")),
    };
    let rows = povms.par_iter().enumerate().map(|(i, p)| round_trip_row(i, p)).collect::<CliResult<Vec<_>>>()?;
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut table = Table::new(&COLUMNS);
    rows.into_iter().for_each(|r| table.push(r.0));
    Sink { csv: args.out.as_deref(), json: args.json.as_deref() }.emit(&table)?;
    if worst > args.tolerance {
        return Err(CliError::Numerical(format!("reconstruction error {worst:e} exceeds tolerance {:e}", args.tolerance)));
    }
    Ok(())
}
