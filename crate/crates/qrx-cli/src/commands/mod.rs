//! Subcommand implementations.

pub mod bpsk;
pub mod figures;
pub mod gaussian;
pub mod hadamard;
pub mod qubit;
pub mod tree;

use crate::error::{CliError, CliResult};

pub(crate) fn require(cond: bool, message: impl FnOnce() -> String) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::config(message()))
    }
}
