//! Configuration-driven experiments on top of `polariton_core`: dispersion
//! tables, time evolution (single runs and pump-wavevector sweeps),
//! plane-wave branches, linear-response maps and a self-test.
//!
//! Exit codes: 0 success, 1 self-test failure, 2 configuration error,
//! 3 runtime fault (watchdog, non-finite field, I/O).

pub mod checks;
pub mod commands;
pub mod config;
pub mod raster;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("runtime fault: {0}")]
    Runtime(#[from] polariton_core::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) | CliError::Io(_) => 3,
        }
    }
}
