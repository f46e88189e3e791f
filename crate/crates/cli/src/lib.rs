//! Command-line front end for stabilized greedy kernel interpolation:
//! one-off runs plus three reproducible experiment presets (power-decay
//! sweeps, the accuracy-versus-restriction table, and point-distribution
//! snapshots).
//!
//! The binary's contract: exit 0 on any normal run termination, exit 2 on
//! flag validation problems, exit 3 on I/O problems. Sweeps run their grid
//! cells in a worker pool capped by the `STABGREEDY_THREADS` environment
//! variable; outputs are deterministic for a given flag set regardless of
//! worker count.

pub mod opts;
pub mod output;
pub mod presets;
pub mod runner;

/// A failed invocation, carrying the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad flags or flag combinations (exit 2).
    Usage(String),
    /// Missing, unreadable, unwritable, or malformed files (exit 3).
    Io(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) | Failure::Io(msg) => f.write_str(msg),
        }
    }
}

pub type Result<T> = std::result::Result<T, Failure>;

pub(crate) fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

pub(crate) fn file_failure(e: stabgreedy::Error) -> Failure {
    Failure::Io(e.to_string())
}

/// Cap the worker pool at `STABGREEDY_THREADS` threads if the variable is
/// set to a positive integer. Must run before any pool use; ignored if a
/// global pool already exists.
pub fn configure_threads() {
    if let Ok(value) = std::env::var("STABGREEDY_THREADS") {
        if let Ok(threads) = value.trim().parse::<usize>() {
            if threads > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
        }
    }
}
