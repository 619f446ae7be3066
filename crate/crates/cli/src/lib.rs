//! File formats, analysis orchestration and subcommands behind the `sepkit` binary.

pub mod analysis;
pub mod certificate;
pub mod commands;
pub mod ensemble;
pub mod report;
pub mod state;

/// Builds the global thread pool from `SEPKIT_THREADS` (absent or 0 = all cores).
pub fn init_threads() -> anyhow::Result<()> {
    let threads = match std::env::var("SEPKIT_THREADS") {
        Ok(v) => v.trim().parse::<usize>().map_err(|_| anyhow::anyhow!("SEPKIT_THREADS must be a non-negative integer, got {v:?}"))?,
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}
