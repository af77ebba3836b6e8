pub mod curve;
pub mod example;
pub mod experiment;
pub mod selftest;
pub mod witness;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::GlobalArgs;

/// Maps `f` over `items` on a pool of `jobs` threads, keeping input order.
pub fn par_map<T: Sync, R: Send>(
    jobs: Option<usize>,
    items: &[T],
    f: impl Fn(usize, &T) -> R + Sync,
) -> Result<Vec<R>, CliError> {
    if jobs == Some(0) {
        return Err(CliError::Input("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Input(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().enumerate().map(|(i, t)| f(i, t)).collect()))
}

/// Manifest `config` entry: global flags plus the subcommand's own.
pub fn config_value(name: &str, g: &GlobalArgs, args: &impl Serialize) -> Value {
    json!({ "subcommand": name, "global": g, "args": args })
}
