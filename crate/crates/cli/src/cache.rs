//! On-disk ground-state cache keyed by a hash of the solve inputs.

use std::path::{Path, PathBuf};

use nls_virial_core::io::{read_ground_state, write_ground_state};
use nls_virial_core::{solve_ground_state, Grid, GroundState, ProblemParams, SolverOptions};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Failure;

pub const CACHE_ENV: &str = "NLS_VIRIAL_CACHE";

pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("nls-virial-cache"))
}

#[derive(Debug, Clone, Serialize)]
pub struct CacheInfo {
    pub path: PathBuf,
    pub hit: bool,
}

pub fn key(params: &ProblemParams<f64>, grid: &Grid<f64>, opts: &SolverOptions<f64>) -> String {
    let desc = format!(
        "N={};p={:?};L={:?};points={};normalization={:?};tolerance={:?};step_tolerance={:?};max_iterations={};min_points_across={:?}",
        params.dim,
        params.p,
        grid.half_len(),
        grid.points(),
        opts.normalization,
        opts.tolerance,
        opts.step_tolerance,
        opts.max_iterations,
        opts.min_points_across,
    );
    format!("{:x}", Sha256::digest(desc.as_bytes()))
}

fn matches(q: &GroundState<f64>, params: &ProblemParams<f64>, grid: &Grid<f64>) -> bool {
    q.params() == params && q.grid() == grid
}

/// Loads the ground state from `dir` or solves and stores it. A corrupt or
/// mismatched entry is replaced.
pub fn ground_state(
    dir: &Path,
    params: &ProblemParams<f64>,
    grid: &Grid<f64>,
    opts: &SolverOptions<f64>,
) -> Result<(GroundState<f64>, CacheInfo), Failure> {
    let path = dir.join(format!("gs-{}.bin", key(params, grid, opts)));
    if path.is_file() {
        if let Ok(q) = read_ground_state::<f64>(&path) {
            if matches(&q, params, grid) {
                return Ok((q, CacheInfo { path, hit: true }));
            }
        }
    }
    let q = solve_ground_state(*params, grid.clone(), opts)?;
    std::fs::create_dir_all(dir).map_err(|e| Failure::io(&dir.display().to_string(), e))?;
    // write beside the target and rename so concurrent jobs never see a partial file
    let tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Failure::io("cache", e))?;
    write_ground_state(&q, tmp.path())?;
    tmp.persist(&path).map_err(|e| Failure::io("cache", e.error))?;
    Ok((q, CacheInfo { path, hit: false }))
}
