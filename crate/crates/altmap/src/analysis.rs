//! Clustering with random starts spread over a rayon thread pool.

use altmap_core::cluster::{best_of, cluster_start, tune_with, Problem};
use altmap_core::{ClusterAssignment, ClusterParams, CoocGraph, Tuned};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Runs `f` inside a pool of `threads` workers; 0 uses the global pool.
pub fn with_threads<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Best of the random starts, computed in parallel. Each start has its own
/// random stream, and ties go to the lower start index, so the result does
/// not depend on the number of threads.
pub fn cluster_problem_par(p: &Problem, params: &ClusterParams) -> ClusterAssignment {
    let runs: Vec<ClusterAssignment> = (0..params.random_starts).into_par_iter().map(|s| cluster_start(p, params, s)).collect();
    best_of(runs).expect("at least one start")
}

pub fn cluster_par(graph: &CoocGraph, params: &ClusterParams) -> Result<ClusterAssignment> {
    params.validate()?;
    let p = Problem::new(graph)?;
    Ok(cluster_problem_par(&p, params))
}

pub fn tune_par(graph: &CoocGraph, target: usize, params: &ClusterParams, range: (f64, f64), max_probes: usize) -> Result<Tuned> {
    let p = Problem::new(graph)?;
    let base = ClusterParams { resolution: range.0.max(0.0), ..params.clone() };
    base.validate()?;
    if target > p.len() {
        log::warn!("target of {target} clusters exceeds the {} nodes", p.len());
    }
    Ok(tune_with(target, range, max_probes, |gamma| {
        cluster_problem_par(&p, &ClusterParams { resolution: gamma, ..base.clone() })
    })?)
}
