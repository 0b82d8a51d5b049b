//! Discrete-event model of chunked execution.
//!
//! A parallel run pays `t0` once, then chunks are dispatched in order to
//! whichever core frees up first (greedy list scheduling). A single-core
//! run pays no overhead. Times are `f64` seconds.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid simulation config: {0}")]
pub struct SimError(&'static str);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub t0: f64,
    pub t_iter: f64,
    pub n_elements: usize,
    pub cores: usize,
    pub chunk_size: usize,
}

impl SimConfig {
    pub fn new(
        t0: f64,
        t_iter: f64,
        n_elements: usize,
        cores: usize,
        chunk_size: usize,
    ) -> Result<Self, SimError> {
        if !(t0 > 0.0 && t0.is_finite()) {
            return Err(SimError("t0 must be positive"));
        }
        if !(t_iter > 0.0 && t_iter.is_finite()) {
            return Err(SimError("t_iter must be positive"));
        }
        if n_elements == 0 || cores == 0 || chunk_size == 0 {
            return Err(SimError("counts must be positive"));
        }
        if chunk_size > n_elements {
            return Err(SimError("chunk size exceeds element count"));
        }
        Ok(SimConfig {
            t0,
            t_iter,
            n_elements,
            cores,
            chunk_size,
        })
    }
}

/// Makespan of one invocation under `config`.
pub fn simulate(config: &SimConfig) -> f64 {
    let n = config.n_elements;
    if config.cores <= 1 {
        return n as f64 * config.t_iter;
    }
    let mut finish = vec![0.0f64; config.cores];
    let mut lo = 0;
    while lo < n {
        let len = config.chunk_size.min(n - lo);
        // first core to become free; lowest index on ties
        let (idx, _) = finish
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |best, (i, &t)| if t < best.1 { (i, t) } else { best },
            );
        finish[idx] += len as f64 * config.t_iter;
        lo += len;
    }
    config.t0 + finish.iter().cloned().fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestConfig {
    pub cores: usize,
    pub chunk_size: usize,
    pub makespan: f64,
}

/// Chunk sizes tried by [`exhaustive_best`]: every size for small inputs,
/// otherwise one size per chunk count in `1..=max_cores * 16`.
pub fn candidate_chunk_sizes(n_elements: usize, max_cores: usize) -> Vec<usize> {
    let mut sizes: Vec<usize> = if n_elements <= 512 {
        (1..=n_elements).collect()
    } else {
        (1..=max_cores.max(1) * 16)
            .map(|k| n_elements.div_ceil(k))
            .collect()
    };
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes.dedup();
    sizes
}

/// Brute-force minimum makespan over cores in `[1, max_cores]` and the
/// candidate chunk sizes. Ties go to fewer cores, then larger chunks.
pub fn exhaustive_best(t0: f64, t_iter: f64, n_elements: usize, max_cores: usize) -> BestConfig {
    let sequential = n_elements as f64 * t_iter;
    let mut best = BestConfig {
        cores: 1,
        chunk_size: n_elements,
        makespan: sequential,
    };
    let sizes = candidate_chunk_sizes(n_elements, max_cores);
    for cores in 2..=max_cores {
        for &chunk_size in &sizes {
            let config = SimConfig {
                t0,
                t_iter,
                n_elements,
                cores,
                chunk_size,
            };
            let makespan = simulate(&config);
            if makespan < best.makespan * (1.0 - 1e-12) {
                best = BestConfig {
                    cores,
                    chunk_size,
                    makespan,
                };
            }
        }
    }
    best
}
