//! Runtime measurements feeding the model: the fixed cost of one parallel
//! invocation (`T0`) and the cost of one loop-body iteration.

use std::hint::black_box;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::body::LoopBody;
use crate::pool::{PoolError, WorkerPool};

/// When set, replaces the measured per-invocation overhead (nanoseconds).
pub const T0_ENV: &str = "ADAPTIX_T0_NS";

/// Prefix length sampled by default when timing a loop body.
pub const DEFAULT_SAMPLE_BUDGET: usize = 16;

/// Empty tasks timed when a pool's overhead is first needed.
pub const DEFAULT_OVERHEAD_REPETITIONS: usize = 100;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error("{0} must be at least 1")]
    Zero(&'static str),
    #[error(
        "insufficient clock resolution: median {median:?} below timer resolution {resolution:?}"
    )]
    InsufficientResolution {
        median: Duration,
        resolution: Duration,
    },
    #[error("{T0_ENV}={0:?} is not a positive integer")]
    BadEnv(String),
}

/// Measured cost of submitting an empty task and waiting for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverheadEstimate {
    pub t0: Duration,
    pub samples: usize,
    /// Inter-quartile range of the samples.
    pub dispersion: Duration,
}

impl OverheadEstimate {
    /// A fixed overhead, bypassing measurement.
    pub fn fixed(t0: Duration) -> Self {
        OverheadEstimate {
            t0: t0.max(Duration::from_nanos(1)),
            samples: 1,
            dispersion: Duration::ZERO,
        }
    }

    pub fn t0_secs(&self) -> f64 {
        self.t0.as_secs_f64()
    }

    /// Reads `ADAPTIX_T0_NS`. `Ok(None)` when unset.
    pub fn from_env() -> Result<Option<Self>, CalibrationError> {
        match std::env::var(T0_ENV) {
            Ok(raw) => parse_t0_ns(&raw).map(Some),
            Err(_) => Ok(None),
        }
    }
}

pub(crate) fn parse_t0_ns(raw: &str) -> Result<OverheadEstimate, CalibrationError> {
    match raw.trim().parse::<u64>() {
        Ok(ns) if ns > 0 => Ok(OverheadEstimate::fixed(Duration::from_nanos(ns))),
        _ => Err(CalibrationError::BadEnv(raw.to_string())),
    }
}

/// Time per loop-body iteration, sampled on a prefix of the index space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationEstimate {
    /// Seconds per element. Kept as a real: cheap bodies cost well under 1ns.
    pub t_iter: f64,
    pub sampled_iterations: usize,
    pub measured_once: bool,
    /// The timed block never rose above 10x the clock resolution.
    pub low_confidence: bool,
}

impl IterationEstimate {
    /// An estimate supplied by the caller instead of measured.
    pub fn known(t_iter: f64) -> Self {
        IterationEstimate {
            t_iter: t_iter.max(0.0),
            sampled_iterations: 1,
            measured_once: false,
            low_confidence: false,
        }
    }
}

/// Smallest non-zero step observed between consecutive monotonic clock reads.
pub fn clock_resolution() -> Duration {
    static RESOLUTION: OnceLock<Duration> = OnceLock::new();
    *RESOLUTION.get_or_init(|| {
        let mut best = Duration::MAX;
        for _ in 0..200 {
            let a = Instant::now();
            let mut b = Instant::now();
            while b == a {
                b = Instant::now();
            }
            best = best.min(b - a);
        }
        best
    })
}

/// Times `repetitions` empty tasks, one in flight at a time, and keeps the
/// median submit-to-completion latency as `T0`. The result is cached on
/// the pool.
pub fn measure_overhead(
    pool: &WorkerPool,
    repetitions: usize,
) -> Result<OverheadEstimate, CalibrationError> {
    if repetitions == 0 {
        return Err(CalibrationError::Zero("repetitions"));
    }
    let workers = pool.workers()?;
    let mut samples: Vec<Duration> = (0..repetitions)
        .map(|_| {
            let start = Instant::now();
            workers.install(|| black_box(()));
            start.elapsed()
        })
        .collect();
    samples.sort_unstable();

    let median = quantile(&samples, 0.5);
    let resolution = clock_resolution();
    if median < resolution {
        return Err(CalibrationError::InsufficientResolution { median, resolution });
    }
    let estimate = OverheadEstimate {
        t0: median.max(Duration::from_nanos(1)),
        samples: repetitions,
        dispersion: quantile(&samples, 0.75) - quantile(&samples, 0.25),
    };
    pool.store_overhead(estimate);
    Ok(estimate)
}

/// The overhead the scheduler should plan with: `ADAPTIX_T0_NS` if set,
/// otherwise the pool's cached measurement, otherwise a fresh one.
pub fn pool_overhead(pool: &WorkerPool) -> Result<OverheadEstimate, CalibrationError> {
    if let Some(fixed) = OverheadEstimate::from_env()? {
        return Ok(fixed);
    }
    match pool.cached_overhead() {
        Some(cached) => Ok(cached),
        None => measure_overhead(pool, DEFAULT_OVERHEAD_REPETITIONS),
    }
}

// nearest-rank on sorted input; median of an even count averages the pair
fn quantile(sorted: &[Duration], q: f64) -> Duration {
    let n = sorted.len();
    if q == 0.5 && n.is_multiple_of(2) {
        return (sorted[n / 2 - 1] + sorted[n / 2]) / 2;
    }
    let idx = ((n - 1) as f64 * q).round() as usize;
    sorted[idx]
}

/// Times the loop body on a prefix `[0, k)` with `k = min(budget, count)`.
///
/// If the block is shorter than 10x the clock resolution the prefix is
/// extended by doubling, up to `count`. Extensions run only the new indices,
/// so every sampled index executes exactly once and callers must skip
/// `[0, sampled_iterations)` afterwards.
pub fn measure_iteration<B: LoopBody + ?Sized>(
    body: &B,
    count: usize,
    budget: usize,
) -> Result<IterationEstimate, CalibrationError> {
    if count == 0 {
        return Err(CalibrationError::Zero("count"));
    }
    if budget == 0 {
        return Err(CalibrationError::Zero("budget"));
    }
    let floor = clock_resolution() * 10;
    let mut done = 0;
    let mut target = budget.min(count);
    let mut elapsed = Duration::ZERO;
    loop {
        let start = Instant::now();
        body.run(done..target);
        elapsed += start.elapsed();
        done = target;
        if elapsed >= floor || done == count {
            break;
        }
        target = done.saturating_mul(2).min(count);
    }
    Ok(IterationEstimate {
        t_iter: elapsed.as_secs_f64() / done as f64,
        sampled_iterations: done,
        measured_once: true,
        low_confidence: elapsed < floor,
    })
}

/// `T1 = t_iter * count`, in seconds.
pub fn total_time(estimate: &IterationEstimate, count: usize) -> f64 {
    estimate.t_iter * count as f64
}
