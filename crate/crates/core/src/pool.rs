use std::sync::Mutex;

use thiserror::Error;

use crate::calibrate::OverheadEstimate;

/// Overrides the detected hardware concurrency.
pub const CORES_ENV: &str = "ADAPTIX_CORES";

#[derive(Debug, Error)]
pub enum PoolError {
    #[error("core count must be at least 1")]
    ZeroCores,
    #[error("{CORES_ENV}={0:?} is not a positive integer")]
    BadEnv(String),
    #[error("worker pool is not started")]
    NotStarted,
    #[error("failed to spawn worker threads: {0}")]
    Spawn(#[from] rayon::ThreadPoolBuildError),
}

/// A fixed set of worker threads that executes chunked plans.
///
/// The pool is started and warm when returned from [`WorkerPool::create`].
/// It can be shared by reference across threads; independent plans may run
/// on it concurrently.
pub struct WorkerPool {
    hardware_cores: usize,
    workers: Option<rayon::ThreadPool>,
    overhead: Mutex<Option<OverheadEstimate>>,
}

impl WorkerPool {
    /// Core count comes from `cores_override`, then `ADAPTIX_CORES`, then
    /// the detected hardware concurrency.
    pub fn create(cores_override: Option<usize>) -> Result<Self, PoolError> {
        let cores = match cores_override {
            Some(0) => return Err(PoolError::ZeroCores),
            Some(n) => n,
            None => match cores_from_env()? {
                Some(n) => n,
                None => detected_cores(),
            },
        };
        let workers = rayon::ThreadPoolBuilder::new()
            .num_threads(cores)
            .thread_name(|i| format!("adaptix-worker-{i}"))
            .build()?;
        // touch every worker once so the first measured task is not a cold start
        workers.broadcast(|_| ());
        Ok(WorkerPool {
            hardware_cores: cores,
            workers: Some(workers),
            overhead: Mutex::new(None),
        })
    }

    pub fn hardware_cores(&self) -> usize {
        self.hardware_cores
    }

    pub fn is_started(&self) -> bool {
        self.workers.is_some()
    }

    /// Stops the workers. Further planning or measurement on this pool fails
    /// with [`PoolError::NotStarted`].
    pub fn shutdown(&mut self) {
        self.workers = None;
        self.invalidate_overhead();
    }

    pub(crate) fn workers(&self) -> Result<&rayon::ThreadPool, PoolError> {
        self.workers.as_ref().ok_or(PoolError::NotStarted)
    }

    /// The last overhead measurement taken on this pool, if any.
    pub fn cached_overhead(&self) -> Option<OverheadEstimate> {
        *self.overhead.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub(crate) fn store_overhead(&self, estimate: OverheadEstimate) {
        *self.overhead.lock().unwrap_or_else(|e| e.into_inner()) = Some(estimate);
    }

    pub fn invalidate_overhead(&self) {
        *self.overhead.lock().unwrap_or_else(|e| e.into_inner()) = None;
    }
}

impl std::fmt::Debug for WorkerPool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("WorkerPool")
            .field("hardware_cores", &self.hardware_cores)
            .field("started", &self.is_started())
            .finish()
    }
}

pub fn detected_cores() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn cores_from_env() -> Result<Option<usize>, PoolError> {
    match std::env::var(CORES_ENV) {
        Ok(raw) => parse_cores(&raw).map(Some),
        Err(_) => Ok(None),
    }
}

pub(crate) fn parse_cores(raw: &str) -> Result<usize, PoolError> {
    match raw.trim().parse::<usize>() {
        Ok(0) => Err(PoolError::ZeroCores),
        Ok(n) => Ok(n),
        Err(_) => Err(PoolError::BadEnv(raw.to_string())),
    }
}
