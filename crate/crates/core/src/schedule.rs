//! Turning a policy's answers into a chunk list, and running it.

use std::any::Any;
use std::ops::Range;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::body::LoopBody;
use crate::calibrate::{CalibrationError, IterationEstimate};
use crate::policy::ExecutionPolicy;
use crate::pool::{PoolError, WorkerPool};

#[derive(Debug, Error)]
pub enum ScheduleError {
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error("policy {policy} broke the {hook} contract: returned {value}, allowed [1, {max}]")]
    Contract {
        policy: &'static str,
        hook: &'static str,
        value: usize,
        max: usize,
    },
}

/// Resolved cores and chunking for one invocation. Chunks are half-open,
/// ascending, disjoint and cover `[0, count)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulePlan {
    pub cores: usize,
    pub chunk_size: usize,
    pub chunks: Vec<Range<usize>>,
    pub sequential: bool,
}

impl SchedulePlan {
    pub fn sequential(count: usize) -> Self {
        SchedulePlan {
            cores: 1,
            chunk_size: count.max(1),
            #[allow(clippy::single_range_in_vec_init)]
            chunks: if count == 0 {
                Vec::new()
            } else {
                vec![0..count]
            },
            sequential: true,
        }
    }

    /// Splits `[0, count)` into runs of `chunk_size`; the last may be short.
    pub fn chunked(cores: usize, chunk_size: usize, count: usize) -> Self {
        if cores <= 1 {
            return Self::sequential(count);
        }
        let chunk_size = chunk_size.max(1);
        let chunks = (0..count)
            .step_by(chunk_size)
            .map(|lo| lo..(lo + chunk_size).min(count))
            .collect();
        SchedulePlan {
            cores,
            chunk_size,
            chunks,
            sequential: false,
        }
    }

    pub fn count(&self) -> usize {
        self.chunks.last().map_or(0, |c| c.end)
    }

    pub fn chunk_count(&self) -> usize {
        self.chunks.len()
    }
}

/// A plan plus the prefix the policy already executed while measuring.
/// The plan's ranges are relative to `prefix`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedLoop {
    pub prefix: usize,
    pub estimate: Option<IterationEstimate>,
    pub plan: SchedulePlan,
}

/// Asks `policy` for cores, then chunk size, and builds the chunk list.
/// Pure in its arguments: no measurement, no pool access.
pub fn resolve(
    policy: &dyn ExecutionPolicy,
    hardware_cores: usize,
    iteration: Option<&IterationEstimate>,
    count: usize,
) -> Result<SchedulePlan, ScheduleError> {
    if count == 0 {
        return Ok(SchedulePlan::sequential(0));
    }
    let cores = policy.processing_units_count(hardware_cores, iteration, count);
    if cores == 0 || cores > hardware_cores {
        return Err(ScheduleError::Contract {
            policy: policy.name(),
            hook: "processing_units_count",
            value: cores,
            max: hardware_cores,
        });
    }
    let chunk_size = policy.get_chunk_size(hardware_cores, iteration, cores, count);
    if chunk_size == 0 || chunk_size > count {
        return Err(ScheduleError::Contract {
            policy: policy.name(),
            hook: "get_chunk_size",
            value: chunk_size,
            max: count,
        });
    }
    Ok(SchedulePlan::chunked(cores, chunk_size, count))
}

/// Runs the customization points in order: measure, cores, chunk size.
pub fn plan(
    policy: &mut dyn ExecutionPolicy,
    pool: &WorkerPool,
    body: &dyn LoopBody,
    count: usize,
) -> Result<PlannedLoop, ScheduleError> {
    pool.workers()?;
    let measured = policy.measure_iteration(body, count)?;
    let prefix = measured.executed_prefix.min(count);
    let plan = resolve(
        policy,
        pool.hardware_cores(),
        measured.estimate.as_ref(),
        count - prefix,
    )?;
    Ok(PlannedLoop {
        prefix,
        estimate: measured.estimate,
        plan,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionReport {
    pub wall_time: Duration,
    /// Workers that took part (1 for sequential plans).
    pub cores: usize,
    pub chunk_count: usize,
    pub completed_chunks: usize,
}

impl ExecutionReport {
    pub fn is_complete(&self) -> bool {
        self.completed_chunks == self.chunk_count
    }
}

#[derive(Debug, Error)]
pub enum ExecError {
    #[error(transparent)]
    Pool(#[from] PoolError),
    #[error("loop body panicked in chunk {chunk} (indices {range:?}): {message}")]
    BodyPanicked {
        chunk: usize,
        range: Range<usize>,
        message: String,
        report: ExecutionReport,
    },
}

struct Failure {
    chunk: usize,
    message: String,
}

fn panic_message(payload: Box<dyn Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "non-string panic payload".to_string()
    }
}

/// Runs every chunk of `plan` once. Parallel plans put one task per
/// participating worker on the pool; workers pull chunk indices from a
/// shared counter. A panicking chunk stops the rest from starting.
pub fn execute(
    plan: &SchedulePlan,
    pool: &WorkerPool,
    body: &dyn LoopBody,
) -> Result<ExecutionReport, ExecError> {
    let start = Instant::now();
    let chunk_count = plan.chunks.len();
    let completed = AtomicUsize::new(0);
    let failure: Mutex<Option<Failure>> = Mutex::new(None);

    let run_chunk = |i: usize| -> bool {
        match catch_unwind(AssertUnwindSafe(|| body.run(plan.chunks[i].clone()))) {
            Ok(()) => {
                completed.fetch_add(1, Ordering::Relaxed);
                true
            }
            Err(payload) => {
                let mut slot = failure.lock().unwrap_or_else(|e| e.into_inner());
                // keep the lowest failing chunk for a stable report
                if slot.as_ref().is_none_or(|f| i < f.chunk) {
                    *slot = Some(Failure {
                        chunk: i,
                        message: panic_message(payload),
                    });
                }
                false
            }
        }
    };

    let cores = if plan.sequential || plan.cores <= 1 || chunk_count <= 1 {
        for i in 0..chunk_count {
            if !run_chunk(i) {
                break;
            }
        }
        1
    } else {
        let workers = pool.workers()?;
        let participants = plan.cores.min(chunk_count);
        let next = AtomicUsize::new(0);
        let cancelled = AtomicBool::new(false);
        workers.scope(|s| {
            for _ in 0..participants {
                s.spawn(|_| {
                    while !cancelled.load(Ordering::Relaxed) {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        if i >= chunk_count {
                            break;
                        }
                        if !run_chunk(i) {
                            cancelled.store(true, Ordering::Relaxed);
                        }
                    }
                });
            }
        });
        participants
    };

    let report = ExecutionReport {
        wall_time: start.elapsed(),
        cores,
        chunk_count,
        completed_chunks: completed.into_inner(),
    };
    match failure.into_inner().unwrap_or_else(|e| e.into_inner()) {
        None => Ok(report),
        Some(f) => Err(ExecError::BodyPanicked {
            range: plan.chunks[f.chunk].clone(),
            chunk: f.chunk,
            message: f.message,
            report,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibrate::OverheadEstimate;
    use crate::policy::{AdaptivePolicy, DefaultPolicy, StaticPolicy};
    use std::sync::atomic::AtomicU64;

    fn adaptive_us(t0_us: u64) -> AdaptivePolicy {
        AdaptivePolicy::new(OverheadEstimate::fixed(Duration::from_micros(t0_us)))
    }

    #[test]
    fn adaptive_plan_for_ten_cores_of_work() {
        let est = IterationEstimate::known(1e-6);
        let plan = resolve(&adaptive_us(1), 40, Some(&est), 190).unwrap();
        assert_eq!(plan.cores, 10);
        assert_eq!(plan.chunk_size, 3);
        assert_eq!(plan.chunk_count(), 64);
        assert!(!plan.sequential);
        assert_eq!(plan.chunks.last().unwrap(), &(189..190));
    }

    #[test]
    fn adaptive_plan_below_two_cores_is_sequential() {
        let est = IterationEstimate::known(1e-6);
        let plan = resolve(&adaptive_us(1), 40, Some(&est), 19).unwrap();
        assert!(plan.sequential);
        assert_eq!(plan.cores, 1);
        assert_eq!(plan.chunks, vec![0..19]);
    }

    #[test]
    fn adaptive_clamps_to_hardware() {
        let est = IterationEstimate::known(1e-6);
        let plan = resolve(&adaptive_us(1), 4, Some(&est), 1_000_000).unwrap();
        assert_eq!(plan.cores, 4);
        assert_eq!(plan.chunk_size, 31_250);
        assert_eq!(plan.chunk_count(), 32);
    }

    #[test]
    fn default_policy_splits_evenly() {
        let plan = resolve(&DefaultPolicy, 4, None, 100).unwrap();
        assert_eq!(plan.cores, 4);
        assert_eq!(plan.chunks, vec![0..25, 25..50, 50..75, 75..100]);
    }

    #[test]
    fn contract_violations_name_the_hook() {
        let err = resolve(&StaticPolicy::new(16, 4), 8, None, 100).unwrap_err();
        assert!(matches!(
            err,
            ScheduleError::Contract {
                hook: "processing_units_count",
                value: 16,
                ..
            }
        ));
        assert!(err.to_string().contains("processing_units_count"));

        struct Oversized;
        impl ExecutionPolicy for Oversized {
            fn name(&self) -> &'static str {
                "oversized"
            }
            fn measure_iteration(
                &mut self,
                _: &dyn LoopBody,
                _: usize,
            ) -> Result<crate::policy::Measurement, CalibrationError> {
                Ok(crate::policy::Measurement::NONE)
            }
            fn processing_units_count(
                &self,
                _: usize,
                _: Option<&IterationEstimate>,
                _: usize,
            ) -> usize {
                2
            }
            fn get_chunk_size(
                &self,
                _: usize,
                _: Option<&IterationEstimate>,
                _: usize,
                count: usize,
            ) -> usize {
                count + 1
            }
        }
        let err = resolve(&Oversized, 8, None, 10).unwrap_err();
        assert!(matches!(
            err,
            ScheduleError::Contract {
                hook: "get_chunk_size",
                ..
            }
        ));
    }

    #[test]
    fn plan_consumes_measured_prefix() {
        let pool = WorkerPool::create(Some(2)).unwrap();
        let mut policy = adaptive_us(1);
        let body = |_: Range<usize>| {};
        let planned = plan(&mut policy, &pool, &body, 1000).unwrap();
        assert!(planned.prefix >= 16);
        assert_eq!(planned.plan.count(), 1000 - planned.prefix);
        // second call uses the cache and measures nothing
        let again = plan(&mut policy, &pool, &body, 1000).unwrap();
        assert_eq!(again.prefix, 0);
        assert_eq!(again.estimate, planned.estimate);
    }

    #[test]
    fn plan_on_stopped_pool_fails() {
        let mut pool = WorkerPool::create(Some(1)).unwrap();
        pool.shutdown();
        let body = |_: Range<usize>| {};
        assert!(matches!(
            plan(&mut DefaultPolicy, &pool, &body, 10),
            Err(ScheduleError::Pool(PoolError::NotStarted))
        ));
    }

    #[test]
    fn execute_covers_every_index() {
        let pool = WorkerPool::create(Some(4)).unwrap();
        let out: Vec<AtomicU64> = (0..80).map(|_| AtomicU64::new(u64::MAX)).collect();
        let body = |r: Range<usize>| {
            for i in r {
                out[i].store(i as u64, Ordering::Relaxed);
            }
        };
        let plan = SchedulePlan::chunked(4, 10, 80);
        let report = execute(&plan, &pool, &body).unwrap();
        assert_eq!(report.chunk_count, 8);
        assert!(report.is_complete());
        assert!(report.cores <= 4);
        for (i, v) in out.iter().enumerate() {
            assert_eq!(v.load(Ordering::Relaxed), i as u64);
        }
    }

    #[test]
    fn sequential_plan_runs_on_caller() {
        let pool = WorkerPool::create(Some(2)).unwrap();
        let caller = std::thread::current().id();
        let body = |_: Range<usize>| assert_eq!(std::thread::current().id(), caller);
        let report = execute(&SchedulePlan::sequential(50), &pool, &body).unwrap();
        assert_eq!(report.cores, 1);
        assert_eq!(report.chunk_count, 1);
    }

    #[test]
    fn panic_reports_containing_chunk() {
        let pool = WorkerPool::create(Some(3)).unwrap();
        let body = |r: Range<usize>| {
            if r.contains(&41) {
                panic!("bad index 41");
            }
        };
        let plan = SchedulePlan::chunked(3, 10, 80);
        match execute(&plan, &pool, &body) {
            Err(ExecError::BodyPanicked {
                chunk,
                range,
                message,
                report,
            }) => {
                assert_eq!(chunk, 4);
                assert_eq!(range, 40..50);
                assert!(message.contains("41"));
                assert!(!report.is_complete());
            }
            other => panic!("expected chunk failure, got {other:?}"),
        }
    }
}
