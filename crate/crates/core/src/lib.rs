//! Data-parallel loops that choose how many cores to use and how to chunk
//! the index space from a measured overhead model.
//!
//! The flow for one invocation is: time the loop body on a short prefix,
//! turn that into a total sequential time `T1`, compare it with the pool's
//! per-invocation overhead `T0`, and pick the core count that keeps parallel
//! efficiency at the target (95 % by default). Each core then gets a fixed
//! number of chunks (8 by default).
//!
//! ```
//! use adaptix::{AdaptivePolicy, WorkerPool, par_for_each};
//! use std::sync::atomic::{AtomicU64, Ordering};
//!
//! let pool = WorkerPool::create(Some(2)).unwrap();
//! let mut policy = AdaptivePolicy::for_pool(&pool).unwrap();
//! let sum = AtomicU64::new(0);
//! par_for_each(&mut policy, &pool, 1000, &|r: std::ops::Range<usize>| {
//!     sum.fetch_add(r.map(|i| i as u64).sum(), Ordering::Relaxed);
//! })
//! .unwrap();
//! assert_eq!(sum.into_inner(), 999 * 1000 / 2);
//! ```

pub mod algorithms;
mod body;
pub mod calibrate;
pub mod model;
pub mod policy;
pub mod pool;
pub mod schedule;
pub mod sim;

pub use algorithms::{
    artificial_kernel, artificial_work_body, par_adjacent_difference, par_for_each, par_transform,
    AlgorithmError,
};
pub use body::LoopBody;
pub use calibrate::{IterationEstimate, OverheadEstimate};
pub use model::{CoreRecommendation, ModelParams};
pub use policy::{AdaptivePolicy, DefaultPolicy, ExecutionPolicy, StaticPolicy};
pub use pool::WorkerPool;
pub use schedule::{ExecutionReport, SchedulePlan};
