//! Parallel algorithms over indexed sequences.

use std::hint::black_box;
use std::marker::PhantomData;
use std::ops::{Range, Sub};
use std::time::Instant;

use thiserror::Error;

use crate::body::{LoopBody, Shifted};
use crate::policy::ExecutionPolicy;
use crate::pool::WorkerPool;
use crate::schedule::{self, ExecError, ExecutionReport, ScheduleError};

#[derive(Debug, Error)]
pub enum AlgorithmError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("input has {input} elements but output has {output}")]
    LengthMismatch { input: usize, output: usize },
    #[error("empty sequence")]
    Empty,
}

/// Runs `body` over `[0, data_len)`: policy measurement on a prefix (if the
/// policy measures), then the planned chunks over the rest. Every index
/// runs exactly once. The report's wall time includes the measured prefix.
pub fn par_for_each<B: LoopBody + ?Sized>(
    policy: &mut dyn ExecutionPolicy,
    pool: &WorkerPool,
    data_len: usize,
    body: &B,
) -> Result<ExecutionReport, AlgorithmError> {
    if data_len == 0 {
        return Err(AlgorithmError::Empty);
    }
    let start = Instant::now();
    let body: &dyn LoopBody = &Shifted { body, offset: 0 };
    let planned = schedule::plan(policy, pool, body, data_len)?;
    let rest = Shifted {
        body,
        offset: planned.prefix,
    };
    let mut report = schedule::execute(&planned.plan, pool, &rest)?;
    report.wall_time = start.elapsed();
    Ok(report)
}

/// Mutable view of a slice handed out in disjoint ranges to concurrent
/// chunks.
struct SharedOut<'a, T> {
    ptr: *mut T,
    len: usize,
    _slice: PhantomData<&'a mut [T]>,
}

unsafe impl<T: Send> Send for SharedOut<'_, T> {}
unsafe impl<T: Send> Sync for SharedOut<'_, T> {}

impl<'a, T> SharedOut<'a, T> {
    fn new(slice: &'a mut [T]) -> Self {
        SharedOut {
            ptr: slice.as_mut_ptr(),
            len: slice.len(),
            _slice: PhantomData,
        }
    }

    /// # Safety
    /// No two live borrows may overlap. Holds for ranges coming from one
    /// plan, since each index is executed once.
    #[allow(clippy::mut_from_ref)]
    unsafe fn range_mut(&self, range: Range<usize>) -> &mut [T] {
        assert!(range.start <= range.end && range.end <= self.len);
        std::slice::from_raw_parts_mut(self.ptr.add(range.start), range.len())
    }
}

/// `out[i] = f(i)` for every index.
pub fn par_transform<T, F>(
    policy: &mut dyn ExecutionPolicy,
    pool: &WorkerPool,
    out: &mut [T],
    f: F,
) -> Result<ExecutionReport, AlgorithmError>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let len = out.len();
    let shared = SharedOut::new(out);
    let body = |r: Range<usize>| {
        let lo = r.start;
        // SAFETY: ranges from one plan are disjoint
        let dst = unsafe { shared.range_mut(r) };
        for (k, slot) in dst.iter_mut().enumerate() {
            *slot = f(lo + k);
        }
    };
    par_for_each(policy, pool, len, &body)
}

/// `output[0] = input[0]`, `output[i] = input[i] - input[i - 1]`.
///
/// Each output element reads only its own input and the one before it, so
/// chunks need no hand-off at their boundaries.
pub fn par_adjacent_difference<T>(
    policy: &mut dyn ExecutionPolicy,
    pool: &WorkerPool,
    input: &[T],
    output: &mut [T],
) -> Result<ExecutionReport, AlgorithmError>
where
    T: Copy + Send + Sync + Sub<Output = T>,
{
    if input.len() != output.len() {
        return Err(AlgorithmError::LengthMismatch {
            input: input.len(),
            output: output.len(),
        });
    }
    let body = adjacent_difference_body(input, output);
    par_for_each(policy, pool, input.len(), &body)
}

/// The adjacent-difference kernel as a loop body writing into `output`.
pub fn adjacent_difference_body<'a, T>(input: &'a [T], output: &'a mut [T]) -> impl LoopBody + 'a
where
    T: Copy + Send + Sync + Sub<Output = T>,
{
    let shared = SharedOut::new(output);
    move |r: Range<usize>| {
        let lo = r.start;
        // SAFETY: ranges from one plan are disjoint
        let dst = unsafe { shared.range_mut(r) };
        for (k, slot) in dst.iter_mut().enumerate() {
            let i = lo + k;
            *slot = if i == 0 {
                input[0]
            } else {
                input[i] - input[i - 1]
            };
        }
    }
}

/// Sequential reference for [`par_adjacent_difference`].
pub fn adjacent_difference<T: Copy + Sub<Output = T>>(input: &[T], output: &mut [T]) {
    assert_eq!(input.len(), output.len());
    if let Some(&first) = input.first() {
        output[0] = first;
    }
    for i in 1..input.len() {
        output[i] = input[i] - input[i - 1];
    }
}

/// Compute-bound per-element kernel: a dependent chain of `work_units`
/// fused multiply-adds seeded from the index. Deterministic in
/// `(index, work_units)` and cheap to scale linearly.
#[inline]
pub fn artificial_kernel(index: usize, work_units: usize) -> f64 {
    let mut x = 1.0 + (index % 1024) as f64 * 1e-3;
    for _ in 0..black_box(work_units) {
        x = x.mul_add(0.999_999_9, 1e-7);
    }
    x
}

/// Loop body writing `artificial_kernel(i, work_units)` into `out[i]`.
pub fn artificial_work_body(work_units: usize, out: &mut [f64]) -> impl LoopBody + '_ {
    let work_units = work_units.max(1);
    let shared = SharedOut::new(out);
    move |r: Range<usize>| {
        let lo = r.start;
        // SAFETY: ranges from one plan are disjoint
        let dst = unsafe { shared.range_mut(r) };
        for (k, slot) in dst.iter_mut().enumerate() {
            *slot = artificial_kernel(lo + k, work_units);
        }
    }
}
