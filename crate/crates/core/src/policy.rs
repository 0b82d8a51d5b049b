//! Execution policies: objects answering the three questions a parallel
//! algorithm asks before running (how long does one iteration take, how
//! many cores, how many elements per chunk).

use crate::body::LoopBody;
use crate::calibrate::{
    self, CalibrationError, IterationEstimate, OverheadEstimate, DEFAULT_SAMPLE_BUDGET,
};
use crate::model::{self, ModelError, ModelParams, DEFAULT_CHUNKS_PER_CORE, DEFAULT_EFFICIENCY};
use crate::pool::WorkerPool;

/// Result of the iteration-measurement hook.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub estimate: Option<IterationEstimate>,
    /// Indices `[0, executed_prefix)` already ran while timing and must not
    /// be executed again.
    pub executed_prefix: usize,
}

impl Measurement {
    pub const NONE: Measurement = Measurement {
        estimate: None,
        executed_prefix: 0,
    };
}

/// The customization points consulted, in order, when planning a loop.
pub trait ExecutionPolicy {
    fn name(&self) -> &'static str;

    /// Time the loop body, if this policy needs to.
    fn measure_iteration(
        &mut self,
        body: &dyn LoopBody,
        count: usize,
    ) -> Result<Measurement, CalibrationError>;

    /// Cores to use, in `[1, hardware_cores]`.
    fn processing_units_count(
        &self,
        hardware_cores: usize,
        iteration: Option<&IterationEstimate>,
        count: usize,
    ) -> usize;

    /// Elements per chunk, in `[1, count]`.
    fn get_chunk_size(
        &self,
        hardware_cores: usize,
        iteration: Option<&IterationEstimate>,
        cores: usize,
        count: usize,
    ) -> usize;
}

/// All available cores, one equally sized chunk per core.
#[derive(Debug, Clone, Copy, Default)]
pub struct DefaultPolicy;

impl ExecutionPolicy for DefaultPolicy {
    fn name(&self) -> &'static str {
        "default"
    }

    fn measure_iteration(
        &mut self,
        _body: &dyn LoopBody,
        _count: usize,
    ) -> Result<Measurement, CalibrationError> {
        Ok(Measurement::NONE)
    }

    fn processing_units_count(
        &self,
        hardware_cores: usize,
        _: Option<&IterationEstimate>,
        _: usize,
    ) -> usize {
        hardware_cores
    }

    fn get_chunk_size(
        &self,
        _hardware_cores: usize,
        _: Option<&IterationEstimate>,
        cores: usize,
        count: usize,
    ) -> usize {
        model::chunk_size(count, cores, 1)
    }
}

/// A fixed core count with `chunks_per_core` chunks per core, like a
/// statically scheduled OpenMP loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StaticPolicy {
    pub cores: usize,
    pub chunks_per_core: usize,
}

impl StaticPolicy {
    pub fn new(cores: usize, chunks_per_core: usize) -> Self {
        StaticPolicy {
            cores,
            chunks_per_core,
        }
    }
}

impl ExecutionPolicy for StaticPolicy {
    fn name(&self) -> &'static str {
        "static"
    }

    fn measure_iteration(
        &mut self,
        _body: &dyn LoopBody,
        _count: usize,
    ) -> Result<Measurement, CalibrationError> {
        Ok(Measurement::NONE)
    }

    fn processing_units_count(&self, _: usize, _: Option<&IterationEstimate>, _: usize) -> usize {
        self.cores
    }

    fn get_chunk_size(
        &self,
        _hardware_cores: usize,
        _: Option<&IterationEstimate>,
        cores: usize,
        count: usize,
    ) -> usize {
        model::chunk_size(count, cores, self.chunks_per_core)
    }
}

/// Picks cores and chunk size per invocation from the overhead model.
///
/// The loop body is timed on its first invocation and the estimate is kept
/// for later calls; one instance therefore belongs to one call site.
#[derive(Debug, Clone)]
pub struct AdaptivePolicy {
    efficiency_target: f64,
    chunks_per_core: usize,
    sample_budget: usize,
    overhead: OverheadEstimate,
    cached_iteration: Option<IterationEstimate>,
}

impl AdaptivePolicy {
    /// E = 0.95, C = 8.
    pub fn new(overhead: OverheadEstimate) -> Self {
        AdaptivePolicy {
            efficiency_target: DEFAULT_EFFICIENCY,
            chunks_per_core: DEFAULT_CHUNKS_PER_CORE,
            sample_budget: DEFAULT_SAMPLE_BUDGET,
            overhead,
            cached_iteration: None,
        }
    }

    /// Uses the pool's overhead (or `ADAPTIX_T0_NS`), measuring it if needed.
    pub fn for_pool(pool: &WorkerPool) -> Result<Self, CalibrationError> {
        Ok(Self::new(calibrate::pool_overhead(pool)?))
    }

    pub fn with_params(
        overhead: OverheadEstimate,
        efficiency_target: f64,
        chunks_per_core: usize,
    ) -> Result<Self, ModelError> {
        // validate through the model's own checks
        ModelParams::new(0.0, overhead.t0_secs(), efficiency_target, chunks_per_core)?;
        Ok(AdaptivePolicy {
            efficiency_target,
            chunks_per_core,
            ..Self::new(overhead)
        })
    }

    pub fn with_sample_budget(mut self, budget: usize) -> Self {
        self.sample_budget = budget.max(1);
        self
    }

    /// Seeds the per-call-site cache instead of timing the body.
    pub fn with_iteration(mut self, estimate: IterationEstimate) -> Self {
        self.cached_iteration = Some(estimate);
        self
    }

    pub fn efficiency_target(&self) -> f64 {
        self.efficiency_target
    }

    pub fn chunks_per_core(&self) -> usize {
        self.chunks_per_core
    }

    pub fn overhead(&self) -> OverheadEstimate {
        self.overhead
    }

    pub fn cached_iteration(&self) -> Option<IterationEstimate> {
        self.cached_iteration
    }

    /// Forget the cached iteration time; the next plan re-measures.
    pub fn invalidate(&mut self) {
        self.cached_iteration = None;
    }

    fn params(&self, iteration: Option<&IterationEstimate>, count: usize) -> ModelParams {
        let t_iter = iteration.map_or(0.0, |e| e.t_iter);
        ModelParams::new(
            calibrate::total_time(&IterationEstimate::known(t_iter), count),
            self.overhead.t0_secs(),
            self.efficiency_target,
            self.chunks_per_core,
        )
        .expect("adaptive policy parameters are validated at construction")
    }
}

impl ExecutionPolicy for AdaptivePolicy {
    fn name(&self) -> &'static str {
        "adaptive"
    }

    fn measure_iteration(
        &mut self,
        body: &dyn LoopBody,
        count: usize,
    ) -> Result<Measurement, CalibrationError> {
        if let Some(cached) = self.cached_iteration {
            return Ok(Measurement {
                estimate: Some(cached),
                executed_prefix: 0,
            });
        }
        let estimate = calibrate::measure_iteration(body, count, self.sample_budget)?;
        self.cached_iteration = Some(estimate);
        Ok(Measurement {
            estimate: Some(estimate),
            executed_prefix: estimate.sampled_iterations,
        })
    }

    fn processing_units_count(
        &self,
        hardware_cores: usize,
        iteration: Option<&IterationEstimate>,
        count: usize,
    ) -> usize {
        let rec = model::optimal_cores(&self.params(iteration, count));
        rec.n_effective.clamp(1, hardware_cores.max(1))
    }

    fn get_chunk_size(
        &self,
        _hardware_cores: usize,
        iteration: Option<&IterationEstimate>,
        cores: usize,
        count: usize,
    ) -> usize {
        if cores <= 1 {
            return count.max(1);
        }
        let by_count = model::chunk_size(count, cores, self.chunks_per_core);
        let t_iter = iteration.map_or(0.0, |e| e.t_iter);
        let by_time = if t_iter > 0.0 {
            let t_m = model::min_chunk_time(&self.params(iteration, count), cores);
            // absorb rounding noise when T_m / t_iter is a whole number
            (t_m / t_iter * (1.0 - 1e-12)).ceil() as usize
        } else {
            1
        };
        by_count.max(by_time).clamp(1, count.max(1))
    }
}
