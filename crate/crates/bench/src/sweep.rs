use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use adaptix::algorithms::adjacent_difference_body;
use adaptix::calibrate::CalibrationError;
use adaptix::schedule::{self, SchedulePlan};
use adaptix::{
    artificial_work_body, par_for_each, AdaptivePolicy, AlgorithmError, ExecutionPolicy, LoopBody,
    StaticPolicy, WorkerPool,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Seed for the input vectors; fixed so every run sees the same data.
pub const INPUT_SEED: u64 = 0x5eed_ad1f;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no records to write")]
    NoRecords,
    #[error("invalid sweep: {0}")]
    Spec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Workload {
    AdjacentDifference,
    ArtificialWork,
}

impl fmt::Display for Workload {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Workload::AdjacentDifference => "adjacent_difference",
            Workload::ArtificialWork => "artificial_work",
        })
    }
}

impl FromStr for Workload {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "adjacent_difference" => Ok(Workload::AdjacentDifference),
            "artificial_work" => Ok(Workload::ArtificialWork),
            other => Err(format!("unknown workload {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolicyKind {
    Sequential,
    Static,
    Adaptive,
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::Sequential => "sequential",
            PolicyKind::Static => "static",
            PolicyKind::Adaptive => "adaptive",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkRecord {
    pub workload: Workload,
    pub n_elements: usize,
    pub policy: PolicyKind,
    /// Cores requested (static), or cores the adaptive plan ended up using.
    pub cores: usize,
    pub chunks_per_core: usize,
    pub repetitions: usize,
    pub mean_time: Duration,
    pub speedup_vs_sequential: f64,
    /// Individual timed repetitions.
    pub samples: Vec<Duration>,
}

/// A static cell that could not run on this machine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedCell {
    pub workload: Workload,
    pub n_elements: usize,
    pub cores: usize,
    pub chunks_per_core: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub workload: Workload,
    pub sizes: Vec<usize>,
    pub cores: Vec<usize>,
    pub chunks_per_core: Vec<usize>,
    pub adaptive: bool,
    pub repetitions: usize,
    pub work_units: usize,
}

impl SweepSpec {
    fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: &str| Err(BenchError::Spec(msg.to_string()));
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return bad("sizes must be a non-empty list of positive integers");
        }
        if self.cores.contains(&0) {
            return bad("core counts must be positive");
        }
        if self.chunks_per_core.is_empty() && !self.cores.is_empty() {
            return bad("static arms need at least one chunks-per-core value");
        }
        if self.chunks_per_core.contains(&0) {
            return bad("chunks per core must be positive");
        }
        if self.repetitions == 0 {
            return bad("repetitions must be positive");
        }
        if self.work_units == 0 {
            return bad("work units must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepOutcome {
    pub records: Vec<BenchmarkRecord>,
    pub skipped: Vec<SkippedCell>,
}

/// `"a,b,c"` into positive integers.
pub fn parse_list(raw: &str) -> Result<Vec<usize>, String> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("{s:?} is not a positive integer")),
            Ok(n) => Ok(n),
        })
        .collect()
}

/// Either a comma list, or `lo:hi` meaning `lo, 2lo, 4lo, ...` up to `hi`.
pub fn parse_sizes(raw: &str) -> Result<Vec<usize>, String> {
    let Some((lo, hi)) = raw.split_once(':') else {
        return parse_list(raw);
    };
    let lo = parse_list(lo)?;
    let hi = parse_list(hi)?;
    let (&[lo], &[hi]) = (lo.as_slice(), hi.as_slice()) else {
        return Err(format!("bad size range {raw:?}"));
    };
    if lo > hi {
        return Err(format!("size range {raw:?} is empty"));
    }
    let mut sizes = Vec::new();
    let mut n = lo;
    while n <= hi {
        sizes.push(n);
        n = match n.checked_mul(2) {
            Some(next) => next,
            None => break,
        };
    }
    Ok(sizes)
}

fn make_input(n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(INPUT_SEED);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

struct Cell<'a> {
    workload: Workload,
    work_units: usize,
    input: &'a [f64],
    output: Vec<f64>,
}

impl Cell<'_> {
    fn body(&mut self) -> Box<dyn LoopBody + '_> {
        match self.workload {
            Workload::AdjacentDifference => {
                Box::new(adjacent_difference_body(self.input, &mut self.output))
            }
            Workload::ArtificialWork => {
                Box::new(artificial_work_body(self.work_units, &mut self.output))
            }
        }
    }

    /// One discarded warm-up, then `reps` timed runs.
    fn time_sequential(
        &mut self,
        pool: &WorkerPool,
        reps: usize,
    ) -> Result<Vec<Duration>, BenchError> {
        let n = self.input.len();
        let plan = SchedulePlan::sequential(n);
        let mut samples = Vec::with_capacity(reps);
        for rep in 0..=reps {
            let body = self.body();
            let start = Instant::now();
            schedule::execute(&plan, pool, body.as_ref()).map_err(AlgorithmError::from)?;
            if rep > 0 {
                samples.push(start.elapsed());
            }
        }
        Ok(samples)
    }

    fn time_policy(
        &mut self,
        policy: &mut dyn ExecutionPolicy,
        pool: &WorkerPool,
        reps: usize,
    ) -> Result<(Vec<Duration>, usize), BenchError> {
        let n = self.input.len();
        let mut samples = Vec::with_capacity(reps);
        let mut cores = 0;
        for rep in 0..=reps {
            let body = self.body();
            let start = Instant::now();
            let report = par_for_each(policy, pool, n, body.as_ref())?;
            if rep > 0 {
                samples.push(start.elapsed());
                cores = report.cores;
            }
        }
        Ok((samples, cores))
    }
}

fn mean(samples: &[Duration]) -> Duration {
    let total: u128 = samples.iter().map(Duration::as_nanos).sum();
    Duration::from_nanos((total / samples.len() as u128) as u64)
}

/// Runs every cell of `spec` one at a time. Records come out ordered by
/// size, then sequential / static (by cores, then C) / adaptive.
pub fn run_sweep(spec: &SweepSpec, pool: &WorkerPool) -> Result<SweepOutcome, BenchError> {
    spec.validate()?;
    let mut sizes = spec.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let mut arms: Vec<(usize, usize)> = spec
        .cores
        .iter()
        .flat_map(|&c| spec.chunks_per_core.iter().map(move |&k| (c, k)))
        .collect();
    arms.sort_unstable();
    arms.dedup();

    let hw = pool.hardware_cores();
    let reps = spec.repetitions;
    let mut outcome = SweepOutcome::default();

    for &n in &sizes {
        let input = make_input(n);
        let mut cell = Cell {
            workload: spec.workload,
            work_units: spec.work_units,
            input: &input,
            output: vec![0.0; n],
        };

        let seq_samples = cell.time_sequential(pool, reps)?;
        let seq_mean = mean(&seq_samples);
        let record = |policy, cores, chunks_per_core, samples: Vec<Duration>| {
            let mean_time = mean(&samples);
            let speedup = if policy == PolicyKind::Sequential {
                1.0
            } else {
                seq_mean.as_secs_f64() / mean_time.as_secs_f64().max(1e-12)
            };
            BenchmarkRecord {
                workload: spec.workload,
                n_elements: n,
                policy,
                cores,
                chunks_per_core,
                repetitions: reps,
                mean_time,
                speedup_vs_sequential: speedup,
                samples,
            }
        };
        outcome
            .records
            .push(record(PolicyKind::Sequential, 1, 1, seq_samples));

        for &(cores, c) in &arms {
            if cores > hw {
                let reason = format!("requested {cores} cores, pool has {hw}");
                eprintln!(
                    "warning: skipping {} n={n} cores={cores} C={c}: {reason}",
                    spec.workload
                );
                outcome.skipped.push(SkippedCell {
                    workload: spec.workload,
                    n_elements: n,
                    cores,
                    chunks_per_core: c,
                    reason,
                });
                continue;
            }
            let (samples, _) = cell.time_policy(&mut StaticPolicy::new(cores, c), pool, reps)?;
            outcome
                .records
                .push(record(PolicyKind::Static, cores, c, samples));
        }

        if spec.adaptive {
            // fresh policy per cell: the iteration time is measured once per workload
            let mut policy = AdaptivePolicy::for_pool(pool)?;
            let (samples, cores) = cell.time_policy(&mut policy, pool, reps)?;
            let c = policy.chunks_per_core();
            outcome
                .records
                .push(record(PolicyKind::Adaptive, cores, c, samples));
        }
    }
    Ok(outcome)
}
