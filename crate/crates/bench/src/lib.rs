//! Sweep harness comparing sequential, statically chunked and adaptive
//! execution of two map-type workloads.

pub mod csv;
pub mod sweep;

pub use csv::{emit_csv, emit_raw, write_csv};
pub use sweep::{
    parse_list, parse_sizes, run_sweep, BenchError, BenchmarkRecord, PolicyKind, SkippedCell,
    SweepOutcome, SweepSpec, Workload,
};
