use std::path::PathBuf;
use std::process::ExitCode;

use adaptix::WorkerPool;
use adaptix_bench::{
    emit_csv, emit_raw, parse_list, parse_sizes, run_sweep, BenchError, SweepSpec, Workload,
};
use clap::Parser;

/// Sweep input sizes, core counts and chunks-per-core for one workload and
/// write mean times and speedups as CSV.
#[derive(Debug, Parser)]
#[command(name = "bench", version)]
struct Args {
    #[arg(long, value_parser = parse_workload)]
    workload: Workload,
    /// Comma list, or `lo:hi` for doubling sizes from lo up to hi.
    #[arg(long, default_value = "1024:16777216", value_parser = parse_sizes)]
    sizes: std::vec::Vec<usize>,
    /// Static core-count arms. Defaults to powers of two up to the pool size.
    #[arg(long, value_parser = parse_list)]
    cores: Option<std::vec::Vec<usize>>,
    #[arg(long, default_value = "1,4,8", value_parser = parse_list)]
    chunks_per_core: std::vec::Vec<usize>,
    /// Also run the adaptive policy.
    #[arg(long)]
    adaptive: bool,
    #[arg(long, default_value_t = 50)]
    repetitions: usize,
    /// Multiply-add chain length per element for artificial_work.
    #[arg(long, default_value_t = 1000)]
    work_units: usize,
    #[arg(long)]
    output: PathBuf,
    /// Also dump every timed repetition here.
    #[arg(long)]
    raw: Option<PathBuf>,
}

fn parse_workload(raw: &str) -> Result<Workload, String> {
    raw.parse()
}

fn default_core_arms(hw: usize) -> Vec<usize> {
    let mut arms: Vec<usize> = std::iter::successors(Some(2usize), |c| c.checked_mul(2))
        .take_while(|&c| c <= hw)
        .collect();
    if hw >= 2 && arms.last() != Some(&hw) {
        arms.push(hw);
    }
    arms
}

fn main() -> ExitCode {
    let args = Args::parse();
    let pool = match WorkerPool::create(None) {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let spec = SweepSpec {
        workload: args.workload,
        sizes: args.sizes,
        cores: args
            .cores
            .unwrap_or_else(|| default_core_arms(pool.hardware_cores())),
        chunks_per_core: args.chunks_per_core,
        adaptive: args.adaptive,
        repetitions: args.repetitions,
        work_units: args.work_units,
    };
    let outcome = match run_sweep(&spec, &pool) {
        Ok(outcome) => outcome,
        Err(e @ BenchError::Spec(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    if let Err(e) = emit_csv(&outcome.records, &args.output) {
        eprintln!("error: writing {}: {e}", args.output.display());
        return ExitCode::FAILURE;
    }
    if let Some(raw) = &args.raw {
        if let Err(e) = emit_raw(&outcome.records, raw) {
            eprintln!("error: writing {}: {e}", raw.display());
            return ExitCode::FAILURE;
        }
    }
    ExitCode::SUCCESS
}
