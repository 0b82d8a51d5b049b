use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use crate::sweep::{BenchError, BenchmarkRecord};

pub const HEADER: &str =
    "workload,n_elements,policy,cores,chunks_per_core,repetitions,mean_time_ns,speedup";

/// One header line, then one row per record. Times in integer nanoseconds,
/// speedup with six decimals, `\n` line endings.
pub fn write_csv<W: Write>(records: &[BenchmarkRecord], mut out: W) -> Result<(), BenchError> {
    if records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    writeln!(out, "{HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{:.6}",
            r.workload,
            r.n_elements,
            r.policy,
            r.cores,
            r.chunks_per_core,
            r.repetitions,
            r.mean_time.as_nanos(),
            r.speedup_vs_sequential
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[BenchmarkRecord], path: &Path) -> Result<(), BenchError> {
    if records.is_empty() {
        return Err(BenchError::NoRecords);
    }
    let file = File::create(path)?;
    write_csv(records, BufWriter::new(file))
}

/// Per-repetition timings: `workload,n_elements,policy,cores,chunks_per_core,repetition,time_ns`.
pub fn emit_raw(records: &[BenchmarkRecord], path: &Path) -> io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "workload,n_elements,policy,cores,chunks_per_core,repetition,time_ns"
    )?;
    for r in records {
        for (i, t) in r.samples.iter().enumerate() {
            writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.workload,
                r.n_elements,
                r.policy,
                r.cores,
                r.chunks_per_core,
                i,
                t.as_nanos()
            )?;
        }
    }
    out.flush()
}
