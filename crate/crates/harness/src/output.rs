//! CSV outputs. Column sets are part of the CLI contract and covered by
//! golden tests; floats use Rust's shortest round-trip formatting.
//!
//! | file | columns |
//! |------|---------|
//! | `results.csv` | `axis,value,seed,baseline,R_s,iterations,final_F,status,error` |
//! | `summary.csv` | `axis,value,baseline,n,errors,mean_R_s,stderr_R_s` |
//! | `timing.csv` | `axis,value,seed,baseline,wall_ms` |
//! | `trace.csv` | `iteration,F,R_s,bound` |
//! | `landscape.csv` | `theta,J` |
//!
//! `R_s` is in bits/s/Hz, `F` in nats. Wall-clock times live in their own
//! file so that `results.csv` is reproducible byte for byte.

use std::io::Write;

use crate::baselines::TraceRow;
use crate::error::Result;
use crate::sweep::{SummaryRow, SweepRow};

pub const RESULTS_HEADER: [&str; 9] = ["axis", "value", "seed", "baseline", "R_s", "iterations", "final_F", "status", "error"];
pub const SUMMARY_HEADER: [&str; 7] = ["axis", "value", "baseline", "n", "errors", "mean_R_s", "stderr_R_s"];
pub const TIMING_HEADER: [&str; 5] = ["axis", "value", "seed", "baseline", "wall_ms"];
pub const TRACE_HEADER: [&str; 4] = ["iteration", "F", "R_s", "bound"];
pub const LANDSCAPE_HEADER: [&str; 2] = ["theta", "J"];

fn writer<W: Write>(out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

pub fn write_results<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = writer(out, &RESULTS_HEADER)?;
    for r in rows {
        let c = &r.cell;
        let head = [c.axis.name().to_string(), c.value.to_string(), c.seed.to_string(), c.baseline.name().to_string()];
        let tail = match &r.result {
            Ok(o) => [
                o.secrecy_rate.to_string(),
                o.iterations.to_string(),
                o.final_objective.to_string(),
                "ok".to_string(),
                String::new(),
            ],
            Err(e) => [String::new(), String::new(), String::new(), "error".to_string(), e.clone()],
        };
        w.write_record(head.iter().chain(&tail))?;
    }
    w.flush().map_err(|e| crate::error::HarnessError::Io(e.to_string()))?;
    Ok(())
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = writer(out, &SUMMARY_HEADER)?;
    for r in rows {
        w.write_record([
            r.axis.name().to_string(),
            r.value.to_string(),
            r.baseline.name().to_string(),
            r.count.to_string(),
            r.errors.to_string(),
            r.mean.to_string(),
            r.std_error.to_string(),
        ])?;
    }
    w.flush().map_err(|e| crate::error::HarnessError::Io(e.to_string()))?;
    Ok(())
}

pub fn write_timing<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = writer(out, &TIMING_HEADER)?;
    for r in rows {
        let c = &r.cell;
        w.write_record([
            c.axis.name().to_string(),
            c.value.to_string(),
            c.seed.to_string(),
            c.baseline.name().to_string(),
            format!("{:.3}", r.wall_ms),
        ])?;
    }
    w.flush().map_err(|e| crate::error::HarnessError::Io(e.to_string()))?;
    Ok(())
}

pub fn write_trace<W: Write>(out: W, rows: &[TraceRow]) -> Result<()> {
    let mut w = writer(out, &TRACE_HEADER)?;
    for r in rows {
        w.write_record([r.iteration.to_string(), r.objective.to_string(), r.secrecy_rate.to_string(), r.bound.to_string()])?;
    }
    w.flush().map_err(|e| crate::error::HarnessError::Io(e.to_string()))?;
    Ok(())
}

pub fn write_landscape<W: Write>(out: W, samples: &[(f64, f64)]) -> Result<()> {
    let mut w = writer(out, &LANDSCAPE_HEADER)?;
    for (t, j) in samples {
        w.write_record([t.to_string(), j.to_string()])?;
    }
    w.flush().map_err(|e| crate::error::HarnessError::Io(e.to_string()))?;
    Ok(())
}
