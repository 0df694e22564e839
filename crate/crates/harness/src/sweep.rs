//! Parameter sweeps over one scenario axis.

use std::time::Instant;

use log::warn;
use rayon::prelude::*;

use crate::baselines::{run_baseline, Baseline};
use crate::config::{Axis, Config, SweepSpec};
use crate::error::Result;
use crate::scenario_gen::make_scenario;
use crate::stats::{mean, std_error};

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub axis: Axis,
    pub value: f64,
    pub seed: u64,
    pub baseline: Baseline,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub secrecy_rate: f64,
    pub iterations: usize,
    pub final_objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub cell: Cell,
    /// The error message of a failed cell.
    pub result: std::result::Result<Outcome, String>,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub axis: Axis,
    pub value: f64,
    pub baseline: Baseline,
    /// Successful cells.
    pub count: usize,
    pub errors: usize,
    pub mean: f64,
    pub std_error: f64,
}

/// Cells in output order: value, then seed, then baseline.
pub fn cells(spec: &SweepSpec, base_seed: u64) -> Result<Vec<Cell>> {
    spec.validate()?;
    let baselines = spec.baselines.iter().map(|b| Baseline::parse(b)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for &value in &spec.values {
        for i in 0..spec.seeds as u64 {
            for &baseline in &baselines {
                out.push(Cell {
                    axis: spec.axis,
                    value,
                    seed: base_seed + i,
                    baseline,
                });
            }
        }
    }
    Ok(out)
}

pub fn run_cell(cell: &Cell, cfg: &Config) -> SweepRow {
    let start = Instant::now();
    let result = (|| {
        let scenario_cfg = cell.axis.apply(&cfg.scenario, cell.value)?;
        let scenario = make_scenario(&scenario_cfg, cell.seed)?;
        let out = run_baseline(cell.baseline, &scenario, &cfg.solver, cell.seed)?;
        Ok(Outcome {
            secrecy_rate: out.secrecy_rate,
            iterations: out.iterations,
            final_objective: out.final_objective,
        })
    })()
    .map_err(|e: crate::error::HarnessError| {
        warn!("{} = {} seed {} {}: {e}", cell.axis.name(), cell.value, cell.seed, cell.baseline.name());
        e.to_string()
    });
    SweepRow {
        cell: cell.clone(),
        result,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    }
}

/// Runs every cell of `cfg.sweep`, in parallel on `threads` workers (the
/// rayon default when `None`). Failed cells become error rows. Row order
/// does not depend on scheduling.
pub fn run_sweep(cfg: &Config, threads: Option<usize>) -> Result<Vec<SweepRow>> {
    let cells = cells(&cfg.sweep, cfg.seed)?;
    let work = || cells.par_iter().map(|c| run_cell(c, cfg)).collect::<Vec<_>>();
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| crate::error::HarnessError::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

/// Mean and standard error per (value, baseline), in first-seen order.
pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut keys: Vec<(Axis, f64, Baseline)> = Vec::new();
    for r in rows {
        let k = (r.cell.axis, r.cell.value, r.cell.baseline);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(axis, value, baseline)| {
            let group: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.cell.axis == axis && r.cell.value == value && r.cell.baseline == baseline)
                .collect();
            let rates: Vec<f64> = group.iter().filter_map(|r| r.result.as_ref().ok()).map(|o| o.secrecy_rate).collect();
            SummaryRow {
                axis,
                value,
                baseline,
                count: rates.len(),
                errors: group.len() - rates.len(),
                mean: if rates.is_empty() { f64::NAN } else { mean(&rates) },
                std_error: std_error(&rates),
            }
        })
        .collect()
}

/// Secrecy rates of one (value, baseline) pair, ordered by seed; failed
/// cells are skipped.
pub fn rates(rows: &[SweepRow], value: f64, baseline: Baseline) -> Vec<(u64, f64)> {
    let mut v: Vec<(u64, f64)> = rows
        .iter()
        .filter(|r| r.cell.value == value && r.cell.baseline == baseline)
        .filter_map(|r| r.result.as_ref().ok().map(|o| (r.cell.seed, o.secrecy_rate)))
        .collect();
    v.sort_by_key(|p| p.0);
    v
}
