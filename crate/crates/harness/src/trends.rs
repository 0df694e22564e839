//! Trend checks over seeded sweeps.
//!
//! Each trend compares mean secrecy rates between sweep points or
//! baselines on matched seeds, and backs every ordering with a one-sided
//! paired sign test at the 5% level.

use crate::baselines::Baseline;
use crate::checks::{desk_scale, Check};
use crate::config::{Axis, Config, ScenarioConfig, SolverSettings, SweepSpec};
use crate::error::{HarnessError, Result};
use crate::stats::{mean, sign_test};
use crate::sweep::{rates, run_sweep, SweepRow};

pub const SIGNIFICANCE: f64 = 0.05;

fn sweep(scenario: ScenarioConfig, axis: Axis, values: &[f64], baselines: &[Baseline], seeds: usize, seed: u64, settings: &SolverSettings) -> Result<Vec<SweepRow>> {
    let cfg = Config {
        seed,
        scenario,
        solver: settings.clone(),
        sweep: SweepSpec {
            axis,
            values: values.to_vec(),
            seeds,
            baselines: baselines.iter().map(|b| b.name().to_string()).collect(),
        },
        ..Config::default()
    };
    let rows = run_sweep(&cfg, None)?;
    if let Some(bad) = rows.iter().find(|r| r.result.is_err()) {
        return Err(HarnessError::Config(format!(
            "{}={} seed {} {} failed: {}",
            axis.name(),
            bad.cell.value,
            bad.cell.seed,
            bad.cell.baseline.name(),
            bad.result.as_ref().unwrap_err()
        )));
    }
    Ok(rows)
}

fn values(rows: &[SweepRow], value: f64, baseline: Baseline) -> Vec<f64> {
    rates(rows, value, baseline).into_iter().map(|(_, r)| r).collect()
}

/// `a` above `b` in mean, and significantly often per seed.
struct Ordering {
    label: String,
    mean_a: f64,
    mean_b: f64,
    wins: usize,
    trials: usize,
    p_value: f64,
}

impl Ordering {
    fn new(label: String, a: &[f64], b: &[f64]) -> Self {
        let t = sign_test(a, b);
        Self {
            label,
            mean_a: mean(a),
            mean_b: mean(b),
            wins: t.wins,
            trials: t.trials,
            p_value: t.p_value,
        }
    }

    fn holds(&self) -> bool {
        self.mean_a >= self.mean_b && self.p_value < SIGNIFICANCE
    }

    fn describe(&self) -> String {
        format!("{} {:.3} vs {:.3} ({}/{} seeds, p={:.3})", self.label, self.mean_a, self.mean_b, self.wins, self.trials, self.p_value)
    }
}

fn verdict(name: &'static str, orderings: &[Ordering], extra: Option<(bool, String)>) -> Check {
    let mut passed = orderings.iter().all(Ordering::holds);
    let mut parts: Vec<String> = orderings.iter().map(Ordering::describe).collect();
    if let Some((ok, text)) = extra {
        passed &= ok;
        parts.push(text);
    }
    Check {
        name,
        passed,
        detail: parts.join("; "),
    }
}

/// Proposed beats isotropic panels at N = 25 by at least `min_ratio` in mean.
pub fn proposed_vs_isotropic(seeds: usize, seed: u64, settings: &SolverSettings, min_ratio: f64) -> Result<Check> {
    let b = [Baseline::Proposed, Baseline::Isotropic];
    let rows = sweep(ScenarioConfig::default(), Axis::N, &[25.0], &b, seeds, seed, settings)?;
    let o = Ordering::new("proposed > isotropic".into(), &values(&rows, 25.0, b[0]), &values(&rows, 25.0, b[1]));
    let ratio = o.mean_a / o.mean_b;
    Ok(verdict(
        "trend: proposed vs isotropic at N=25",
        &[o],
        Some((ratio >= min_ratio, format!("mean ratio {ratio:.3} (need >= {min_ratio})"))),
    ))
}

/// Rate grows with the transmit power budget.
pub fn power_budget(seeds: usize, seed: u64, settings: &SolverSettings) -> Result<Check> {
    let p = [0.0, 10.0, 20.0, 30.0];
    let rows = sweep(desk_scale(), Axis::PMax, &p, &[Baseline::Proposed], seeds, seed, settings)?;
    let orderings: Vec<Ordering> = p
        .windows(2)
        .map(|w| Ordering::new(format!("{} dBm > {} dBm", w[1], w[0]), &values(&rows, w[1], Baseline::Proposed), &values(&rows, w[0], Baseline::Proposed)))
        .collect();
    Ok(verdict("trend: rate non-decreasing in P_max", &orderings, None))
}

/// Four streams beat two at 25 dBm with N = M = Q = 4.
pub fn streams(seeds: usize, seed: u64, settings: &SolverSettings) -> Result<Check> {
    let base = ScenarioConfig {
        tx: [2, 2],
        rx: [2, 2],
        eve: [2, 2],
        p_max_dbm: 25.0,
        ..ScenarioConfig::default()
    };
    let rows = sweep(base, Axis::D, &[2.0, 4.0], &[Baseline::Proposed], seeds, seed, settings)?;
    let o = Ordering::new("d=4 > d=2".into(), &values(&rows, 4.0, Baseline::Proposed), &values(&rows, 2.0, Baseline::Proposed));
    let strict = o.mean_a > o.mean_b;
    Ok(verdict("trend: d=4 beats d=2 at 25 dBm", &[o], Some((strict, format!("strict mean ordering {strict}")))))
}

/// Worst-receiver rate falls as receivers are added.
pub fn receivers(seeds: usize, seed: u64, settings: &SolverSettings) -> Result<Check> {
    let k = [2.0, 3.0, 4.0, 5.0, 6.0];
    let rows = sweep(multicast_scale(), Axis::K, &k, &[Baseline::Proposed], seeds, seed, settings)?;
    let orderings: Vec<Ordering> = k
        .windows(2)
        .map(|w| Ordering::new(format!("K={} > K={}", w[0], w[1]), &values(&rows, w[0], Baseline::Proposed), &values(&rows, w[1], Baseline::Proposed)))
        .collect();
    Ok(verdict("trend: multicast rate non-increasing in K", &orderings, None))
}

/// Proposed, then the quantized codebook, then random boresights, at a
/// 36 degree cap.
pub fn orientation_schemes(seeds: usize, seed: u64, settings: &SolverSettings) -> Result<Check> {
    let b = [Baseline::Proposed, Baseline::Discrete, Baseline::RandomOrient];
    let rows = sweep(desk_scale(), Axis::ThetaMax, &[36.0], &b, seeds, seed, settings)?;
    let r: Vec<Vec<f64>> = b.iter().map(|&x| values(&rows, 36.0, x)).collect();
    Ok(verdict(
        "trend: proposed >= discrete >= random at theta_max=pi/5",
        &[Ordering::new("proposed > discrete".into(), &r[0], &r[1]), Ordering::new("discrete > random".into(), &r[1], &r[2])],
        None,
    ))
}

/// Array sizes used for the receiver-count trend.
pub fn multicast_scale() -> ScenarioConfig {
    ScenarioConfig {
        tx: [2, 2],
        rx: [2, 1],
        eve: [2, 1],
        streams: 1,
        ..ScenarioConfig::default()
    }
}
