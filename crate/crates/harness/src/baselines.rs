//! The proposed method and the comparison schemes.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rotsec_core::ao_solver::run_ao_with;
use rotsec_core::channel::ChannelModel;
use rotsec_core::geometry::{boresight, fibonacci_cap, nearest_codeword, Cap};
use rotsec_core::linalg::Vec3;
use rotsec_core::multicast::run_ao_multicast_with;
use rotsec_core::rate::Beamformers;
use rotsec_core::scenario::{OrientationSet, Scenario};

use crate::config::SolverSettings;
use crate::error::{HarnessError, Result};
use crate::rng::{stream, ORIENTATION};

/// Codebook size of the discrete-orientation baseline.
pub const CODEBOOK_SIZE: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Baseline {
    /// Transmit and receive boresights optimized.
    Proposed,
    /// Receive boresights frozen along the panel normal.
    Rfoa,
    /// All boresights frozen along the panel normal.
    Foa,
    /// `p = 0`, so orientation is irrelevant.
    Isotropic,
    /// Boresights drawn uniformly (by area) on the cap, beamformers optimized.
    RandomOrient,
    /// Proposed solution snapped to a Fibonacci codebook, then beamformers
    /// re-optimized.
    Discrete,
}

impl Baseline {
    pub const ALL: [Baseline; 6] = [
        Baseline::Proposed,
        Baseline::Rfoa,
        Baseline::Foa,
        Baseline::Isotropic,
        Baseline::RandomOrient,
        Baseline::Discrete,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Baseline::Proposed => "proposed",
            Baseline::Rfoa => "rfoa",
            Baseline::Foa => "foa",
            Baseline::Isotropic => "isotropic",
            Baseline::RandomOrient => "random_orient",
            Baseline::Discrete => "discrete",
        }
    }

    pub fn parse(s: &str) -> Result<Baseline> {
        Baseline::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| HarnessError::UnknownBaseline(s.to_string()))
    }
}

/// One row of a convergence trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    /// `ln 2 · (R − R_e)` in nats (worst receiver for multicast).
    pub objective: f64,
    pub secrecy_rate: f64,
    /// Surrogate value (single receiver) or its worst-receiver lower bound.
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    /// Secrecy rate in bits/s/Hz.
    pub secrecy_rate: f64,
    pub iterations: usize,
    /// Final objective in nats.
    pub final_objective: f64,
    pub converged: bool,
    pub trace: Vec<TraceRow>,
    pub orientations: OrientationSet,
    pub beamformers: Beamformers,
}

/// Which blocks the alternating optimization may change.
#[derive(Debug, Clone, Copy)]
struct Blocks {
    tx: bool,
    rx: bool,
}

fn solve(
    scenario: &Scenario,
    init: &OrientationSet,
    init_bf: Option<Beamformers>,
    settings: &SolverSettings,
    blocks: Blocks,
) -> Result<RunOutcome> {
    let model = ChannelModel::new(scenario)?;
    let mut trace = Vec::new();
    if scenario.n_receivers() == 1 {
        let mut cfg = settings.solver();
        cfg.orient.update_tx = blocks.tx;
        cfg.orient.update_rx = blocks.rx;
        let res = run_ao_with(scenario, &model, init, init_bf, &cfg, &mut |r| {
            trace.push(TraceRow {
                iteration: r.iteration,
                objective: r.objective,
                secrecy_rate: r.secrecy_rate,
                bound: r.surrogate,
            })
        })?;
        Ok(RunOutcome {
            secrecy_rate: res.secrecy_rate(),
            iterations: res.iterations(),
            final_objective: res.final_objective(),
            converged: res.converged,
            trace,
            orientations: res.orientations,
            beamformers: res.beamformers,
        })
    } else {
        let mut cfg = settings.multicast();
        cfg.solver.orient.update_tx = blocks.tx;
        cfg.solver.orient.update_rx = blocks.rx;
        let res = run_ao_multicast_with(scenario, &model, init, init_bf, &cfg, &mut |r| {
            trace.push(TraceRow {
                iteration: r.iteration,
                objective: r.objective,
                secrecy_rate: r.secrecy_rate,
                bound: r.lower_bound,
            })
        })?;
        Ok(RunOutcome {
            secrecy_rate: res.secrecy_rate(),
            iterations: res.trace.len(),
            final_objective: res.final_objective(),
            converged: res.converged,
            trace,
            orientations: res.orientations,
            beamformers: res.beamformers,
        })
    }
}

/// Direction uniform by area on the cap.
pub fn uniform_cap_point(rng: &mut ChaCha8Rng, cap: &Cap) -> Vec3 {
    let cos_zenith = 1.0 - rng.random::<f64>() * (1.0 - cap.cos_max());
    boresight(cos_zenith.clamp(-1.0, 1.0).acos(), rng.random_range(0.0..std::f64::consts::TAU))
}

pub fn random_orientations(scenario: &Scenario, seed: u64) -> OrientationSet {
    let mut rng = stream(seed, ORIENTATION);
    let cap = scenario.cap;
    OrientationSet {
        tx: (0..scenario.n_tx()).map(|_| uniform_cap_point(&mut rng, &cap)).collect(),
        rx: scenario
            .receivers
            .iter()
            .map(|r| (0..r.len()).map(|_| uniform_cap_point(&mut rng, &cap)).collect())
            .collect(),
    }
}

/// Every boresight replaced by its nearest codeword.
pub fn quantize(orient: &OrientationSet, codebook: &[Vec3]) -> OrientationSet {
    OrientationSet {
        tx: orient.tx.iter().map(|f| nearest_codeword(f, codebook)).collect(),
        rx: orient
            .rx
            .iter()
            .map(|r| r.iter().map(|f| nearest_codeword(f, codebook)).collect())
            .collect(),
    }
}

/// Runs `baseline` on `scenario`; `seed` keys the random orientations.
pub fn run_baseline(baseline: Baseline, scenario: &Scenario, settings: &SolverSettings, seed: u64) -> Result<RunOutcome> {
    let normal = OrientationSet::panel_normal(scenario);
    let all = Blocks { tx: true, rx: true };
    let frozen = Blocks { tx: false, rx: false };
    match baseline {
        Baseline::Proposed => solve(scenario, &normal, None, settings, all),
        Baseline::Rfoa => solve(scenario, &normal, None, settings, Blocks { tx: true, rx: false }),
        Baseline::Foa => solve(scenario, &normal, None, settings, frozen),
        Baseline::Isotropic => {
            let mut iso = scenario.clone();
            iso.radio.directivity = 0.0;
            solve(&iso, &normal, None, settings, frozen)
        }
        Baseline::RandomOrient => solve(scenario, &random_orientations(scenario, seed), None, settings, frozen),
        Baseline::Discrete => {
            let continuous = solve(scenario, &normal, None, settings, all)?;
            let codebook = fibonacci_cap(CODEBOOK_SIZE, &scenario.cap);
            let snapped = quantize(&continuous.orientations, &codebook);
            let mut out = solve(scenario, &snapped, Some(continuous.beamformers), settings, frozen)?;
            let offset = continuous.iterations;
            for row in &mut out.trace {
                row.iteration += offset;
            }
            out.iterations += offset;
            let mut trace = continuous.trace;
            trace.append(&mut out.trace);
            out.trace = trace;
            Ok(out)
        }
    }
}
