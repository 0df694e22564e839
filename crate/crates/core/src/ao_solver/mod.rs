//! Alternating optimization of auxiliaries, beamformers and boresights.

pub mod beamforming;

use log::debug;

use crate::channel::{ChannelModel, Channels};
use crate::error::{Error, Result};
use crate::linalg::{c, dominant_eigenvectors, identity, CMat};
use crate::orient_opt::{optimize_orientations, OrientConfig, OrientObjective};
use crate::rate::{rate_gap, surrogate_f, update_auxiliaries, Beamformers};
use crate::scenario::{OrientationSet, Scenario};

pub use beamforming::{power_curve, quadratic_blocks, quadratic_cost, solve_power_constrained, xi_upper_bound, BeamformSolution, QuadraticUpdate};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Relative change of the objective at which the outer loop stops.
    pub outer_tol: f64,
    pub max_outer: usize,
    /// Relative power mismatch accepted by the multiplier bisection.
    pub bisection_tol: f64,
    pub bisection_max: usize,
    pub orient: OrientConfig,
    /// Share of the budget given to the precoder at initialization.
    pub init_signal_share: f64,
    pub update_beamformers: bool,
    /// Absolute decrease of the objective tolerated between outer
    /// iterations before the run is aborted.
    pub monotone_slack: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            outer_tol: 1e-4,
            max_outer: 100,
            bisection_tol: 1e-8,
            bisection_max: 200,
            orient: OrientConfig::default(),
            init_signal_share: 0.9,
            update_beamformers: true,
            monotone_slack: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let o = &self.orient;
        let ok = self.outer_tol > 0.0
            && self.bisection_tol > 0.0
            && self.max_outer > 0
            && self.bisection_max > 0
            && o.armijo_c > 0.0
            && o.armijo_c < 1.0
            && o.backtrack > 0.0
            && o.backtrack < 1.0
            && o.rho_min > 0.0
            && o.tol > 0.0
            && (0.0..=1.0).contains(&self.init_signal_share);
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid solver configuration {self:?}")))
        }
    }
}

/// Equal-power precoder on the dominant right singular vectors of the
/// stacked legitimate channels, plus isotropic artificial noise.
pub fn initial_beamformers(legit: &[CMat], streams: usize, p_max: f64, signal_share: f64) -> Beamformers {
    let n = legit[0].ncols();
    let gram = legit.iter().fold(CMat::zeros(n, n), |acc, h| acc + h.adjoint() * h);
    let w = dominant_eigenvectors(&gram, streams) * c((signal_share * p_max / streams as f64).sqrt(), 0.0);
    let w_e = identity(n) * c(((1.0 - signal_share) * p_max / n as f64).sqrt(), 0.0);
    Beamformers { w, w_e }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Objective `ln 2 · (R − R_e)` in nats after the iteration.
    pub objective: f64,
    /// `[R − R_e]₊` in bits/s/Hz.
    pub secrecy_rate: f64,
    /// Surrogate value before the auxiliary refresh.
    pub surrogate: f64,
    pub orientation_sweeps: usize,
}

#[derive(Debug, Clone)]
pub struct AoResult {
    pub initial_objective: f64,
    pub trace: Vec<IterationRecord>,
    pub beamformers: Beamformers,
    pub orientations: OrientationSet,
    pub channels: Channels,
    pub converged: bool,
}

impl AoResult {
    pub fn final_objective(&self) -> f64 {
        self.trace.last().map_or(self.initial_objective, |r| r.objective)
    }

    pub fn secrecy_rate(&self) -> f64 {
        (self.final_objective() / std::f64::consts::LN_2).max(0.0)
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

pub(crate) fn check_progress(iteration: usize, previous: f64, current: f64, slack: f64) -> Result<()> {
    if current < previous - slack * previous.abs().max(1.0) {
        return Err(Error::MonotonicityViolated {
            iteration,
            previous,
            current,
        });
    }
    Ok(())
}

pub(crate) fn relative_change(previous: f64, current: f64) -> f64 {
    (current - previous).abs() / (current.abs() + 1e-12)
}

/// Alternating optimization for a single legitimate receiver.
pub fn run_ao(scenario: &Scenario, init: &OrientationSet, cfg: &SolverConfig) -> Result<AoResult> {
    let model = ChannelModel::new(scenario)?;
    run_ao_with(scenario, &model, init, None, cfg, &mut |_| {})
}

/// [`run_ao`] with an explicit channel model, optional starting
/// beamformers and a per-iteration sink.
pub fn run_ao_with(
    scenario: &Scenario,
    model: &ChannelModel,
    init: &OrientationSet,
    init_bf: Option<Beamformers>,
    cfg: &SolverConfig,
    sink: &mut dyn FnMut(&IterationRecord),
) -> Result<AoResult> {
    cfg.validate()?;
    if scenario.n_receivers() != 1 {
        return Err(Error::InvalidParameter("single-receiver solver called with several receivers".into()));
    }
    init.validate(scenario)?;
    let radio = &scenario.radio;
    let mut orient = init.clone();
    let mut ch = model.build(&orient);
    let mut bf = init_bf.unwrap_or_else(|| initial_beamformers(&ch.legit, scenario.streams, scenario.p_max, cfg.init_signal_share));
    if bf.power() > scenario.p_max * (1.0 + 1e-9) {
        return Err(Error::InvalidParameter("initial beamformers exceed the power budget".into()));
    }
    let initial_objective = rate_gap(&ch.legit[0], &ch.eve, &bf, radio)? * std::f64::consts::LN_2;
    let mut previous = initial_objective;
    let mut trace = Vec::new();
    let mut converged = false;
    let orient_active = cfg.orient.update_tx || cfg.orient.update_rx;

    for iteration in 1..=cfg.max_outer {
        let aux = update_auxiliaries(&ch.legit[0], &ch.eve, &bf, radio)?;
        let surrogate = surrogate_f(&ch.legit[0], &ch.eve, &bf, &aux, radio)?;

        if cfg.update_beamformers {
            let (sig, an) = quadratic_blocks(&ch.legit[0], &ch.eve, &aux, radio.noise_eve);
            let sol = solve_power_constrained(&sig, &an, scenario.p_max, cfg.bisection_tol, cfg.bisection_max)?;
            let candidate = surrogate_f(&ch.legit[0], &ch.eve, &sol.bf, &aux, radio)?;
            if candidate >= surrogate {
                bf = sol.bf;
            } else {
                debug!("beamformer update lowered the surrogate by {:e}; kept previous", surrogate - candidate);
            }
        }

        let mut sweeps = 0;
        if orient_active {
            let obj = OrientObjective::single(&aux, &bf, radio);
            let stats = optimize_orientations(&obj, model, &scenario.cap, &cfg.orient, &mut orient, &mut ch)?;
            sweeps = stats.sweeps;
            if stats.line_search_failures > 0 {
                debug!("{} antenna line searches gave up", stats.line_search_failures);
            }
        }

        let gap = rate_gap(&ch.legit[0], &ch.eve, &bf, radio)?;
        let objective = gap * std::f64::consts::LN_2;
        check_progress(iteration, previous, objective, cfg.monotone_slack)?;
        let record = IterationRecord {
            iteration,
            objective,
            secrecy_rate: gap.max(0.0),
            surrogate,
            orientation_sweeps: sweeps,
        };
        sink(&record);
        trace.push(record);
        let change = relative_change(previous, objective);
        previous = objective;
        if change <= cfg.outer_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        debug!("alternating optimization stopped at the iteration cap ({})", cfg.max_outer);
    }
    Ok(AoResult {
        initial_objective,
        trace,
        beamformers: bf,
        orientations: orient,
        channels: ch,
        converged,
    })
}
