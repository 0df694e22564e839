//! Common-message secrecy towards several legitimate receivers.
//!
//! The worst-receiver rate is handled through the lower bound
//! `F̄ = min_k h₁,k + h₂ + h₃`, which is tight at each receiver's own
//! optimal auxiliaries. Beamformers are updated by [`epigraph`]; orientations
//! by Frank-Wolfe sweeps on a multiplier-weighted loss.

pub mod epigraph;

use log::debug;

use crate::ao_solver::{check_progress, initial_beamformers, relative_change, SolverConfig};
use crate::channel::{ChannelModel, Channels};
use crate::error::{Error, Result};
use crate::linalg::{logdet_hpd, trace_re};
use crate::orient_opt::{optimize_orientations, OrientObjective};
use crate::rate::{eve_rate, h1, h_eve, legit_rate, update_eve_aux, update_legit_aux, Beamformers, EveAux, LegitAux};
use crate::scenario::{OrientationSet, RadioParams, Scenario};

pub use epigraph::{solve_epigraph, EpigraphConfig, EpigraphProblem, EpigraphSolution, ReceiverBlock};

/// `min_k R_k − R_e`, unclamped, in bits/s/Hz.
pub fn multicast_rate_gap(ch: &Channels, bf: &Beamformers, radio: &RadioParams) -> Result<f64> {
    let re = eve_rate(&ch.eve, bf, radio.noise_eve)?;
    let mut worst = f64::INFINITY;
    for h in &ch.legit {
        worst = worst.min(legit_rate(h, bf, radio.noise_rx)?);
    }
    Ok(worst - re)
}

/// `min_k [R_k − R_e]₊`.
pub fn multicast_sr(ch: &Channels, bf: &Beamformers, radio: &RadioParams) -> Result<f64> {
    Ok(multicast_rate_gap(ch, bf, radio)?.max(0.0))
}

pub fn update_multicast_aux(ch: &Channels, bf: &Beamformers, radio: &RadioParams) -> Result<(Vec<LegitAux>, EveAux)> {
    let legit = ch
        .legit
        .iter()
        .map(|h| update_legit_aux(h, bf, radio.noise_rx))
        .collect::<Result<Vec<_>>>()?;
    Ok((legit, update_eve_aux(&ch.eve, bf, radio.noise_eve)?))
}

/// `F̄ = min_k h₁,k + h₂ + h₃` in nats.
pub fn lower_bound_f(ch: &Channels, bf: &Beamformers, legit: &[LegitAux], eve: &EveAux, radio: &RadioParams) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for (h, aux) in ch.legit.iter().zip(legit) {
        worst = worst.min(h1(h, bf, aux, radio.noise_rx)?);
    }
    Ok(worst + h_eve(&ch.eve, bf, eve, radio.noise_eve)?)
}

/// `C_k = ln det Ω_k + d − Tr(Ω_k + σ_k² Ω_kU_kᴴU_k)`.
pub fn receiver_constant(aux: &LegitAux, noise: f64) -> Result<f64> {
    let d = aux.omega.nrows() as f64;
    let logdet = logdet_hpd(&aux.omega, "legitimate MSE weight")?;
    let extra = trace_re(&aux.omega) + noise * trace_re(&(&aux.omega * aux.u.adjoint() * &aux.u));
    Ok(logdet + d - extra)
}

/// Beamforming subproblem for fixed auxiliaries and channels.
pub fn epigraph_problem(ch: &Channels, legit: &[LegitAux], eve: &EveAux, radio: &RadioParams) -> Result<EpigraphProblem> {
    let receivers = ch
        .legit
        .iter()
        .zip(legit)
        .map(|(h, aux)| {
            let u_omega = &aux.u * &aux.omega;
            Ok(ReceiverBlock {
                hbar: h.adjoint() * &u_omega * aux.u.adjoint() * h,
                b: h.adjoint() * u_omega,
                constant: receiver_constant(aux, radio.noise_rx)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let he = &ch.eve;
    let hbar_ex = he.adjoint() * &eve.omega_x * he * crate::linalg::c(1.0 / radio.noise_eve, 0.0);
    let ue_omega = &eve.u_e * &eve.omega_e;
    let hbar_e = he.adjoint() * &ue_omega * eve.u_e.adjoint() * he + &hbar_ex;
    Ok(EpigraphProblem {
        receivers,
        hbar_ex,
        hbar_e,
        b_e: he.adjoint() * ue_omega,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticastConfig {
    pub solver: SolverConfig,
    pub epigraph: EpigraphConfig,
    /// `β₀` of the multiplier stepsize `β₀/√t`.
    pub multiplier_step: f64,
    pub initial_multiplier: f64,
}

impl Default for MulticastConfig {
    fn default() -> Self {
        Self {
            solver: SolverConfig::default(),
            epigraph: EpigraphConfig::default(),
            multiplier_step: 0.1,
            initial_multiplier: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MulticastRecord {
    pub iteration: usize,
    /// `ln 2 · (min_k R_k − R_e)` after the iteration.
    pub objective: f64,
    pub secrecy_rate: f64,
    /// `F̄` at the end of the iteration with that iteration's auxiliaries.
    pub lower_bound: f64,
    /// Slack `ϑ = max_k g_k`.
    pub slack: f64,
    pub multipliers: Vec<f64>,
    /// Whether the orientation step was kept.
    pub orientation_accepted: bool,
}

#[derive(Debug, Clone)]
pub struct MulticastResult {
    pub initial_objective: f64,
    pub trace: Vec<MulticastRecord>,
    pub beamformers: Beamformers,
    pub orientations: OrientationSet,
    pub channels: Channels,
    pub converged: bool,
}

impl MulticastResult {
    pub fn final_objective(&self) -> f64 {
        self.trace.last().map_or(self.initial_objective, |r| r.objective)
    }

    pub fn secrecy_rate(&self) -> f64 {
        (self.final_objective() / std::f64::consts::LN_2).max(0.0)
    }
}

/// Per-receiver `g_k = receiver_loss_k − C_k`.
fn receiver_terms(obj: &OrientObjective, constants: &[f64], ch: &Channels) -> Vec<f64> {
    ch.legit
        .iter()
        .enumerate()
        .map(|(k, h)| obj.receiver_loss(k, h) - constants[k])
        .collect()
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn run_ao_multicast(scenario: &Scenario, init: &OrientationSet, cfg: &MulticastConfig) -> Result<MulticastResult> {
    let model = ChannelModel::new(scenario)?;
    run_ao_multicast_with(scenario, &model, init, None, cfg, &mut |_| {})
}

pub fn run_ao_multicast_with(
    scenario: &Scenario,
    model: &ChannelModel,
    init: &OrientationSet,
    init_bf: Option<Beamformers>,
    cfg: &MulticastConfig,
    sink: &mut dyn FnMut(&MulticastRecord),
) -> Result<MulticastResult> {
    let scfg = &cfg.solver;
    scfg.validate()?;
    if !(cfg.multiplier_step > 0.0 && cfg.initial_multiplier >= 0.0) {
        return Err(Error::InvalidParameter("multiplier step must be positive and the initial multiplier non-negative".into()));
    }
    init.validate(scenario)?;
    let radio = &scenario.radio;
    let k_count = scenario.n_receivers();
    let mut orient = init.clone();
    let mut ch = model.build(&orient);
    let mut bf = init_bf.unwrap_or_else(|| initial_beamformers(&ch.legit, scenario.streams, scenario.p_max, scfg.init_signal_share));
    if bf.power() > scenario.p_max * (1.0 + 1e-9) {
        return Err(Error::InvalidParameter("initial beamformers exceed the power budget".into()));
    }
    let initial_objective = multicast_rate_gap(&ch, &bf, radio)? * std::f64::consts::LN_2;
    let mut previous = initial_objective;
    let mut multipliers = vec![cfg.initial_multiplier; k_count];
    let mut trace = Vec::new();
    let mut converged = false;
    let orient_active = scfg.orient.update_tx || scfg.orient.update_rx;

    for iteration in 1..=scfg.max_outer {
        let (legit_aux, eve_aux) = update_multicast_aux(&ch, &bf, radio)?;

        if scfg.update_beamformers {
            let problem = epigraph_problem(&ch, &legit_aux, &eve_aux, radio)?;
            let sol = solve_epigraph(&problem, scenario.p_max, &cfg.epigraph)?;
            if !sol.converged {
                debug!("epigraph gap {:e} after {} iterations", sol.gap, sol.iterations);
            }
            if sol.objective <= problem.objective(&bf) {
                bf = sol.bf;
            } else {
                debug!("epigraph solution worse than the current beamformers; kept previous");
            }
        }

        let constants = legit_aux
            .iter()
            .map(|a| receiver_constant(a, radio.noise_rx))
            .collect::<Result<Vec<_>>>()?;
        let pairs: Vec<(&LegitAux, f64)> = legit_aux.iter().zip(&multipliers).map(|(a, &m)| (a, m)).collect();
        let obj = OrientObjective::new(&pairs, &eve_aux, &bf, radio);
        let mut g = receiver_terms(&obj, &constants, &ch);
        let mut accepted = false;
        if orient_active {
            let saved = (orient.clone(), ch.clone());
            optimize_orientations(&obj, model, &scenario.cap, &scfg.orient, &mut orient, &mut ch)?;
            // compare max_k g_k + eve loss before and after through exact
            // differences; the absolute values carry a large constant
            let g_new: Vec<f64> = g
                .iter()
                .enumerate()
                .map(|(k, gk)| gk + obj.receiver_delta(k, &saved.1.legit[k], &ch.legit[k]))
                .collect();
            let change = max_of(&g_new) - max_of(&g) + obj.eve_delta(&saved.1.eve, &ch.eve);
            // with one receiver the change is the full loss difference,
            // which the sweeps never raise; skip the guard so rounding
            // cannot revert a valid step
            if k_count == 1 || change <= 0.0 {
                accepted = true;
                g = g_new;
            } else {
                debug!("weighted orientation step raised the worst-receiver loss by {change:e}; reverted");
                (orient, ch) = saved;
            }
        }

        let slack = max_of(&g);
        let beta = cfg.multiplier_step / (iteration as f64).sqrt();
        for (mu, gk) in multipliers.iter_mut().zip(&g) {
            *mu = (*mu + beta * (gk - slack)).max(0.0);
        }

        let lower_bound = lower_bound_f(&ch, &bf, &legit_aux, &eve_aux, radio)?;
        let gap = multicast_rate_gap(&ch, &bf, radio)?;
        let objective = gap * std::f64::consts::LN_2;
        check_progress(iteration, previous, objective, scfg.monotone_slack)?;
        let record = MulticastRecord {
            iteration,
            objective,
            secrecy_rate: gap.max(0.0),
            lower_bound,
            slack,
            multipliers: multipliers.clone(),
            orientation_accepted: accepted,
        };
        sink(&record);
        trace.push(record);
        let change = relative_change(previous, objective);
        previous = objective;
        if change <= scfg.outer_tol {
            converged = true;
            break;
        }
    }
    Ok(MulticastResult {
        initial_objective,
        trace,
        beamformers: bf,
        orientations: orient,
        channels: ch,
        converged,
    })
}
