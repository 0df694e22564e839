//! Boresight optimization at fixed beamformers and auxiliaries.
//!
//! With everything but the orientations held fixed, maximizing the MMSE
//! surrogate is the same as minimizing the quadratic channel loss `L`
//! built by [`OrientObjective`]. Each antenna is updated in turn by a
//! Frank-Wolfe step on its cap followed by Armijo backtracking, against the
//! channels as already modified by the antennas before it.

use log::debug;

use crate::channel::{ChannelModel, Channels};
use crate::error::Result;
use crate::geometry::{ensure_on_cap, fw_vertex, retract, tangent_project, tie_direction, Cap};
use crate::linalg::{c, re_inner, trace_re, CMat, CVec3, Vec3};
use crate::rate::{Aux, Beamformers, EveAux, LegitAux};
use crate::scenario::{OrientationSet, RadioParams};

#[derive(Debug, Clone, PartialEq)]
pub struct OrientConfig {
    /// Armijo sufficient-decrease constant.
    pub armijo_c: f64,
    /// Backtracking factor.
    pub backtrack: f64,
    pub rho_min: f64,
    /// Maximum number of sweeps over all antennas.
    pub max_sweeps: usize,
    /// Loss decrease (nats) of a full sweep below which the sweeps stop.
    pub tol: f64,
    pub update_tx: bool,
    pub update_rx: bool,
}

impl Default for OrientConfig {
    fn default() -> Self {
        Self {
            armijo_c: 1e-4,
            backtrack: 0.5,
            rho_min: 1e-6,
            max_sweeps: 20,
            tol: 1e-6,
            update_tx: true,
            update_rx: true,
        }
    }
}

/// Loss terms contributed by one legitimate receiver.
#[derive(Debug, Clone)]
pub struct ReceiverTerms {
    /// `UΩUᴴ`.
    pub c: CMat,
    /// `UΩWᴴ`.
    pub d: CMat,
    /// Multiplier on this receiver's terms; 1 for a single receiver.
    pub weight: f64,
}

/// Coefficients of
/// `L = Σ_k μ_k [Tr(H_kW_XH_kᴴC_k) − 2Re Tr(D_kH_kᴴ)]
///      + Tr(H_eW_XH_eᴴC_X) + Tr(H_eR_zH_eᴴC_e) − 2Re Tr(D_eH_eᴴ)`.
#[derive(Debug, Clone)]
pub struct OrientObjective {
    pub w_x: CMat,
    pub r_z: CMat,
    pub receivers: Vec<ReceiverTerms>,
    /// `σ_e⁻² Ω_x`.
    pub c_x: CMat,
    /// `U_eΩ_eU_eᴴ`.
    pub c_e: CMat,
    /// `U_eΩ_eW_eᴴ`.
    pub d_e: CMat,
}

impl ReceiverTerms {
    pub fn new(aux: &LegitAux, bf: &Beamformers, weight: f64) -> Self {
        let u_omega = &aux.u * &aux.omega;
        Self {
            c: &u_omega * aux.u.adjoint(),
            d: u_omega * bf.w.adjoint(),
            weight,
        }
    }
}

impl OrientObjective {
    /// Objective for receiver auxiliaries paired with weights.
    pub fn new(legit: &[(&LegitAux, f64)], eve: &EveAux, bf: &Beamformers, radio: &RadioParams) -> Self {
        let ue_omega = &eve.u_e * &eve.omega_e;
        Self {
            w_x: bf.tx_cov(),
            r_z: bf.noise_cov(),
            receivers: legit.iter().map(|(a, w)| ReceiverTerms::new(a, bf, *w)).collect(),
            c_x: &eve.omega_x * c(1.0 / radio.noise_eve, 0.0),
            c_e: &ue_omega * eve.u_e.adjoint(),
            d_e: ue_omega * bf.w_e.adjoint(),
        }
    }

    pub fn single(aux: &Aux, bf: &Beamformers, radio: &RadioParams) -> Self {
        Self::new(&[(&aux.legit, 1.0)], &aux.eve, bf, radio)
    }

    /// Unweighted loss contribution of receiver `k`.
    pub fn receiver_loss(&self, k: usize, h: &CMat) -> f64 {
        let t = &self.receivers[k];
        trace_re(&(h * &self.w_x * h.adjoint() * &t.c)) - 2.0 * re_inner(&t.d, h)
    }

    pub fn eve_loss(&self, he: &CMat) -> f64 {
        trace_re(&(he * &self.w_x * he.adjoint() * &self.c_x)) + trace_re(&(he * &self.r_z * he.adjoint() * &self.c_e))
            - 2.0 * re_inner(&self.d_e, he)
    }

    /// `receiver_loss(k, new) − receiver_loss(k, old)`, evaluated from the
    /// channel difference so the large orientation-independent part of the
    /// loss cancels exactly.
    pub fn receiver_delta(&self, k: usize, old: &CMat, new: &CMat) -> f64 {
        let t = &self.receivers[k];
        quad_delta(old, new, &self.w_x, &t.c) - 2.0 * re_inner(&t.d, &(new - old))
    }

    pub fn eve_delta(&self, old: &CMat, new: &CMat) -> f64 {
        quad_delta(old, new, &self.w_x, &self.c_x) + quad_delta(old, new, &self.r_z, &self.c_e) - 2.0 * re_inner(&self.d_e, &(new - old))
    }

    /// `loss(new) − loss(old)`.
    pub fn loss_delta(&self, old: &Channels, new: &Channels) -> f64 {
        let legit: f64 = (0..self.receivers.len())
            .filter(|&k| self.receivers[k].weight != 0.0)
            .map(|k| self.receivers[k].weight * self.receiver_delta(k, &old.legit[k], &new.legit[k]))
            .sum();
        legit + self.eve_delta(&old.eve, &new.eve)
    }

    pub fn loss(&self, ch: &Channels) -> f64 {
        let legit: f64 = (0..self.receivers.len())
            .filter(|&k| self.receivers[k].weight != 0.0)
            .map(|k| self.receivers[k].weight * self.receiver_loss(k, &ch.legit[k]))
            .sum();
        legit + self.eve_loss(&ch.eve)
    }

    /// Weighted `G_k = μ_k (C_kH_kW_X − D_k)`.
    pub fn legit_grad_matrix(&self, k: usize, h: &CMat) -> CMat {
        let t = &self.receivers[k];
        (&t.c * h * &self.w_x - &t.d) * c(t.weight, 0.0)
    }

    /// `G_e = C_XH_eW_X + C_eH_eR_z − D_e`.
    pub fn eve_grad_matrix(&self, he: &CMat) -> CMat {
        &self.c_x * he * &self.w_x + &self.c_e * he * &self.r_z - &self.d_e
    }

    /// Euclidean gradient of `L` with respect to transmit boresight `n`.
    pub fn grad_tx(&self, model: &ChannelModel, orient: &OrientationSet, ch: &Channels, n: usize) -> Vec3 {
        let dh = model.grad_tx(orient, n);
        let mut g = Vec3::zeros();
        for (k, h) in ch.legit.iter().enumerate() {
            if self.receivers[k].weight == 0.0 {
                continue;
            }
            let gk = self.legit_grad_matrix(k, h);
            for (m, d) in dh.legit[k].iter().enumerate() {
                g += chain(gk[(m, n)], d);
            }
        }
        let ge = self.eve_grad_matrix(&ch.eve);
        for (q, d) in dh.eve.iter().enumerate() {
            g += chain(ge[(q, n)], d);
        }
        g
    }

    /// Euclidean gradient of `L` with respect to antenna `m` of receiver `k`.
    pub fn grad_rx(&self, model: &ChannelModel, orient: &OrientationSet, ch: &Channels, k: usize, m: usize) -> Vec3 {
        if self.receivers[k].weight == 0.0 {
            return Vec3::zeros();
        }
        let gk = self.legit_grad_matrix(k, &ch.legit[k]);
        model
            .grad_rx(orient, k, m)
            .iter()
            .enumerate()
            .fold(Vec3::zeros(), |acc, (n, d)| acc + chain(gk[(m, n)], d))
    }
}

/// `Tr(H₁AH₁ᴴC) − Tr(H₀AH₀ᴴC) = Re Tr((H₁ − H₀)A(H₁ + H₀)ᴴC)` for Hermitian
/// `A` and `C`.
fn quad_delta(old: &CMat, new: &CMat, a: &CMat, cm: &CMat) -> f64 {
    let delta = new - old;
    let sum = new + old;
    trace_re(&(delta * a * sum.adjoint() * cm))
}

/// `2 Re{conj(g) ∂h}` for a complex 3-vector derivative.
fn chain(g: crate::linalg::C64, dh: &CVec3) -> Vec3 {
    let gc = g.conj();
    Vec3::new(2.0 * (gc * dh.x).re, 2.0 * (gc * dh.y).re, 2.0 * (gc * dh.z).re)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Antenna {
    Tx(usize),
    Rx(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrientStats {
    pub sweeps: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
    /// Total loss decrease accumulated from exact per-step differences.
    pub decrease: f64,
    /// Antenna updates abandoned because no step passed the Armijo test.
    pub line_search_failures: usize,
}

fn antenna_order(orient: &OrientationSet, cfg: &OrientConfig) -> Vec<Antenna> {
    let mut order = Vec::new();
    if cfg.update_tx {
        order.extend((0..orient.tx.len()).map(Antenna::Tx));
    }
    if cfg.update_rx {
        for (k, rx) in orient.rx.iter().enumerate() {
            order.extend((0..rx.len()).map(|m| Antenna::Rx(k, m)));
        }
    }
    order
}

fn boresight_mut(orient: &mut OrientationSet, a: Antenna) -> &mut Vec3 {
    match a {
        Antenna::Tx(n) => &mut orient.tx[n],
        Antenna::Rx(k, m) => &mut orient.rx[k][m],
    }
}

fn refresh(model: &ChannelModel, orient: &OrientationSet, a: Antenna, ch: &mut Channels) {
    match a {
        Antenna::Tx(n) => model.refresh_tx(orient, n, ch),
        Antenna::Rx(k, m) => model.refresh_rx(orient, k, m, ch),
    }
}

/// Single Frank-Wolfe step with Armijo backtracking on one antenna.
/// Returns the (non-positive) loss change and whether the line search gave
/// up.
fn antenna_step(
    obj: &OrientObjective,
    model: &ChannelModel,
    cap: &Cap,
    cfg: &OrientConfig,
    orient: &mut OrientationSet,
    ch: &mut Channels,
    a: Antenna,
) -> Result<(f64, bool)> {
    let f = *boresight_mut(orient, a);
    let egrad = match a {
        Antenna::Tx(n) => obj.grad_tx(model, orient, ch, n),
        Antenna::Rx(k, m) => obj.grad_rx(model, orient, ch, k, m),
    };
    let rgrad = tangent_project(&f, &egrad);
    let Some(y) = fw_vertex(&rgrad, cap, &tie_direction()) else {
        return Ok((0.0, false));
    };
    let dir = y - f;
    let slope = rgrad.dot(&dir);
    if !(slope < 0.0) {
        return Ok((0.0, false));
    }
    let old = ch.clone();
    let mut rho = 1.0;
    while rho >= cfg.rho_min {
        if let Ok(cand) = retract(&f, &dir, rho) {
            let cand = ensure_on_cap(&cand, cap)?;
            *boresight_mut(orient, a) = cand;
            refresh(model, orient, a, ch);
            let delta = obj.loss_delta(&old, ch);
            if delta <= cfg.armijo_c * rho * slope {
                return Ok((delta, false));
            }
        }
        rho *= cfg.backtrack;
    }
    *boresight_mut(orient, a) = f;
    *ch = old;
    Ok((0.0, true))
}

/// Runs blockwise Frank-Wolfe sweeps until one sweep lowers the loss by at
/// most `cfg.tol` or `cfg.max_sweeps` is reached. `ch` must hold the
/// channels of `orient` on entry and is kept in sync.
pub fn optimize_orientations(
    obj: &OrientObjective,
    model: &ChannelModel,
    cap: &Cap,
    cfg: &OrientConfig,
    orient: &mut OrientationSet,
    ch: &mut Channels,
) -> Result<OrientStats> {
    let order = antenna_order(orient, cfg);
    let initial_loss = obj.loss(ch);
    let mut decrease = 0.0;
    let mut failures = 0;
    let mut sweeps = 0;
    while sweeps < cfg.max_sweeps && !order.is_empty() {
        sweeps += 1;
        let mut sweep_change = 0.0;
        for &a in &order {
            let (delta, failed) = antenna_step(obj, model, cap, cfg, orient, ch, a)?;
            sweep_change += delta;
            failures += usize::from(failed);
        }
        decrease -= sweep_change;
        debug!("orientation sweep {sweeps}: loss change {sweep_change:.3e}");
        if -sweep_change <= cfg.tol {
            break;
        }
    }
    Ok(OrientStats {
        sweeps,
        initial_loss,
        final_loss: initial_loss - decrease,
        decrease,
        line_search_failures: failures,
    })
}
