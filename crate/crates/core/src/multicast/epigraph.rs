//! Beamforming for the worst-receiver surrogate.
//!
//! The subproblem `min_{‖x‖² ≤ P} max_k q_k(x) + r(x)` is convex. It is
//! solved through its dual over receiver weights `λ` on the probability
//! simplex: for fixed `λ` the weighted problem has the same semi-closed
//! form as the single-receiver update, and the dual function is maximized
//! by projected gradient ascent, whose gradient is the vector of `q_k` at
//! the inner minimizer. The best primal point seen is returned once the
//! duality gap closes.

use log::debug;

use crate::ao_solver::{solve_power_constrained, QuadraticUpdate};
use crate::error::Result;
use crate::linalg::{c, re_inner, trace_re, CMat};
use crate::rate::Beamformers;

/// Quadratic epigraph term of one receiver:
/// `q_k = Tr(WᴴH̄_kW) + Tr(W_eᴴH̄_kW_e) − 2Re Tr(B_kᴴW) − C_k`.
#[derive(Debug, Clone)]
pub struct ReceiverBlock {
    pub hbar: CMat,
    pub b: CMat,
    pub constant: f64,
}

#[derive(Debug, Clone)]
pub struct EpigraphProblem {
    pub receivers: Vec<ReceiverBlock>,
    /// `σ_e⁻² H_eᴴΩ_xH_e`, acting on the precoder.
    pub hbar_ex: CMat,
    /// `H_eᴴU_eΩ_eU_eᴴH_e + σ_e⁻² H_eᴴΩ_xH_e`, acting on the noise factor.
    pub hbar_e: CMat,
    /// `H_eᴴU_eΩ_e`.
    pub b_e: CMat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpigraphConfig {
    /// Duality gap, relative to `max(1, |objective|)`, at which to stop.
    pub gap_tol: f64,
    pub max_iter: usize,
    pub bisection_tol: f64,
    pub bisection_max: usize,
}

impl Default for EpigraphConfig {
    fn default() -> Self {
        Self {
            gap_tol: 1e-9,
            max_iter: 2000,
            bisection_tol: 1e-8,
            bisection_max: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpigraphSolution {
    pub bf: Beamformers,
    /// `max_k q_k` at the returned point.
    pub slack: f64,
    /// Primal objective `max_k q_k + r`.
    pub objective: f64,
    pub weights: Vec<f64>,
    pub gap: f64,
    pub iterations: usize,
    /// Whether the gap closed to `gap_tol`. Otherwise the best primal
    /// point found is returned anyway.
    pub converged: bool,
}

fn quad(w: &CMat, a: &CMat) -> f64 {
    trace_re(&(w.adjoint() * a * w))
}

impl EpigraphProblem {
    pub fn q(&self, k: usize, bf: &Beamformers) -> f64 {
        let r = &self.receivers[k];
        quad(&bf.w, &r.hbar) + quad(&bf.w_e, &r.hbar) - 2.0 * re_inner(&bf.w, &r.b) - r.constant
    }

    pub fn q_all(&self, bf: &Beamformers) -> Vec<f64> {
        (0..self.receivers.len()).map(|k| self.q(k, bf)).collect()
    }

    /// Receiver-independent part `r(x)`.
    pub fn shared(&self, bf: &Beamformers) -> f64 {
        quad(&bf.w, &self.hbar_ex) + quad(&bf.w_e, &self.hbar_e) - 2.0 * re_inner(&bf.w_e, &self.b_e)
    }

    pub fn objective(&self, bf: &Beamformers) -> f64 {
        self.q_all(bf).into_iter().fold(f64::NEG_INFINITY, f64::max) + self.shared(bf)
    }

    /// Minimizer of `Σ λ_k q_k + r` over the power ball, and the dual value.
    pub fn weighted_solve(&self, weights: &[f64], p_max: f64, cfg: &EpigraphConfig) -> Result<(Beamformers, f64, Vec<f64>)> {
        let n = self.hbar_e.nrows();
        let mut hsum = CMat::zeros(n, n);
        let mut bsum = CMat::zeros(n, self.receivers[0].b.ncols());
        for (r, &l) in self.receivers.iter().zip(weights) {
            if l != 0.0 {
                hsum += &r.hbar * c(l, 0.0);
                bsum += &r.b * c(l, 0.0);
            }
        }
        let sig = QuadraticUpdate::new(&(&hsum + &self.hbar_ex), &bsum);
        let an = QuadraticUpdate::new(&(hsum + &self.hbar_e), &self.b_e);
        let sol = solve_power_constrained(&sig, &an, p_max, cfg.bisection_tol, cfg.bisection_max)?;
        let q = self.q_all(&sol.bf);
        let dual = q.iter().zip(weights).map(|(q, l)| q * l).sum::<f64>() + self.shared(&sol.bf);
        Ok((sol.bf, dual, q))
    }
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|x| (x - tau).max(0.0)).collect()
}

pub fn solve_epigraph(problem: &EpigraphProblem, p_max: f64, cfg: &EpigraphConfig) -> Result<EpigraphSolution> {
    let k = problem.receivers.len();
    let mut weights = vec![1.0 / k as f64; k];
    let (bf, mut dual, _) = problem.weighted_solve(&weights, p_max, cfg)?;
    let mut best_primal = problem.objective(&bf);
    let mut best_bf = bf;
    let mut best_dual = dual;
    let mut best_weights = weights.clone();
    let mut previous = weights.clone();
    let mut momentum = 1.0_f64;
    let mut step = 1.0;
    let mut iterations = 0;
    let scale = |p: f64| p.abs().max(1.0);

    // accelerated projected gradient ascent on the concave dual, with
    // backtracking on the step and a restart whenever the dual drops
    while iterations < cfg.max_iter && best_primal - best_dual > cfg.gap_tol * scale(best_primal) {
        iterations += 1;
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let beta = (momentum - 1.0) / next_momentum;
        let y: Vec<f64> = project_simplex(&weights.iter().zip(&previous).map(|(l, p)| l + beta * (l - p)).collect::<Vec<_>>());
        let (bf_y, dual_y, grad_y) = problem.weighted_solve(&y, p_max, cfg)?;
        let primal_y = problem.objective(&bf_y);
        if primal_y < best_primal {
            best_primal = primal_y;
            best_bf = bf_y;
        }
        let mut accepted = None;
        for _ in 0..60 {
            let cand = project_simplex(&y.iter().zip(&grad_y).map(|(l, g)| l + step * g).collect::<Vec<_>>());
            let delta: Vec<f64> = cand.iter().zip(&y).map(|(a, b)| a - b).collect();
            let dist_sq: f64 = delta.iter().map(|d| d * d).sum();
            if dist_sq == 0.0 {
                break;
            }
            let (bf, value, _) = problem.weighted_solve(&cand, p_max, cfg)?;
            let primal = problem.objective(&bf);
            if primal < best_primal {
                best_primal = primal;
                best_bf = bf;
            }
            let linear: f64 = grad_y.iter().zip(&delta).map(|(g, d)| g * d).sum();
            if value >= dual_y + linear - dist_sq / (2.0 * step) {
                accepted = Some((cand, value));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, value)) = accepted else {
            if dual_y > best_dual {
                best_dual = dual_y;
                best_weights = y;
            }
            break;
        };
        step *= 1.5;
        if value < dual {
            momentum = 1.0;
            previous = weights.clone();
        } else {
            momentum = next_momentum;
            previous = std::mem::replace(&mut weights, cand);
            dual = value;
        }
        for (d, w) in [(dual_y, &y), (dual, &weights)] {
            if d > best_dual {
                best_dual = d;
                best_weights = w.clone();
            }
        }
    }

    let gap = (best_primal - best_dual).max(0.0);
    let converged = gap <= cfg.gap_tol * scale(best_primal);
    if !converged {
        debug!("epigraph solver stopped at relative gap {:e} after {iterations} iterations", gap / scale(best_primal));
    }
    let slack = problem.q_all(&best_bf).into_iter().fold(f64::NEG_INFINITY, f64::max);
    Ok(EpigraphSolution {
        bf: best_bf,
        slack,
        objective: best_primal,
        weights: best_weights,
        gap,
        iterations,
        converged,
    })
}
