//! Single-antenna line-of-sight wiretap solver.
//!
//! The receive boresight is the cap projection of the arrival direction.
//! The transmit boresight is searched on the plane spanned by the
//! directions to the receiver and to the eavesdropper, parameterized by the
//! angle `θ` by which it is turned away from the eavesdropper.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::channel::hinge_pow;
use crate::error::{Error, Result};
use crate::geometry::{ensure_on_cap, project_to_cap, Cap};
use crate::linalg::{Mat3, Vec3};
use crate::scenario::{RadioParams, Scenario};

/// Default number of grid points of the 1-D search.
pub const DEFAULT_GRID: usize = 4096;
/// `|sin ψ|` below which the receiver and eavesdropper directions are
/// treated as collinear.
pub const COLLINEAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SisoProblem {
    pub tx: Vec3,
    pub rx: Vec3,
    pub eve: Vec3,
    pub tx_rotation: Mat3,
    pub rx_rotation: Mat3,
    pub cap: Cap,
    pub radio: RadioParams,
    pub p_max: f64,
}

impl SisoProblem {
    /// Extracts the single-antenna problem from a scenario with one element
    /// per panel. Clusters are ignored.
    pub fn from_scenario(sc: &Scenario) -> Result<Self> {
        if sc.n_tx() != 1 || sc.n_rx() != 1 || sc.n_eve() != 1 || sc.n_receivers() != 1 {
            return Err(Error::InvalidParameter("single-antenna solver needs one element per panel".into()));
        }
        Ok(Self {
            tx: sc.tx.origin(),
            rx: sc.receivers[0].origin(),
            eve: sc.eve.origin(),
            tx_rotation: *sc.tx.rotation(),
            rx_rotation: *sc.receivers[0].rotation(),
            cap: sc.cap,
            radio: sc.radio.clone(),
            p_max: sc.p_max,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SisoGeometry {
    pub u_tr: Vec3,
    pub u_rt: Vec3,
    pub u_te: Vec3,
    /// Angle between the receiver and eavesdropper directions.
    pub psi: f64,
    pub v1: Vec3,
    /// `None` when the two directions are collinear.
    pub v2: Option<Vec3>,
    pub gamma_b: f64,
    pub gamma_e: f64,
}

impl SisoGeometry {
    pub fn new(problem: &SisoProblem) -> Result<Self> {
        problem.radio.validate()?;
        let to_rx = problem.rx - problem.tx;
        let to_eve = problem.eve - problem.tx;
        let (d_r, d_e) = (to_rx.norm(), to_eve.norm());
        if !(d_r > 0.0 && d_e > 0.0) {
            return Err(Error::DegenerateGeometry("receiver or eavesdropper coincides with the transmitter".into()));
        }
        let u_tr = to_rx / d_r;
        let u_te = to_eve / d_e;
        let cos_psi = u_tr.dot(&u_te).clamp(-1.0, 1.0);
        let psi = cos_psi.acos();
        let v2 = if psi.sin().abs() < COLLINEAR_TOL {
            None
        } else {
            Some((u_te - u_tr * cos_psi).normalize())
        };
        let radio = &problem.radio;
        let beta0 = radio.beta0();
        let g0 = radio.g0();
        let a_sq = beta0 * g0 * g0 / (d_r * d_r);
        let ae_sq = beta0 * g0 / (d_e * d_e);
        Ok(Self {
            u_tr,
            u_rt: -u_tr,
            u_te,
            psi,
            v1: u_tr,
            v2,
            gamma_b: problem.p_max * a_sq / radio.noise_rx,
            gamma_e: problem.p_max * ae_sq / radio.noise_eve,
        })
    }

    /// Leakage-nulling angle `max(0, π/2 − ψ)`.
    pub fn nulling_angle(&self) -> f64 {
        (FRAC_PI_2 - self.psi).max(0.0)
    }

    /// Global boresight `cos θ v₁ − sin θ v₂`.
    pub fn planar_boresight(&self, theta: f64) -> Vec3 {
        let v2 = self.v2.unwrap_or_else(Vec3::zeros);
        self.v1 * theta.cos() - v2 * theta.sin()
    }
}

/// Cap-optimal receive boresight and the resulting receive gain factor.
pub fn align_receive(geom: &SisoGeometry, cap: &Cap, rx_rotation: &Mat3, p: f64) -> Result<(Vec3, f64)> {
    let f = project_to_cap(&(rx_rotation.transpose() * geom.u_rt), cap)?;
    let gain = hinge_pow((rx_rotation * f).dot(&geom.u_rt), p);
    Ok((f, gain))
}

/// Sub-interval of `[0, π/2]` on which the planar boresight satisfies the
/// transmit cap, i.e. `a cos θ − b sin θ ≥ cos θ_max`.
pub fn feasible_interval(geom: &SisoGeometry, cap: &Cap, tx_rotation: &Mat3) -> Option<(f64, f64)> {
    let axis = tx_rotation * Vec3::z();
    let a = geom.v1.dot(&axis);
    let b = geom.v2.map_or(0.0, |v| v.dot(&axis));
    harmonic_interval(a, b, cap.cos_max())
}

/// `{θ ∈ [0, π/2] : a cos θ − b sin θ ≥ c}` for `c ≥ 0`.
pub fn harmonic_interval(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let rho = a.hypot(b);
    if rho == 0.0 {
        return (c <= 0.0).then_some((0.0, FRAC_PI_2));
    }
    if rho < c {
        return None;
    }
    // a cos θ − b sin θ = ρ cos(θ + φ)
    let phi = b.atan2(a);
    let alpha = (c / rho).min(1.0).acos();
    for k in -1..=2 {
        let shift = 2.0 * PI * k as f64;
        let lo = (-phi - alpha + shift).max(0.0);
        let hi = (-phi + alpha + shift).min(FRAC_PI_2);
        if lo <= hi {
            return Some((lo, hi));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq)]
pub struct SisoSolution {
    /// Planar rotation angle; `None` when the search set was empty and the
    /// projected fallback was used.
    pub theta: Option<f64>,
    /// Local transmit boresight.
    pub f_tx: Vec3,
    /// Local receive boresight.
    pub f_rx: Vec3,
    pub rx_gain: f64,
    pub gamma_bar_b: f64,
    pub theta0: f64,
    pub interval: Option<(f64, f64)>,
    /// Value of the planar objective at the solution (may be negative).
    pub objective: f64,
    /// Eavesdropper transmit directional factor at the solution.
    pub eve_gain: f64,
    pub transmit: bool,
    pub secrecy_rate: f64,
    /// Sampled `(θ, J(θ))` pairs over the search interval.
    pub landscape: Vec<(f64, f64)>,
}

struct Planar<'a> {
    geom: &'a SisoGeometry,
    gamma_bar_b: f64,
    p: f64,
}

impl Planar<'_> {
    /// Eavesdropper factor, exactly zero from the nulling angle on.
    fn eve_factor(&self, theta: f64) -> f64 {
        if theta >= self.geom.nulling_angle() {
            0.0
        } else {
            hinge_pow((self.geom.psi + theta).cos(), self.p)
        }
    }

    fn objective(&self, theta: f64) -> f64 {
        let legit = hinge_pow(theta.cos(), 2.0 * self.p);
        let eve = self.eve_factor(theta).powi(2);
        (1.0 + self.gamma_bar_b * legit).log2() - (1.0 + self.geom.gamma_e * eve).log2()
    }
}

/// Objective for an arbitrary global transmit boresight.
fn direct_objective(geom: &SisoGeometry, gamma_bar_b: f64, p: f64, f_global: &Vec3) -> (f64, f64) {
    let legit = hinge_pow(f_global.dot(&geom.u_tr), 2.0 * p);
    let eve = hinge_pow(f_global.dot(&geom.u_te), p);
    ((1.0 + gamma_bar_b * legit).log2() - (1.0 + geom.gamma_e * eve * eve).log2(), eve)
}

/// Grid search over `[lo, hi]` with the landmark angles injected, followed
/// by a golden-section polish around the best grid cell.
fn search(planar: &Planar, lo: f64, hi: f64, grid: usize, landmarks: &[f64]) -> (f64, f64, Vec<(f64, f64)>) {
    let grid = grid.max(2);
    let step = (hi - lo) / (grid - 1) as f64;
    let mut samples: Vec<(f64, f64)> = (0..grid)
        .map(|i| {
            let t = if i + 1 == grid { hi } else { lo + step * i as f64 };
            (t, planar.objective(t))
        })
        .collect();
    let (mut best_t, mut best_j) = samples.iter().copied().fold((lo, f64::NEG_INFINITY), |b, s| if s.1 > b.1 { s } else { b });
    for &t in landmarks {
        if (lo..=hi).contains(&t) {
            let j = planar.objective(t);
            samples.push((t, j));
            if j > best_j {
                (best_t, best_j) = (t, j);
            }
        }
    }
    if step > 0.0 {
        let (mut a, mut b) = ((best_t - step).max(lo), (best_t + step).min(hi));
        let ratio = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..80 {
            let c = b - ratio * (b - a);
            let d = a + ratio * (b - a);
            if planar.objective(c) >= planar.objective(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let t = 0.5 * (a + b);
        let j = planar.objective(t);
        if j > best_j {
            (best_t, best_j) = (t, j);
        }
    }
    samples.sort_by(|x, y| x.0.total_cmp(&y.0));
    (best_t, best_j, samples)
}

pub fn solve_siso(problem: &SisoProblem, grid: usize) -> Result<SisoSolution> {
    let geom = SisoGeometry::new(problem)?;
    let cap = &problem.cap;
    let p = problem.radio.directivity;
    let (f_rx, rx_gain) = align_receive(&geom, cap, &problem.rx_rotation, p)?;
    let gamma_bar_b = geom.gamma_b * rx_gain * rx_gain;
    let theta0 = geom.nulling_angle();
    let rt = problem.tx_rotation.transpose();
    let planar = Planar {
        geom: &geom,
        gamma_bar_b,
        p,
    };

    let finish = |theta: Option<f64>, f_tx: Vec3, objective: f64, eve_gain: f64, interval, landscape| {
        let transmit = objective > 0.0;
        SisoSolution {
            theta,
            f_tx,
            f_rx,
            rx_gain,
            gamma_bar_b,
            theta0,
            interval,
            objective,
            eve_gain,
            transmit,
            secrecy_rate: if transmit { objective } else { 0.0 },
            landscape,
        }
    };

    if geom.v2.is_none() {
        // collinear: the best one can do is point at the receiver
        let f_tx = project_to_cap(&(rt * geom.u_tr), cap)?;
        let (objective, eve) = direct_objective(&geom, gamma_bar_b, p, &(problem.tx_rotation * f_tx));
        let eve = if geom.psi > FRAC_PI_2 { 0.0 } else { eve };
        let objective = if geom.psi > FRAC_PI_2 {
            (1.0 + gamma_bar_b * hinge_pow((problem.tx_rotation * f_tx).dot(&geom.u_tr), 2.0 * p)).log2()
        } else {
            objective
        };
        return Ok(finish(None, f_tx, objective, eve, None, Vec::new()));
    }

    let interval = feasible_interval(&geom, cap, &problem.tx_rotation);
    match interval {
        Some((lo, hi)) => {
            let (theta, objective, landscape) = search(&planar, lo, hi, grid, &[0.0, theta0, lo, hi]);
            let f_tx = ensure_on_cap(&(rt * geom.planar_boresight(theta)), cap)?;
            Ok(finish(Some(theta), f_tx, objective, planar.eve_factor(theta), interval, landscape))
        }
        None => {
            let (theta, _, landscape) = search(&planar, 0.0, FRAC_PI_2, grid, &[0.0, theta0]);
            let f_tx = project_to_cap(&(rt * geom.planar_boresight(theta)), cap)?;
            let (objective, eve) = direct_objective(&geom, gamma_bar_b, p, &(problem.tx_rotation * f_tx));
            Ok(finish(None, f_tx, objective, eve, None, landscape))
        }
    }
}

/// Leakage-nulling rate `log₂(1 + γ̄_b cos^{2p} θ₀)`.
pub fn leakage_nulling_rate(gamma_bar_b: f64, theta0: f64, p: f64) -> f64 {
    (1.0 + gamma_bar_b * hinge_pow(theta0.cos(), 2.0 * p)).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{boresight, facing_rotation};
    use approx::assert_relative_eq;

    fn radio(p: f64) -> RadioParams {
        RadioParams {
            wavelength: 0.0857,
            directivity: p,
            noise_rx: 1e-11,
            noise_eve: 1e-11,
        }
    }

    /// Receiver straight along +z, eavesdropper at angle `psi` from it.
    fn problem(psi: f64, p: f64, eve_dist: f64) -> SisoProblem {
        let rx = Vec3::new(0.0, 0.0, 30.0);
        let eve = Vec3::new(psi.sin(), 0.0, psi.cos()) * eve_dist;
        SisoProblem {
            tx: Vec3::zeros(),
            rx,
            eve,
            tx_rotation: Mat3::identity(),
            rx_rotation: facing_rotation(&-rx).unwrap(),
            cap: Cap::hemisphere(),
            radio: radio(p),
            p_max: 0.1,
        }
    }

    #[test]
    fn aligned_receive_when_feasible() {
        let pr = problem(1.0, 1.0, 30.0);
        let g = SisoGeometry::new(&pr).unwrap();
        let (f, gain) = align_receive(&g, &pr.cap, &pr.rx_rotation, 1.0).unwrap();
        assert_relative_eq!(f, Vec3::z(), epsilon = 1e-12);
        assert_relative_eq!(gain, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn receive_projection_loses_cos_delta() {
        let mut pr = problem(1.0, 1.0, 30.0);
        let (theta_max, delta) = (0.4, 0.3);
        pr.cap = Cap::new(theta_max).unwrap();
        // tilt the receive panel so the arrival direction sits at zenith θ_max + δ
        pr.rx_rotation = facing_rotation(&-pr.rx).unwrap() * nalgebra::Rotation3::from_axis_angle(&Vec3::y_axis(), -(theta_max + delta)).matrix();
        let g = SisoGeometry::new(&pr).unwrap();
        for p in [0.0, 1.0, 2.5] {
            let (_, gain) = align_receive(&g, &pr.cap, &pr.rx_rotation, p).unwrap();
            assert_relative_eq!(gain, delta.cos().powf(p), epsilon = 1e-12);
        }
    }

    #[test]
    fn interval_examples() {
        assert_eq!(harmonic_interval(1.0, 0.0, (PI / 4.0).cos()).map(|(a, b)| (a, (b - PI / 4.0).abs() < 1e-12)), Some((0.0, true)));
        assert_eq!(harmonic_interval(0.0, 1.0, 0.5), None);
        let (lo, hi) = harmonic_interval(0.6, -0.8, 0.0).unwrap();
        assert_eq!(lo, 0.0);
        assert_eq!(hi, FRAC_PI_2);
    }

    #[test]
    fn orthogonal_eavesdropper_is_nulled_by_alignment() {
        let pr = problem(FRAC_PI_2, 1.0, 25.0);
        let sol = solve_siso(&pr, DEFAULT_GRID).unwrap();
        assert_eq!(sol.theta0, 0.0);
        assert_eq!(sol.theta, Some(0.0));
        assert_eq!(sol.eve_gain, 0.0);
        assert_relative_eq!(sol.secrecy_rate, (1.0 + sol.gamma_bar_b).log2(), epsilon = 1e-12);
    }

    #[test]
    fn strong_eavesdropper_forces_leakage_nulling() {
        let mut pr = problem(PI / 3.0, 1.0, 30.0);
        pr.radio.noise_eve = 1e-30;
        let sol = solve_siso(&pr, DEFAULT_GRID).unwrap();
        assert_relative_eq!(sol.theta.unwrap(), PI / 6.0, epsilon = 1e-12);
        assert_eq!(sol.eve_gain, 0.0);
        assert!((sol.secrecy_rate - (1.0 + 0.75 * sol.gamma_bar_b).log2()).abs() < 1e-6);
    }

    #[test]
    fn same_direction_weaker_receiver_gets_nothing() {
        let pr = problem(0.0, 1.0, 10.0);
        let mut pr2 = pr.clone();
        pr2.radio.noise_rx = 1.0;
        let sol = solve_siso(&pr2, DEFAULT_GRID).unwrap();
        assert!(!sol.transmit);
        assert_eq!(sol.secrecy_rate, 0.0);
    }

    #[test]
    fn opposite_eavesdropper_is_auto_nulled() {
        let pr = problem(PI, 1.0, 10.0);
        let sol = solve_siso(&pr, DEFAULT_GRID).unwrap();
        assert_eq!(sol.eve_gain, 0.0);
        assert_relative_eq!(sol.secrecy_rate, (1.0 + sol.gamma_bar_b).log2(), epsilon = 1e-12);
    }

    #[test]
    fn landscape_argmax_matches_solution() {
        let pr = problem(0.5, 2.0, 20.0);
        let sol = solve_siso(&pr, 512).unwrap();
        let best = sol.landscape.iter().fold((0.0, f64::NEG_INFINITY), |b, s| if s.1 > b.1 { *s } else { b });
        assert!(sol.objective >= best.1);
        assert!((sol.theta.unwrap() - best.0).abs() <= FRAC_PI_2 / 511.0 + 1e-12);
    }

    #[test]
    fn empty_search_set_falls_back_to_projection() {
        let mut pr = problem(0.5, 1.0, 20.0);
        pr.cap = Cap::new(0.2).unwrap();
        // transmit panel facing away from the plane of interest
        pr.tx_rotation = facing_rotation(&boresight(2.5, 0.0)).unwrap();
        let sol = solve_siso(&pr, 256).unwrap();
        assert!(sol.interval.is_none());
        assert!(pr.cap.contains(&sol.f_tx));
    }
}
