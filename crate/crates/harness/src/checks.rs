//! Self-checks behind `rotsec validate` and the acceptance suite.
//!
//! Each check draws its own instances from a fixed seed and returns a
//! pass/fail verdict with a one-line summary of the worst case seen.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rotsec_core::ao_solver::{run_ao_with, solve_power_constrained, xi_upper_bound, QuadraticUpdate, SolverConfig};
use rotsec_core::channel::ChannelModel;
use rotsec_core::geometry::{boresight, facing_rotation, fibonacci_cap, fw_vertex, tie_direction, ArrayLayout, Cap};
use rotsec_core::linalg::{c, CMat, Mat3, Vec3};
use rotsec_core::multicast::{run_ao_multicast_with, MulticastConfig};
use rotsec_core::orient_opt::OrientObjective;
use rotsec_core::rate::{rate_gap, secrecy_rate, surrogate_f, update_auxiliaries, Beamformers};
use rotsec_core::scenario::{OrientationSet, RadioParams, Scenario};
use rotsec_core::siso::{solve_siso, SisoProblem, DEFAULT_GRID};

use crate::config::{ScenarioConfig, SolverSettings};
use crate::error::Result;
use crate::rng::{stream, CHECKS};
use crate::scenario_gen::make_scenario;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail }
    }

    pub fn line(&self) -> String {
        format!("[{}] {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn random_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

/// Random precoder and noise factor using the whole budget.
fn random_beamformers(rng: &mut ChaCha8Rng, n: usize, d: usize, p_max: f64) -> Beamformers {
    let mut bf = Beamformers {
        w: random_mat(rng, n, d),
        w_e: random_mat(rng, n, n) * c(rng.random_range(0.05..0.5), 0.0),
    };
    let s = c((p_max / bf.power()).sqrt(), 0.0);
    bf.w *= s;
    bf.w_e *= s;
    bf
}

/// Boresights with zenith in `[0, fraction · θ_max)`.
fn random_orientations(rng: &mut ChaCha8Rng, sc: &Scenario, fraction: f64) -> OrientationSet {
    let mut point = || boresight(rng.random::<f64>() * fraction * sc.cap.theta_max(), rng.random_range(0.0..std::f64::consts::TAU));
    OrientationSet {
        tx: (0..sc.n_tx()).map(|_| point()).collect(),
        rx: sc.receivers.iter().map(|r| (0..r.len()).map(|_| point()).collect()).collect(),
    }
}

/// Small scenario with N ≤ 8, M, Q ≤ 4 and d ≤ 2.
fn small_config(rng: &mut ChaCha8Rng, receivers: usize) -> ScenarioConfig {
    let tx = [rng.random_range(1..=4), rng.random_range(1..=2)];
    let rx = [rng.random_range(1..=2), rng.random_range(1..=2)];
    let eve = [rng.random_range(1..=2), rng.random_range(1..=2)];
    let streams = rng.random_range(1..=2usize).min(tx[0] * tx[1]).min(rx[0] * rx[1]);
    ScenarioConfig {
        tx,
        rx,
        eve,
        streams,
        receivers,
        directivity: [0.0, 1.0, 1.5, 2.0][rng.random_range(0..4)],
        theta_max_deg: rng.random_range(20.0..90.0),
        ..ScenarioConfig::default()
    }
}

/// Surrogate equals the secrecy-rate gap after the auxiliary update.
pub fn tightness(scenarios: usize, seed: u64) -> Result<Check> {
    let mut rng = stream(seed, CHECKS);
    let mut worst: f64 = 0.0;
    for i in 0..scenarios {
        let cfg = small_config(&mut rng, 1);
        let sc = make_scenario(&cfg, seed + i as u64)?;
        let model = ChannelModel::new(&sc)?;
        let ch = model.build(&random_orientations(&mut rng, &sc, 1.0));
        let bf = random_beamformers(&mut rng, sc.n_tx(), sc.streams, sc.p_max);
        let aux = update_auxiliaries(&ch.legit[0], &ch.eve, &bf, &sc.radio)?;
        let f = surrogate_f(&ch.legit[0], &ch.eve, &bf, &aux, &sc.radio)?;
        let gap = rate_gap(&ch.legit[0], &ch.eve, &bf, &sc.radio)?;
        worst = worst.max((f / LN_2 - gap).abs());
    }
    Ok(Check::new(
        "surrogate tightness",
        worst < 1e-8,
        format!("max |F/ln2 - (R - R_e)| = {worst:.2e} bits over {scenarios} scenarios (tol 1e-8)"),
    ))
}

/// Analytic orientation gradients against central differences of the
/// orientation loss.
pub fn gradients(scenarios: usize, points: usize, seed: u64) -> Result<Check> {
    const STEP: f64 = 1e-6;
    const EDGE_MARGIN: f64 = 1e-2;
    let mut rng = stream(seed, CHECKS + 1);
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    let mut skipped = 0usize;
    for s in 0..scenarios {
        let receivers = 1 + s % 2;
        let cfg = small_config(&mut rng, receivers);
        let sc = make_scenario(&cfg, seed + s as u64)?;
        let model = ChannelModel::new(&sc)?;
        for _ in 0..points {
            let orient = random_orientations(&mut rng, &sc, 0.95);
            let ch = model.build(&orient);
            let bf = random_beamformers(&mut rng, sc.n_tx(), sc.streams, sc.p_max);
            let auxes = ch
                .legit
                .iter()
                .map(|h| update_auxiliaries(h, &ch.eve, &bf, &sc.radio))
                .collect::<rotsec_core::Result<Vec<_>>>()?;
            let weights: Vec<f64> = (0..receivers).map(|_| rng.random_range(0.2..2.0)).collect();
            let pairs: Vec<_> = auxes.iter().zip(&weights).map(|(a, &w)| (&a.legit, w)).collect();
            let obj = OrientObjective::new(&pairs, &auxes[0].eve, &bf, &sc.radio);

            let mut compare = |analytic: Vec3, perturb: &dyn Fn(&mut OrientationSet, Vec3)| {
                let central = |i: usize, h: f64| {
                    let mut e = Vec3::zeros();
                    e[i] = h;
                    let (mut plus, mut minus) = (orient.clone(), orient.clone());
                    perturb(&mut plus, e);
                    perturb(&mut minus, -e);
                    obj.loss_delta(&model.build(&minus), &model.build(&plus)) / (2.0 * h)
                };
                // Richardson step on the central difference: where the
                // gradient nearly cancels, plain O(h²) truncation alone
                // reaches the tolerance
                let fd = Vec3::from_fn(|i, _| (4.0 * central(i, STEP / 2.0) - central(i, STEP)) / 3.0);
                let scale = analytic.norm().max(fd.norm());
                let err = if scale > 0.0 { (analytic - fd).norm() / scale } else { 0.0 };
                worst = worst.max(err);
                checked += 1;
            };
            // the pattern max(0, cos)^p has a kink at the edge of the front
            // half-space and higher derivatives growing like margin^(p-3)
            // near it, so antennas that close to the edge are not interior
            let smooth = |margin: f64| sc.radio.directivity == 0.0 || margin > EDGE_MARGIN;
            for n in 0..sc.n_tx() {
                if smooth(model.hinge_margin_tx(&orient, n)) {
                    compare(obj.grad_tx(&model, &orient, &ch, n), &|o, d| o.tx[n] += d);
                } else {
                    skipped += 1;
                }
            }
            for k in 0..receivers {
                for m in 0..sc.n_rx() {
                    if smooth(model.hinge_margin_rx(&orient, k, m)) {
                        compare(obj.grad_rx(&model, &orient, &ch, k, m), &|o, d| o.rx[k][m] += d);
                    } else {
                        skipped += 1;
                    }
                }
            }
        }
    }
    Ok(Check::new(
        "orientation gradients",
        worst < 1e-4 && checked > 0,
        format!(
            "max relative error {worst:.2e} over {checked} antenna gradients at {} points (tol 1e-4, {skipped} at gain-pattern kinks skipped)",
            scenarios * points
        ),
    ))
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> CMat {
    let g = random_mat(rng, n, rank);
    &g * g.adjoint()
}

/// Power-multiplier bisection: monotone curve, bracketed root, budget met.
pub fn bisection(instances: usize, seed: u64) -> Result<Check> {
    let mut rng = stream(seed, CHECKS + 2);
    let mut failures = Vec::new();
    let mut worst_mismatch: f64 = 0.0;
    for i in 0..instances {
        let n = rng.random_range(2..=6);
        let d = rng.random_range(1..=n.min(3));
        // rank-deficient blocks make the budget active
        let (sig_rank, an_rank) = (rng.random_range(1..n), rng.random_range(1..=n));
        let sig = QuadraticUpdate::new(&random_psd(&mut rng, n, sig_rank), &random_mat(&mut rng, n, d));
        let an = QuadraticUpdate::new(&random_psd(&mut rng, n, an_rank), &random_mat(&mut rng, n, n));
        let p_max = rng.random_range(0.01..10.0);
        let ub = xi_upper_bound(&sig, &an, p_max);
        let grid: Vec<f64> = (1..=50).map(|j| ub * j as f64 / 50.0).collect();
        let power = |xi: f64| sig.power(xi) + an.power(xi);
        if grid.windows(2).any(|w| power(w[1]) >= power(w[0])) {
            failures.push(format!("instance {i}: P(xi) not strictly decreasing"));
        }
        let sol = solve_power_constrained(&sig, &an, p_max, 1e-8, 200)?;
        if !(0.0..=ub).contains(&sol.xi) {
            failures.push(format!("instance {i}: xi {} outside [0, {ub}]", sol.xi));
        }
        if sol.xi > 0.0 {
            let mismatch = (sol.bf.power() - p_max).abs() / p_max;
            worst_mismatch = worst_mismatch.max(mismatch);
            if mismatch > 1e-8 {
                failures.push(format!("instance {i}: power mismatch {mismatch:e}"));
            }
        }
    }
    // scalar case: P(ξ) = |b|²/ξ², so ξ* = |b|/√P_max
    let b = CMat::from_element(1, 1, c(1.2, -0.5));
    let sig = QuadraticUpdate::new(&CMat::zeros(1, 1), &b);
    let none = QuadraticUpdate::new(&CMat::zeros(1, 1), &CMat::zeros(1, 1));
    let p_max = 0.37;
    let sol = solve_power_constrained(&sig, &none, p_max, 1e-8, 200)?;
    let scalar_err = (sol.xi - 1.3 / p_max.sqrt()).abs();
    if scalar_err > 1e-10 {
        failures.push(format!("scalar case off by {scalar_err:e}"));
    }
    Ok(Check::new(
        "power bisection",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{instances} instances, max power mismatch {worst_mismatch:.1e} (tol 1e-8), scalar error {scalar_err:.1e} (tol 1e-10)")
        } else {
            failures.join("; ")
        },
    ))
}

/// Closed-form Frank-Wolfe vertex against a Fibonacci-sampled brute force.
///
/// The samples only bound the true minimum from above, so the check is
/// that no sample beats the closed form by more than the tolerance; the
/// largest shortfall of the samples is reported as sampling resolution.
pub fn fw_vertex_oracle(gradients: usize, samples: usize, seed: u64) -> Result<Check> {
    let mut rng = stream(seed, CHECKS + 3);
    let caps = [PI / 10.0, PI / 5.0, PI / 3.0, FRAC_PI_2];
    let mut worst_violation: f64 = f64::NEG_INFINITY;
    let mut worst_resolution: f64 = 0.0;
    for theta in caps {
        let cap = Cap::new(theta)?;
        let points = fibonacci_cap(samples, &cap);
        for _ in 0..gradients {
            let g = Vec3::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5).normalize();
            let y = fw_vertex(&g, &cap, &tie_direction()).ok_or(rotsec_core::Error::DegenerateDirection)?;
            let closed = g.dot(&y);
            let brute = points.iter().map(|p| g.dot(p)).fold(f64::INFINITY, f64::min);
            worst_violation = worst_violation.max(closed - brute);
            worst_resolution = worst_resolution.max(brute - closed);
            if !cap.contains(&y) {
                worst_violation = f64::INFINITY;
            }
        }
    }
    Ok(Check::new(
        "Frank-Wolfe vertex",
        worst_violation <= 1e-6,
        format!(
            "closed form exceeds the best of {samples} samples by at most {worst_violation:.1e} (tol 1e-6); samples trail by up to {worst_resolution:.1e}; {gradients} gradients x 4 caps"
        ),
    ))
}

fn siso_panel(pos: Vec3, facing: bool, wavelength: f64) -> Result<ArrayLayout> {
    let rot = if facing { facing_rotation(&(-pos))? } else { Mat3::identity() };
    Ok(ArrayLayout::new(1, 1, wavelength / 2.0, pos, rot)?)
}

/// Single-antenna scenario with receiver and eavesdropper in the x-z plane,
/// `psi` apart as seen from the transmitter.
pub fn siso_scenario(rx_zenith: f64, psi: f64, p: f64, noise: f64, eve_noise: f64) -> Result<Scenario> {
    let wavelength = 0.0857;
    let rx = boresight(rx_zenith, 0.0) * 30.0;
    let eve = boresight(rx_zenith - psi, 0.0) * 35.0;
    Ok(Scenario {
        radio: RadioParams {
            wavelength,
            directivity: p,
            noise_rx: noise,
            noise_eve: eve_noise,
        },
        tx: siso_panel(Vec3::zeros(), false, wavelength)?,
        receivers: vec![siso_panel(rx, true, wavelength)?],
        eve: siso_panel(eve, true, wavelength)?,
        clusters: Vec::new(),
        cap: Cap::hemisphere(),
        streams: 1,
        p_max: 0.1,
    })
}

/// Alternating optimization with orientation updates only, on the embedded
/// single-antenna problem, against the 1-D search; plus the nulling cases.
pub fn siso(seed: u64) -> Result<Check> {
    let _ = seed;
    let mut failures = Vec::new();
    let mut worst_angle: f64 = 0.0;
    // (rx zenith, ψ, p, noise, eavesdropper noise); the orientation step
    // contracts at a rate that shrinks with SNR, hence the round budget
    let cases = [
        (0.5, 0.6, 1.0, 1e-9, 1e-8),
        (0.3, 0.9, 2.0, 1e-9, 3e-8),
        (0.7, 0.5, 1.5, 1e-9, 1e-8),
        (0.4, 1.0, 3.0, 1e-9, 1e-7),
        (0.5, 0.6, 1.0, 1e-11, 1e-9),
    ];
    for (i, &(zen, psi, p, noise, eve_noise)) in cases.iter().enumerate() {
        let sc = siso_scenario(zen, psi, p, noise, eve_noise)?;
        let sol = solve_siso(&SisoProblem::from_scenario(&sc)?, DEFAULT_GRID)?;
        let mut cfg = SolverConfig {
            update_beamformers: false,
            outer_tol: 1e-15,
            max_outer: 20_000,
            ..SolverConfig::default()
        };
        cfg.orient.tol = 1e-13;
        cfg.orient.max_sweeps = 50;
        let bf = Beamformers {
            w: CMat::from_element(1, 1, c(sc.p_max.sqrt(), 0.0)),
            w_e: CMat::zeros(1, 1),
        };
        let model = ChannelModel::new(&sc)?;
        let res = run_ao_with(&sc, &model, &OrientationSet::panel_normal(&sc), Some(bf.clone()), &cfg, &mut |_| {})?;
        let angle = res.orientations.tx[0].dot(&sol.f_tx).clamp(-1.0, 1.0).acos();
        worst_angle = worst_angle.max(angle);
        if angle >= 1e-2 {
            failures.push(format!("case {i}: boresights {angle:.2e} rad apart"));
        }
        let rate = secrecy_rate(&res.channels.legit[0], &res.channels.eve, &bf, &sc.radio)?;
        if (rate - sol.secrecy_rate).abs() > 1e-3 * sol.secrecy_rate {
            failures.push(format!("case {i}: rate {rate} vs {}", sol.secrecy_rate));
        }
    }

    // leakage nulling: orthogonal, opposite and overwhelming eavesdroppers
    for (psi, eve_noise) in [(FRAC_PI_2, 1e-11), (PI, 1e-11), (PI / 3.0, 1e-30)] {
        let sc = siso_scenario(0.0, psi, 1.0, 1e-11, eve_noise)?;
        let sol = solve_siso(&SisoProblem::from_scenario(&sc)?, DEFAULT_GRID)?;
        if sol.eve_gain != 0.0 {
            failures.push(format!("psi {psi:.3}: eavesdropper gain {} not zero", sol.eve_gain));
        }
    }
    let sc = siso_scenario(0.0, PI / 3.0, 1.0, 1e-11, 1e-30)?;
    let sol = solve_siso(&SisoProblem::from_scenario(&sc)?, DEFAULT_GRID)?;
    let nulling_err = (sol.secrecy_rate - (1.0 + 0.75 * sol.gamma_bar_b).log2()).abs();
    if nulling_err >= 1e-6 {
        failures.push(format!("nulling rate off by {nulling_err:e}"));
    }
    Ok(Check::new(
        "single-antenna cross-check",
        failures.is_empty(),
        if failures.is_empty() {
            format!("max boresight gap {worst_angle:.1e} rad (tol 1e-2), nulling gains exactly 0, nulling rate error {nulling_err:.1e} (tol 1e-6)")
        } else {
            failures.join("; ")
        },
    ))
}

/// Scale-down of the reference setup used by the convergence checks.
pub fn desk_scale() -> ScenarioConfig {
    ScenarioConfig {
        tx: [3, 3],
        rx: [2, 2],
        eve: [2, 2],
        streams: 2,
        ..ScenarioConfig::default()
    }
}

/// Monotone objective and early convergence of the alternating
/// optimization.
pub fn ao_convergence(seeds: usize, seed: u64, settings: &SolverSettings) -> Result<Check> {
    let cfg = desk_scale();
    let solver = settings.solver();
    let mut worst_drop: f64 = 0.0;
    let mut converged = 0;
    let mut steps = Vec::new();
    for s in 0..seeds as u64 {
        let sc = make_scenario(&cfg, seed + s)?;
        let model = ChannelModel::new(&sc)?;
        let mut trace = Vec::new();
        let res = run_ao_with(&sc, &model, &OrientationSet::panel_normal(&sc), None, &solver, &mut |r| trace.push(r.objective))?;
        let mut prev = res.initial_objective;
        let mut first = None;
        for (t, &f) in trace.iter().enumerate() {
            worst_drop = worst_drop.max(prev - f);
            if first.is_none() && (f - prev).abs() < 1e-3 * f.abs() {
                first = Some(t + 1);
            }
            prev = f;
        }
        if first.is_some_and(|t| t <= 20) {
            converged += 1;
        }
        steps.push(first.map_or("-".to_string(), |t| t.to_string()));
    }
    let needed = (seeds * 9).div_ceil(10);
    Ok(Check::new(
        "AO monotonicity and convergence",
        worst_drop <= 1e-8 && converged >= needed,
        format!(
            "largest decrease {worst_drop:.1e} (tol 1e-8); relative change < 1e-3 within 20 iterations on {converged}/{seeds} seeds (need {needed}); first iteration per seed [{}]",
            steps.join(" ")
        ),
    ))
}

/// One-receiver multicast agrees with the single-receiver solver, and the
/// worst-receiver lower bound holds along every multicast run.
pub fn multicast_reduction(seeds: usize, seed: u64, settings: &SolverSettings) -> Result<Check> {
    // several-receiver runs are the slow part; a few suffice for the bound
    const BOUND_SEEDS: u64 = 4;
    let mut worst_rel: f64 = 0.0;
    let mut worst_bound: f64 = f64::NEG_INFINITY;
    for s in 0..seeds as u64 {
        let sc = make_scenario(&desk_scale(), seed + s)?;
        let model = ChannelModel::new(&sc)?;
        let init = OrientationSet::panel_normal(&sc);
        let single = run_ao_with(&sc, &model, &init, None, &settings.solver(), &mut |_| {})?;
        let mut bound_gap = Vec::new();
        let multi = run_ao_multicast_with(&sc, &model, &init, None, &settings.multicast(), &mut |r| {
            bound_gap.push(r.lower_bound - r.objective)
        })?;
        let (a, b) = (single.secrecy_rate(), multi.secrecy_rate());
        worst_rel = worst_rel.max((a - b).abs() / a.abs().max(1e-12));
        worst_bound = bound_gap.into_iter().fold(worst_bound, f64::max);

        if s >= BOUND_SEEDS {
            continue;
        }
        let k = 2 + s as usize % 2;
        let cfg = ScenarioConfig {
            receivers: k,
            ..desk_scale()
        };
        let sc = make_scenario(&cfg, seed + s)?;
        let model = ChannelModel::new(&sc)?;
        let mcfg: MulticastConfig = settings.multicast();
        run_ao_multicast_with(&sc, &model, &OrientationSet::panel_normal(&sc), None, &mcfg, &mut |r| {
            worst_bound = worst_bound.max(r.lower_bound - r.objective)
        })?;
    }
    Ok(Check::new(
        "multicast reduction and lower bound",
        worst_rel <= 1e-4 && worst_bound <= 1e-10,
        format!(
            "K=1 vs single-receiver max relative difference {worst_rel:.1e} (tol 1e-4) on {seeds} seeds; max (lower bound - objective) {worst_bound:.1e} nats over K=1 runs and {} K=2,3 runs",
            BOUND_SEEDS.min(seeds as u64)
        ),
    ))
}

/// Everything `rotsec validate` runs, with the acceptance sizes.
pub fn all(seed: u64, settings: &SolverSettings) -> Result<Vec<Check>> {
    Ok(vec![
        tightness(100, seed)?,
        gradients(20, 50, seed)?,
        bisection(20, seed)?,
        fw_vertex_oracle(100, 100_000, seed)?,
        ao_convergence(20, seed, settings)?,
        siso(seed)?,
        multicast_reduction(10, seed, settings)?,
    ])
}
