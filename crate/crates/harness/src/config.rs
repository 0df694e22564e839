//! Experiment configuration read from TOML.
//!
//! Powers are given in dBm and angles in degrees; everything is converted to
//! watts and radians when the scenario is built. Every field has a default,
//! so an empty file describes the reference setup (see
//! `configs/default.toml` for the annotated schema).

use std::path::Path;

use rotsec_core::ao_solver::SolverConfig;
use rotsec_core::multicast::{EpigraphConfig, MulticastConfig};
use rotsec_core::orient_opt::OrientConfig;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

/// Shipped default configuration, also selected by `--config defaults`.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Posture {
    /// Receiver and eavesdropper panels turned towards the transmitter.
    Facing,
    /// Every panel in the global xy-plane.
    Identity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub count: usize,
    /// Radar cross section in m².
    pub rcs: f64,
    /// Opposite corners of the placement box, in meters.
    pub box_min: [f64; 3],
    pub box_max: [f64; 3],
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            count: 3,
            rcs: 1.0,
            box_min: [-30.0, -30.0, 5.0],
            box_max: [30.0, 30.0, 40.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Carrier frequency; when set it overrides `wavelength`.
    pub frequency_hz: Option<f64>,
    pub wavelength: f64,
    /// Planar array sizes `[nx, ny]`.
    pub tx: [usize; 2],
    pub rx: [usize; 2],
    pub eve: [usize; 2],
    /// Element spacing in wavelengths.
    pub spacing: f64,
    pub streams: usize,
    pub theta_max_deg: f64,
    pub directivity: f64,
    pub p_max_dbm: f64,
    pub noise_dbm: f64,
    pub eve_noise_dbm: f64,
    pub d_min: f64,
    pub d_max: f64,
    /// Largest zenith angle, seen from the transmitter, at which nodes are
    /// placed.
    pub node_zenith_max_deg: f64,
    /// Smallest allowed distance between any two nodes or clusters.
    pub min_separation: f64,
    pub max_retries: usize,
    pub receivers: usize,
    pub posture: Posture,
    pub clusters: ClusterConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            frequency_hz: None,
            wavelength: 0.0857,
            tx: [5, 5],
            rx: [2, 2],
            eve: [2, 2],
            spacing: 0.5,
            streams: 2,
            theta_max_deg: 60.0,
            directivity: 1.0,
            p_max_dbm: 20.0,
            noise_dbm: -80.0,
            eve_noise_dbm: -80.0,
            d_min: 20.0,
            d_max: 40.0,
            node_zenith_max_deg: 60.0,
            min_separation: 1.0,
            max_retries: 100,
            receivers: 1,
            posture: Posture::Facing,
            clusters: ClusterConfig::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn wavelength(&self) -> f64 {
        match self.frequency_hz {
            Some(f) => 299_792_458.0 / f,
            None => self.wavelength,
        }
    }

    pub fn n_tx(&self) -> usize {
        self.tx[0] * self.tx[1]
    }

    pub fn n_rx(&self) -> usize {
        self.rx[0] * self.rx[1]
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("wavelength", self.wavelength()),
            ("spacing", self.spacing),
            ("d_min", self.d_min),
            ("min_separation", self.min_separation),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(HarnessError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.d_max < self.d_min {
            return Err(HarnessError::Config(format!("d_max {} is below d_min {}", self.d_max, self.d_min)));
        }
        if self.tx.contains(&0) || self.rx.contains(&0) || self.eve.contains(&0) {
            return Err(HarnessError::Config("array dimensions must be at least 1".into()));
        }
        if self.streams == 0 || self.streams > self.n_tx().min(self.n_rx()) {
            return Err(HarnessError::Config(format!(
                "streams = {} must lie in 1..=min(N, M) = {}",
                self.streams,
                self.n_tx().min(self.n_rx())
            )));
        }
        if self.receivers == 0 {
            return Err(HarnessError::Config("at least one receiver is required".into()));
        }
        if !(0.0..=90.0).contains(&self.theta_max_deg) || !(0.0..=90.0).contains(&self.node_zenith_max_deg) {
            return Err(HarnessError::Config("angles must lie in [0, 90] degrees".into()));
        }
        if !(self.directivity >= 0.0 && self.directivity.is_finite()) {
            return Err(HarnessError::Config(format!("directivity {} must be non-negative", self.directivity)));
        }
        let c = &self.clusters;
        if c.count > 0 && !(c.rcs > 0.0) {
            return Err(HarnessError::Config(format!("cluster rcs {} must be positive", c.rcs)));
        }
        if (0..3).any(|i| c.box_max[i] < c.box_min[i]) {
            return Err(HarnessError::Config("cluster box_max must dominate box_min".into()));
        }
        if self.max_retries == 0 {
            return Err(HarnessError::Config("max_retries must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub outer_tol: f64,
    pub max_outer: usize,
    pub bisection_tol: f64,
    pub bisection_max: usize,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub rho_min: f64,
    pub max_sweeps: usize,
    /// Loss decrease (nats) of a sweep below which orientation sweeps stop.
    pub orient_tol: f64,
    pub init_signal_share: f64,
    pub epigraph_gap_tol: f64,
    pub epigraph_max_iter: usize,
    pub multiplier_step: f64,
    pub initial_multiplier: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let s = SolverConfig::default();
        let m = MulticastConfig::default();
        Self {
            outer_tol: s.outer_tol,
            max_outer: s.max_outer,
            bisection_tol: s.bisection_tol,
            bisection_max: s.bisection_max,
            armijo_c: s.orient.armijo_c,
            backtrack: s.orient.backtrack,
            rho_min: s.orient.rho_min,
            max_sweeps: s.orient.max_sweeps,
            orient_tol: s.orient.tol,
            init_signal_share: s.init_signal_share,
            epigraph_gap_tol: m.epigraph.gap_tol,
            epigraph_max_iter: m.epigraph.max_iter,
            multiplier_step: m.multiplier_step,
            initial_multiplier: m.initial_multiplier,
        }
    }
}

impl SolverSettings {
    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            outer_tol: self.outer_tol,
            max_outer: self.max_outer,
            bisection_tol: self.bisection_tol,
            bisection_max: self.bisection_max,
            orient: OrientConfig {
                armijo_c: self.armijo_c,
                backtrack: self.backtrack,
                rho_min: self.rho_min,
                max_sweeps: self.max_sweeps,
                tol: self.orient_tol,
                update_tx: true,
                update_rx: true,
            },
            init_signal_share: self.init_signal_share,
            ..SolverConfig::default()
        }
    }

    pub fn multicast(&self) -> MulticastConfig {
        MulticastConfig {
            solver: self.solver(),
            epigraph: EpigraphConfig {
                gap_tol: self.epigraph_gap_tol,
                max_iter: self.epigraph_max_iter,
                bisection_tol: self.bisection_tol,
                bisection_max: self.bisection_max,
            },
            multiplier_step: self.multiplier_step,
            initial_multiplier: self.initial_multiplier,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    #[serde(rename = "N")]
    N,
    ThetaMax,
    P,
    #[serde(rename = "P_max")]
    PMax,
    #[serde(rename = "K")]
    K,
    #[serde(rename = "M")]
    M,
    #[serde(rename = "Q")]
    Q,
    #[serde(rename = "d")]
    D,
}

impl Axis {
    pub const ALL: [Axis; 8] = [Axis::N, Axis::ThetaMax, Axis::P, Axis::PMax, Axis::K, Axis::M, Axis::Q, Axis::D];

    pub fn name(self) -> &'static str {
        match self {
            Axis::N => "N",
            Axis::ThetaMax => "theta_max",
            Axis::P => "p",
            Axis::PMax => "P_max",
            Axis::K => "K",
            Axis::M => "M",
            Axis::Q => "Q",
            Axis::D => "d",
        }
    }

    pub fn parse(s: &str) -> Option<Axis> {
        Axis::ALL.into_iter().find(|a| a.name() == s)
    }

    /// Scenario with this axis set to `value`. Array-size axes take the
    /// number of elements and need a square count (`N = 25` is a 5x5
    /// panel); `theta_max` is in degrees and `P_max` in dBm.
    pub fn apply(self, base: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut cfg = base.clone();
        let count = || -> Result<usize> {
            if !(value >= 1.0 && value.fract() == 0.0) {
                return Err(HarnessError::Config(format!("{} must be a positive integer, got {value}", self.name())));
            }
            Ok(value as usize)
        };
        let square = || -> Result<[usize; 2]> {
            let n = count()?;
            let side = (n as f64).sqrt().round() as usize;
            if side * side != n {
                return Err(HarnessError::Config(format!("{} = {n} is not a square array size", self.name())));
            }
            Ok([side, side])
        };
        match self {
            Axis::N => cfg.tx = square()?,
            Axis::M => cfg.rx = square()?,
            Axis::Q => cfg.eve = square()?,
            Axis::K => cfg.receivers = count()?,
            Axis::D => cfg.streams = count()?,
            Axis::ThetaMax => cfg.theta_max_deg = value,
            Axis::P => cfg.directivity = value,
            Axis::PMax => cfg.p_max_dbm = value,
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
    /// Seeds `seed, seed + 1, …, seed + seeds − 1` are used at every point.
    pub seeds: usize,
    pub baselines: Vec<String>,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            axis: Axis::PMax,
            values: vec![0.0, 10.0, 20.0, 30.0],
            seeds: 4,
            baselines: vec!["proposed".into(), "isotropic".into()],
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() || self.seeds == 0 || self.baselines.is_empty() {
            return Err(HarnessError::Config("sweep needs values, seeds and baselines".into()));
        }
        for b in &self.baselines {
            crate::baselines::Baseline::parse(b)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub baseline: String,
    pub scenario: ScenarioConfig,
    pub solver: SolverSettings,
    pub sweep: SweepSpec,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            seed: 0,
            baseline: "proposed".into(),
            scenario: ScenarioConfig::default(),
            solver: SolverSettings::default(),
            sweep: SweepSpec::default(),
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.scenario.validate()?;
        Ok(cfg)
    }

    /// Loads a file, or the shipped defaults for the literal path `defaults`.
    pub fn load(path: &Path) -> Result<Self> {
        if path.as_os_str() == "defaults" {
            return Self::from_toml(DEFAULT_CONFIG);
        }
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}
