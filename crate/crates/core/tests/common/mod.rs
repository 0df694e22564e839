#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotsec_core::geometry::{boresight, facing_rotation, ArrayLayout, Cap};
use rotsec_core::linalg::{c, CMat, Vec3};
use rotsec_core::rate::Beamformers;
use rotsec_core::scenario::{Cluster, OrientationSet, RadioParams, Scenario};

pub const WAVELENGTH: f64 = 0.0857;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn radio(p: f64) -> RadioParams {
    RadioParams {
        wavelength: WAVELENGTH,
        directivity: p,
        noise_rx: 1e-11,
        noise_eve: 1e-11,
    }
}

#[derive(Debug, Clone)]
pub struct Shape {
    pub tx: (usize, usize),
    pub rx: (usize, usize),
    pub eve: (usize, usize),
    pub streams: usize,
    pub receivers: usize,
    pub clusters: usize,
    pub theta_max: f64,
    pub p: f64,
    pub p_max: f64,
    pub rcs: f64,
}

impl Default for Shape {
    fn default() -> Self {
        Self {
            tx: (3, 3),
            rx: (2, 2),
            eve: (2, 2),
            streams: 2,
            receivers: 1,
            clusters: 3,
            theta_max: std::f64::consts::FRAC_PI_3,
            p: 1.0,
            p_max: 0.1,
            rcs: 1e3,
        }
    }
}

fn node(rng: &mut ChaCha8Rng) -> Vec3 {
    let r = rng.random_range(20.0..40.0);
    let zen = rng.random_range(0.0..std::f64::consts::FRAC_PI_3);
    let az = rng.random_range(0.0..std::f64::consts::TAU);
    boresight(zen, az) * r
}

fn facing_panel(rng: &mut ChaCha8Rng, dims: (usize, usize)) -> ArrayLayout {
    let pos = node(rng);
    let rot = facing_rotation(&(-pos).normalize()).unwrap();
    ArrayLayout::new(dims.0, dims.1, WAVELENGTH / 2.0, pos, rot).unwrap()
}

/// Transmitter at the origin facing +z, nodes 20-40 m away in the upper
/// half-space with panels turned towards the transmitter.
pub fn scenario(seed: u64, shape: &Shape) -> Scenario {
    let mut rng = rng(seed);
    let tx = ArrayLayout::axis_aligned(shape.tx.0, shape.tx.1, WAVELENGTH / 2.0, Vec3::zeros()).unwrap();
    let receivers = (0..shape.receivers).map(|_| facing_panel(&mut rng, shape.rx)).collect();
    let eve = facing_panel(&mut rng, shape.eve);
    let clusters = (0..shape.clusters)
        .map(|_| Cluster {
            position: Vec3::new(rng.random_range(-30.0..30.0), rng.random_range(-30.0..30.0), rng.random_range(5.0..40.0)),
            rcs: shape.rcs,
            phase: rng.random_range(0.0..std::f64::consts::TAU),
        })
        .collect();
    Scenario {
        radio: radio(shape.p),
        tx,
        receivers,
        eve,
        clusters,
        cap: Cap::new(shape.theta_max).unwrap(),
        streams: shape.streams,
        p_max: shape.p_max,
    }
}

pub fn cap_point(rng: &mut ChaCha8Rng, cap: &Cap) -> Vec3 {
    let zen = rng.random_range(0.0..cap.theta_max());
    boresight(zen, rng.random_range(0.0..std::f64::consts::TAU))
}

pub fn random_orientations(rng: &mut ChaCha8Rng, sc: &Scenario) -> OrientationSet {
    OrientationSet {
        tx: (0..sc.n_tx()).map(|_| cap_point(rng, &sc.cap)).collect(),
        rx: sc.receivers.iter().map(|r| (0..r.len()).map(|_| cap_point(rng, &sc.cap)).collect()).collect(),
    }
}

pub fn random_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

/// Random beamformers using the whole budget.
pub fn random_beamformers(rng: &mut ChaCha8Rng, n: usize, d: usize, p_max: f64) -> Beamformers {
    let mut bf = Beamformers {
        w: random_mat(rng, n, d),
        w_e: random_mat(rng, n, n) * c(0.3, 0.0),
    };
    let s = (p_max / bf.power()).sqrt();
    bf.w *= c(s, 0.0);
    bf.w_e *= c(s, 0.0);
    bf
}
