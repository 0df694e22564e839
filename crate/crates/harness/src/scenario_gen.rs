//! Random scenario synthesis.
//!
//! The transmitter sits at the origin with its panel in the xy-plane. Each
//! legitimate receiver and the eavesdropper is placed at a distance drawn
//! from `U(d_min, d_max)`, uniform azimuth and a zenith (seen from the
//! transmitter) uniform in `[0, node_zenith_max]`. Clusters are uniform in
//! a box. Draws that put two nodes or clusters closer than
//! `min_separation` are repeated. Receivers are drawn last from a stream of
//! their own, so adding a receiver leaves everything else in place.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rotsec_core::geometry::{boresight, facing_rotation, ArrayLayout, Cap};
use rotsec_core::linalg::{Mat3, Vec3};
use rotsec_core::scenario::{Cluster, RadioParams, Scenario};

use crate::config::{dbm_to_watts, Posture, ScenarioConfig};
use crate::error::{HarnessError, Result};
use crate::rng::{stream, GEOMETRY, PHASES, RECEIVERS};

fn draw_node(rng: &mut ChaCha8Rng, cfg: &ScenarioConfig) -> Vec3 {
    let r = if cfg.d_max > cfg.d_min {
        rng.random_range(cfg.d_min..cfg.d_max)
    } else {
        cfg.d_min
    };
    let zenith_max = cfg.node_zenith_max_deg.to_radians();
    let zenith = if zenith_max > 0.0 { rng.random_range(0.0..zenith_max) } else { 0.0 };
    boresight(zenith, rng.random_range(0.0..TAU)) * r
}

fn draw_cluster(rng: &mut ChaCha8Rng, cfg: &ScenarioConfig) -> Vec3 {
    let c = &cfg.clusters;
    let coord = |rng: &mut ChaCha8Rng, i: usize| {
        if c.box_max[i] > c.box_min[i] {
            rng.random_range(c.box_min[i]..c.box_max[i])
        } else {
            c.box_min[i]
        }
    };
    Vec3::new(coord(rng, 0), coord(rng, 1), coord(rng, 2))
}

fn well_separated(points: &[Vec3], min_sep: f64) -> bool {
    let with_tx: Vec<Vec3> = std::iter::once(Vec3::zeros()).chain(points.iter().copied()).collect();
    with_tx
        .iter()
        .enumerate()
        .all(|(i, a)| with_tx[i + 1..].iter().all(|b| (a - b).norm() >= min_sep))
}

fn panel(dims: [usize; 2], spacing: f64, origin: Vec3, posture: Posture) -> Result<ArrayLayout> {
    let rotation = match posture {
        Posture::Identity => Mat3::identity(),
        Posture::Facing => facing_rotation(&(-origin).normalize())?,
    };
    Ok(ArrayLayout::new(dims[0], dims[1], spacing, origin, rotation)?)
}

/// Builds the scenario for `(cfg, seed)`; identical inputs give identical
/// scenarios.
pub fn make_scenario(cfg: &ScenarioConfig, seed: u64) -> Result<Scenario> {
    cfg.validate()?;
    let mut geo = stream(seed, GEOMETRY);
    let mut phases = stream(seed, PHASES);
    let mut rx_stream = stream(seed, RECEIVERS);
    let mut attempt = 0;
    let (eve, cluster_pos) = loop {
        if attempt == cfg.max_retries {
            return Err(HarnessError::Placement(cfg.max_retries));
        }
        attempt += 1;
        let eve = draw_node(&mut geo, cfg);
        let clusters: Vec<Vec3> = (0..cfg.clusters.count).map(|_| draw_cluster(&mut geo, cfg)).collect();
        let all: Vec<Vec3> = std::iter::once(eve).chain(clusters.iter().copied()).collect();
        if well_separated(&all, cfg.min_separation) {
            break (eve, clusters);
        }
    };
    // receivers one at a time from their own stream, so the first K
    // receivers are the same whatever the receiver count
    let mut placed: Vec<Vec3> = std::iter::once(eve).chain(cluster_pos.iter().copied()).collect();
    let mut rx_nodes = Vec::with_capacity(cfg.receivers);
    for _ in 0..cfg.receivers {
        let node = (0..cfg.max_retries)
            .map(|_| draw_node(&mut rx_stream, cfg))
            .find(|p| std::iter::once(Vec3::zeros()).chain(placed.iter().copied()).all(|q| (p - q).norm() >= cfg.min_separation))
            .ok_or(HarnessError::Placement(cfg.max_retries))?;
        placed.push(node);
        rx_nodes.push(node);
    }
    let clusters = cluster_pos
        .into_iter()
        .map(|position| Cluster {
            position,
            rcs: cfg.clusters.rcs,
            phase: phases.random_range(0.0..TAU),
        })
        .collect();

    let wavelength = cfg.wavelength();
    let spacing = cfg.spacing * wavelength;
    let receivers = rx_nodes
        .iter()
        .map(|&o| panel(cfg.rx, spacing, o, cfg.posture))
        .collect::<Result<Vec<_>>>()?;
    let scenario = Scenario {
        radio: RadioParams {
            wavelength,
            directivity: cfg.directivity,
            noise_rx: dbm_to_watts(cfg.noise_dbm),
            noise_eve: dbm_to_watts(cfg.eve_noise_dbm),
        },
        tx: ArrayLayout::axis_aligned(cfg.tx[0], cfg.tx[1], spacing, Vec3::zeros())?,
        receivers,
        eve: panel(cfg.eve, spacing, eve, cfg.posture)?,
        clusters,
        cap: Cap::new(cfg.theta_max_deg.to_radians())?,
        streams: cfg.streams,
        p_max: dbm_to_watts(cfg.p_max_dbm),
    };
    scenario.validate()?;
    Ok(scenario)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_scenario() {
        let cfg = ScenarioConfig::default();
        assert_eq!(make_scenario(&cfg, 3).unwrap(), make_scenario(&cfg, 3).unwrap());
        assert_ne!(make_scenario(&cfg, 3).unwrap(), make_scenario(&cfg, 4).unwrap());
    }

    #[test]
    fn degenerate_distance_range_is_exact() {
        let cfg = ScenarioConfig {
            d_min: 30.0,
            d_max: 30.0,
            receivers: 3,
            ..ScenarioConfig::default()
        };
        let sc = make_scenario(&cfg, 1).unwrap();
        for node in sc.receivers.iter().chain([&sc.eve]) {
            assert!((node.origin().norm() - 30.0).abs() < 1e-12);
        }
    }

    #[test]
    fn nodes_respect_configuration() {
        let cfg = ScenarioConfig {
            receivers: 2,
            ..ScenarioConfig::default()
        };
        for seed in 0..20 {
            let sc = make_scenario(&cfg, seed).unwrap();
            assert_eq!(sc.n_receivers(), 2);
            assert_eq!(sc.n_tx(), 25);
            assert_eq!(sc.clusters.len(), 3);
            for node in sc.receivers.iter().chain([&sc.eve]) {
                let o = node.origin();
                assert!((20.0..=40.0).contains(&o.norm()));
                assert!(o.z / o.norm() >= 60f64.to_radians().cos() - 1e-12);
                // panel normal points back at the transmitter
                let normal = node.to_global(&Vec3::z());
                assert!((normal + o.normalize()).norm() < 1e-9);
            }
            for c in &sc.clusters {
                assert!((0.0..TAU).contains(&c.phase));
            }
        }
    }

    #[test]
    fn impossible_separation_gives_up() {
        let cfg = ScenarioConfig {
            receivers: 3,
            d_min: 1.0,
            d_max: 1.0,
            node_zenith_max_deg: 0.0,
            max_retries: 5,
            ..ScenarioConfig::default()
        };
        assert!(matches!(make_scenario(&cfg, 0), Err(HarnessError::Placement(5))));
    }

    #[test]
    fn phase_stream_is_independent_of_cluster_count() {
        let cfg = ScenarioConfig::default();
        let more = ScenarioConfig {
            clusters: crate::config::ClusterConfig {
                count: 5,
                ..Default::default()
            },
            ..ScenarioConfig::default()
        };
        let a = make_scenario(&cfg, 9).unwrap();
        let b = make_scenario(&more, 9).unwrap();
        assert_eq!(a.receivers[0], b.receivers[0]);
        assert_eq!(a.clusters[0].phase, b.clusters[0].phase);
    }

    #[test]
    fn receivers_nest_across_counts() {
        let base = ScenarioConfig::default();
        for seed in 0..10 {
            let two = make_scenario(&ScenarioConfig { receivers: 2, ..base.clone() }, seed).unwrap();
            let five = make_scenario(&ScenarioConfig { receivers: 5, ..base.clone() }, seed).unwrap();
            assert_eq!(two.receivers[..], five.receivers[..2]);
            assert_eq!(two.eve, five.eve);
            assert_eq!(two.clusters, five.clusters);
        }
    }
}
