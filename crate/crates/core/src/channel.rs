//! Multipath channel synthesis with directional antenna gains, plus the
//! analytic derivatives of every channel entry with respect to the
//! boresights.
//!
//! All orientation-independent quantities (path amplitudes and the link
//! directions expressed in each panel's local frame) are computed once in
//! [`ChannelModel::new`]. A directional factor then reduces to
//! `[fᵀv]₊^p` with `f` the local boresight and `v` a cached local direction.

use crate::error::{Error, Result};
use crate::linalg::{CMat, CVec3, Vec3, C64};
use crate::scenario::{OrientationSet, RadioParams, Scenario};

/// Cosine gain pattern `G0 cos^{2p} ε` on `[0, π/2]`, zero elsewhere.
pub fn gain_pattern(epsilon: f64, radio: &RadioParams) -> f64 {
    if (0.0..=std::f64::consts::FRAC_PI_2).contains(&epsilon) {
        radio.g0() * hinge_pow(epsilon.cos(), 2.0 * radio.directivity)
    } else {
        0.0
    }
}

/// `[x]₊^p` with the convention `[x]₊^0 = 1`, so an isotropic element has
/// unit factor in every direction.
pub fn hinge_pow(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else if x > 0.0 {
        (p * x.ln()).exp()
    } else {
        0.0
    }
}

/// Derivative of [`hinge_pow`] in `x`; zero at and behind the hinge.
pub fn hinge_pow_deriv(x: f64, p: f64) -> f64 {
    if p == 0.0 || x <= 0.0 {
        0.0
    } else {
        p * ((p - 1.0) * x.ln()).exp()
    }
}

/// `[f̃ᵀ dir]₊^p` for a global boresight and link direction.
pub fn directional_factor(f_global: &Vec3, dir: &Vec3, p: f64) -> f64 {
    hinge_pow(f_global.dot(dir), p)
}

/// Cached geometry of the links between the transmitter and one receiver
/// panel (legitimate or eavesdropper).
#[derive(Debug, Clone)]
struct LinkCache {
    /// LoS amplitude, `[rx][tx]`.
    los_amp: Vec<Vec<C64>>,
    /// LoS direction in the transmit frame, `[rx][tx]`.
    los_tx_dir: Vec<Vec<Vec3>>,
    /// Negated LoS direction in the receive frame, `[rx][tx]`.
    los_rx_dir: Vec<Vec<Vec3>>,
    /// NLoS amplitudes, `[rx][tx][cluster]`.
    nlos_amp: Vec<Vec<Vec<C64>>>,
    /// Receiver-to-cluster direction in the receive frame, `[rx][cluster]`.
    cluster_rx_dir: Vec<Vec<Vec3>>,
}

#[derive(Debug, Clone)]
pub struct ChannelModel {
    p: f64,
    n_tx: usize,
    /// Transmitter-to-cluster direction in the transmit frame, `[tx][cluster]`.
    cluster_tx_dir: Vec<Vec<Vec3>>,
    receivers: Vec<LinkCache>,
    eve: LinkCache,
}

/// Legitimate channels (one `M × N` matrix per receiver) and the `Q × N`
/// eavesdropper channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Channels {
    pub legit: Vec<CMat>,
    pub eve: CMat,
}

/// Derivatives with respect to one transmit boresight. Only column `n` of
/// each channel depends on it.
#[derive(Debug, Clone)]
pub struct TxGradient {
    /// `∂h_{k,m,n}/∂f_{t,n}`, indexed `[receiver][m]`.
    pub legit: Vec<Vec<CVec3>>,
    /// `∂h_{e,q,n}/∂f_{t,n}`, indexed `[q]`.
    pub eve: Vec<CVec3>,
}

fn unit_and_distance(from: &Vec3, to: &Vec3, what: &str) -> Result<(Vec3, f64)> {
    let diff = to - from;
    let r = diff.norm();
    if !(r > 0.0) {
        return Err(Error::DegenerateGeometry(format!("coincident positions on the {what} link")));
    }
    Ok((diff / r, r))
}

fn phasor(amplitude: f64, phase: f64) -> C64 {
    C64::from_polar(amplitude, phase)
}

impl ChannelModel {
    pub fn new(scenario: &Scenario) -> Result<Self> {
        scenario.validate()?;
        let radio = &scenario.radio;
        let lambda = radio.wavelength;
        let k0 = 2.0 * std::f64::consts::PI / lambda;
        let beta0 = radio.beta0();
        let g0 = radio.g0();
        let four_pi = 4.0 * std::f64::consts::PI;

        let tx_pos = scenario.tx.element_positions();
        let rt_t = scenario.tx.rotation().transpose();

        let mut cluster_tx_dir = Vec::with_capacity(tx_pos.len());
        let mut cluster_tx_dist = Vec::with_capacity(tx_pos.len());
        for t in &tx_pos {
            let mut dirs = Vec::with_capacity(scenario.clusters.len());
            let mut dists = Vec::with_capacity(scenario.clusters.len());
            for cl in &scenario.clusters {
                let (u, r) = unit_and_distance(t, &cl.position, "transmitter-cluster")?;
                dirs.push(rt_t * u);
                dists.push(r);
            }
            cluster_tx_dir.push(dirs);
            cluster_tx_dist.push(dists);
        }

        let build_link = |panel: &crate::geometry::ArrayLayout, legit: bool| -> Result<LinkCache> {
            let rx_pos = panel.element_positions();
            let rr_t = panel.rotation().transpose();
            let mut link = LinkCache {
                los_amp: Vec::with_capacity(rx_pos.len()),
                los_tx_dir: Vec::with_capacity(rx_pos.len()),
                los_rx_dir: Vec::with_capacity(rx_pos.len()),
                nlos_amp: Vec::with_capacity(rx_pos.len()),
                cluster_rx_dir: Vec::with_capacity(rx_pos.len()),
            };
            let mut cl_dist = Vec::with_capacity(scenario.clusters.len());
            let mut cl_dirs = Vec::with_capacity(scenario.clusters.len());
            for r in &rx_pos {
                cl_dist.clear();
                cl_dirs.clear();
                for cl in &scenario.clusters {
                    let (u, dist) = unit_and_distance(r, &cl.position, "receiver-cluster")?;
                    cl_dirs.push(rr_t * u);
                    cl_dist.push(dist);
                }
                let mut amp_row = Vec::with_capacity(tx_pos.len());
                let mut tx_row = Vec::with_capacity(tx_pos.len());
                let mut rx_row = Vec::with_capacity(tx_pos.len());
                let mut nlos_row = Vec::with_capacity(tx_pos.len());
                for (n, t) in tx_pos.iter().enumerate() {
                    let (u, dist) = unit_and_distance(t, r, "line-of-sight")?;
                    let los_mag = if legit {
                        beta0.sqrt() * g0 / dist
                    } else {
                        (beta0 * g0).sqrt() / dist
                    };
                    amp_row.push(phasor(los_mag, -k0 * dist));
                    tx_row.push(rt_t * u);
                    rx_row.push(-(rr_t * u));
                    let nlos: Vec<C64> = scenario
                        .clusters
                        .iter()
                        .enumerate()
                        .map(|(d, cl)| {
                            let (r_nd, r_dm) = (cluster_tx_dist[n][d], cl_dist[d]);
                            let mag = if legit {
                                (cl.rcs / four_pi).sqrt() * beta0 * g0 / (r_nd * r_dm)
                            } else {
                                (cl.rcs * beta0 * g0 / four_pi).sqrt() / (r_nd * r_dm)
                            };
                            phasor(mag, -k0 * (r_nd + r_dm) + cl.phase)
                        })
                        .collect();
                    nlos_row.push(nlos);
                }
                link.los_amp.push(amp_row);
                link.los_tx_dir.push(tx_row);
                link.los_rx_dir.push(rx_row);
                link.nlos_amp.push(nlos_row);
                link.cluster_rx_dir.push(cl_dirs.clone());
            }
            Ok(link)
        };

        let receivers = scenario
            .receivers
            .iter()
            .map(|panel| build_link(panel, true))
            .collect::<Result<Vec<_>>>()?;
        let eve = build_link(&scenario.eve, false)?;
        Ok(Self {
            p: radio.directivity,
            n_tx: tx_pos.len(),
            cluster_tx_dir,
            receivers,
            eve,
        })
    }

    pub fn directivity(&self) -> f64 {
        self.p
    }

    pub fn n_receivers(&self) -> usize {
        self.receivers.len()
    }

    /// `h_{k,m,n}` for the given transmit and receive boresights.
    pub fn legit_entry(&self, k: usize, m: usize, n: usize, ft: &Vec3, fr: &Vec3) -> C64 {
        let link = &self.receivers[k];
        let p = self.p;
        let mut h = link.los_amp[m][n] * (hinge_pow(ft.dot(&link.los_tx_dir[m][n]), p) * hinge_pow(fr.dot(&link.los_rx_dir[m][n]), p));
        for (d, b) in link.nlos_amp[m][n].iter().enumerate() {
            let g = hinge_pow(ft.dot(&self.cluster_tx_dir[n][d]), p) * hinge_pow(fr.dot(&link.cluster_rx_dir[m][d]), p);
            h += b * g;
        }
        h
    }

    /// `h_{e,q,n}` for the given transmit boresight.
    pub fn eve_entry(&self, q: usize, n: usize, ft: &Vec3) -> C64 {
        let link = &self.eve;
        let p = self.p;
        let mut h = link.los_amp[q][n] * hinge_pow(ft.dot(&link.los_tx_dir[q][n]), p);
        for (d, b) in link.nlos_amp[q][n].iter().enumerate() {
            h += b * hinge_pow(ft.dot(&self.cluster_tx_dir[n][d]), p);
        }
        h
    }

    pub fn build(&self, orient: &OrientationSet) -> Channels {
        let legit = self
            .receivers
            .iter()
            .enumerate()
            .map(|(k, link)| {
                CMat::from_fn(link.los_amp.len(), self.n_tx, |m, n| self.legit_entry(k, m, n, &orient.tx[n], &orient.rx[k][m]))
            })
            .collect();
        let eve = CMat::from_fn(self.eve.los_amp.len(), self.n_tx, |q, n| self.eve_entry(q, n, &orient.tx[n]));
        Channels { legit, eve }
    }

    /// Recomputes column `n` of every channel after transmit boresight `n`
    /// changed.
    pub fn refresh_tx(&self, orient: &OrientationSet, n: usize, ch: &mut Channels) {
        let ft = &orient.tx[n];
        for (k, h) in ch.legit.iter_mut().enumerate() {
            for m in 0..h.nrows() {
                h[(m, n)] = self.legit_entry(k, m, n, ft, &orient.rx[k][m]);
            }
        }
        for q in 0..ch.eve.nrows() {
            ch.eve[(q, n)] = self.eve_entry(q, n, ft);
        }
    }

    /// Recomputes row `m` of receiver `k`'s channel.
    pub fn refresh_rx(&self, orient: &OrientationSet, k: usize, m: usize, ch: &mut Channels) {
        let fr = &orient.rx[k][m];
        for n in 0..self.n_tx {
            ch.legit[k][(m, n)] = self.legit_entry(k, m, n, &orient.tx[n], fr);
        }
    }

    /// Smallest `|f̃ᵀu|` over every link direction `u` seen by transmit
    /// antenna `n`. For `p ≤ 1` the gain pattern has a kink where this
    /// vanishes.
    pub fn hinge_margin_tx(&self, orient: &OrientationSet, n: usize) -> f64 {
        let ft = &orient.tx[n];
        let links = self.receivers.iter().chain([&self.eve]);
        let los = links.flat_map(|l| l.los_tx_dir.iter().map(move |row| &row[n]));
        los.chain(&self.cluster_tx_dir[n]).map(|v| ft.dot(v).abs()).fold(f64::INFINITY, f64::min)
    }

    /// [`Self::hinge_margin_tx`] for receive antenna `m` of receiver `k`.
    pub fn hinge_margin_rx(&self, orient: &OrientationSet, k: usize, m: usize) -> f64 {
        let fr = &orient.rx[k][m];
        let link = &self.receivers[k];
        link.los_rx_dir[m]
            .iter()
            .chain(&link.cluster_rx_dir[m])
            .map(|v| fr.dot(v).abs())
            .fold(f64::INFINITY, f64::min)
    }

    /// Derivatives of column `n` of every channel with respect to `f_{t,n}`.
    pub fn grad_tx(&self, orient: &OrientationSet, n: usize) -> TxGradient {
        let p = self.p;
        let ft = &orient.tx[n];
        let cl_tx: Vec<(f64, f64)> = self.cluster_tx_dir[n]
            .iter()
            .map(|v| {
                let x = ft.dot(v);
                (hinge_pow(x, p), hinge_pow_deriv(x, p))
            })
            .collect();
        let legit = self
            .receivers
            .iter()
            .enumerate()
            .map(|(k, link)| {
                (0..link.los_amp.len())
                    .map(|m| {
                        let fr = &orient.rx[k][m];
                        let v = &link.los_tx_dir[m][n];
                        let scale = hinge_pow_deriv(ft.dot(v), p) * hinge_pow(fr.dot(&link.los_rx_dir[m][n]), p);
                        let mut g = scaled(v, link.los_amp[m][n] * scale);
                        for (d, b) in link.nlos_amp[m][n].iter().enumerate() {
                            let s = cl_tx[d].1 * hinge_pow(fr.dot(&link.cluster_rx_dir[m][d]), p);
                            if s != 0.0 {
                                g += scaled(&self.cluster_tx_dir[n][d], b * s);
                            }
                        }
                        g
                    })
                    .collect()
            })
            .collect();
        let eve = (0..self.eve.los_amp.len())
            .map(|q| {
                let v = &self.eve.los_tx_dir[q][n];
                let mut g = scaled(v, self.eve.los_amp[q][n] * hinge_pow_deriv(ft.dot(v), p));
                for (d, b) in self.eve.nlos_amp[q][n].iter().enumerate() {
                    if cl_tx[d].1 != 0.0 {
                        g += scaled(&self.cluster_tx_dir[n][d], b * cl_tx[d].1);
                    }
                }
                g
            })
            .collect();
        TxGradient { legit, eve }
    }

    /// Derivatives of row `m` of receiver `k`'s channel with respect to
    /// `f_{r,k,m}`, one per transmit antenna.
    pub fn grad_rx(&self, orient: &OrientationSet, k: usize, m: usize) -> Vec<CVec3> {
        let p = self.p;
        let link = &self.receivers[k];
        let fr = &orient.rx[k][m];
        let cl_rx: Vec<f64> = link.cluster_rx_dir[m].iter().map(|v| hinge_pow_deriv(fr.dot(v), p)).collect();
        (0..self.n_tx)
            .map(|n| {
                let ft = &orient.tx[n];
                let v = &link.los_rx_dir[m][n];
                let scale = hinge_pow(ft.dot(&link.los_tx_dir[m][n]), p) * hinge_pow_deriv(fr.dot(v), p);
                let mut g = scaled(v, link.los_amp[m][n] * scale);
                for (d, b) in link.nlos_amp[m][n].iter().enumerate() {
                    let s = hinge_pow(ft.dot(&self.cluster_tx_dir[n][d]), p) * cl_rx[d];
                    if s != 0.0 {
                        g += scaled(&link.cluster_rx_dir[m][d], b * s);
                    }
                }
                g
            })
            .collect()
    }
}

fn scaled(v: &Vec3, z: C64) -> CVec3 {
    CVec3::new(z * v.x, z * v.y, z * v.z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{facing_rotation, ArrayLayout, Cap};
    use crate::linalg::{c, Mat3};
    use crate::scenario::Cluster;
    use approx::assert_relative_eq;

    fn radio(p: f64) -> RadioParams {
        RadioParams {
            wavelength: 0.0857,
            directivity: p,
            noise_rx: 1e-11,
            noise_eve: 1e-11,
        }
    }

    fn small_scenario(p: f64, clusters: Vec<Cluster>) -> Scenario {
        let lambda = 0.0857;
        let rx_pos = Vec3::new(3.0, 1.0, 25.0);
        let eve_pos = Vec3::new(-8.0, 4.0, 20.0);
        Scenario {
            radio: radio(p),
            tx: ArrayLayout::axis_aligned(2, 2, lambda / 2.0, Vec3::zeros()).unwrap(),
            receivers: vec![ArrayLayout::new(2, 1, lambda / 2.0, rx_pos, facing_rotation(&-rx_pos).unwrap()).unwrap()],
            eve: ArrayLayout::new(1, 2, lambda / 2.0, eve_pos, facing_rotation(&-eve_pos).unwrap()).unwrap(),
            clusters,
            cap: Cap::hemisphere(),
            streams: 1,
            p_max: 0.1,
        }
    }

    #[test]
    fn gain_pattern_examples() {
        assert_eq!(gain_pattern(1.0, &radio(0.0)), 2.0);
        assert_eq!(gain_pattern(0.0, &radio(1.0)), 6.0);
        assert_eq!(gain_pattern(2.0, &radio(1.0)), 0.0);
    }

    #[test]
    fn directional_factor_examples() {
        let d = Vec3::new(0.0, 0.6, 0.8);
        assert_relative_eq!(directional_factor(&d, &d, 3.0), 1.0, epsilon = 1e-15);
        assert_eq!(directional_factor(&-d, &d, 1.0), 0.0);
        let f = Vec3::new(0.0, 0.0, 1.0);
        let dir = Vec3::new((3.0_f64).sqrt() / 2.0, 0.0, 0.5);
        assert_relative_eq!(directional_factor(&f, &dir, 2.0), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn aligned_los_has_free_space_magnitude() {
        let sc = small_scenario(1.0, vec![]);
        let model = ChannelModel::new(&sc).unwrap();
        let tx = sc.tx.element_positions();
        let rx = sc.receivers[0].element_positions();
        let beta0 = sc.radio.beta0();
        for m in 0..rx.len() {
            for n in 0..tx.len() {
                let u = (rx[m] - tx[n]).normalize();
                let ft = sc.tx.rotation().transpose() * u;
                let fr = sc.receivers[0].rotation().transpose() * -u;
                let h = model.legit_entry(0, m, n, &ft, &fr);
                assert_relative_eq!(h.norm(), beta0.sqrt() * 6.0 / (rx[m] - tx[n]).norm(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn orthogonal_boresight_kills_los() {
        let sc = small_scenario(1.0, vec![]);
        let model = ChannelModel::new(&sc).unwrap();
        let tx = sc.tx.element_positions();
        let rx = sc.receivers[0].element_positions();
        let u = (rx[0] - tx[0]).normalize();
        let ft = u.cross(&Vec3::x()).normalize();
        assert_eq!(model.legit_entry(0, 0, 0, &ft, &Vec3::z()), c(0.0, 0.0));
    }

    #[test]
    fn scalar_entry_matches_hand_computation() {
        let lambda = 0.0857;
        let t = Vec3::zeros();
        let r = Vec3::new(2.0, -1.0, 30.0);
        let e = Vec3::new(-5.0, 5.0, 25.0);
        let s = Vec3::new(6.0, 3.0, 12.0);
        let (rcs, chi) = (40.0, 1.3);
        let sc = Scenario {
            radio: radio(1.5),
            tx: ArrayLayout::axis_aligned(1, 1, lambda / 2.0, t).unwrap(),
            receivers: vec![ArrayLayout::new(1, 1, lambda / 2.0, r, Mat3::identity()).unwrap()],
            eve: ArrayLayout::axis_aligned(1, 1, lambda / 2.0, e).unwrap(),
            clusters: vec![Cluster { position: s, rcs, phase: chi }],
            cap: Cap::hemisphere(),
            streams: 1,
            p_max: 1.0,
        };
        let ft = Vec3::new(0.2, 0.1, 0.9).normalize();
        let fr = Vec3::new(0.1, -0.3, -0.8).normalize();
        let orient = OrientationSet { tx: vec![ft], rx: vec![vec![fr]] };
        let ch = ChannelModel::new(&sc).unwrap().build(&orient);

        let p = 1.5_f64;
        let b0 = (lambda / (4.0 * std::f64::consts::PI)).powi(2);
        let g0 = 2.0 * (2.0 * p + 1.0);
        let k = 2.0 * std::f64::consts::PI / lambda;
        let pos = |x: f64| if x > 0.0 { x.powf(p) } else { 0.0 };
        let r_mn = (r - t).norm();
        let r_nd = (s - t).norm();
        let r_dm = (r - s).norm();
        let a = C64::from_polar(b0.sqrt() * g0 / r_mn, -k * r_mn);
        let b = C64::from_polar((rcs / (4.0 * std::f64::consts::PI)).sqrt() * b0 * g0 / (r_nd * r_dm), -k * (r_nd + r_dm) + chi);
        let expect = a * pos(ft.dot(&((r - t) / r_mn))) * pos(-fr.dot(&((r - t) / r_mn)))
            + b * pos(ft.dot(&((s - t) / r_nd))) * pos(fr.dot(&((s - r) / r_dm)));
        assert_relative_eq!(ch.legit[0][(0, 0)].re, expect.re, max_relative = 1e-12);
        assert_relative_eq!(ch.legit[0][(0, 0)].im, expect.im, max_relative = 1e-12);

        let r_e = (e - t).norm();
        let r_ed = (e - s).norm();
        let ae = C64::from_polar((b0 * g0).sqrt() / r_e, -k * r_e);
        let be = C64::from_polar((rcs * b0 * g0 / (4.0 * std::f64::consts::PI)).sqrt() / (r_ed * r_nd), -k * (r_nd + r_ed) + chi);
        let expect_e = ae * pos(ft.dot(&((e - t) / r_e))) + be * pos(ft.dot(&((s - t) / r_nd)));
        assert_relative_eq!(ch.eve[(0, 0)].re, expect_e.re, max_relative = 1e-12);
        assert_relative_eq!(ch.eve[(0, 0)].im, expect_e.im, max_relative = 1e-12);
    }

    #[test]
    fn coincident_elements_are_rejected() {
        let mut sc = small_scenario(1.0, vec![]);
        sc.receivers[0] = ArrayLayout::axis_aligned(1, 1, 0.04, sc.tx.element_positions()[0]).unwrap();
        assert!(matches!(ChannelModel::new(&sc), Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn dead_zone_gradient_is_zero() {
        let sc = small_scenario(1.0, vec![]);
        let model = ChannelModel::new(&sc).unwrap();
        let mut orient = OrientationSet::panel_normal(&sc);
        // everything lies above the transmitter, so pointing down hides all links
        orient.tx[0] = -Vec3::z();
        let g = model.grad_tx(&orient, 0);
        assert!(g.legit[0].iter().chain(&g.eve).all(|v| v.norm() == 0.0));
    }

    #[test]
    fn isotropic_channels_ignore_orientation() {
        let cl = vec![Cluster { position: Vec3::new(5.0, 5.0, 10.0), rcs: 10.0, phase: 0.4 }];
        let sc = small_scenario(0.0, cl);
        let model = ChannelModel::new(&sc).unwrap();
        let a = model.build(&OrientationSet::panel_normal(&sc));
        let mut o = OrientationSet::panel_normal(&sc);
        o.tx[1] = Vec3::new(0.5, 0.5, 0.5f64.sqrt());
        o.rx[0][0] = Vec3::x();
        assert_eq!(a, model.build(&o));
    }

    #[test]
    fn incremental_refresh_matches_full_build() {
        let cl = vec![Cluster { position: Vec3::new(5.0, 5.0, 10.0), rcs: 10.0, phase: 0.4 }];
        let sc = small_scenario(1.0, cl);
        let model = ChannelModel::new(&sc).unwrap();
        let mut o = OrientationSet::panel_normal(&sc);
        let mut ch = model.build(&o);
        o.tx[2] = Vec3::new(0.3, -0.2, 0.9).normalize();
        model.refresh_tx(&o, 2, &mut ch);
        o.rx[0][1] = Vec3::new(-0.1, 0.2, 0.9).normalize();
        model.refresh_rx(&o, 0, 1, &mut ch);
        assert_eq!(ch, model.build(&o));
    }
}
