//! Physical description of one experiment: radio constants, array panels,
//! scattering clusters and the transmit budget.

use crate::error::{Error, Result};
use crate::geometry::{ensure_on_cap, e_z, ArrayLayout, Cap, UNIT_TOL};
use crate::linalg::Vec3;

#[derive(Debug, Clone, PartialEq)]
pub struct RadioParams {
    pub wavelength: f64,
    /// Directivity exponent `p` of the cosine gain pattern.
    pub directivity: f64,
    /// Noise power at every legitimate receiver, in watts.
    pub noise_rx: f64,
    /// Noise power at the eavesdropper, in watts.
    pub noise_eve: f64,
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.wavelength > 0.0
            && self.wavelength.is_finite()
            && self.directivity >= 0.0
            && self.directivity.is_finite()
            && self.noise_rx > 0.0
            && self.noise_eve > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid radio parameters {self:?}")))
        }
    }

    /// Free-space constant `(λ / 4π)²`.
    pub fn beta0(&self) -> f64 {
        (self.wavelength / (4.0 * std::f64::consts::PI)).powi(2)
    }

    /// Boresight gain `2(2p + 1)`.
    pub fn g0(&self) -> f64 {
        2.0 * (2.0 * self.directivity + 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub position: Vec3,
    /// Radar cross section in m².
    pub rcs: f64,
    /// Scattering phase in radians.
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub radio: RadioParams,
    pub tx: ArrayLayout,
    /// One panel per legitimate receiver; a plain wiretap scenario has one.
    pub receivers: Vec<ArrayLayout>,
    pub eve: ArrayLayout,
    pub clusters: Vec<Cluster>,
    pub cap: Cap,
    /// Number of data streams `d`.
    pub streams: usize,
    /// Transmit power budget in watts.
    pub p_max: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        if self.receivers.is_empty() {
            return Err(Error::InvalidParameter("at least one receiver is required".into()));
        }
        if !(self.p_max > 0.0 && self.p_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("power budget {} must be positive", self.p_max)));
        }
        let m = self.receivers[0].len();
        if self.receivers.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidParameter("all receivers must have the same array size".into()));
        }
        if self.streams == 0 || self.streams > self.tx.len().min(m) {
            return Err(Error::InvalidParameter(format!(
                "stream count {} must lie in 1..=min(N, M) = {}",
                self.streams,
                self.tx.len().min(m)
            )));
        }
        if self.clusters.iter().any(|c| !(c.rcs > 0.0)) {
            return Err(Error::InvalidParameter("cluster cross sections must be positive".into()));
        }
        Ok(())
    }

    pub fn n_tx(&self) -> usize {
        self.tx.len()
    }

    pub fn n_rx(&self) -> usize {
        self.receivers[0].len()
    }

    pub fn n_eve(&self) -> usize {
        self.eve.len()
    }

    pub fn n_receivers(&self) -> usize {
        self.receivers.len()
    }

    /// Copy restricted to a single legitimate receiver.
    pub fn with_receiver(&self, k: usize) -> Scenario {
        Scenario {
            receivers: vec![self.receivers[k].clone()],
            ..self.clone()
        }
    }
}

/// Local boresights of every transmit antenna and of every antenna of every
/// legitimate receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientationSet {
    pub tx: Vec<Vec3>,
    /// Indexed `[receiver][antenna]`.
    pub rx: Vec<Vec<Vec3>>,
}

impl OrientationSet {
    /// All boresights along their panel normals.
    pub fn panel_normal(scenario: &Scenario) -> Self {
        Self {
            tx: vec![e_z(); scenario.n_tx()],
            rx: scenario.receivers.iter().map(|r| vec![e_z(); r.len()]).collect(),
        }
    }

    pub fn validate(&self, scenario: &Scenario) -> Result<()> {
        if self.tx.len() != scenario.n_tx()
            || self.rx.len() != scenario.n_receivers()
            || self.rx.iter().zip(&scenario.receivers).any(|(o, r)| o.len() != r.len())
        {
            return Err(Error::InvalidParameter("orientation set does not match the scenario".into()));
        }
        for f in self.iter() {
            if (f.norm() - 1.0).abs() > UNIT_TOL {
                return Err(Error::InvalidParameter(format!("boresight {f:?} is not unit norm")));
            }
            ensure_on_cap(f, &scenario.cap)?;
        }
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Vec3> {
        self.tx.iter().chain(self.rx.iter().flatten())
    }

    /// Smallest cos-zenith over all boresights.
    pub fn min_cos_zenith(&self) -> f64 {
        self.iter().map(|f| f.z).fold(f64::INFINITY, f64::min)
    }

    pub fn fits_cap(&self, cap: &Cap) -> bool {
        self.iter().all(|f| cap.contains(f))
    }
}
