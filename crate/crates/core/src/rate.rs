//! Achievable rates and their MMSE reformulation.
//!
//! The surrogate `F = h₁ + h₂ + h₃` (in nats) is a lower bound on
//! `ln 2 · (R − R_e)` for any auxiliary matrices and touches it when the
//! auxiliaries are set by [`update_auxiliaries`].

use crate::error::{Error, Result};
use crate::linalg::{all_finite, c, cholesky, energy, hermitian_part, identity, inverse_hpd, logdet_hpd, logdet_whitened, solve_hpd, trace_re, CMat};
use crate::scenario::RadioParams;

/// Precoder `W` (`N × d`) and artificial-noise factor `W_e` (`N × N`).
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformers {
    pub w: CMat,
    pub w_e: CMat,
}

impl Beamformers {
    pub fn zeros(n: usize, d: usize) -> Self {
        Self {
            w: CMat::zeros(n, d),
            w_e: CMat::zeros(n, n),
        }
    }

    /// `Tr(WWᴴ) + Tr(W_eW_eᴴ)`.
    pub fn power(&self) -> f64 {
        energy(&self.w) + energy(&self.w_e)
    }

    /// Artificial-noise covariance `R_z = W_eW_eᴴ`.
    pub fn noise_cov(&self) -> CMat {
        &self.w_e * self.w_e.adjoint()
    }

    /// Total transmit covariance `W_X = WWᴴ + W_eW_eᴴ`.
    pub fn tx_cov(&self) -> CMat {
        &self.w * self.w.adjoint() + self.noise_cov()
    }

    pub fn streams(&self) -> usize {
        self.w.ncols()
    }
}

/// MMSE auxiliaries for one legitimate receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct LegitAux {
    pub u: CMat,
    pub omega: CMat,
}

/// MMSE auxiliaries tied to the eavesdropper.
#[derive(Debug, Clone, PartialEq)]
pub struct EveAux {
    pub u_e: CMat,
    pub omega_e: CMat,
    pub omega_x: CMat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aux {
    pub legit: LegitAux,
    pub eve: EveAux,
}

fn check_finite(m: &CMat, what: &'static str) -> Result<()> {
    if all_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn scaled_identity(n: usize, s: f64) -> CMat {
    identity(n) * c(s, 0.0)
}

/// `log₂ det(I + H W Wᴴ Hᴴ Σ⁻¹)` with `Σ = H R_z Hᴴ + σ² I`.
pub fn legit_rate(h: &CMat, bf: &Beamformers, noise: f64) -> Result<f64> {
    check_finite(h, "legitimate channel")?;
    let hw = h * &bf.w;
    let hz = h * &bf.w_e;
    let sigma = &hz * hz.adjoint() + scaled_identity(h.nrows(), noise);
    Ok(logdet_whitened(&(&hw * hw.adjoint()), &sigma)? / std::f64::consts::LN_2)
}

/// Eavesdropper rate; same form as [`legit_rate`] with the eavesdropper's
/// channel and noise.
pub fn eve_rate(he: &CMat, bf: &Beamformers, noise_eve: f64) -> Result<f64> {
    check_finite(he, "eavesdropper channel")?;
    legit_rate(he, bf, noise_eve)
}

/// Unclamped `R − R_e` in bits/s/Hz.
pub fn rate_gap(h: &CMat, he: &CMat, bf: &Beamformers, radio: &RadioParams) -> Result<f64> {
    Ok(legit_rate(h, bf, radio.noise_rx)? - eve_rate(he, bf, radio.noise_eve)?)
}

/// `[R − R_e]₊`.
pub fn secrecy_rate(h: &CMat, he: &CMat, bf: &Beamformers, radio: &RadioParams) -> Result<f64> {
    Ok(rate_gap(h, he, bf, radio)?.max(0.0))
}

/// MSE matrix `E = (I − UᴴHW)(I − UᴴHW)ᴴ + UᴴHR_zHᴴU + σ²UᴴU`.
///
/// Written as a sum of PSD terms so that a small `E` at high SNR is not
/// lost to cancellation.
pub fn mse_legit(h: &CMat, bf: &Beamformers, u: &CMat, noise: f64) -> CMat {
    let uh = u.adjoint() * h;
    let resid = identity(bf.streams()) - &uh * &bf.w;
    let leak = &uh * &bf.w_e;
    let e = &resid * resid.adjoint() + &leak * leak.adjoint() + u.adjoint() * u * c(noise, 0.0);
    hermitian_part(&e)
}

/// `E_e = (I − U_eᴴH_eW_e)(I − U_eᴴH_eW_e)ᴴ + σ_e²U_eᴴU_e`.
pub fn mse_eve(he: &CMat, bf: &Beamformers, u_e: &CMat, noise_eve: f64) -> CMat {
    let resid = identity(bf.w_e.ncols()) - u_e.adjoint() * he * &bf.w_e;
    let e = &resid * resid.adjoint() + u_e.adjoint() * u_e * c(noise_eve, 0.0);
    hermitian_part(&e)
}

/// `E_x = I + σ_e⁻² H_e W_X H_eᴴ`.
pub fn mse_x(he: &CMat, bf: &Beamformers, noise_eve: f64) -> CMat {
    let e = identity(he.nrows()) + he * bf.tx_cov() * he.adjoint() * c(1.0 / noise_eve, 0.0);
    hermitian_part(&e)
}

/// Receive filter and weight maximizing `h₁` for the given beamformers.
///
/// The weight is formed as `I + WᴴHᴴΣ⁻¹HW`, which equals `E⁻¹` at the
/// optimal filter but does not require inverting a possibly tiny `E`.
pub fn update_legit_aux(h: &CMat, bf: &Beamformers, noise: f64) -> Result<LegitAux> {
    check_finite(h, "legitimate channel")?;
    let hw = h * &bf.w;
    let cov = h * bf.tx_cov() * h.adjoint() + scaled_identity(h.nrows(), noise);
    let u = solve_hpd(&cov, &hw, "receive covariance")?;
    let hz = h * &bf.w_e;
    let sigma = &hz * hz.adjoint() + scaled_identity(h.nrows(), noise);
    let gram = hw.adjoint() * solve_hpd(&sigma, &hw, "interference-plus-noise covariance")?;
    let omega = hermitian_part(&(identity(bf.streams()) + gram));
    cholesky(&omega, "legitimate MSE weight").map_err(|_| Error::RankDeficientMse("legitimate MSE"))?;
    Ok(LegitAux { u, omega })
}

/// Eavesdropper-side auxiliaries `U_e`, `Ω_e = E_e⁻¹` and `Ω_x = E_x⁻¹`.
pub fn update_eve_aux(he: &CMat, bf: &Beamformers, noise_eve: f64) -> Result<EveAux> {
    check_finite(he, "eavesdropper channel")?;
    let hz = he * &bf.w_e;
    let cov = &hz * hz.adjoint() + scaled_identity(he.nrows(), noise_eve);
    let u_e = solve_hpd(&cov, &hz, "eavesdropper noise covariance")?;
    let omega_e = hermitian_part(&(identity(bf.w_e.ncols()) + hz.adjoint() * &hz * c(1.0 / noise_eve, 0.0)));
    let omega_x = inverse_hpd(&mse_x(he, bf, noise_eve), "eavesdropper total MSE").map_err(|_| Error::RankDeficientMse("eavesdropper total MSE"))?;
    Ok(EveAux { u_e, omega_e, omega_x })
}

pub fn update_auxiliaries(h: &CMat, he: &CMat, bf: &Beamformers, radio: &RadioParams) -> Result<Aux> {
    Ok(Aux {
        legit: update_legit_aux(h, bf, radio.noise_rx)?,
        eve: update_eve_aux(he, bf, radio.noise_eve)?,
    })
}

/// `ln det Ω − Tr(ΩE) + dim`.
fn weighted_mse_term(omega: &CMat, e: &CMat, what: &'static str) -> Result<f64> {
    let logdet = logdet_hpd(omega, what)?;
    Ok(logdet - trace_re(&(omega * e)) + omega.nrows() as f64)
}

/// `h₁ = ln det Ω − Tr(ΩE) + d`.
pub fn h1(h: &CMat, bf: &Beamformers, aux: &LegitAux, noise: f64) -> Result<f64> {
    weighted_mse_term(&aux.omega, &mse_legit(h, bf, &aux.u, noise), "legitimate MSE weight")
}

/// `h₂ + h₃`, the eavesdropper part of the surrogate.
pub fn h_eve(he: &CMat, bf: &Beamformers, aux: &EveAux, noise_eve: f64) -> Result<f64> {
    let h2 = weighted_mse_term(&aux.omega_e, &mse_eve(he, bf, &aux.u_e, noise_eve), "eavesdropper MSE weight")?;
    let h3 = weighted_mse_term(&aux.omega_x, &mse_x(he, bf, noise_eve), "eavesdropper total MSE weight")?;
    Ok(h2 + h3)
}

/// Surrogate `F = h₁ + h₂ + h₃` in nats.
pub fn surrogate_f(h: &CMat, he: &CMat, bf: &Beamformers, aux: &Aux, radio: &RadioParams) -> Result<f64> {
    Ok(h1(h, bf, &aux.legit, radio.noise_rx)? + h_eve(he, bf, &aux.eve, radio.noise_eve)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::SymmetricEigen;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn radio() -> RadioParams {
        RadioParams {
            wavelength: 0.1,
            directivity: 1.0,
            noise_rx: 0.3,
            noise_eve: 0.5,
        }
    }

    fn random_mat(rng: &mut ChaCha8Rng, r: usize, cols: usize, scale: f64) -> CMat {
        CMat::from_fn(r, cols, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * scale)
    }

    /// `log₂ det(I + S Σ⁻¹)` through eigenvalues of `Σ^{-1/2} S Σ^{-1/2}`.
    fn eig_rate(signal: &CMat, sigma: &CMat) -> f64 {
        let eig = SymmetricEigen::new(sigma.clone());
        let inv_sqrt = &eig.eigenvectors
            * CMat::from_diagonal(&eig.eigenvalues.map(|l| c(1.0 / l.sqrt(), 0.0)))
            * eig.eigenvectors.adjoint();
        let white = &inv_sqrt * signal * &inv_sqrt;
        let white = (&white + white.adjoint()) * c(0.5, 0.0);
        SymmetricEigen::new(white).eigenvalues.iter().map(|l| (1.0 + l).log2()).sum()
    }

    #[test]
    fn zero_precoder_gives_zero_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = random_mat(&mut rng, 2, 3, 1.0);
        let he = random_mat(&mut rng, 2, 3, 1.0);
        let mut bf = Beamformers::zeros(3, 2);
        bf.w_e = random_mat(&mut rng, 3, 3, 1.0);
        assert_eq!(secrecy_rate(&h, &he, &bf, &radio()).unwrap(), 0.0);
    }

    #[test]
    fn blocked_eavesdropper_scalar_rate() {
        let h = CMat::from_element(1, 1, c(0.6, -0.8));
        let he = CMat::zeros(1, 1);
        let bf = Beamformers {
            w: CMat::from_element(1, 1, c(2.0, 0.0)),
            w_e: CMat::zeros(1, 1),
        };
        let expect = (1.0 + 4.0 / 0.3_f64).log2();
        assert_relative_eq!(secrecy_rate(&h, &he, &bf, &radio()).unwrap(), expect, epsilon = 1e-12);
    }

    #[test]
    fn rates_match_eigenvalue_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let h = random_mat(&mut rng, 2, 2, 1.5);
            let he = random_mat(&mut rng, 2, 2, 1.5);
            let bf = Beamformers {
                w: random_mat(&mut rng, 2, 1, 1.0),
                w_e: random_mat(&mut rng, 2, 2, 0.5),
            };
            let r = radio();
            let sig = |g: &CMat, noise: f64| {
                let gz = g * &bf.w_e;
                let gw = g * &bf.w;
                eig_rate(&(&gw * gw.adjoint()), &(&gz * gz.adjoint() + identity(2) * c(noise, 0.0)))
            };
            let expect = sig(&h, r.noise_rx) - sig(&he, r.noise_eve);
            assert_relative_eq!(rate_gap(&h, &he, &bf, &r).unwrap(), expect, epsilon = 1e-8);
        }
    }

    #[test]
    fn zero_beamformers_give_identity_auxiliaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_mat(&mut rng, 3, 4, 1.0);
        let he = random_mat(&mut rng, 2, 4, 1.0);
        let bf = Beamformers::zeros(4, 2);
        let aux = update_auxiliaries(&h, &he, &bf, &radio()).unwrap();
        assert_eq!(aux.legit.u, CMat::zeros(3, 2));
        assert_eq!(aux.legit.omega, identity(2));
        assert_eq!(aux.eve.omega_x, identity(2));
        assert_eq!(mse_legit(&h, &bf, &aux.legit.u, 0.3), identity(2));
    }

    #[test]
    fn scalar_auxiliaries_match_hand_algebra() {
        let (hv, wv, noise) = (0.7, 1.3, 0.3);
        let h = CMat::from_element(1, 1, c(hv, 0.0));
        let bf = Beamformers {
            w: CMat::from_element(1, 1, c(wv, 0.0)),
            w_e: CMat::zeros(1, 1),
        };
        let aux = update_legit_aux(&h, &bf, noise).unwrap();
        let s = hv * hv * wv * wv;
        assert_relative_eq!(aux.u[(0, 0)].re, hv * wv / (s + noise), epsilon = 1e-14);
        let e = mse_legit(&h, &bf, &aux.u, noise)[(0, 0)].re;
        assert_relative_eq!(e, noise / (s + noise), epsilon = 1e-14);
        assert_relative_eq!(aux.omega[(0, 0)].re * e, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn surrogate_is_tight_at_optimal_auxiliaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..30 {
            let h = random_mat(&mut rng, 3, 4, 2.0);
            let he = random_mat(&mut rng, 2, 4, 2.0);
            let bf = Beamformers {
                w: random_mat(&mut rng, 4, 2, 1.0),
                w_e: random_mat(&mut rng, 4, 4, 0.4),
            };
            let r = radio();
            let aux = update_auxiliaries(&h, &he, &bf, &r).unwrap();
            let f = surrogate_f(&h, &he, &bf, &aux, &r).unwrap();
            assert!((f / std::f64::consts::LN_2 - rate_gap(&h, &he, &bf, &r).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn identity_weights_reduce_to_traces() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_mat(&mut rng, 2, 3, 1.0);
        let he = random_mat(&mut rng, 2, 3, 1.0);
        let bf = Beamformers {
            w: random_mat(&mut rng, 3, 1, 1.0),
            w_e: random_mat(&mut rng, 3, 3, 0.3),
        };
        let r = radio();
        let mut aux = update_auxiliaries(&h, &he, &bf, &r).unwrap();
        aux.legit.omega = identity(1);
        aux.eve.omega_e = identity(3);
        aux.eve.omega_x = identity(2);
        let expect = -trace_re(&mse_legit(&h, &bf, &aux.legit.u, r.noise_rx)) + 1.0
            - trace_re(&mse_eve(&he, &bf, &aux.eve.u_e, r.noise_eve))
            + 3.0
            - trace_re(&mse_x(&he, &bf, r.noise_eve))
            + 2.0;
        assert_relative_eq!(surrogate_f(&h, &he, &bf, &aux, &r).unwrap(), expect, epsilon = 1e-12);
    }
}
