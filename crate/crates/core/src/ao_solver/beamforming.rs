//! Closed-form precoder and artificial-noise updates under the power budget.
//!
//! At fixed auxiliaries the surrogate is a concave quadratic in `(W, W_e)`,
//! maximized by `W(ξ) = (A + ξI)⁻¹B`, `W_e(ξ) = (A_e + ξI)⁻¹B_e` with one
//! shared multiplier `ξ ≥ 0` chosen so the total power meets the budget.

use crate::error::{Error, Result};
use crate::linalg::{c, energy, hermitian_eigen, CMat};
use crate::rate::{Aux, Beamformers};

/// Eigenvalues below this fraction of the largest are treated as zero when
/// forming the pseudo-inverse at `ξ = 0`.
pub const PINV_CUTOFF: f64 = 1e-12;
/// Relative energy of `B` in the null space of `A` above which the
/// unconstrained minimizer does not exist and `P(0)` is infinite.
const NULL_ENERGY_TOL: f64 = 1e-20;

/// `A` and `B` of one block, with `A` pre-diagonalized so that
/// `P(ξ) = Σ_i ‖(VᴴB)_i‖² / (λ_i + ξ)²` is cheap to evaluate.
#[derive(Debug, Clone)]
pub struct QuadraticUpdate {
    eigvals: Vec<f64>,
    eigvecs: CMat,
    /// Squared row norms of `VᴴB`.
    row_energy: Vec<f64>,
    vhb: CMat,
    b_energy: f64,
    cutoff: f64,
}

impl QuadraticUpdate {
    pub fn new(a: &CMat, b: &CMat) -> Self {
        let (vals, vecs) = hermitian_eigen(a);
        // A is PSD; negative eigenvalues are rounding noise
        let eigvals: Vec<f64> = vals.into_iter().map(|l| l.max(0.0)).collect();
        let vhb = vecs.adjoint() * b;
        let row_energy = (0..vhb.nrows()).map(|i| vhb.row(i).iter().map(|z| z.norm_sqr()).sum()).collect();
        let lmax = eigvals.iter().copied().fold(0.0, f64::max);
        Self {
            eigvals,
            eigvecs: vecs,
            row_energy,
            vhb,
            b_energy: energy(b),
            cutoff: PINV_CUTOFF * lmax,
        }
    }

    fn is_null(&self, i: usize) -> bool {
        self.eigvals[i] <= self.cutoff
    }

    /// Energy of `B` outside the range of `A`.
    fn null_energy(&self) -> f64 {
        (0..self.eigvals.len()).filter(|&i| self.is_null(i)).map(|i| self.row_energy[i]).sum()
    }

    /// `Tr((A+ξI)⁻¹BBᴴ(A+ξI)⁻¹)`; at `ξ = 0` the pseudo-inverse is used
    /// unless `B` has energy outside the range of `A`.
    pub fn power(&self, xi: f64) -> f64 {
        if xi == 0.0 {
            if self.null_energy() > NULL_ENERGY_TOL * self.b_energy {
                return f64::INFINITY;
            }
            return (0..self.eigvals.len())
                .filter(|&i| !self.is_null(i))
                .map(|i| self.row_energy[i] / (self.eigvals[i] * self.eigvals[i]))
                .sum();
        }
        self.eigvals.iter().zip(&self.row_energy).map(|(l, e)| e / ((l + xi) * (l + xi))).sum()
    }

    pub fn solve(&self, xi: f64) -> CMat {
        let mut scaled = self.vhb.clone();
        for i in 0..scaled.nrows() {
            let s = if xi == 0.0 {
                if self.is_null(i) {
                    0.0
                } else {
                    1.0 / self.eigvals[i]
                }
            } else {
                1.0 / (self.eigvals[i] + xi)
            };
            scaled.row_mut(i).scale_mut(s);
        }
        &self.eigvecs * scaled
    }

    pub fn b_energy(&self) -> f64 {
        self.b_energy
    }
}

/// Total power `P(ξ)` of both blocks.
pub fn power_curve(xi: f64, sig: &QuadraticUpdate, an: &QuadraticUpdate) -> f64 {
    sig.power(xi) + an.power(xi)
}

/// `√((Tr BBᴴ + Tr B_eB_eᴴ) / P_max)`, at which `P(ξ) ≤ P_max` is
/// guaranteed.
pub fn xi_upper_bound(sig: &QuadraticUpdate, an: &QuadraticUpdate, p_max: f64) -> f64 {
    ((sig.b_energy + an.b_energy) / p_max).sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformSolution {
    pub bf: Beamformers,
    pub xi: f64,
    pub bisection_iterations: usize,
}

/// Smallest `ξ ≥ 0` with `P(ξ) ≤ P_max` and the corresponding beamformers.
///
/// The bisection keeps the feasible endpoint and runs until the bracket
/// stops shrinking in floating point, then checks the power mismatch
/// against `tol`.
pub fn solve_power_constrained(
    sig: &QuadraticUpdate,
    an: &QuadraticUpdate,
    p_max: f64,
    tol: f64,
    max_iter: usize,
) -> Result<BeamformSolution> {
    let finish = |xi: f64, iterations: usize| BeamformSolution {
        bf: Beamformers {
            w: sig.solve(xi),
            w_e: an.solve(xi),
        },
        xi,
        bisection_iterations: iterations,
    };
    if sig.b_energy == 0.0 && an.b_energy == 0.0 {
        return Ok(finish(0.0, 0));
    }
    if power_curve(0.0, sig, an) <= p_max {
        return Ok(finish(0.0, 0));
    }
    let (mut lo, mut hi) = (0.0, xi_upper_bound(sig, an, p_max));
    let mut iterations = 0;
    while iterations < max_iter {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if power_curve(mid, sig, an) > p_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let power = power_curve(hi, sig, an);
    if (power - p_max).abs() > tol * p_max {
        return Err(Error::BisectionFailed {
            iterations,
            power,
            budget: p_max,
        });
    }
    Ok(finish(hi, iterations))
}

/// Signal and artificial-noise blocks of the single-receiver beamforming
/// subproblem.
pub fn quadratic_blocks(h: &CMat, he: &CMat, aux: &Aux, noise_eve: f64) -> (QuadraticUpdate, QuadraticUpdate) {
    let u_omega = &aux.legit.u * &aux.legit.omega;
    let legit = h.adjoint() * &u_omega * aux.legit.u.adjoint() * h;
    let leak = he.adjoint() * &aux.eve.omega_x * he * c(1.0 / noise_eve, 0.0);
    let ue_omega = &aux.eve.u_e * &aux.eve.omega_e;
    let eve_an = he.adjoint() * &ue_omega * aux.eve.u_e.adjoint() * he;
    let a = &legit + &leak;
    let a_e = legit + (eve_an + leak);
    let b = h.adjoint() * u_omega;
    let b_e = he.adjoint() * ue_omega;
    (QuadraticUpdate::new(&a, &b), QuadraticUpdate::new(&a_e, &b_e))
}

/// Beamforming cost `Tr(WᴴAW) − 2Re Tr(BᴴW)` recomputed from `A`, `B`.
pub fn quadratic_cost(a: &CMat, b: &CMat, w: &CMat) -> f64 {
    (w.adjoint() * a * w).trace().re - 2.0 * crate::linalg::re_inner(w, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_psd(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> CMat {
        let g = CMat::from_fn(n, rank, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        &g * g.adjoint()
    }

    fn random_mat(rng: &mut ChaCha8Rng, r: usize, cols: usize) -> CMat {
        CMat::from_fn(r, cols, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn scalar_power_curve_is_inverse_square() {
        let b = CMat::from_element(1, 1, c(0.6, 0.8));
        let q = QuadraticUpdate::new(&CMat::zeros(1, 1), &b);
        let zero = QuadraticUpdate::new(&CMat::zeros(1, 1), &CMat::zeros(1, 1));
        for xi in [0.1, 1.0, 7.5] {
            assert_relative_eq!(power_curve(xi, &q, &zero), 1.0 / (xi * xi), max_relative = 1e-14);
        }
        assert_eq!(q.power(0.0), f64::INFINITY);
    }

    #[test]
    fn scalar_multiplier_is_exact() {
        let b = CMat::from_element(1, 1, c(1.2, -0.5));
        let q = QuadraticUpdate::new(&CMat::zeros(1, 1), &b);
        let zero = QuadraticUpdate::new(&CMat::zeros(1, 1), &CMat::zeros(1, 1));
        let p_max = 0.37;
        let sol = solve_power_constrained(&q, &zero, p_max, 1e-8, 200).unwrap();
        assert!((sol.xi - 1.3 / p_max.sqrt()).abs() < 1e-10);
        assert_relative_eq!(sol.bf.w[(0, 0)].norm_sqr(), p_max, max_relative = 1e-12);
    }

    #[test]
    fn zero_rhs_gives_zero_beamformers() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_psd(&mut rng, 3, 3);
        let q = QuadraticUpdate::new(&a, &CMat::zeros(3, 1));
        let qe = QuadraticUpdate::new(&a, &CMat::zeros(3, 3));
        let sol = solve_power_constrained(&q, &qe, 1.0, 1e-8, 200).unwrap();
        assert_eq!(sol.xi, 0.0);
        assert_eq!(sol.bf.power(), 0.0);
    }

    #[test]
    fn upper_bound_is_feasible_and_curve_decreases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let q = QuadraticUpdate::new(&random_psd(&mut rng, 4, 2), &random_mat(&mut rng, 4, 2));
            let qe = QuadraticUpdate::new(&random_psd(&mut rng, 4, 3), &random_mat(&mut rng, 4, 4));
            let p_max = 0.5;
            let ub = xi_upper_bound(&q, &qe, p_max);
            assert!(power_curve(ub, &q, &qe) <= p_max);
            let grid: Vec<f64> = (0..50).map(|i| 10f64.powf(-3.0 + 6.0 * i as f64 / 49.0)).collect();
            for w in grid.windows(2) {
                assert!(power_curve(w[0], &q, &qe) > power_curve(w[1], &q, &qe));
            }
        }
    }

    #[test]
    fn pseudo_inverse_branch_when_budget_is_loose() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_mat(&mut rng, 4, 2);
        let a = &g * g.adjoint();
        let b = &g * random_mat(&mut rng, 2, 1);
        let q = QuadraticUpdate::new(&a, &b);
        let qe = QuadraticUpdate::new(&a, &CMat::zeros(4, 4));
        let p0 = q.power(0.0);
        assert!(p0.is_finite());
        let sol = solve_power_constrained(&q, &qe, 2.0 * p0, 1e-8, 200).unwrap();
        assert_eq!(sol.xi, 0.0);
        // minimizer of the quadratic on the range of A
        let resid = &a * &sol.bf.w - &b;
        assert!(resid.norm() < 1e-10 * b.norm());
    }
}
