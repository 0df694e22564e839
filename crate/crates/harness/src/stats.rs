//! Summary statistics and the paired sign test used by the trend checks.

use statrs::distribution::{Binomial, DiscreteCDF};

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Standard error of the mean (sample standard deviation over `√n`);
/// zero for fewer than two samples.
pub fn std_error(x: &[f64]) -> f64 {
    let n = x.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(x);
    let var = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTest {
    /// Pairs with `a > b`.
    pub wins: usize,
    /// Pairs with `a ≠ b`.
    pub trials: usize,
    /// One-sided p-value of `P(a > b) > 1/2`.
    pub p_value: f64,
}

/// One-sided paired sign test of `a > b`; ties are dropped.
pub fn sign_test(a: &[f64], b: &[f64]) -> SignTest {
    assert_eq!(a.len(), b.len(), "sign test needs paired samples");
    let wins = a.iter().zip(b).filter(|(x, y)| x > y).count();
    let trials = a.iter().zip(b).filter(|(x, y)| x != y).count();
    let p_value = if wins == 0 {
        1.0
    } else {
        let bin = Binomial::new(0.5, trials as u64).expect("valid binomial");
        1.0 - bin.cdf(wins as u64 - 1)
    };
    SignTest { wins, trials, p_value }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_error() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert!((std_error(&[1.0, 2.0, 3.0]) - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(std_error(&[4.0]), 0.0);
    }

    #[test]
    fn sign_test_values() {
        // 20 wins of 20: p = 2^-20
        let a = vec![1.0; 20];
        let b = vec![0.0; 20];
        let t = sign_test(&a, &b);
        assert_eq!((t.wins, t.trials), (20, 20));
        assert!((t.p_value - 0.5f64.powi(20)).abs() < 1e-15);
        // 15 of 20 gives p ≈ 0.0207, 14 of 20 gives p ≈ 0.0577
        let mut b15 = vec![0.0; 15];
        b15.extend(vec![2.0; 5]);
        assert!((sign_test(&a, &b15).p_value - 0.020_694_732_666).abs() < 1e-9);
        let mut b14 = vec![0.0; 14];
        b14.extend(vec![2.0; 6]);
        assert!((sign_test(&a, &b14).p_value - 0.057_659_149_169).abs() < 1e-9);
        // ties are dropped
        assert_eq!(sign_test(&[1.0, 1.0], &[1.0, 0.0]).trials, 1);
        assert_eq!(sign_test(&[1.0], &[1.0]).p_value, 1.0);
    }
}
