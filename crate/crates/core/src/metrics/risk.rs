//! Empirical value-at-risk and conditional value-at-risk.
//!
//! Values are treated as losses (larger is worse), so both measures look at
//! the upper tail: `VaR_α` is the `(1 − α)`-quantile and `CVaR_α` the mean of
//! all values at or above it.

use super::mcc::check_alpha;
use super::MetricsError;

const QUANTILE_EPS: f64 = 1e-9;

/// Smallest value `v` whose empirical CDF `F(v)` reaches `1 − α`.
pub fn var_alpha(values: &[f64], alpha: f64) -> Result<f64, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyValues);
    }
    check_alpha(alpha, false)?;
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    // F(sorted[i]) >= (i + 1) / n, with equality at the last copy of a tie,
    // so the first index with (i + 1) >= (1 - α) n is the quantile.
    let needed = ((1.0 - alpha) * n as f64 - QUANTILE_EPS).ceil().max(1.0) as usize;
    Ok(sorted[needed.min(n) - 1])
}

/// Mean of the inclusive tail `{v : v >= VaR_α}`.
pub fn cvar_alpha(values: &[f64], alpha: f64) -> Result<f64, MetricsError> {
    let threshold = var_alpha(values, alpha)?;
    let (sum, count) = values
        .iter()
        .filter(|&&v| v >= threshold)
        .fold((0.0, 0usize), |(s, c), &v| (s + v, c + 1));
    Ok(sum / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn one_to_ten() -> Vec<f64> {
        (1..=10).map(f64::from).collect()
    }

    /// Direct empirical-CDF scan.
    fn var_oracle(values: &[f64], alpha: f64) -> f64 {
        let n = values.len() as f64;
        let mut candidates = values.to_vec();
        candidates.sort_by(f64::total_cmp);
        for &v in &candidates {
            let cdf = values.iter().filter(|&&x| x <= v).count() as f64 / n;
            if cdf >= 1.0 - alpha - QUANTILE_EPS {
                return v;
            }
        }
        unreachable!()
    }

    #[test]
    fn var_examples() {
        assert_eq!(var_alpha(&one_to_ten(), 0.2).unwrap(), 8.0);
        assert_eq!(var_alpha(&[3.5], 0.7).unwrap(), 3.5);
        assert_eq!(var_alpha(&[5.0; 4], 0.5).unwrap(), 5.0);
        assert_eq!(var_alpha(&[], 0.5).unwrap_err(), MetricsError::EmptyValues);
        assert!(var_alpha(&[1.0], 1.0).is_err());
    }

    #[test]
    fn cvar_examples() {
        assert_eq!(cvar_alpha(&one_to_ten(), 0.2).unwrap(), 9.0);
        assert_eq!(cvar_alpha(&one_to_ten(), 0.999).unwrap(), 5.5);
        assert_eq!(cvar_alpha(&[2.0; 6], 0.3).unwrap(), 2.0);
        // Inclusive tail keeps every copy of a tied quantile.
        assert_eq!(cvar_alpha(&[1.0, 2.0, 2.0, 2.0], 0.5).unwrap(), 2.0);
    }

    proptest! {
        #[test]
        fn var_matches_cdf_oracle(
            values in prop::collection::vec(-50i32..50, 1..40),
            alpha in 0.001f64..0.999,
        ) {
            let values: Vec<f64> = values.into_iter().map(f64::from).collect();
            prop_assert_eq!(var_alpha(&values, alpha).unwrap(), var_oracle(&values, alpha));
        }

        #[test]
        fn cvar_dominates_mean(
            values in prop::collection::vec(-1e3f64..1e3, 1..50),
            alpha in 0.001f64..0.999,
        ) {
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            let cvar = cvar_alpha(&values, alpha).unwrap();
            prop_assert!(cvar >= mean - 1e-9 * mean.abs().max(1.0));
        }

        #[test]
        fn constant_values_are_their_own_cvar(v in -1e6f64..1e6, n in 1usize..30, alpha in 0.001f64..0.999) {
            let cvar = cvar_alpha(&vec![v; n], alpha).unwrap();
            prop_assert!((cvar - v).abs() <= 1e-12 * v.abs().max(1.0));
        }
    }
}
