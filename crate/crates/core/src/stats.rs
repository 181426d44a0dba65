//! Correlation and significance statistics: Pearson, Spearman with mid-rank
//! ties, the Williams/Steiger test for two dependent correlations sharing a
//! variable, and root relative squared error.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Pearson and Spearman correlations over one sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub pearson_r: f64,
    pub spearman_rho: f64,
    pub n: usize,
}

/// Williams test outcome for the difference of two dependent correlations.
///
/// The one-sided p-value is the headline (the comparisons it serves are
/// directional); the two-sided value is carried alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilliamsResult {
    pub t_statistic: f64,
    pub p_value_one_sided: f64,
    pub p_value_two_sided: f64,
    pub degrees_of_freedom: usize,
}

fn check_finite(values: &[f64], name: &str) -> Result<()> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::UndefinedCorrelation(format!(
            "{name} contains a non-finite value"
        )));
    }
    Ok(())
}

fn check_paired(x: &[f64], y: &[f64], min_len: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < min_len {
        return Err(Error::EmptyInput(format!(
            "need at least {min_len} paired observations, got {}",
            x.len()
        )));
    }
    check_finite(x, "x")?;
    check_finite(y, "y")
}

/// Product-moment correlation. Requires n >= 3 and nonzero variance in both
/// arguments.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    check_paired(x, y, 3)?;
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation(
            "zero variance in at least one argument".into(),
        ));
    }
    // sqrt(sxx * syy) keeps r = 1 exact for identical inputs.
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Fractional (mid-rank) ranks, 1-based; ties receive the mean of the ranks
/// they span.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // Ranks i+1..=j+1 averaged over the tie group.
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho: the Pearson correlation of mid-ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_paired(x, y, 3)?;
    pearson(&midranks(x), &midranks(y)).map_err(|e| match e {
        Error::UndefinedCorrelation(_) => {
            Error::UndefinedCorrelation("all values tied in at least one argument".into())
        }
        other => other,
    })
}

/// Both correlations over one sample.
pub fn correlations(x: &[f64], y: &[f64]) -> Result<CorrelationResult> {
    Ok(CorrelationResult {
        pearson_r: pearson(x, y)?,
        spearman_rho: spearman(x, y)?,
        n: x.len(),
    })
}

/// One-sided survival P(T > t) of Student's t with `df` degrees of freedom.
fn student_t_sf(t: f64, df: usize) -> f64 {
    let dist = StudentsT::new(0.0, 1.0, df as f64)
        .expect("degrees of freedom checked positive by the caller");
    dist.sf(t)
}

/// Williams test (Steiger formulation) for the difference between the
/// dependent correlations r_1g and r_2g, which share the variable g and
/// whose non-shared variables correlate at r_12.
///
/// t = (r_1g - r_2g) * sqrt((n-1)(1+r_12)) /
///     sqrt(2K(n-1)/(n-3) + ((r_1g+r_2g)^2/4)(1-r_12)^3)
/// with K = 1 - r_1g^2 - r_2g^2 - r_12^2 + 2 r_1g r_2g r_12, on n-3 degrees
/// of freedom. The one-sided p-value tests r_1g > r_2g.
pub fn williams_test(r_1g: f64, r_2g: f64, r_12: f64, n: usize) -> Result<WilliamsResult> {
    if n < 4 {
        return Err(Error::InvalidConfig(format!(
            "williams test requires n >= 4, got {n}"
        )));
    }
    for (name, r) in [("r_1g", r_1g), ("r_2g", r_2g), ("r_12", r_12)] {
        if !r.is_finite() || !(-1.0..=1.0).contains(&r) {
            return Err(Error::InfeasibleCorrelations(format!(
                "{name} = {r} is not a correlation"
            )));
        }
    }
    // K is the determinant of the 3x3 correlation matrix; negative K means
    // the triple cannot jointly occur.
    let k = 1.0 - (r_1g * r_1g + r_2g * r_2g) - r_12 * r_12 + 2.0 * (r_1g * r_2g) * r_12;
    if k < -1e-12 {
        return Err(Error::InfeasibleCorrelations(format!(
            "correlation matrix is not positive semidefinite (det = {k:.3e})"
        )));
    }
    let k = k.max(0.0);
    let df = n - 3;
    let nf = n as f64;

    let (t, one_sided) = if r_1g == r_2g {
        (0.0, 0.5)
    } else {
        let denom_sq =
            2.0 * k * (nf - 1.0) / (nf - 3.0) + ((r_1g + r_2g).powi(2) / 4.0) * (1.0 - r_12).powi(3);
        if denom_sq <= 0.0 || !denom_sq.is_finite() {
            return Err(Error::Numerical(
                "degenerate Williams denominator; correlations lie on the feasibility boundary"
                    .into(),
            ));
        }
        let t = (r_1g - r_2g) * ((nf - 1.0) * (1.0 + r_12)).sqrt() / denom_sq.sqrt();
        (t, student_t_sf(t, df))
    };
    Ok(WilliamsResult {
        t_statistic: t,
        p_value_one_sided: one_sided,
        p_value_two_sided: 2.0 * student_t_sf(t.abs(), df),
        degrees_of_freedom: df,
    })
}

/// Root relative squared error: prediction error normalized by the error of
/// the constant gold-mean predictor.
pub fn rrse(predictions: &[f64], gold: &[f64]) -> Result<f64> {
    if predictions.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: gold.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::EmptyInput("rrse requires at least one pair".into()));
    }
    check_finite(predictions, "predictions")?;
    check_finite(gold, "gold")?;
    let mean = gold.iter().sum::<f64>() / gold.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for (&p, &g) in predictions.iter().zip(gold) {
        num += (p - g) * (p - g);
        den += (mean - g) * (mean - g);
    }
    if den == 0.0 {
        return Err(Error::Numerical(
            "gold is constant; rrse denominator is zero".into(),
        ));
    }
    Ok((num / den).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn pearson_identity_and_negation() {
        let x = [1.0, 2.0, 5.0, 3.0];
        assert_eq!(pearson(&x, &x).unwrap(), 1.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson(&x, &neg).unwrap(), -1.0);
    }

    #[test]
    fn pearson_textbook_value() {
        // Independent reference: scipy.stats.pearsonr([1,2,3,4],[2,4,5,4]).
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 5.0, 4.0];
        assert_abs_diff_eq!(
            pearson(&x, &y).unwrap(),
            0.7181848464596079,
            epsilon = 1e-12
        );
    }

    #[test]
    fn pearson_rejects_degenerate_input() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(Error::EmptyInput(_))
        ));
        assert!(matches!(
            pearson(&[1.0, 2.0, f64::NAN], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn spearman_hand_examples() {
        assert_eq!(
            spearman(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap(),
            -0.5
        );
        // Monotone transform invariance.
        let x = [0.2f64, 1.5, 3.0, 7.0];
        let y: Vec<f64> = x.iter().map(|v| v.exp()).collect();
        assert_eq!(spearman(&x, &y).unwrap(), 1.0);
    }

    #[test]
    fn spearman_ties_use_midranks() {
        let x = [1.0, 1.0, 2.0];
        let y = [1.0, 2.0, 3.0];
        assert_eq!(midranks(&x), vec![1.5, 1.5, 3.0]);
        let expected = pearson(&[1.5, 1.5, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(spearman(&x, &y).unwrap(), expected);
    }

    #[test]
    fn spearman_all_tied_is_undefined() {
        assert!(matches!(
            spearman(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedCorrelation(_))
        ));
    }

    #[test]
    fn student_t_sf_reference_values() {
        // Frozen from scipy.stats.t.sf.
        assert_relative_eq!(student_t_sf(2.0, 10), 0.0366940173853702, max_relative = 1e-10);
        assert_relative_eq!(student_t_sf(1.96, 100), 0.0263894506831148, max_relative = 1e-10);
        assert_relative_eq!(student_t_sf(-1.5, 5), 0.903048159878763, max_relative = 1e-10);
        assert_relative_eq!(student_t_sf(3.5, 3), 0.0197405188096414, max_relative = 1e-10);
        assert_eq!(student_t_sf(0.0, 7), 0.5);
    }

    #[test]
    fn williams_equal_correlations() {
        let res = williams_test(0.4, 0.4, 0.2, 50).unwrap();
        assert_eq!(res.t_statistic, 0.0);
        assert_eq!(res.p_value_one_sided, 0.5);
        assert_eq!(res.degrees_of_freedom, 47);
    }

    #[test]
    fn williams_paper_scale_gain_is_significant() {
        // A 0.01-point Pearson gain with highly correlated predictors on a
        // large test set: frozen reference t = 2.8718167016470333,
        // p = 0.002047752628096635.
        let res = williams_test(0.52, 0.51, 0.95, 6000).unwrap();
        assert_relative_eq!(res.t_statistic, 2.8718167016470333, max_relative = 1e-12);
        assert_relative_eq!(res.p_value_one_sided, 0.002047752628096635, max_relative = 1e-9);
        assert!(res.p_value_one_sided < 0.01);
    }

    #[test]
    fn williams_rejects_bad_inputs() {
        assert!(matches!(
            williams_test(0.9, -0.9, 0.9, 100),
            Err(Error::InfeasibleCorrelations(_))
        ));
        assert!(matches!(
            williams_test(0.5, 0.4, 0.3, 3),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            williams_test(1.5, 0.4, 0.3, 10),
            Err(Error::InfeasibleCorrelations(_))
        ));
    }

    #[test]
    fn rrse_examples() {
        let gold = [0.1, 0.4, 0.9];
        assert_eq!(rrse(&gold, &gold).unwrap(), 0.0);
        let mean = gold.iter().sum::<f64>() / 3.0;
        assert_eq!(rrse(&[mean, mean, mean], &gold).unwrap(), 1.0);
        assert_abs_diff_eq!(
            rrse(&[0.0, 1.0], &[0.0, 0.5]).unwrap(),
            std::f64::consts::SQRT_2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn rrse_constant_gold_is_undefined() {
        assert!(matches!(
            rrse(&[1.0, 2.0], &[3.0, 3.0]),
            Err(Error::Numerical(_))
        ));
    }

    proptest! {
        #[test]
        fn pearson_affine_invariance(
            data in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..30),
            scale in 0.1f64..8.0,
            shift in -20.0f64..20.0,
        ) {
            let x: Vec<f64> = data.iter().map(|p| p.0).collect();
            let y: Vec<f64> = data.iter().map(|p| p.1).collect();
            if let Ok(r) = pearson(&x, &y) {
                let x2: Vec<f64> = x.iter().map(|v| v * scale + shift).collect();
                let r2 = pearson(&x2, &y).unwrap();
                prop_assert!((r - r2).abs() < 1e-9, "r {r} vs {r2}");
                let x3: Vec<f64> = x.iter().map(|v| -v * scale).collect();
                let r3 = pearson(&x3, &y).unwrap();
                prop_assert!((r + r3).abs() < 1e-9, "r {r} vs {r3}");
            }
        }

        #[test]
        fn spearman_monotone_invariance(
            data in proptest::collection::vec((-50.0f64..50.0, -50.0f64..50.0), 3..30),
        ) {
            let x: Vec<f64> = data.iter().map(|p| p.0).collect();
            let y: Vec<f64> = data.iter().map(|p| p.1).collect();
            if let Ok(rho) = spearman(&x, &y) {
                // Strictly monotone transform of x.
                let x2: Vec<f64> = x.iter().map(|v| (v / 25.0).exp() + v * 0.01).collect();
                let rho2 = spearman(&x2, &y).unwrap();
                prop_assert!((rho - rho2).abs() < 1e-12);
            }
        }

        #[test]
        fn williams_antisymmetry(
            r_1g in -0.7f64..0.7,
            r_2g in -0.7f64..0.7,
            r_12 in -0.2f64..0.9,
            n in 4usize..500,
        ) {
            if let Ok(forward) = williams_test(r_1g, r_2g, r_12, n) {
                let backward = williams_test(r_2g, r_1g, r_12, n).unwrap();
                prop_assert_eq!(forward.t_statistic, -backward.t_statistic);
                prop_assert!(
                    (forward.p_value_one_sided + backward.p_value_one_sided - 1.0).abs() < 1e-9
                );
            }
        }

        #[test]
        fn one_sided_p_decreases_in_t(
            r_12 in 0.0f64..0.8,
            n in 10usize..200,
        ) {
            // Larger gaps between r_1g and r_2g give larger t and smaller p.
            let a = williams_test(0.5, 0.45, r_12, n).unwrap();
            let b = williams_test(0.5, 0.30, r_12, n).unwrap();
            prop_assert!(b.t_statistic > a.t_statistic);
            prop_assert!(b.p_value_one_sided < a.p_value_one_sided);
            prop_assert!(b.p_value_two_sided < a.p_value_two_sided);
        }

        #[test]
        fn rrse_of_mean_predictor_is_one(
            gold in proptest::collection::vec(0.0f64..1.0, 2..40),
        ) {
            let mean = gold.iter().sum::<f64>() / gold.len() as f64;
            let preds = vec![mean; gold.len()];
            if let Ok(value) = rrse(&preds, &gold) {
                prop_assert_eq!(value, 1.0);
            }
        }
    }
}
