use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p_value: f64,
}

/// Two-sample comparison of `before` against `after` (t is positive when
/// `before` has the larger mean).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub n_before: usize,
    pub n_after: usize,
    pub mean_before: f64,
    pub mean_after: f64,
    pub std_before: f64,
    pub std_after: f64,
    /// Unequal variances, Welch–Satterthwaite degrees of freedom.
    pub welch: TTest,
    /// Pooled variance, `n1 + n2 - 2` degrees of freedom.
    pub pooled: TTest,
}

fn moments(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn t_test(diff: f64, se: f64, df: f64) -> TTest {
    if se == 0.0 {
        return if diff == 0.0 {
            TTest { t: 0.0, df, p_value: 1.0 }
        } else {
            TTest {
                t: diff.signum() * f64::INFINITY,
                df,
                p_value: 0.0,
            }
        };
    }
    let t = diff / se;
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    let p_value = (2.0 * dist.sf(t.abs())).min(1.0);
    TTest { t, df, p_value }
}

pub fn compare_statistics(before: &[f64], after: &[f64]) -> Result<Comparison> {
    if before.len() < 2 || after.len() < 2 {
        return Err(Error::Statistics(format!(
            "two-sample t-test needs at least 2 samples per group, got {} and {}",
            before.len(),
            after.len()
        )));
    }
    let (n1, n2) = (before.len() as f64, after.len() as f64);
    let (m1, v1) = moments(before);
    let (m2, v2) = moments(after);
    let diff = m1 - m2;

    let (a, b) = (v1 / n1, v2 / n2);
    let welch_df = if a + b == 0.0 {
        n1 + n2 - 2.0
    } else {
        (a + b).powi(2) / (a * a / (n1 - 1.0) + b * b / (n2 - 1.0))
    };
    let welch = t_test(diff, (a + b).sqrt(), welch_df);

    let pooled_df = n1 + n2 - 2.0;
    let pooled_var = ((n1 - 1.0) * v1 + (n2 - 1.0) * v2) / pooled_df;
    let pooled = t_test(diff, (pooled_var * (1.0 / n1 + 1.0 / n2)).sqrt(), pooled_df);

    Ok(Comparison {
        n_before: before.len(),
        n_after: after.len(),
        mean_before: m1,
        mean_after: m2,
        std_before: v1.sqrt(),
        std_after: v2.sqrt(),
        welch,
        pooled,
    })
}

/// Pearson correlation coefficient.
pub fn correlate(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Statistics(format!(
            "correlation needs paired samples, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Statistics("correlation needs at least 2 pairs".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Statistics("correlation undefined for a constant sample".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let c = compare_statistics(&x, &x).unwrap();
        assert_eq!(c.welch.t, 0.0);
        assert_eq!(c.welch.p_value, 1.0);
        assert_eq!(c.pooled.p_value, 1.0);
        let flat = [3.0, 3.0];
        let c = compare_statistics(&flat, &flat).unwrap();
        assert_eq!((c.welch.t, c.welch.p_value), (0.0, 1.0));
        let c = compare_statistics(&flat, &[1.0, 1.0]).unwrap();
        assert_eq!((c.welch.t, c.welch.p_value), (f64::INFINITY, 0.0));
    }

    #[test]
    fn shifted_five_point_samples() {
        // Means 3 and 5, both variances 2.5: se = sqrt(0.5 + 0.5) = 1, t = -2.
        // Welch df = 1 / (0.25/4 + 0.25/4) = 8, equal to the pooled df.
        let c = compare_statistics(&[1.0, 2.0, 3.0, 4.0, 5.0], &[3.0, 4.0, 5.0, 6.0, 7.0]).unwrap();
        assert_eq!(c.welch.t, -2.0);
        assert_eq!(c.welch.df, 8.0);
        assert_eq!(c.pooled.t, -2.0);
        assert_eq!(c.std_before, 2.5f64.sqrt());
        // two-sided p for |t| = 2 on 8 df (tables: 0.0805)
        assert!((c.welch.p_value - 0.080516).abs() < 1e-5, "{}", c.welch.p_value);
    }

    #[test]
    fn too_few_samples() {
        assert!(matches!(compare_statistics(&[1.0], &[1.0, 2.0]), Err(Error::Statistics(_))));
        assert!(matches!(correlate(&[1.0], &[1.0]), Err(Error::Statistics(_))));
        assert!(correlate(&[1.0, 2.0], &[1.0]).is_err());
        assert!(correlate(&[1.0, 1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn correlation_extremes() {
        let x = [0.3, -1.0, 2.5, 7.0];
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((correlate(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((correlate(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
    }
}
