//! Normal and Student-t helpers plus small-sample summaries.

use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

/// Standard normal distribution function Φ(x).
pub fn normal_cdf(x: f64) -> f64 {
    Normal::standard().cdf(x)
}

/// Standard normal quantile Φ⁻¹(p).
pub fn normal_quantile(p: f64) -> f64 {
    Normal::standard().inverse_cdf(p)
}

/// Upper-tail Student-t critical value: `P(T_df > t) = alpha`.
pub fn t_critical(df: usize, alpha: f64) -> f64 {
    assert!(df >= 1, "t distribution needs at least one degree of freedom");
    assert!(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    StudentsT::new(0.0, 1.0, df as f64).expect("valid t parameters").inverse_cdf(1.0 - alpha)
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Unbiased sample variance; zero for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() - 1) as f64
}

pub fn sample_std(values: &[f64]) -> f64 {
    sample_variance(values).sqrt()
}

/// Standard error of the mean of `values`.
pub fn std_error(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    sample_std(values) / (values.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from scipy.stats.norm / scipy.stats.t.
    #[test]
    fn normal_cdf_matches_reference() {
        let cases = [
            (0.0, 0.5),
            (1.0, 0.841_344_746_068_542_9),
            (-1.959_963_984_540_054, 0.025),
            (1.644_853_626_951_472_2, 0.95),
            (3.5, 0.999_767_370_920_964_5),
            (-6.0, 9.865_876_450_376_946e-10),
            (8.0, 0.999_999_999_999_999_3),
        ];
        for (x, p) in cases {
            assert!((normal_cdf(x) - p).abs() < 1e-9, "Φ({x}) = {} vs {p}", normal_cdf(x));
        }
    }

    #[test]
    fn normal_quantile_matches_reference() {
        let cases = [
            (0.95, 1.644_853_626_951_472_2),
            (0.975, 1.959_963_984_540_054),
            (0.5, 0.0),
            (0.01, -2.326_347_874_040_841),
            (1e-6, -4.753_424_308_822_899),
        ];
        for (p, x) in cases {
            assert!((normal_quantile(p) - x).abs() < 1e-8, "Φ⁻¹({p}) = {} vs {x}", normal_quantile(p));
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            assert!((normal_cdf(normal_quantile(p)) - p).abs() < 1e-9);
        }
    }

    #[test]
    fn t_critical_matches_reference() {
        assert!((t_critical(29, 0.05) - 1.699_127_026_533_497_4).abs() < 1e-9);
        assert!((t_critical(1, 0.05) - 6.313_751_514_800_932).abs() < 1e-9);
        assert!((t_critical(24, 0.05) - 1.710_882_079_909_428).abs() < 1e-9);
        assert!((t_critical(500, 0.05) - 1.647_906_853_929_504_5).abs() < 1e-9);
        assert!((t_critical(200, 0.2) - 0.843_422_131_535_297_1).abs() < 1e-9);
    }

    #[test]
    fn summaries() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(mean(&v), 2.5);
        assert!((sample_variance(&v) - 5.0 / 3.0).abs() < 1e-15);
        assert_eq!(sample_variance(&[3.0]), 0.0);
    }
}
