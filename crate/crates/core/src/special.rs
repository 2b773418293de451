//! The complementary error function and the limit law of the bias gap.
//!
//! The equilibrium bias gap of converged trials follows the distribution of
//! the smaller absolute value of two independent standard normals, with
//! density `2 sqrt(2/pi) exp(-x^2/2) erfc(x/sqrt(2))`. Everything here is
//! double precision and deterministic; `erfc` combines a Taylor series on
//! [0, 2) with a continued fraction beyond, giving absolute error below
//! 1e-12 on |x| <= 10.

use crate::error::{Error, Result};

const SQRT_PI: f64 = 1.772_453_850_905_516;

fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = 0.0;
    let mut k = 0u32;
    loop {
        sum += term / (2 * k + 1) as f64;
        k += 1;
        term *= -x2 / k as f64;
        if term.abs() < 1e-18 {
            break;
        }
    }
    2.0 / SQRT_PI * sum
}

/// Upper-tail continued fraction, valid for x >= 2: evaluates the Laplace
/// denominator `x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))` by the modified
/// Lentz scheme.
fn erfc_fraction(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0f64;
    let mut n = 1u32;
    loop {
        let a = 0.5 * n as f64;
        d = x + a * d;
        if d == 0.0 {
            d = tiny;
        }
        c = x + a / c;
        if c == 0.0 {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        n += 1;
        if (delta - 1.0).abs() < 1e-16 || n > 500 {
            break;
        }
    }
    (-x * x).exp() / (SQRT_PI * f)
}

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        2.0 - erfc(-x)
    } else if x < 2.0 {
        1.0 - erf_series(x)
    } else {
        erfc_fraction(x)
    }
}

/// Error function, `1 - erfc(x)` with the series used directly where it is
/// accurate.
pub fn erf(x: f64) -> f64 {
    if x < 0.0 {
        -erf(-x)
    } else if x < 2.0 {
        erf_series(x)
    } else {
        1.0 - erfc_fraction(x)
    }
}

/// Density of the equilibrium bias-gap law on x >= 0.
pub fn gap_pdf(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "gap density is defined on x >= 0, got {x}"
        )));
    }
    Ok(2.0 * (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * x * x).exp() * erfc(x / 2.0f64.sqrt()))
}

/// Distribution function of the equilibrium bias-gap law on x >= 0.
pub fn gap_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "gap distribution is defined on x >= 0, got {x}"
        )));
    }
    let q = erfc(x / 2.0f64.sqrt());
    Ok(1.0 - q * q)
}

/// Two-sided Kolmogorov-Smirnov statistic of `sorted` against `cdf`.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::InvalidArgument(
            "KS statistic needs at least one sample".into(),
        ));
    }
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// Asymptotic two-sided critical value at significance 0.01.
pub fn ks_critical_value(n: usize) -> f64 {
    (-(0.005f64).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_reference_values() {
        assert_eq!(erfc(0.0), 1.0);
        let cases = [
            (0.5, 0.4795001221869535),
            (1.0, 0.15729920705028513),
            (2.0, 0.004677734981047265),
            (3.0, 2.2090496998585438e-5),
            (std::f64::consts::FRAC_1_SQRT_2, 0.3173105078629141),
        ];
        for (x, want) in cases {
            let got = erfc(x);
            assert!(
                (got - want).abs() <= 1e-13,
                "erfc({x}) = {got}, expected {want}"
            );
        }
    }

    #[test]
    fn erfc_reflection_identity() {
        assert_eq!(erfc(-0.7), 2.0 - erfc(0.7));
        assert_eq!(erfc(-2.5), 2.0 - erfc(2.5));
    }

    #[test]
    fn erfc_far_tail_is_positive_and_tiny() {
        let v = erfc(10.0);
        assert!(v > 0.0 && v < 1e-44, "erfc(10) = {v}");
    }

    #[test]
    fn erf_matches_erfc() {
        for x in [-3.0, -0.4, 0.0, 0.9, 1.7, 2.0, 4.2] {
            assert!((erf(x) + erfc(x) - 1.0).abs() <= 1e-15, "sum rule at {x}");
        }
    }

    #[test]
    fn gap_pdf_at_zero() {
        let want = 2.0 * (2.0 / std::f64::consts::PI).sqrt();
        assert!((gap_pdf(0.0).unwrap() - want).abs() <= 1e-15);
        assert!((want - 1.5957691).abs() <= 1e-7);
        assert!(gap_pdf(-0.1).is_err());
    }

    #[test]
    fn gap_cdf_examples() {
        assert_eq!(gap_cdf(0.0).unwrap(), 0.0);
        let tail = 1.0 - gap_cdf(1.0).unwrap();
        assert!(
            (tail - 0.10069).abs() <= 1e-4,
            "upper tail at 1 is {tail}"
        );
        assert!(gap_cdf(-1e-9).is_err());
    }

    #[test]
    fn gap_tail_identity() {
        for b in [0.5, 1.0, 2.0] {
            let q = erfc(b / 2.0f64.sqrt());
            let lhs = 1.0 - gap_cdf(b).unwrap();
            assert!((lhs - q * q).abs() <= 1e-14, "tail identity at {b}");
        }
    }

    #[test]
    fn ks_statistic_hand_case() {
        let d = ks_statistic(&[0.25, 0.75], |x| x).unwrap();
        assert!((d - 0.25).abs() <= 1e-15);
        assert!(ks_statistic(&[], |x| x).is_err());
    }

    #[test]
    fn ks_critical_value_formula() {
        assert!((ks_critical_value(1) - 1.62762).abs() <= 1e-4);
        assert!((ks_critical_value(10_000) - 0.0162762).abs() <= 1e-6);
    }
}
