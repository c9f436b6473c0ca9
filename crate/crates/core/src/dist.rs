//! Standard normal and chi-square(2) distribution functions used for
//! p-values and rejection thresholds.
//!
//! The normal CDF is built on erfc, evaluated by a cancellation-free
//! series in the bulk and a continued fraction in the tail; the
//! chi-square with 2 degrees of freedom has exact closed forms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// One-sided tail mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailSide {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailProbability {
    pub value: f64,
    pub side: TailSide,
}

/// erf via the confluent series erf(x) = (2/sqrt(pi)) x e^{-x^2}
/// sum_k (2x^2)^k / (1*3*...*(2k+1)); all terms positive, no cancellation.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= 2.0 * x2 / (2.0 * k as f64 + 1.0);
        let new = sum + term;
        if new == sum || k > 200 {
            break;
        }
        sum = new;
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

/// erfc via the Laplace continued fraction, valid for x >= 3:
/// erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
fn erfc_cf(x: f64) -> f64 {
    // Backward evaluation with enough levels for full f64 precision.
    let mut f = 0.0;
    for k in (1..=60u32).rev() {
        f = (k as f64 / 2.0) / (x + f);
    }
    (-x * x).exp() / std::f64::consts::PI.sqrt() / (x + f)
}

/// Complementary error function, abs error comfortably below 1e-15.
pub fn erfc(x: f64) -> f64 {
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 3.0 {
        1.0 - erf_series(x)
    } else if x > 27.0 {
        0.0 // below the smallest positive normal f64
    } else {
        erfc_cf(x)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("normal_cdf needs finite x, got {x}")));
    }
    Ok(0.5 * erfc(-x / SQRT_2))
}

/// Standard normal survival function 1 - Phi(x), accurate in the upper
/// tail.
pub fn normal_survival(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal quantile: bisection bracket plus Newton polish against
/// the CDF above, giving |Phi(x) - p| well below 1e-10.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "normal_quantile needs p in (0, 1), got {p}"
        )));
    }
    let mut lo = -40.0f64;
    let mut hi = 40.0f64;
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let f = normal_cdf(x)? - p;
        let d = normal_pdf(x);
        if d <= f64::MIN_POSITIVE {
            break;
        }
        let step = f / d;
        x -= step;
        if step.abs() < 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    Ok(x)
}

/// Survival function of chi-square with 2 degrees of freedom: exp(-x/2).
pub fn chi2_2_survival(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!(
            "chi2_2_survival needs x >= 0, got {x}"
        )));
    }
    Ok((-x / 2.0).exp())
}

/// Quantile of chi-square with 2 degrees of freedom: -2 ln(1 - p).
pub fn chi2_2_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!(
            "chi2_2_quantile needs p in (0, 1), got {p}"
        )));
    }
    Ok(-2.0 * (1.0 - p).ln())
}

/// Upper-tail probability of the standard normal at x.
pub fn normal_tail(x: f64, side: TailSide) -> Result<TailProbability> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("normal tail needs finite x, got {x}")));
    }
    let value = match side {
        TailSide::Upper => normal_survival(x),
        TailSide::Lower => normal_cdf(x)?,
    };
    Ok(TailProbability { value, side })
}
