//! Sample summaries used to check calibration: one-sample
//! Kolmogorov-Smirnov distance against N(0,1), Pearson correlation, and
//! pool-adjacent-violators isotonic regression.

use crate::dist::normal_cdf;
use crate::error::{Error, Result};

/// One-sample KS statistic of `sample` against the standard normal.
pub fn ks_statistic_normal(sample: &[f64]) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidParameter("KS statistic needs a nonempty sample".into()));
    }
    let mut xs = sample.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).ok_or(()).unwrap());
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let f = normal_cdf(x)?;
        let hi = (i + 1) as f64 / n - f;
        let lo = f - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    Ok(d)
}

/// Pearson correlation coefficient.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter(
            "correlation needs two equal-length samples of size >= 2".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateModel("zero-variance sample in correlation".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Weighted isotonic (nondecreasing) fit by pool-adjacent-violators.
/// `ys` must already be ordered by the predictor.
pub fn isotonic_fit(ys: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    if ys.len() != weights.len() || ys.is_empty() {
        return Err(Error::InvalidParameter(
            "isotonic fit needs equal-length nonempty inputs".into(),
        ));
    }
    // Blocks of (mean, weight, count).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(ys.len());
    for (&y, &w) in ys.iter().zip(weights) {
        blocks.push((y, w, 1));
        while blocks.len() >= 2 {
            let (m2, w2, c2) = blocks[blocks.len() - 1];
            let (m1, w1, c1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.pop();
            blocks.pop();
            let w = w1 + w2;
            blocks.push(((m1 * w1 + m2 * w2) / w, w, c1 + c2));
        }
    }
    let mut out = Vec::with_capacity(ys.len());
    for (m, _, c) in blocks {
        out.extend(std::iter::repeat_n(m, c));
    }
    Ok(out)
}
