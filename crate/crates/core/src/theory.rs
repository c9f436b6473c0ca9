//! Theoretical separation quantities for a model (K, P, h, n): the null
//! edge level alpha0, the centered community matrix M, the degree-signal
//! and cycle-signal SNRs delta_n / tau_n and their maximum beta_n, the
//! regularity diagnostics, and the exact finite-n SNR ratios evaluated on
//! a concrete probability matrix.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{jacobi_eigen, spectral_norm_symmetric, Matrix};
use crate::model::{centered_signal_matrix, MmsbmParams, ProbabilityMatrix};

/// Regularity diagnostics mirroring the balance and sparsity conditions
/// the power theory assumes. Violations are warnings, never errors: the
/// statistics stay computable outside the regularity regime.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionDiagnostics {
    /// max_k h_k / min_k h_k; None when some h_k is zero.
    pub h_ratio: Option<f64>,
    /// Spectral norm of G^{-1}; None when G is numerically singular.
    pub g_inv_norm: Option<f64>,
    pub alpha0: f64,
    pub n_alpha0: f64,
    pub warnings: Vec<String>,
}

/// Theoretical quantities for one model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoryReport {
    pub alpha0: f64,
    /// Centered community matrix P - alpha0 * 1 1'.
    pub m: Matrix,
    pub h: Vec<f64>,
    /// Membership second moment E[pi pi'].
    pub g: Matrix,
    pub delta_n: f64,
    pub tau_n: f64,
    pub beta_n: f64,
    pub n: usize,
    pub diagnostics: ConditionDiagnostics,
}

/// Exact finite-n SNR ratios of the chi-square and oSQ statistics for a
/// concrete probability matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactSnrReport {
    pub snr_chi2: f64,
    pub snr_osq: f64,
    pub chi2_numerator: f64,
    pub chi2_denominator: f64,
    pub osq_numerator: f64,
    pub osq_denominator: f64,
}

fn validate_p_h(k: usize, p: &Matrix, h: &[f64]) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidParameter("need K >= 1".into()));
    }
    if p.nrows() != k || p.ncols() != k {
        return Err(Error::InvalidParameter(format!(
            "P must be {k} x {k}, got {} x {}",
            p.nrows(),
            p.ncols()
        )));
    }
    if !p.is_symmetric(1e-12) {
        return Err(Error::InvalidParameter("P must be symmetric".into()));
    }
    if p.data().iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidParameter("P must be entrywise nonnegative".into()));
    }
    if h.len() != k {
        return Err(Error::InvalidParameter(format!(
            "h has length {}, expected {k}",
            h.len()
        )));
    }
    if h.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidParameter("h must be entrywise nonnegative".into()));
    }
    let s: f64 = h.iter().sum();
    if (s - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidParameter(format!("h sums to {s}, not 1")));
    }
    Ok(())
}

/// Theory report with G taken as diag(h), the pure-membership reading.
pub fn theory_report(k: usize, p: &Matrix, h: &[f64], n: usize) -> Result<TheoryReport> {
    let mut g = Matrix::zeros(k, k);
    for (i, &hi) in h.iter().enumerate() {
        g[(i, i)] = hi;
    }
    theory_report_with_moment(k, p, h, &g, n)
}

/// Theory report for a full model configuration; h and G come from the
/// membership specification.
pub fn theory_report_for_params(params: &MmsbmParams) -> Result<TheoryReport> {
    params.validate()?;
    let h = params.membership.mean_vector(params.k);
    let g = params.membership.second_moment(params.k);
    theory_report_with_moment(params.k, &params.p, &h, &g, params.n)
}

pub fn theory_report_with_moment(
    k: usize,
    p: &Matrix,
    h: &[f64],
    g: &Matrix,
    n: usize,
) -> Result<TheoryReport> {
    validate_p_h(k, p, h)?;
    if n < 2 {
        return Err(Error::InvalidParameter("need n >= 2".into()));
    }

    let ph = p.matvec(h);
    let alpha0: f64 = ph.iter().zip(h).map(|(a, b)| a * b).sum();
    if alpha0 <= 0.0 {
        return Err(Error::DegenerateModel(
            "alpha0 = h'Ph must be positive".into(),
        ));
    }

    let nf = n as f64;
    let mh_sq: f64 = ph.iter().map(|&x| (x - alpha0) * (x - alpha0)).sum();
    let delta_n = nf.powf(1.5) * mh_sq / alpha0;

    let mut m = p.clone();
    for i in 0..k {
        for j in 0..k {
            m[(i, j)] -= alpha0;
        }
    }
    let m_norm = spectral_norm_symmetric(&m)?;
    let tau_n = nf * nf * m_norm.powi(4) / (alpha0 * alpha0);
    let beta_n = delta_n.max(tau_n);

    let mut warnings = Vec::new();
    let h_min = h.iter().cloned().fold(f64::INFINITY, f64::min);
    let h_max = h.iter().cloned().fold(0.0, f64::max);
    let h_ratio = if h_min > 0.0 {
        let r = h_max / h_min;
        if r > 10.0 {
            warnings.push(format!("community balance ratio {r:.3} is large"));
        }
        Some(r)
    } else {
        warnings.push("some community has zero mean membership weight".into());
        None
    };

    let g_inv_norm = match jacobi_eigen(g) {
        Ok(eig) => {
            let lmax = eig.values.first().map(|v| v.abs()).unwrap_or(0.0);
            let lmin = eig.values.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
            if lmin <= 1e-12 * lmax.max(1.0) {
                warnings.push("membership second moment G is numerically singular".into());
                None
            } else {
                let gn = 1.0 / lmin;
                if gn > 100.0 {
                    warnings.push(format!("|G^-1| = {gn:.3} is large"));
                }
                Some(gn)
            }
        }
        Err(_) => {
            warnings.push("membership second moment G is not symmetric".into());
            None
        }
    };

    if alpha0 > 0.9 {
        warnings.push(format!("alpha0 = {alpha0:.4} is close to 1"));
    }
    let n_alpha0 = nf * alpha0;
    if n_alpha0 < 10.0 {
        warnings.push(format!(
            "expected degree n*alpha0 = {n_alpha0:.3} is very small"
        ));
    }

    Ok(TheoryReport {
        alpha0,
        m,
        h: h.to_vec(),
        g: g.clone(),
        delta_n,
        tau_n,
        beta_n,
        n,
        diagnostics: ConditionDiagnostics {
            h_ratio,
            g_inv_norm,
            alpha0,
            n_alpha0,
            warnings,
        },
    })
}

/// Exact finite-n SNR ratios:
///   snr_chi2 = 1' W^2 1 / sqrt(2 * 1' V^2 1)
///   snr_osq  = tr(W^4)  / sqrt(8 * tr(V^4))
/// with W the centered signal matrix and V = Omega o (1 - Omega).
pub fn exact_snr(omega: &ProbabilityMatrix) -> Result<ExactSnrReport> {
    let n = omega.n();
    let w = centered_signal_matrix(omega);
    let mut v = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let o = omega.matrix()[(i, j)];
            v[(i, j)] = o * (1.0 - o);
        }
    }
    if v.data().iter().all(|&x| x == 0.0) {
        return Err(Error::DegenerateModel(
            "every edge probability is 0 or 1; the variance proxy vanishes".into(),
        ));
    }

    let ones = vec![1.0; n];
    let quad = |m: &Matrix| -> f64 { m.matvec(&ones).iter().map(|x| x * x).sum() };
    let tr4 = |m: &Matrix| -> f64 {
        let sq = m.matmul(m);
        let f = sq.frobenius_norm();
        f * f
    };

    let chi2_numerator = quad(&w);
    let chi2_denominator = (2.0 * quad(&v)).sqrt();
    let osq_numerator = tr4(&w);
    let osq_denominator = (8.0 * tr4(&v)).sqrt();

    Ok(ExactSnrReport {
        snr_chi2: chi2_numerator / chi2_denominator,
        snr_osq: osq_numerator / osq_denominator,
        chi2_numerator,
        chi2_denominator,
        osq_numerator,
        osq_denominator,
    })
}
