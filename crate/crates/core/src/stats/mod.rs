//! Test statistics for global community testing: the degree-based chi-square
//! statistic, the orthodox signed quadrilateral, the power enhancement
//! statistic, and the general signed cycle/path family.
//!
//! Distinct-index sums are reduced to closed forms in the hollow centered
//! matrix B (B_ij = A_ij - alpha_hat off the diagonal). Every reduction is
//! gated behind the exhaustive oracles in [`naive`].

pub mod naive;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::model::AdjacencyMatrix;

/// Empirical edge density with the degenerate-network clamp.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeDensityEstimate {
    pub raw: f64,
    pub clamped: f64,
    pub was_clamped: bool,
}

/// Edge density of A. An empty or complete graph is pulled one edge away
/// from {0, 1} so that the variance normalizations stay finite.
pub fn alpha_hat(a: &AdjacencyMatrix) -> EdgeDensityEstimate {
    let n = a.n() as f64;
    let pairs = n * (n - 1.0);
    let raw = 2.0 * a.edge_count() as f64 / pairs;
    if raw == 0.0 {
        EdgeDensityEstimate {
            raw,
            clamped: 2.0 / pairs,
            was_clamped: true,
        }
    } else if raw == 1.0 {
        EdgeDensityEstimate {
            raw,
            clamped: (pairs - 2.0) / pairs,
            was_clamped: true,
        }
    } else {
        EdgeDensityEstimate {
            raw,
            clamped: raw,
            was_clamped: false,
        }
    }
}

/// Centered adjacency matrix B: hollow, symmetric, off-diagonal entries
/// A_ij - alpha_hat (clamped).
#[derive(Debug, Clone)]
pub struct CenteredAdjacency {
    n: usize,
    alpha: EdgeDensityEstimate,
    b: Matrix,
}

impl CenteredAdjacency {
    pub fn new(a: &AdjacencyMatrix) -> Self {
        let n = a.n();
        let alpha = alpha_hat(a);
        let ah = alpha.clamped;
        let mut b = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    b[(i, j)] = if a.get(i, j) { 1.0 - ah } else { -ah };
                }
            }
        }
        CenteredAdjacency { n, alpha, b }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> EdgeDensityEstimate {
        self.alpha
    }

    pub fn matrix(&self) -> &Matrix {
        &self.b
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.b[(i, j)]
    }
}

/// Which statistic a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StatisticName {
    Chi2,
    Osq,
    Pe,
    SignedCycle(usize),
    SignedPath(usize),
}

impl fmt::Display for StatisticName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatisticName::Chi2 => write!(f, "chi2"),
            StatisticName::Osq => write!(f, "osq"),
            StatisticName::Pe => write!(f, "pe"),
            StatisticName::SignedCycle(m) => write!(f, "signed_cycle({m})"),
            StatisticName::SignedPath(m) => write!(f, "signed_path({m})"),
        }
    }
}

impl FromStr for StatisticName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chi2" => Ok(StatisticName::Chi2),
            "osq" => Ok(StatisticName::Osq),
            "pe" => Ok(StatisticName::Pe),
            other => {
                let parse_m = |prefix: &str| -> Option<usize> {
                    other
                        .strip_prefix(prefix)?
                        .strip_suffix(')')?
                        .parse()
                        .ok()
                };
                if let Some(m) = parse_m("signed_cycle(") {
                    return Ok(StatisticName::SignedCycle(m));
                }
                if let Some(m) = parse_m("signed_path(") {
                    return Ok(StatisticName::SignedPath(m));
                }
                Err(Error::InvalidParameter(format!("unknown statistic {other:?}")))
            }
        }
    }
}

impl Serialize for StatisticName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for StatisticName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Outcome of one test on one network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic_name: StatisticName,
    pub raw: f64,
    pub normalized: f64,
    pub p_value: f64,
    pub level: f64,
    pub reject: bool,
    pub n: usize,
    pub alpha_hat: EdgeDensityEstimate,
}

fn check_level(level: f64) -> Result<()> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "test level must lie strictly in (0, 1), got {level}"
        )));
    }
    Ok(())
}

/// Sums over the centered matrix B that the closed forms need. All are
/// exact polynomial identities in the codegree counts; see the oracle
/// tests for the reductions they are gated by.
#[derive(Debug, Clone, Copy)]
struct CenteredSums {
    /// tr(B^2)
    tr_b2: f64,
    /// tr(B^3)
    tr_b3: f64,
    /// tr(B^4)
    tr_b4: f64,
    /// sum_i (sum_j B_ij^2)^2
    sum_row_sq_sq: f64,
    /// sum_{i != j} B_ij^4
    sum_pow4: f64,
    /// 1' B^2 1 = sum_i (row sum of B)^2
    quad_b2: f64,
}

#[allow(clippy::needless_range_loop)]
fn centered_sums(a: &AdjacencyMatrix, ah: f64) -> CenteredSums {
    let n = a.n();
    let nf = n as f64;
    let degs: Vec<f64> = a.degrees().iter().map(|&d| d as f64).collect();
    let two_e: f64 = degs.iter().sum();
    let pairs = nf * (nf - 1.0);

    // Diagonal of B^2: r_i = d_i (1 - 2ah) + (n-1) ah^2.
    let r: Vec<f64> = degs.iter().map(|&d| d * (1.0 - 2.0 * ah) + (nf - 1.0) * ah * ah).collect();
    let sum_row_sq_sq: f64 = r.iter().map(|x| x * x).sum();

    let tr_b2 = two_e * (1.0 - ah) * (1.0 - ah) + (pairs - two_e) * ah * ah;
    let sum_pow4 = two_e * (1.0 - ah).powi(4) + (pairs - two_e) * ah.powi(4);
    let quad_b2 = degs
        .iter()
        .map(|&d| {
            let s = d - (nf - 1.0) * ah;
            s * s
        })
        .sum();

    // Off-diagonal entries of B^2 from codegrees:
    //   (B^2)_ij = (A^2)_ij - ah (d_i + d_j - 2 A_ij) + ah^2 (n - 2).
    let shift = ah * ah * (nf - 2.0);
    let partials: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row_i = a.row_words(i);
            let di = degs[i];
            let mut acc4 = 0.0;
            let mut acc3 = 0.0;
            for j in (i + 1)..n {
                let codeg = row_i
                    .iter()
                    .zip(a.row_words(j))
                    .map(|(x, y)| (x & y).count_ones())
                    .sum::<u32>() as f64;
                let aij = a.get(i, j) as u8 as f64;
                let b2 = codeg - ah * (di + degs[j] - 2.0 * aij) + shift;
                let b = aij - ah;
                acc4 += b2 * b2;
                acc3 += b * b2;
            }
            (acc3, acc4)
        })
        .collect();

    // Sequential reduction in row order keeps the result independent of
    // the worker schedule.
    let mut tr_b3 = 0.0;
    let mut tr_b4 = 0.0;
    for (a3, a4) in partials {
        tr_b3 += 2.0 * a3;
        tr_b4 += 2.0 * a4;
    }
    tr_b4 += sum_row_sq_sq; // diagonal terms (B^2)_ii^2

    CenteredSums {
        tr_b2,
        tr_b3,
        tr_b4,
        sum_row_sq_sq,
        sum_pow4,
        quad_b2,
    }
}

/// Degree-based chi-square statistic X_n with its one-sided normal test.
pub fn chi2_statistic(a: &AdjacencyMatrix, level: f64) -> Result<TestReport> {
    check_level(level)?;
    let n = a.n();
    if n < 3 {
        return Err(Error::InstanceTooSmall {
            n,
            required: 3,
            what: "chi2 statistic",
        });
    }
    let alpha = alpha_hat(a);
    let ah = alpha.clamped;
    let nf = n as f64;
    let degs: Vec<f64> = a.degrees().iter().map(|&d| d as f64).collect();
    let dbar = degs.iter().sum::<f64>() / nf;
    let ss: f64 = degs.iter().map(|&d| (d - dbar) * (d - dbar)).sum();
    let raw = ss / ((nf - 1.0) * ah * (1.0 - ah));
    let normalized = (raw - nf) / (2.0 * nf).sqrt();
    let p_value = dist::normal_survival(normalized);
    Ok(TestReport {
        statistic_name: StatisticName::Chi2,
        raw,
        normalized,
        p_value,
        level,
        reject: p_value < level,
        n,
        alpha_hat: alpha,
    })
}

/// Orthodox signed quadrilateral Q_n with its one-sided normal test.
/// Uses the closed-form reduction for n >= 5 and the exhaustive sum at
/// n = 4.
///
/// The normalization is the studentized form
/// Q_n / (2 sqrt(2) n^2 [alpha (1 - alpha)]^2): the null standard
/// deviation of Q_n is 2 sqrt(2) n^2 [alpha(1-alpha)]^2, so dividing by
/// alpha^2 alone is calibrated only as alpha -> 0 and would put the
/// type I error near zero on dense networks.
pub fn osq_statistic(a: &AdjacencyMatrix, level: f64) -> Result<TestReport> {
    check_level(level)?;
    let n = a.n();
    if n < 4 {
        return Err(Error::InstanceTooSmall {
            n,
            required: 4,
            what: "oSQ statistic",
        });
    }
    let alpha = alpha_hat(a);
    let raw = osq_raw(a, alpha.clamped)?;
    let nf = n as f64;
    let variance_unit = alpha.clamped * (1.0 - alpha.clamped);
    let normalized = raw / (2.0 * 2.0_f64.sqrt() * nf * nf * variance_unit * variance_unit);
    let p_value = dist::normal_survival(normalized);
    Ok(TestReport {
        statistic_name: StatisticName::Osq,
        raw,
        normalized,
        p_value,
        level,
        reject: p_value < level,
        n,
        alpha_hat: alpha,
    })
}

fn osq_raw(a: &AdjacencyMatrix, ah: f64) -> Result<f64> {
    if a.n() == 4 {
        return naive::osq_naive(a);
    }
    let s = centered_sums(a, ah);
    Ok(s.tr_b4 - 2.0 * s.sum_row_sq_sq + s.sum_pow4)
}

/// Power enhancement statistic S_n: sum of squares of the normalized
/// chi-square and oSQ statistics, tested against the chi-square(2) tail.
pub fn pe_statistic(a: &AdjacencyMatrix, level: f64) -> Result<TestReport> {
    check_level(level)?;
    let n = a.n();
    if n < 5 {
        return Err(Error::InstanceTooSmall {
            n,
            required: 5,
            what: "PE statistic",
        });
    }
    let chi2 = chi2_statistic(a, level)?;
    let osq = osq_statistic(a, level)?;
    let raw = chi2.normalized * chi2.normalized + osq.normalized * osq.normalized;
    let p_value = dist::chi2_2_survival(raw)?;
    Ok(TestReport {
        statistic_name: StatisticName::Pe,
        raw,
        normalized: raw,
        p_value,
        level,
        reject: p_value < level,
        n,
        alpha_hat: chi2.alpha_hat,
    })
}

/// All three reports in one call (shares the density estimate).
pub fn all_statistics(a: &AdjacencyMatrix, level: f64) -> Result<[TestReport; 3]> {
    let chi2 = chi2_statistic(a, level)?;
    let osq = osq_statistic(a, level)?;
    let raw = chi2.normalized * chi2.normalized + osq.normalized * osq.normalized;
    let p_value = dist::chi2_2_survival(raw)?;
    let pe = TestReport {
        statistic_name: StatisticName::Pe,
        raw,
        normalized: raw,
        p_value,
        level,
        reject: p_value < level,
        n: a.n(),
        alpha_hat: chi2.alpha_hat,
    };
    Ok([chi2, osq, pe])
}

/// Order-m signed cycle statistic U_n^(m): sum over ordered distinct
/// m-tuples of the cyclic product of centered entries. Closed forms for
/// m in {3, 4}; exhaustive enumeration above.
pub fn signed_cycle(a: &AdjacencyMatrix, m: usize) -> Result<f64> {
    if m < 3 {
        return Err(Error::InvalidParameter(format!(
            "signed cycle needs order m >= 3, got {m}"
        )));
    }
    let n = a.n();
    if n < m {
        return Err(Error::NoValidTuples {
            n,
            what: format!("ordered distinct {m}-tuples"),
        });
    }
    let ah = alpha_hat(a).clamped;
    match m {
        3 => Ok(centered_sums(a, ah).tr_b3),
        4 => osq_raw(a, ah),
        _ => naive::signed_cycle_naive(a, m),
    }
}

/// Length-m signed path statistic V_n^(m): sum over ordered distinct
/// (m+1)-tuples of the path product of centered entries. Closed form for
/// m = 2; exhaustive enumeration above.
pub fn signed_path(a: &AdjacencyMatrix, m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "signed path needs length m >= 2, got {m}"
        )));
    }
    let n = a.n();
    if n < m + 1 {
        return Err(Error::NoValidTuples {
            n,
            what: format!("ordered distinct {}-tuples", m + 1),
        });
    }
    if m == 2 {
        let ah = alpha_hat(a).clamped;
        let s = centered_sums(a, ah);
        Ok(s.quad_b2 - s.tr_b2)
    } else {
        naive::signed_path_naive(a, m)
    }
}
