//! Exhaustive-sum oracles for the signed cycle/path family. These walk
//! every ordered tuple of distinct indices and are the reference the
//! closed-form reductions are checked against. Guarded so nobody runs an
//! O(n^m) loop on a real network by accident.

use crate::error::{Error, Result};
use crate::model::AdjacencyMatrix;
use crate::stats::CenteredAdjacency;

const MAX_N: usize = 14;
const MAX_TUPLES: f64 = 2e8;

fn guard(n: usize, tuple_len: usize) -> Result<()> {
    if n > MAX_N {
        return Err(Error::NaiveGuard(format!(
            "exhaustive sums are limited to n <= {MAX_N}, got n = {n}"
        )));
    }
    let mut count = 1.0;
    for t in 0..tuple_len {
        count *= (n - t) as f64;
    }
    if count > MAX_TUPLES {
        return Err(Error::NaiveGuard(format!(
            "{count:.1e} ordered {tuple_len}-tuples exceed the enumeration budget"
        )));
    }
    Ok(())
}

/// Sum over ordered distinct `len`-tuples of the product of B entries
/// along consecutive positions, closing the loop when `cycle` is set.
fn tuple_sum(b: &CenteredAdjacency, len: usize, cycle: bool) -> f64 {
    let n = b.n();
    let mut used = vec![false; n];
    let mut total = 0.0;

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        b: &CenteredAdjacency,
        used: &mut [bool],
        first: usize,
        prev: usize,
        depth: usize,
        len: usize,
        cycle: bool,
        partial: f64,
        total: &mut f64,
    ) {
        if depth == len {
            *total += if cycle { partial * b.entry(prev, first) } else { partial };
            return;
        }
        for next in 0..used.len() {
            if used[next] {
                continue;
            }
            used[next] = true;
            recurse(
                b,
                used,
                first,
                next,
                depth + 1,
                len,
                cycle,
                partial * b.entry(prev, next),
                total,
            );
            used[next] = false;
        }
    }

    for first in 0..n {
        used[first] = true;
        recurse(b, &mut used, first, first, 1, len, cycle, 1.0, &mut total);
        used[first] = false;
    }
    total
}

/// Literal sum defining the oSQ statistic: all ordered distinct 4-tuples.
pub fn osq_naive(a: &AdjacencyMatrix) -> Result<f64> {
    signed_cycle_naive(a, 4)
}

pub fn signed_cycle_naive(a: &AdjacencyMatrix, m: usize) -> Result<f64> {
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
    guard(n, m)?;
    Ok(tuple_sum(&CenteredAdjacency::new(a), m, true))
}

pub fn signed_path_naive(a: &AdjacencyMatrix, m: usize) -> Result<f64> {
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
    guard(n, m + 1)?;
    Ok(tuple_sum(&CenteredAdjacency::new(a), m + 1, false))
}
