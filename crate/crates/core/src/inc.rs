//! Intrinsic number of communities of a probability matrix: numerical
//! rank, eigen-embedding of rows, and the vertex count of the convex hull
//! of the embedded rows. A point counts as a vertex when its distance to
//! the hull of the remaining points exceeds the hull tolerance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, jacobi_eigen, Matrix};
use crate::model::ProbabilityMatrix;

pub const DEFAULT_RANK_TOL_FACTOR: f64 = 1e-8;
pub const DEFAULT_HULL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IncResult {
    /// Numerical rank r of the matrix.
    pub rank: usize,
    /// Eigenvalues kept by the rank cut, by descending magnitude.
    pub eigenvalues: Vec<f64>,
    /// n x r eigenvector embedding of the rows.
    pub embedding: Matrix,
    /// Number of deduplicated embedded rows.
    pub distinct_rows: usize,
    /// The intrinsic number of communities: hull vertex count.
    pub vertex_count: usize,
    /// Representative row index of each vertex.
    pub vertex_indices: Vec<usize>,
    /// Vertices whose hull distance fell within a factor 10 of the
    /// tolerance; counted, but too close to call silently.
    pub ambiguous_indices: Vec<usize>,
    pub rank_tol: f64,
    pub hull_tol: f64,
}

/// Euclidean distance from `point` to the convex hull of `others`.
///
/// Shifts the problem to finding the minimum-norm point of
/// conv(others - point) and runs Wolfe's min-norm-point algorithm, which
/// terminates finitely; the final Wolfe gap x'x - min_j x'v_j certifies
/// the squared distance far below 1e-9.
pub fn min_distance_to_hull(point: &[f64], others: &[Vec<f64>]) -> Result<f64> {
    if others.is_empty() {
        return Err(Error::InvalidParameter(
            "hull distance needs at least one other point".into(),
        ));
    }
    let dim = point.len();
    if others.iter().any(|q| q.len() != dim) {
        return Err(Error::InvalidParameter("hull points have mismatched dimensions".into()));
    }
    let shifted: Vec<Vec<f64>> = others
        .iter()
        .map(|q| q.iter().zip(point).map(|(a, b)| a - b).collect())
        .collect();
    Ok(min_norm_point(&shifted))
}

/// Wolfe's min-norm-point algorithm over conv(v).
fn min_norm_point(v: &[Vec<f64>]) -> f64 {
    let dim = v[0].len();
    let scale = v.iter().map(|q| dot(q, q)).fold(1.0, f64::max);
    let gap_tol = 1e-12 * scale;

    // Start from the point of smallest norm.
    let mut start = 0;
    for (i, q) in v.iter().enumerate() {
        if dot(q, q) < dot(&v[start], &v[start]) {
            start = i;
        }
    }
    // Corral: member indices and convex weights.
    let mut corral: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut x: Vec<f64> = v[start].clone();

    for _major in 0..10_000 {
        // Linear minimization: the vertex most opposed to x.
        let mut best = 0;
        let mut best_val = f64::INFINITY;
        for (i, q) in v.iter().enumerate() {
            let val = dot(&x, q);
            if val < best_val {
                best_val = val;
                best = i;
            }
        }
        let xx = dot(&x, &x);
        if xx - best_val <= gap_tol {
            break; // optimality certificate
        }
        if !corral.contains(&best) {
            corral.push(best);
            weights.push(0.0);
        }

        // Minor cycles: project onto the affine hull of the corral and
        // retreat until a convex representation is found.
        for _minor in 0..10_000 {
            let mu = affine_min_norm(v, &corral);
            if mu.iter().all(|&m| m > -1e-14) {
                weights = mu.iter().map(|&m| m.max(0.0)).collect();
                break;
            }
            // Largest feasible step from weights toward mu.
            let mut theta = 1.0f64;
            for (w, m) in weights.iter().zip(&mu) {
                if *m < 1e-14 && w - m > 0.0 {
                    theta = theta.min(w / (w - m));
                }
            }
            for (w, m) in weights.iter_mut().zip(&mu) {
                *w = *w + theta * (*m - *w);
            }
            // Drop members at zero weight (keep at least one).
            let mut keep_c = Vec::with_capacity(corral.len());
            let mut keep_w = Vec::with_capacity(corral.len());
            for (&c, &w) in corral.iter().zip(&weights) {
                if w > 1e-14 {
                    keep_c.push(c);
                    keep_w.push(w);
                }
            }
            if keep_c.is_empty() {
                keep_c.push(corral[0]);
                keep_w.push(1.0);
            }
            corral = keep_c;
            weights = keep_w;
        }

        // Rebuild x from the corral weights.
        let total: f64 = weights.iter().sum();
        x = vec![0.0; dim];
        for (&c, &w) in corral.iter().zip(&weights) {
            for (xi, qi) in x.iter_mut().zip(&v[c]) {
                *xi += (w / total) * qi;
            }
        }
    }
    dot(&x, &x).max(0.0).sqrt()
}

/// Minimum-norm point over the affine hull of the corral members:
/// minimize |sum_i mu_i v_i|^2 subject to sum mu = 1 (mu unrestricted),
/// via the bordered normal equations.
#[allow(clippy::needless_range_loop)]
fn affine_min_norm(v: &[Vec<f64>], corral: &[usize]) -> Vec<f64> {
    let k = corral.len();
    // System: [G 1; 1' 0] [mu; nu] = [0; 1], G_ij = v_i . v_j.
    let m = k + 1;
    let mut a = vec![vec![0.0; m + 1]; m];
    for i in 0..k {
        for j in 0..k {
            a[i][j] = dot(&v[corral[i]], &v[corral[j]]);
        }
        a[i][k] = 1.0;
        a[i][m] = 0.0;
    }
    for j in 0..k {
        a[k][j] = 1.0;
    }
    a[k][k] = 0.0;
    a[k][m] = 1.0;

    // Gaussian elimination with partial pivoting.
    for col in 0..m {
        let mut piv = col;
        for row in (col + 1)..m {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        a.swap(col, piv);
        let p = a[col][col];
        if p.abs() < 1e-300 {
            continue;
        }
        for row in 0..m {
            if row != col {
                let factor = a[row][col] / p;
                for c in col..=m {
                    a[row][c] -= factor * a[col][c];
                }
            }
        }
    }
    (0..k)
        .map(|i| {
            let p = a[i][i];
            if p.abs() < 1e-300 {
                0.0
            } else {
                a[i][m] / p
            }
        })
        .collect()
}

/// Intrinsic number of communities of a probability matrix under the
/// given tolerances. `rank_tol` is an absolute eigenvalue threshold; pass
/// [`default_rank_tol`] for the scaled default.
pub fn intrinsic_num_communities(
    omega: &ProbabilityMatrix,
    rank_tol: f64,
    hull_tol: f64,
) -> Result<IncResult> {
    if !(rank_tol > 0.0 && hull_tol > 0.0) {
        return Err(Error::InvalidParameter("tolerances must be positive".into()));
    }
    let n = omega.n();
    let eig = jacobi_eigen(omega.matrix())?;

    let rank = eig.values.iter().filter(|v| v.abs() > rank_tol).count();
    if rank == 0 {
        return Err(Error::DegenerateModel(
            "probability matrix is numerically zero".into(),
        ));
    }

    let mut eigenvalues = Vec::with_capacity(rank);
    let mut embedding = Matrix::zeros(n, rank);
    for col in 0..rank {
        eigenvalues.push(eig.values[col]);
        for i in 0..n {
            embedding[(i, col)] = eig.vectors[(i, col)];
        }
    }

    // Collapse duplicate rows (pure nodes of the same community embed to
    // the same point).
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..n {
        let is_new = reps.iter().all(|&r| {
            let d2: f64 = (0..rank)
                .map(|c| {
                    let d = embedding[(i, c)] - embedding[(r, c)];
                    d * d
                })
                .sum();
            d2.sqrt() > hull_tol
        });
        if is_new {
            reps.push(i);
        }
    }
    let distinct_rows = reps.len();

    let point_of = |i: usize| -> Vec<f64> { (0..rank).map(|c| embedding[(i, c)]).collect() };

    let mut vertex_indices = Vec::new();
    let mut ambiguous_indices = Vec::new();
    if distinct_rows == 1 {
        vertex_indices.push(reps[0]);
    } else {
        for (pos, &i) in reps.iter().enumerate() {
            let others: Vec<Vec<f64>> = reps
                .iter()
                .enumerate()
                .filter(|&(q, _)| q != pos)
                .map(|(_, &r)| point_of(r))
                .collect();
            let dist = min_distance_to_hull(&point_of(i), &others)?;
            if dist > hull_tol {
                vertex_indices.push(i);
                if dist < 10.0 * hull_tol {
                    ambiguous_indices.push(i);
                }
            }
        }
    }

    Ok(IncResult {
        rank,
        eigenvalues,
        embedding,
        distinct_rows,
        vertex_count: vertex_indices.len(),
        vertex_indices,
        ambiguous_indices,
        rank_tol,
        hull_tol,
    })
}

/// Default rank tolerance: 1e-8 times the spectral norm of the matrix.
pub fn default_rank_tol(omega: &ProbabilityMatrix) -> Result<f64> {
    let eig = jacobi_eigen(omega.matrix())?;
    let norm = eig.values.first().map(|v| v.abs()).unwrap_or(0.0);
    Ok(DEFAULT_RANK_TOL_FACTOR * norm.max(f64::MIN_POSITIVE))
}

/// INC with default tolerances.
pub fn intrinsic_num_communities_default(omega: &ProbabilityMatrix) -> Result<IncResult> {
    let rank_tol = default_rank_tol(omega)?;
    intrinsic_num_communities(omega, rank_tol, DEFAULT_HULL_TOL)
}
