//! Network and model types: binary adjacency matrices, mixed-membership
//! block model parameters, seeded generation, and the Bernoulli
//! probability matrix with its centered signal form.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, Matrix};
use crate::rng;

const ROW_SUM_TOL: f64 = 1e-12;

/// Symmetric hollow binary adjacency matrix, stored as bit-packed rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    n: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl AdjacencyMatrix {
    pub fn empty(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "adjacency matrix needs n >= 2, got {n}"
            )));
        }
        let words_per_row = n.div_ceil(64);
        Ok(AdjacencyMatrix {
            n,
            words_per_row,
            bits: vec![0; n * words_per_row],
        })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut a = Self::empty(n)?;
        for &(i, j) in edges {
            a.add_edge(i, j)?;
        }
        Ok(a)
    }

    /// Insert the undirected edge {i, j}. Rejects loops, out-of-range
    /// endpoints and duplicates.
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        if i == j {
            return Err(Error::InvalidParameter(format!("self-loop at node {i}")));
        }
        if i >= self.n || j >= self.n {
            return Err(Error::InvalidParameter(format!(
                "edge ({i}, {j}) out of range for n = {}",
                self.n
            )));
        }
        if self.get(i, j) {
            return Err(Error::InvalidParameter(format!("duplicate edge ({i}, {j})")));
        }
        self.set_bit(i, j);
        self.set_bit(j, i);
        Ok(())
    }

    fn set_bit(&mut self, i: usize, j: usize) {
        self.bits[i * self.words_per_row + j / 64] |= 1u64 << (j % 64);
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.bits[i * self.words_per_row + j / 64] >> (j % 64)) & 1 == 1
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words_per_row..(i + 1) * self.words_per_row]
    }

    pub fn degrees(&self) -> Vec<u32> {
        (0..self.n)
            .map(|i| self.row_words(i).iter().map(|w| w.count_ones()).sum())
            .collect()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> u64 {
        let total: u64 = self.bits.iter().map(|w| w.count_ones() as u64).sum();
        total / 2
    }

    /// Codegree |N(i) ∩ N(j)|, i.e. entry (i, j) of A².
    #[inline]
    pub fn codegree(&self, i: usize, j: usize) -> u32 {
        self.row_words(i)
            .iter()
            .zip(self.row_words(j))
            .map(|(a, b)| (a & b).count_ones())
            .sum()
    }

    /// Edges as (i, j) pairs with i < j, ordered lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count() as usize);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.get(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Copy with rows/columns relabeled by `perm` (node i becomes perm[i]).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidParameter("permutation length mismatch".into()));
        }
        let mut a = Self::empty(self.n)?;
        for (i, j) in self.edges() {
            a.add_edge(perm[i], perm[j])?;
        }
        Ok(a)
    }

    /// Write the edge-list format: first line `n`, then `i j` per edge
    /// with i < j.
    pub fn write_edgelist<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.n)?;
        for (i, j) in self.edges() {
            writeln!(w, "{i} {j}")?;
        }
        Ok(())
    }

    /// Parse the edge-list format. `#` lines are comments; the first data
    /// line is the node count, every following line one `i j` pair with
    /// 0-based endpoints and i < j.
    pub fn read_edgelist<R: BufRead>(r: R) -> Result<Self> {
        let mut a: Option<AdjacencyMatrix> = None;
        for (idx, line) in r.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let body = line.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            match &mut a {
                None => {
                    let n: usize = body.parse().map_err(|_| Error::Parse {
                        line: lineno,
                        msg: format!("expected node count, got {body:?}"),
                    })?;
                    a = Some(AdjacencyMatrix::empty(n).map_err(|e| Error::Parse {
                        line: lineno,
                        msg: e.to_string(),
                    })?);
                }
                Some(a) => {
                    let mut it = body.split_whitespace();
                    let (i, j) = match (it.next(), it.next(), it.next()) {
                        (Some(i), Some(j), None) => (i, j),
                        _ => {
                            return Err(Error::Parse {
                                line: lineno,
                                msg: format!("expected `i j`, got {body:?}"),
                            })
                        }
                    };
                    let parse = |s: &str| -> Result<usize> {
                        s.parse().map_err(|_| Error::Parse {
                            line: lineno,
                            msg: format!("bad node index {s:?}"),
                        })
                    };
                    let (i, j) = (parse(i)?, parse(j)?);
                    if i >= j {
                        return Err(Error::Parse {
                            line: lineno,
                            msg: format!("endpoints must satisfy i < j, got {i} {j}"),
                        });
                    }
                    a.add_edge(i, j).map_err(|e| Error::Parse {
                        line: lineno,
                        msg: e.to_string(),
                    })?;
                }
            }
        }
        a.ok_or(Error::Parse {
            line: 0,
            msg: "empty edge-list file".into(),
        })
    }
}

/// How node memberships are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MembershipSpec {
    /// Explicit n x K row-stochastic matrix.
    Fixed { pi: Matrix },
    /// Pure nodes: one categorical draw per node with probabilities h.
    Pure { h: Vec<f64> },
    /// Rows drawn i.i.d. from Dirichlet(a).
    Dirichlet { a: Vec<f64> },
}

impl MembershipSpec {
    pub fn validate(&self, k: usize, n: usize) -> Result<()> {
        match self {
            MembershipSpec::Fixed { pi } => {
                if pi.nrows() != n || pi.ncols() != k {
                    return Err(Error::InvalidParameter(format!(
                        "fixed membership matrix must be {n} x {k}, got {} x {}",
                        pi.nrows(),
                        pi.ncols()
                    )));
                }
                for i in 0..n {
                    let row = pi.row(i);
                    if row.iter().any(|&x| x < 0.0) {
                        return Err(Error::InvalidParameter(format!(
                            "membership row {i} has a negative weight"
                        )));
                    }
                    let s: f64 = row.iter().sum();
                    if (s - 1.0).abs() > ROW_SUM_TOL {
                        return Err(Error::InvalidParameter(format!(
                            "membership row {i} sums to {s}, not 1"
                        )));
                    }
                }
            }
            MembershipSpec::Pure { h } => {
                check_probability_vector(h, k, "pure membership h")?;
            }
            MembershipSpec::Dirichlet { a } => {
                if a.len() != k {
                    return Err(Error::InvalidParameter(format!(
                        "dirichlet concentration has length {}, expected {k}",
                        a.len()
                    )));
                }
                if a.iter().any(|&x| x.is_nan() || x <= 0.0) {
                    return Err(Error::InvalidParameter(
                        "dirichlet concentrations must be positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Population mean vector h = E[pi].
    pub fn mean_vector(&self, k: usize) -> Vec<f64> {
        match self {
            MembershipSpec::Fixed { pi } => {
                let n = pi.nrows();
                let mut h = vec![0.0; k];
                for i in 0..n {
                    for (hk, &x) in h.iter_mut().zip(pi.row(i)) {
                        *hk += x;
                    }
                }
                for hk in &mut h {
                    *hk /= n as f64;
                }
                h
            }
            MembershipSpec::Pure { h } => h.clone(),
            MembershipSpec::Dirichlet { a } => {
                let s: f64 = a.iter().sum();
                a.iter().map(|&x| x / s).collect()
            }
        }
    }

    /// Population second moment G = E[pi pi'].
    pub fn second_moment(&self, k: usize) -> Matrix {
        match self {
            MembershipSpec::Fixed { pi } => {
                let n = pi.nrows();
                let mut g = Matrix::zeros(k, k);
                for i in 0..n {
                    let row = pi.row(i);
                    for a in 0..k {
                        for b in 0..k {
                            g[(a, b)] += row[a] * row[b];
                        }
                    }
                }
                for v in 0..k {
                    for w in 0..k {
                        g[(v, w)] /= n as f64;
                    }
                }
                g
            }
            MembershipSpec::Pure { h } => {
                let mut g = Matrix::zeros(k, k);
                for (i, &hi) in h.iter().enumerate() {
                    g[(i, i)] = hi;
                }
                g
            }
            MembershipSpec::Dirichlet { a } => {
                let a0: f64 = a.iter().sum();
                let mut g = Matrix::zeros(k, k);
                for i in 0..k {
                    for j in 0..k {
                        let num = a[i] * a[j] + if i == j { a[i] } else { 0.0 };
                        g[(i, j)] = num / (a0 * (a0 + 1.0));
                    }
                }
                g
            }
        }
    }
}

fn check_probability_vector(h: &[f64], k: usize, what: &str) -> Result<()> {
    if h.len() != k {
        return Err(Error::InvalidParameter(format!(
            "{what} has length {}, expected {k}",
            h.len()
        )));
    }
    if h.iter().any(|&x| x < 0.0) {
        return Err(Error::InvalidParameter(format!("{what} has a negative entry")));
    }
    let s: f64 = h.iter().sum();
    if (s - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::InvalidParameter(format!("{what} sums to {s}, not 1")));
    }
    Ok(())
}

/// Mixed-membership block model configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmsbmParams {
    pub k: usize,
    pub n: usize,
    /// K x K symmetric community matrix with entries in [0, 1].
    pub p: Matrix,
    pub membership: MembershipSpec,
}

impl MmsbmParams {
    pub fn new(k: usize, n: usize, p: Matrix, membership: MembershipSpec) -> Result<Self> {
        let params = MmsbmParams { k, n, p, membership };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParameter("need K >= 1".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidParameter("need n >= 2".into()));
        }
        if self.p.nrows() != self.k || self.p.ncols() != self.k {
            return Err(Error::InvalidParameter(format!(
                "P must be {0} x {0}, got {1} x {2}",
                self.k,
                self.p.nrows(),
                self.p.ncols()
            )));
        }
        if !self.p.is_symmetric(1e-12) {
            return Err(Error::InvalidParameter("P must be symmetric".into()));
        }
        if self.p.data().iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::InvalidParameter("P entries must lie in [0, 1]".into()));
        }
        self.membership.validate(self.k, self.n)
    }
}

/// Symmetric matrix of edge probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityMatrix {
    mat: Matrix,
}

impl ProbabilityMatrix {
    pub fn new(mat: Matrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::InvalidParameter("probability matrix must be square".into()));
        }
        if !mat.is_symmetric(1e-9) {
            return Err(Error::InvalidParameter(
                "probability matrix asymmetric beyond 1e-9".into(),
            ));
        }
        if mat
            .data()
            .iter()
            .any(|&x| !(-1e-12..=1.0 + 1e-12).contains(&x))
        {
            return Err(Error::InvalidParameter(
                "probability matrix entries must lie in [0, 1]".into(),
            ));
        }
        Ok(ProbabilityMatrix { mat })
    }

    /// Erdős–Rényi matrix alpha * 1 1'.
    pub fn erdos_renyi(n: usize, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "edge probability {alpha} outside [0, 1]"
            )));
        }
        Self::new(Matrix::constant(n, n, alpha))
    }

    pub fn n(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.mat
    }

    /// Mean entry, the null edge density proxy.
    pub fn mean_entry(&self) -> f64 {
        let n = self.n() as f64;
        self.mat.data().iter().sum::<f64>() / (n * n)
    }

    /// Parse a dense whitespace matrix: one row per line, `#` comments
    /// ignored, all rows the same length, square and symmetric.
    pub fn read_dense<R: BufRead>(r: R) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (idx, line) in r.lines().enumerate() {
            let lineno = idx + 1;
            let line = line?;
            let body = line.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> =
                body.split_whitespace().map(str::parse).collect();
            let row = row.map_err(|e| Error::Parse {
                line: lineno,
                msg: format!("bad matrix entry: {e}"),
            })?;
            if let Some(first) = rows.first() {
                if row.len() != first.len() {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!(
                            "row has {} entries, expected {}",
                            row.len(),
                            first.len()
                        ),
                    });
                }
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse {
                line: 0,
                msg: "empty matrix file".into(),
            });
        }
        Self::new(Matrix::from_rows(&rows)?)
    }
}

/// Draw a realized membership matrix for `params` under `seed`.
pub fn sample_memberships(params: &MmsbmParams, seed: u64) -> Result<Matrix> {
    params.validate()?;
    let (n, k) = (params.n, params.k);
    match &params.membership {
        MembershipSpec::Fixed { pi } => Ok(pi.clone()),
        _ if k == 1 => Ok(Matrix::constant(n, 1, 1.0)),
        MembershipSpec::Pure { h } => {
            let mut rng = rng::membership_stream(seed);
            let mut pi = Matrix::zeros(n, k);
            for i in 0..n {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut z = k - 1;
                for (c, &hc) in h.iter().enumerate() {
                    acc += hc;
                    if u < acc {
                        z = c;
                        break;
                    }
                }
                pi[(i, z)] = 1.0;
            }
            Ok(pi)
        }
        MembershipSpec::Dirichlet { a } => {
            let mut rng = rng::membership_stream(seed);
            let dir = rand_distr::Dirichlet::new(a)
                .map_err(|e| Error::InvalidParameter(format!("dirichlet: {e}")))?;
            let mut pi = Matrix::zeros(n, k);
            for i in 0..n {
                let row: Vec<f64> = rand_distr::Distribution::sample(&dir, &mut rng);
                pi.row_mut(i).copy_from_slice(&row);
            }
            Ok(pi)
        }
    }
}

/// Generate a network from the model. The same (params, seed) pair gives a
/// bit-identical matrix on any machine and thread count: memberships come
/// from a seeded stream and each upper-triangle entry from a stateless
/// per-edge generator.
pub fn generate_network(params: &MmsbmParams, seed: u64) -> Result<AdjacencyMatrix> {
    let pi = sample_memberships(params, seed)?;
    generate_with_memberships(params, &pi, seed)
}

/// Generation with an explicit realized membership matrix.
pub fn generate_with_memberships(
    params: &MmsbmParams,
    pi: &Matrix,
    seed: u64,
) -> Result<AdjacencyMatrix> {
    params.validate()?;
    let n = params.n;
    if pi.nrows() != n || pi.ncols() != params.k {
        return Err(Error::InvalidParameter("realized membership shape mismatch".into()));
    }
    let pi_p = pi.matmul(&params.p); // n x K, row i = pi_i' P
    let mut a = AdjacencyMatrix::empty(n)?;
    for i in 0..n {
        let lhs = pi_p.row(i);
        for j in (i + 1)..n {
            let p = dot(lhs, pi.row(j));
            if rng::edge_unit(seed, rng::edge_index(n, i, j)) < p {
                a.set_bit(i, j);
                a.set_bit(j, i);
            }
        }
    }
    Ok(a)
}

/// Bernoulli probability matrix Omega = Pi P Pi'.
pub fn omega_matrix(params: &MmsbmParams, realized_pi: &Matrix) -> Result<ProbabilityMatrix> {
    params.validate()?;
    if realized_pi.ncols() != params.k {
        return Err(Error::InvalidParameter(format!(
            "membership matrix has {} columns, expected {}",
            realized_pi.ncols(),
            params.k
        )));
    }
    let n = realized_pi.nrows();
    for i in 0..n {
        let row = realized_pi.row(i);
        if row.iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidParameter(format!("membership row {i} negative")));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidParameter(format!(
                "membership row {i} sums to {s}, not 1"
            )));
        }
    }
    let pi_p = realized_pi.matmul(&params.p);
    let mut omega = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            omega[(i, j)] = dot(pi_p.row(i), realized_pi.row(j));
        }
    }
    // Exact symmetrization: dot-product order makes (i,j) and (j,i) agree
    // only up to rounding.
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (omega[(i, j)] + omega[(j, i)]);
            omega[(i, j)] = v;
            omega[(j, i)] = v;
        }
    }
    ProbabilityMatrix::new(omega)
}

/// Centered signal matrix: Omega minus its mean entry times 1 1'. The
/// result has zero total sum; it vanishes exactly when Omega is flat.
pub fn centered_signal_matrix(omega: &ProbabilityMatrix) -> Matrix {
    let n = omega.n();
    let alpha_tilde = omega.mean_entry();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = omega.matrix()[(i, j)] - alpha_tilde;
        }
    }
    out
}
