//! Shared helpers for integration tests.
#![allow(dead_code)]

use commtest::matrix::Matrix;
use commtest::model::{generate_network, AdjacencyMatrix, MembershipSpec, MmsbmParams};

/// Erdős–Rényi parameters.
pub fn er_params(n: usize, alpha: f64) -> MmsbmParams {
    MmsbmParams::new(
        1,
        n,
        Matrix::from_rows(&[vec![alpha]]).unwrap(),
        MembershipSpec::Pure { h: vec![1.0] },
    )
    .unwrap()
}

/// One ER network.
pub fn er_graph(n: usize, alpha: f64, seed: u64) -> AdjacencyMatrix {
    generate_network(&er_params(n, alpha), seed).unwrap()
}

/// ER network whose raw edge density is strictly inside (0, 1); bumps the
/// seed deterministically until the draw is non-degenerate.
pub fn er_graph_unclamped(n: usize, alpha: f64, seed: u64) -> AdjacencyMatrix {
    let mut s = seed;
    loop {
        let a = er_graph(n, alpha, s);
        let e = a.edge_count();
        if e > 0 && e < (n * (n - 1) / 2) as u64 {
            return a;
        }
        s = s.wrapping_add(0x9E37_79B9);
    }
}

pub fn rel_close(a: f64, b: f64, rel: f64, abs_floor: f64) -> bool {
    let diff = (a - b).abs();
    diff <= abs_floor || diff <= rel * a.abs().max(b.abs())
}

/// Symmetric two-block SBM parameters with balanced pure memberships.
pub fn sbm2_params(n: usize, a: f64, b: f64) -> MmsbmParams {
    let p = Matrix::from_rows(&[vec![a, b], vec![b, a]]).unwrap();
    MmsbmParams::new(2, n, p, commtest::presets::balanced_pure_membership(n, 2)).unwrap()
}
