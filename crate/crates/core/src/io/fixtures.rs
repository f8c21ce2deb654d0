//! The 7-vertex complete-graph network used in the experiments.

use crate::graph::Network;

/// `(x, y, source)` per vertex, as printed (three decimals).
pub const TABLE1: [(f64, f64, f64); 7] = [
    (0.100, 0.000, 0.164),
    (0.874, -0.104, 0.794),
    (0.581, 0.790, -0.128),
    (-0.043, 1.0547, 0.936),
    (-0.945, 0.371, -0.299),
    (-0.818, -0.161, 0.750),
    (-0.206, -1.023, -2.217),
];

/// Sum of the printed sources, before re-balancing.
pub fn table1_source_residual() -> f64 {
    TABLE1.iter().map(|r| r.2).sum()
}

/// Complete graph on the seven points with Euclidean lengths. The printed
/// sources balance only to their precision, so the residual is subtracted
/// equally from every vertex.
pub fn table1_network() -> Network {
    let n = TABLE1.len();
    let shift = table1_source_residual() / n as f64;
    let sources = TABLE1.iter().map(|r| r.2 - shift).collect();
    let positions: Vec<[f64; 2]> = TABLE1.iter().map(|r| [r.0, r.1]).collect();
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in (u + 1)..n {
            let (a, b) = (positions[u], positions[v]);
            edges.push((u, v, (a[0] - b[0]).hypot(a[1] - b[1])));
        }
    }
    Network::new(n, edges, sources, Some(positions)).expect("fixture is valid")
}
