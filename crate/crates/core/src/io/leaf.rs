//! Leaf-shaped triangulated networks.
//!
//! The outline is `|y| ≤ w(x) = 0.4 · sin(πx)^0.8` on `x ∈ [0, 1]`, a convex
//! region, so its Delaunay triangulation stays inside the leaf. Vertex 0 is
//! the base at the origin and carries the only source (`+1`); every other
//! vertex is a sink of `−1/(n−1)`.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use delaunator::{triangulate, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::json::GraphSpecFile;
use crate::error::{NetError, Result};
use crate::graph::Network;

const HALF_WIDTH: f64 = 0.4;

fn half_width(x: f64) -> f64 {
    HALF_WIDTH * (PI * x).sin().max(0.0).powf(0.8)
}

#[derive(Clone, Debug)]
pub struct LeafMesh {
    pub network: Network,
    pub spec: GraphSpecFile,
}

/// Builds a leaf mesh with `nodes` vertices (at least 4).
pub fn generate_leaf(nodes: usize, seed: u64) -> Result<LeafMesh> {
    if nodes < 4 {
        return Err(NetError::InvalidParameter(format!("a leaf needs at least 4 nodes, got {nodes}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Base, tip, and pairs of outline points; roughly a third on the outline.
    let mut pts: Vec<[f64; 2]> = vec![[0.0, 0.0], [1.0, 0.0]];
    let pairs = ((nodes - 2) / 3).max(1).min((nodes - 2) / 2);
    for i in 1..=pairs {
        let x = i as f64 / (pairs + 1) as f64;
        let w = half_width(x);
        pts.push([x, w]);
        pts.push([x, -w]);
    }

    let interior = nodes - pts.len();
    let area = 2.0 * HALF_WIDTH * 0.6;
    let mut spacing = 0.6 * (area / nodes as f64).sqrt();
    let mut attempts = 0usize;
    while pts.len() < nodes {
        let x: f64 = rng.gen_range(0.02..0.98);
        let y: f64 = rng.gen_range(-HALF_WIDTH..HALF_WIDTH);
        attempts += 1;
        if attempts % (200 * interior.max(1)) == 0 {
            spacing *= 0.8;
        }
        if y.abs() >= 0.9 * half_width(x) {
            continue;
        }
        let d2 = spacing * spacing;
        if pts.iter().all(|p| (p[0] - x).powi(2) + (p[1] - y).powi(2) >= d2) {
            pts.push([x, y]);
        }
    }

    let points: Vec<Point> = pts.iter().map(|p| Point { x: p[0], y: p[1] }).collect();
    let tri = triangulate(&points);
    if tri.triangles.is_empty() {
        return Err(NetError::InvalidParameter("degenerate leaf point set".into()));
    }
    let mut edges = BTreeSet::new();
    for t in tri.triangles.chunks_exact(3) {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let edges: Vec<(usize, usize, f64)> = edges
        .into_iter()
        .map(|(u, v)| (u, v, (pts[u][0] - pts[v][0]).hypot(pts[u][1] - pts[v][1])))
        .collect();

    let sink = -1.0 / (nodes - 1) as f64;
    let mut sources = vec![sink; nodes];
    sources[0] = 1.0;
    let network = Network::new(nodes, edges, sources, Some(pts))?;
    let spec = GraphSpecFile::from_network(&network);
    Ok(LeafMesh { network, spec })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn leaf_is_valid_and_deterministic() {
        for n in [4, 10, 40, 61] {
            let a = generate_leaf(n, 5).unwrap();
            assert_eq!(a.network.vertex_count(), n);
            let p = a.network.positions().unwrap();
            assert!(p.iter().all(|q| q[0] >= p[0][0]));
            assert_eq!(a.network.sources()[0], 1.0);
            assert!(a.network.sources()[1..].iter().all(|&s| s == -1.0 / (n - 1) as f64));
            let b = generate_leaf(n, 5).unwrap();
            assert_eq!(a.network, b.network);
        }
    }

    #[test]
    fn planar_edge_count() {
        let leaf = generate_leaf(40, 1).unwrap();
        let m = leaf.network.edge_count();
        assert!(m >= 40 && m <= 3 * 40 - 6, "{m}");
    }

    #[test]
    fn too_small() {
        assert!(generate_leaf(3, 0).is_err());
    }
}
