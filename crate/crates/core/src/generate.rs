//! Random test instances: connected graphs, balanced sources, conductivities.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::Result;
use crate::graph::{Conductivities, Network};

/// How edge lengths are drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Lengths {
    Unit,
    /// Uniform on `[lo, hi)`.
    Uniform(f64, f64),
}

/// Zero-sum sources: uniform `(−1, 1)` draws with the mean removed.
pub fn random_sources<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut s: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mean = s.iter().sum::<f64>() / n as f64;
    s.iter_mut().for_each(|x| *x -= mean);
    s
}

/// Random spanning tree plus each remaining pair with probability
/// `extra`, so the result is always connected.
pub fn random_edges<R: Rng + ?Sized>(rng: &mut R, n: usize, extra: f64) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut present = vec![vec![false; n]; n];
    let mut edges = Vec::new();
    for i in 1..n {
        let (a, b) = (order[i], order[rng.gen_range(0..i)]);
        present[a][b] = true;
        present[b][a] = true;
        edges.push((a.min(b), a.max(b)));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if !present[u][v] && rng.gen_bool(extra) {
                edges.push((u, v));
            }
        }
    }
    edges
}

pub fn random_network<R: Rng + ?Sized>(rng: &mut R, n: usize, extra: f64, lengths: Lengths) -> Result<Network> {
    let edges = random_edges(rng, n, extra)
        .into_iter()
        .map(|(u, v)| {
            let l = match lengths {
                Lengths::Unit => 1.0,
                Lengths::Uniform(lo, hi) => rng.gen_range(lo..hi),
            };
            (u, v, l)
        })
        .collect();
    let sources = random_sources(rng, n);
    Network::new(n, edges, sources, None)
}

/// Conductivities uniform on `[lo, hi)`.
pub fn random_conductivities<R: Rng + ?Sized>(rng: &mut R, edge_count: usize, lo: f64, hi: f64) -> Conductivities {
    Conductivities::new((0..edge_count).map(|_| rng.gen_range(lo..hi)).collect()).expect("draws are non-negative")
}

/// Complete graph with unit lengths.
pub fn complete_network(n: usize, sources: Vec<f64>) -> Result<Network> {
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for u in 0..n {
        for v in (u + 1)..n {
            edges.push((u, v, 1.0));
        }
    }
    Network::new(n, edges, sources, None)
}

/// Unit triangle with sources `s`.
pub fn triangle(s: [f64; 3]) -> Result<Network> {
    Network::new(3, vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)], s.to_vec(), None)
}
