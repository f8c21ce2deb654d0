//! Network description and the conductivity state.
//!
//! A [`Network`] is immutable once built: vertices, undirected edges with
//! positive lengths (stored canonically as `u < v`, sorted), optional plot
//! positions and a balanced source/sink vector. Conductivities are a plain
//! per-edge vector, so symmetry and support within `E` hold by construction.

use std::collections::HashMap;

use crate::error::{NetError, Result};

/// Relative tolerance on `Σ S_i = 0`, scaled by `‖S‖∞`.
pub const SOURCE_BALANCE_TOL: f64 = 1e-12;

/// Default relative threshold for [`active_edges`].
pub const DEFAULT_ACTIVE_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    vertex_count: usize,
    edges: Vec<Edge>,
    positions: Option<Vec<[f64; 2]>>,
    sources: Vec<f64>,
    adjacency: Vec<Vec<(usize, usize)>>,
    edge_index: HashMap<(usize, usize), usize>,
}

impl Network {
    /// Builds a validated network. Edges may be given in either orientation;
    /// they are stored as `(min, max)` and sorted lexicographically.
    pub fn new(
        vertex_count: usize,
        edges: Vec<(usize, usize, f64)>,
        sources: Vec<f64>,
        positions: Option<Vec<[f64; 2]>>,
    ) -> Result<Self> {
        if vertex_count == 0 {
            return Err(NetError::EmptyNetwork);
        }
        if sources.len() != vertex_count {
            return Err(NetError::LengthMismatch {
                what: "sources",
                expected: vertex_count,
                actual: sources.len(),
            });
        }
        if let Some(p) = &positions {
            if p.len() != vertex_count {
                return Err(NetError::LengthMismatch {
                    what: "positions",
                    expected: vertex_count,
                    actual: p.len(),
                });
            }
        }
        if let Some(bad) = sources.iter().position(|s| !s.is_finite()) {
            return Err(NetError::InvalidParameter(format!(
                "source at vertex {bad} is not finite"
            )));
        }

        let mut canonical = Vec::with_capacity(edges.len());
        for (a, b, length) in edges {
            for x in [a, b] {
                if x >= vertex_count {
                    return Err(NetError::VertexOutOfRange {
                        vertex: x,
                        vertex_count,
                    });
                }
            }
            if a == b {
                return Err(NetError::SelfLoop(a));
            }
            let (u, v) = if a < b { (a, b) } else { (b, a) };
            if !(length > 0.0) || !length.is_finite() {
                return Err(NetError::NonpositiveLength { u, v, length });
            }
            canonical.push(Edge { u, v, length });
        }
        canonical.sort_by(|x, y| (x.u, x.v).cmp(&(y.u, y.v)));
        for w in canonical.windows(2) {
            if (w[0].u, w[0].v) == (w[1].u, w[1].v) {
                return Err(NetError::DuplicateEdge(w[0].u, w[0].v));
            }
        }

        let components = count_components(vertex_count, canonical.iter().map(|e| (e.u, e.v)));
        if components > 1 {
            return Err(NetError::DisconnectedGraph { components });
        }

        let sum: f64 = sources.iter().sum();
        let s_max = sources.iter().fold(0.0f64, |m, s| m.max(s.abs()));
        if sum.abs() > SOURCE_BALANCE_TOL * s_max {
            return Err(NetError::UnbalancedSources { sum });
        }

        let mut adjacency = vec![Vec::new(); vertex_count];
        let mut edge_index = HashMap::with_capacity(canonical.len());
        for (id, e) in canonical.iter().enumerate() {
            adjacency[e.u].push((e.v, id));
            adjacency[e.v].push((e.u, id));
            edge_index.insert((e.u, e.v), id);
        }

        Ok(Network {
            vertex_count,
            edges: canonical,
            positions,
            sources,
            adjacency,
            edge_index,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    pub fn sources(&self) -> &[f64] {
        &self.sources
    }

    pub fn positions(&self) -> Option<&[[f64; 2]]> {
        self.positions.as_deref()
    }

    /// `(neighbor, edge id)` pairs incident to `vertex`.
    pub fn neighbors(&self, vertex: usize) -> &[(usize, usize)] {
        &self.adjacency[vertex]
    }

    /// Edge id of `{a, b}` in either orientation.
    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edge_index.get(&key).copied()
    }

    pub fn sources_inf_norm(&self) -> f64 {
        self.sources.iter().fold(0.0f64, |m, s| m.max(s.abs()))
    }

    pub fn sources_l2_norm(&self) -> f64 {
        self.sources.iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    /// Returns a copy with every length multiplied by `factor`.
    pub fn with_scaled_lengths(&self, factor: f64) -> Result<Network> {
        Network::new(
            self.vertex_count,
            self.edges
                .iter()
                .map(|e| (e.u, e.v, e.length * factor))
                .collect(),
            self.sources.clone(),
            self.positions.clone(),
        )
    }

    /// Returns a copy with different sources.
    pub fn with_sources(&self, sources: Vec<f64>) -> Result<Network> {
        Network::new(
            self.vertex_count,
            self.edges.iter().map(|e| (e.u, e.v, e.length)).collect(),
            sources,
            self.positions.clone(),
        )
    }

    pub(crate) fn check_conductivities(&self, c: &Conductivities) -> Result<()> {
        if c.len() != self.edge_count() {
            return Err(NetError::LengthMismatch {
                what: "conductivities",
                expected: self.edge_count(),
                actual: c.len(),
            });
        }
        Ok(())
    }
}

/// Nonnegative per-edge conductivities.
#[derive(Clone, Debug, PartialEq)]
pub struct Conductivities(Vec<f64>);

impl Conductivities {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((edge, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
        {
            return Err(NetError::InvalidConductivity { edge, value });
        }
        Ok(Conductivities(values))
    }

    pub fn zeros(edge_count: usize) -> Self {
        Conductivities(vec![0.0; edge_count])
    }

    pub fn constant(edge_count: usize, value: f64) -> Result<Self> {
        Conductivities::new(vec![value; edge_count])
    }

    /// Projection onto the admissible set: negative entries are trimmed to
    /// zero. Non-finite entries are rejected.
    pub fn project(raw: Vec<f64>) -> Result<Self> {
        if let Some((edge, &value)) = raw.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(NetError::InvalidConductivity { edge, value });
        }
        Ok(Conductivities(raw.into_iter().map(|x| x.max(0.0)).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.0[edge]
    }

    pub fn max(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, &x| m.max(x))
    }

    /// `α·self + (1−α)·other`.
    pub fn lerp(&self, other: &Conductivities, alpha: f64) -> Conductivities {
        Conductivities(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| (alpha * a + (1.0 - alpha) * b).max(0.0))
                .collect(),
        )
    }

    pub fn scaled(&self, factor: f64) -> Conductivities {
        Conductivities(self.0.iter().map(|x| (x * factor).max(0.0)).collect())
    }
}

/// Model parameters: metabolic exponent `gamma`, metabolic coefficient
/// `nu` and robustness weight `mu`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub gamma: f64,
    pub nu: f64,
    pub mu: f64,
}

impl ModelParams {
    pub fn new(gamma: f64, nu: f64, mu: f64) -> Result<Self> {
        let p = ModelParams { gamma, nu, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(NetError::InvalidParameter(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !(self.nu > 0.0) || !self.nu.is_finite() {
            return Err(NetError::InvalidParameter(format!(
                "nu must be positive, got {}",
                self.nu
            )));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(NetError::InvalidParameter(format!(
                "mu must be nonnegative, got {}",
                self.mu
            )));
        }
        Ok(())
    }

    pub fn with_mu(self, mu: f64) -> Self {
        ModelParams { mu, ..self }
    }
}

/// `ℓ = min_e L_e`.
pub fn min_edge_length(net: &Network) -> f64 {
    net.edges()
        .iter()
        .map(|e| e.length)
        .fold(f64::INFINITY, f64::min)
}

/// Edge ids with `C_e > threshold · max(max_e C_e, 1)`, ascending.
pub fn active_edges(c: &Conductivities, threshold: f64) -> Vec<usize> {
    let cutoff = threshold * c.max().max(1.0);
    c.as_slice()
        .iter()
        .enumerate()
        .filter(|(_, &x)| x > cutoff)
        .map(|(i, _)| i)
        .collect()
}

/// Union-find over vertex ids, used for component and cycle checks.
#[derive(Clone, Debug)]
pub(crate) struct DisjointSets {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSets {
    pub(crate) fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `false` if `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

pub(crate) fn count_components(n: usize, edges: impl Iterator<Item = (usize, usize)>) -> usize {
    let mut ds = DisjointSets::new(n);
    let mut count = n;
    for (u, v) in edges {
        if ds.union(u, v) {
            count -= 1;
        }
    }
    count
}

/// Connected components of the graph formed by edges with `C_e > 0`.
/// Components are listed by their smallest vertex; vertices ascend within
/// each component.
pub fn support_components(net: &Network, c: &Conductivities) -> Vec<Vec<usize>> {
    let n = net.vertex_count();
    let mut ds = DisjointSets::new(n);
    for (id, e) in net.edges().iter().enumerate() {
        if c.get(id) > 0.0 {
            ds.union(e.u, e.v);
        }
    }
    let mut slot: Vec<Option<usize>> = vec![None; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for v in 0..n {
        let r = ds.find(v);
        match slot[r] {
            Some(k) => comps[k].push(v),
            None => {
                slot[r] = Some(comps.len());
                comps.push(vec![v]);
            }
        }
    }
    comps
}

/// True iff the support of `c` connects every vertex.
pub fn support_is_connected(net: &Network, c: &Conductivities) -> bool {
    let edges = net
        .edges()
        .iter()
        .enumerate()
        .filter(|(id, _)| c.get(*id) > 0.0)
        .map(|(_, e)| (e.u, e.v));
    count_components(net.vertex_count(), edges) == 1
}
