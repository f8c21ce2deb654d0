//! Spanning-tree minimizers and loop diagnostics.
//!
//! On a spanning tree the fluxes are fixed by the sources alone. Setting
//! `C_e = (Q_e²/ν)^{1/(γ+1)}` on the tree and zero elsewhere gives a local
//! minimizer of the energy when `γ < 1`; the global minimizer is among these
//! and can be found by enumerating all spanning trees on small graphs. For
//! `γ = 1` a loop-free minimizer always exists, and cycles in a minimizer
//! can be shifted by a circular flow without changing the energy.

use crate::energy::{energy_from_flow, gradient_from_pressures};
use crate::error::{NetError, Result};
use crate::graph::{active_edges, Conductivities, DisjointSets, ModelParams, Network, DEFAULT_ACTIVE_THRESHOLD};
use crate::kirchhoff::solve_kirchhoff;
use crate::linalg::{determinant, DenseMatrix};
use crate::value::ExtReal;

/// Default cap on the number of trees [`enumerate_spanning_trees`] will visit.
pub const DEFAULT_TREE_LIMIT: u64 = 1_000_000;

/// Spanning tree of a network, rooted at vertex 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    /// Edge ids, ascending.
    pub edges: Vec<usize>,
    /// Parent vertex of each vertex; `None` at the root.
    pub parent: Vec<Option<usize>>,
    /// Edge id joining each vertex to its parent.
    pub parent_edge: Vec<Option<usize>>,
    /// Vertices in breadth-first order from the root.
    order: Vec<usize>,
}

impl SpanningTree {
    pub fn from_edges(net: &Network, edges: &[usize]) -> Result<SpanningTree> {
        let n = net.vertex_count();
        let mut ids = edges.to_vec();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != edges.len() {
            return Err(NetError::NotASpanningTree("repeated edge id".into()));
        }
        if ids.len() + 1 != n {
            return Err(NetError::NotASpanningTree(format!(
                "{} edges for {} vertices",
                ids.len(),
                n
            )));
        }
        let mut ds = DisjointSets::new(n);
        let mut adj = vec![Vec::new(); n];
        for &id in &ids {
            if id >= net.edge_count() {
                return Err(NetError::NotASpanningTree(format!("edge id {id} out of range")));
            }
            let e = net.edge(id);
            if !ds.union(e.u, e.v) {
                return Err(NetError::NotASpanningTree(format!("edge {id} closes a cycle")));
            }
            adj[e.u].push((e.v, id));
            adj[e.v].push((e.u, id));
        }
        // n − 1 edges without a cycle always span.
        let mut parent = vec![None; n];
        let mut parent_edge = vec![None; n];
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        seen[0] = true;
        order.push(0);
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &(w, id) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(v);
                    parent_edge[w] = Some(id);
                    order.push(w);
                }
            }
        }
        Ok(SpanningTree {
            edges: ids,
            parent,
            parent_edge,
            order,
        })
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.edges.binary_search(&edge).is_ok()
    }
}

/// Tree fluxes as a full per-edge vector (zero off the tree).
///
/// Removing a tree edge `(u, v)` splits the vertices in two; the flux from
/// `u` to `v` is the net source on `u`'s side.
pub fn tree_fluxes(net: &Network, tree: &SpanningTree) -> Vec<f64> {
    let mut subtree: Vec<f64> = net.sources().to_vec();
    for &v in tree.order.iter().rev() {
        if let Some(p) = tree.parent[v] {
            subtree[p] += subtree[v];
        }
    }
    let mut q = vec![0.0; net.edge_count()];
    for v in 0..net.vertex_count() {
        if let Some(id) = tree.parent_edge[v] {
            let e = net.edge(id);
            q[id] = if e.u == v { subtree[v] } else { -subtree[v] };
        }
    }
    q
}

/// `C = (Q²/ν)^{1/(γ+1)}` on the tree, zero elsewhere.
pub fn tree_conductivities(fluxes: &[f64], params: &ModelParams) -> Conductivities {
    let exp = 1.0 / (params.gamma + 1.0);
    let values = fluxes.iter().map(|q| (q * q / params.nu).powf(exp)).collect();
    Conductivities::new(values).expect("tree conductivities are finite and non-negative")
}

/// Closed-form energy of a tree configuration; needs no linear solve.
fn tree_energy(net: &Network, fluxes: &[f64], c: &Conductivities, params: &ModelParams) -> f64 {
    net.edges()
        .iter()
        .zip(fluxes)
        .zip(c.as_slice())
        .filter(|(_, &ce)| ce > 0.0)
        .map(|((e, q), &ce)| (q * q / ce + params.nu / params.gamma * ce.powf(params.gamma)) * e.length)
        .sum()
}

#[derive(Clone, Debug)]
pub struct TreeSolution {
    pub tree: SpanningTree,
    pub fluxes: Vec<f64>,
    pub conductivities: Conductivities,
    pub energy: f64,
    /// `∂E/∂C_e` at the tree configuration; `+∞` marks a right derivative
    /// at `C_e = 0` for `γ < 1`.
    pub stationarity: Vec<ExtReal>,
}

/// Builds the tree configuration and its stationarity certificate.
pub fn tree_local_minimizer(net: &Network, tree: &SpanningTree, params: &ModelParams) -> Result<TreeSolution> {
    params.validate()?;
    let fluxes = tree_fluxes(net, tree);
    let conductivities = tree_conductivities(&fluxes, params);
    let flow = solve_kirchhoff(net, &conductivities)?;
    if !flow.solvable {
        return Err(NetError::Unsolvable);
    }
    let energy = energy_from_flow(net, &conductivities, params, &flow).total().to_f64();
    let stationarity = gradient_from_pressures(net, &conductivities, params, &flow.pressures);
    Ok(TreeSolution {
        tree: tree.clone(),
        fluxes,
        conductivities,
        energy,
        stationarity,
    })
}

/// Number of spanning trees by the matrix-tree theorem (unweighted).
pub fn spanning_tree_count(net: &Network) -> f64 {
    let n = net.vertex_count();
    if n <= 1 {
        return 1.0;
    }
    let mut lap = DenseMatrix::zeros(n - 1);
    for e in net.edges() {
        for (a, b) in [(e.u, e.v), (e.v, e.u)] {
            if a > 0 {
                lap[(a - 1, a - 1)] += 1.0;
                if b > 0 {
                    lap[(a - 1, b - 1)] -= 1.0;
                }
            }
        }
    }
    determinant(&lap).round().max(0.0)
}

/// Exhaustive enumeration of spanning trees in lexicographic order of their
/// sorted edge-id lists.
///
/// Edges are decided in id order, preferring inclusion. An edge may be
/// skipped only if the remaining candidates can still span, so every branch
/// ends in a tree and no tree is produced twice.
pub struct SpanningTrees<'a> {
    net: &'a Network,
    decisions: Vec<bool>,
    started: bool,
    done: bool,
}

pub fn enumerate_spanning_trees(net: &Network, limit: u64) -> Result<SpanningTrees<'_>> {
    let estimated = spanning_tree_count(net);
    if estimated > limit as f64 {
        return Err(NetError::TooManyTrees { estimated, limit });
    }
    Ok(SpanningTrees {
        net,
        decisions: Vec::new(),
        started: false,
        done: false,
    })
}

impl SpanningTrees<'_> {
    fn chosen_count(&self) -> usize {
        self.decisions.iter().filter(|&&d| d).count()
    }

    fn closes_cycle(&self, edge: usize) -> bool {
        let mut ds = DisjointSets::new(self.net.vertex_count());
        for (id, _) in self.decisions.iter().enumerate().filter(|(_, &d)| d) {
            let e = self.net.edge(id);
            ds.union(e.u, e.v);
        }
        let e = self.net.edge(edge);
        ds.find(e.u) == ds.find(e.v)
    }

    /// Whether chosen edges plus every edge after `from` still span.
    fn can_span_without(&self, skip: usize) -> bool {
        let n = self.net.vertex_count();
        let mut ds = DisjointSets::new(n);
        let mut joined = 0;
        let candidates = (0..self.net.edge_count()).filter(|&id| {
            if id < skip {
                self.decisions[id]
            } else {
                id > skip
            }
        });
        for id in candidates {
            let e = self.net.edge(id);
            if ds.union(e.u, e.v) {
                joined += 1;
            }
        }
        joined + 1 == n
    }

    fn descend(&mut self) {
        let target = self.net.vertex_count() - 1;
        while self.chosen_count() < target {
            let id = self.decisions.len();
            let include = !self.closes_cycle(id);
            self.decisions.push(include);
        }
    }

    fn backtrack(&mut self) -> bool {
        while let Some(last) = self.decisions.pop() {
            let id = self.decisions.len();
            if last && self.can_span_without(id) {
                self.decisions.push(false);
                return true;
            }
        }
        false
    }

    fn current(&self) -> Vec<usize> {
        self.decisions
            .iter()
            .enumerate()
            .filter(|(_, &d)| d)
            .map(|(id, _)| id)
            .collect()
    }
}

impl Iterator for SpanningTrees<'_> {
    type Item = SpanningTree;

    fn next(&mut self) -> Option<SpanningTree> {
        if self.done {
            return None;
        }
        if self.started {
            if !self.backtrack() {
                self.done = true;
                return None;
            }
        } else {
            self.started = true;
        }
        self.descend();
        let tree = SpanningTree::from_edges(self.net, &self.current()).expect("enumeration yields spanning trees");
        Some(tree)
    }
}

#[derive(Clone, Debug)]
pub struct TreeSearch {
    pub best: TreeSolution,
    /// Position of `best` in enumeration order; earlier trees win ties.
    pub best_index: usize,
    pub examined: usize,
}

/// Minimum-energy tree configuration over all spanning trees.
pub fn global_tree_search(net: &Network, params: &ModelParams, limit: u64) -> Result<TreeSearch> {
    params.validate()?;
    let mut best: Option<(usize, SpanningTree, f64)> = None;
    let mut examined = 0;
    for (idx, tree) in enumerate_spanning_trees(net, limit)?.enumerate() {
        examined += 1;
        let q = tree_fluxes(net, &tree);
        let c = tree_conductivities(&q, params);
        let e = tree_energy(net, &q, &c, params);
        if best.as_ref().map_or(true, |(_, _, b)| e < *b) {
            best = Some((idx, tree, e));
        }
    }
    let (best_index, tree, _) = best.expect("a connected network has a spanning tree");
    Ok(TreeSearch {
        best: tree_local_minimizer(net, &tree, params)?,
        best_index,
        examined,
    })
}

/// All spanning trees with their energies, cheapest first (stable on ties).
pub fn rank_trees(net: &Network, params: &ModelParams, limit: u64) -> Result<Vec<(SpanningTree, f64)>> {
    params.validate()?;
    let mut ranked: Vec<(SpanningTree, f64)> = enumerate_spanning_trees(net, limit)?
        .map(|tree| {
            let q = tree_fluxes(net, &tree);
            let c = tree_conductivities(&q, params);
            let e = tree_energy(net, &q, &c, params);
            (tree, e)
        })
        .collect();
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(ranked)
}

/// True iff the edges active under `threshold` form a forest.
pub fn is_loop_free(net: &Network, c: &Conductivities, threshold: f64) -> bool {
    find_cycle(net, &active_edges(c, threshold)).is_none()
}

/// A cycle among `edges` as a closed walk: `(from, to, edge id)` steps.
fn find_cycle(net: &Network, edges: &[usize]) -> Option<Vec<(usize, usize, usize)>> {
    let n = net.vertex_count();
    let mut ds = DisjointSets::new(n);
    let mut forest: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for &id in edges {
        let e = net.edge(id);
        if ds.union(e.u, e.v) {
            forest[e.u].push((e.v, id));
            forest[e.v].push((e.u, id));
            continue;
        }
        // Path v → u in the forest, closed by the edge u → v.
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = std::collections::VecDeque::from([e.v]);
        seen[e.v] = true;
        while let Some(x) = queue.pop_front() {
            if x == e.u {
                break;
            }
            for &(y, eid) in &forest[x] {
                if !seen[y] {
                    seen[y] = true;
                    prev[y] = Some((x, eid));
                    queue.push_back(y);
                }
            }
        }
        let mut back = Vec::new();
        let mut x = e.u;
        while let Some((p, eid)) = prev[x] {
            back.push((p, x, eid));
            x = p;
        }
        back.reverse();
        let mut walk = vec![(e.u, e.v, id)];
        walk.extend(back);
        return Some(walk);
    }
    None
}

/// Shifts a circular flow of size `ε` around the first active cycle of a
/// `γ = 1` stationary configuration.
///
/// On the cycle every edge must satisfy `(P_u − P_v)² = ν L²` (to 1e−6
/// relative); then `C_e = |Q_e|/√ν` there and the returned
/// `C′_e = C_e + (ε/√ν)·sign(P_a − P_b)`, `(a, b)` being the traversal
/// direction, has the same energy.
pub fn loop_perturbation(
    net: &Network,
    c: &Conductivities,
    params: &ModelParams,
    epsilon: f64,
) -> Result<Conductivities> {
    params.validate()?;
    if params.gamma != 1.0 {
        return Err(NetError::InvalidParameter("loop perturbation needs gamma = 1".into()));
    }
    if !epsilon.is_finite() {
        return Err(NetError::InvalidParameter(format!("epsilon = {epsilon}")));
    }
    let cycle = find_cycle(net, &active_edges(c, DEFAULT_ACTIVE_THRESHOLD)).ok_or(NetError::NoCycle)?;
    let flow = solve_kirchhoff(net, c)?;
    if !flow.solvable {
        return Err(NetError::Unsolvable);
    }
    let p = &flow.pressures;
    let shift = epsilon / params.nu.sqrt();
    let mut out = c.as_slice().to_vec();
    for &(a, b, id) in &cycle {
        let l = net.edge(id).length;
        let target = params.nu * l * l;
        let dp = p[a] - p[b];
        let error = (dp * dp - target).abs() / target;
        if error > 1e-6 {
            return Err(NetError::NotStationary { edge: id, error });
        }
        out[id] += shift * dp.signum();
        if out[id] < 0.0 {
            return Err(NetError::LeavesAdmissibleSet { edge: id });
        }
    }
    Conductivities::new(out)
}
