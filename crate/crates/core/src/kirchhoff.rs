//! Kirchhoff law on the length-weighted Laplacian.
//!
//! The support graph of `C` (edges with `C_e > 0`) may split into several
//! components. The system is solvable iff the sources balance on each of
//! them; pressures are then fixed by requiring a zero sum per component.
//! Each component's Laplacian is deflated by a rank-one term along the
//! constant vector, giving an SPD system solved by Cholesky.

use crate::error::{NetError, Result};
use crate::graph::{support_components, Conductivities, Network};
use crate::linalg::{cholesky_solve, DenseMatrix};

/// Per-component balance tolerance, relative to `‖S‖∞`.
pub const BALANCE_TOL: f64 = 1e-10;
/// Post-solve residual tolerance `‖𝓛P − S‖∞ / ‖S‖∞`.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct FlowSolution {
    /// Pressures with zero sum on each component. Empty when unsolvable.
    pub pressures: Vec<f64>,
    /// Flux along each canonical edge `(u, v)`, positive from `u` to `v`.
    /// Empty when unsolvable.
    pub fluxes: Vec<f64>,
    /// Components of the support graph, ordered by smallest vertex.
    pub components: Vec<Vec<usize>>,
    pub solvable: bool,
}

impl FlowSolution {
    /// Pressures are unique up to one global constant only when the support
    /// is connected.
    pub fn pressure_unique(&self) -> bool {
        self.components.len() == 1
    }
}

/// Length-weighted Laplacian `𝓛[C̃]`, `C̃_e = C_e / L_e`, together with the
/// right-hand side `S`.
pub fn weighted_laplacian_rhs(net: &Network, c: &Conductivities) -> Result<(DenseMatrix, Vec<f64>)> {
    net.check_conductivities(c)?;
    let mut lap = DenseMatrix::zeros(net.vertex_count());
    for (id, e) in net.edges().iter().enumerate() {
        let w = c.get(id) / e.length;
        lap[(e.u, e.u)] += w;
        lap[(e.v, e.v)] += w;
        lap[(e.u, e.v)] -= w;
        lap[(e.v, e.u)] -= w;
    }
    Ok((lap, net.sources().to_vec()))
}

/// Solves the Kirchhoff law for `C`.
///
/// Returns `solvable = false` (not an error) when some support component
/// carries a net source. Fails with [`NetError::IllConditioned`] when the
/// factorization breaks down or the residual check fails.
pub fn solve_kirchhoff(net: &Network, c: &Conductivities) -> Result<FlowSolution> {
    net.check_conductivities(c)?;
    let n = net.vertex_count();
    let sources = net.sources();
    let s_inf = net.sources_inf_norm();
    let components = support_components(net, c);

    let balanced = components.iter().all(|comp| {
        let sum: f64 = comp.iter().map(|&i| sources[i]).sum();
        sum.abs() <= BALANCE_TOL * s_inf
    });
    if !balanced {
        return Ok(FlowSolution {
            pressures: Vec::new(),
            fluxes: Vec::new(),
            components,
            solvable: false,
        });
    }

    let mut local = vec![usize::MAX; n];
    let mut pressures = vec![0.0; n];
    for comp in &components {
        let k = comp.len();
        if k == 1 {
            continue;
        }
        for (idx, &v) in comp.iter().enumerate() {
            local[v] = idx;
        }
        let mut lap = DenseMatrix::zeros(k);
        for &v in comp {
            for &(w, id) in net.neighbors(v) {
                let cw = c.get(id);
                if cw > 0.0 && v < w {
                    let g = cw / net.edge(id).length;
                    let (a, b) = (local[v], local[w]);
                    lap[(a, a)] += g;
                    lap[(b, b)] += g;
                    lap[(a, b)] -= g;
                    lap[(b, a)] -= g;
                }
            }
        }
        let mean_diag = (0..k).map(|i| lap[(i, i)]).sum::<f64>() / k as f64;
        let shift = mean_diag / k as f64;
        for i in 0..k {
            for j in 0..k {
                lap[(i, j)] += shift;
            }
        }
        let rhs: Vec<f64> = comp.iter().map(|&v| sources[v]).collect();
        let x = cholesky_solve(&lap, &rhs).ok_or(NetError::IllConditioned {
            residual: f64::INFINITY,
        })?;
        let mean = x.iter().sum::<f64>() / k as f64;
        for (&v, xi) in comp.iter().zip(&x) {
            pressures[v] = xi - mean;
        }
    }

    let (full, _) = weighted_laplacian_rhs(net, c)?;
    let lp = full.mul_vec(&pressures);
    let residual = lp
        .iter()
        .zip(sources)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let rel = if s_inf > 0.0 { residual / s_inf } else { residual };
    if !(rel <= RESIDUAL_TOL) {
        return Err(NetError::IllConditioned { residual: rel });
    }

    let fluxes = fluxes_from_pressures(net, c, &pressures);
    Ok(FlowSolution {
        pressures,
        fluxes,
        components,
        solvable: true,
    })
}

/// `Q_e = C_e (P_u − P_v) / L_e` for each canonical edge.
pub fn fluxes_from_pressures(net: &Network, c: &Conductivities, pressures: &[f64]) -> Vec<f64> {
    net.edges()
        .iter()
        .enumerate()
        .map(|(id, e)| c.get(id) * (pressures[e.u] - pressures[e.v]) / e.length)
        .collect()
}

/// Net flux out of each vertex, `Σ_j Q_ij`.
pub fn vertex_outflow(net: &Network, fluxes: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; net.vertex_count()];
    for (e, q) in net.edges().iter().zip(fluxes) {
        out[e.u] += q;
        out[e.v] -= q;
    }
    out
}

/// Empirical Lipschitz constant of `C ↦ Q` at `C`: the largest
/// `‖Q(C ± δ e_k) − Q(C)‖∞ / δ` over all edges `k`. Minus-perturbations that
/// would leave the admissible set are skipped.
pub fn kirchhoff_continuity_probe(net: &Network, c: &Conductivities, delta: f64) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(NetError::InvalidParameter(format!(
            "probe step must be positive, got {delta}"
        )));
    }
    let base = solve_kirchhoff(net, c)?;
    if !base.solvable {
        return Err(NetError::Unsolvable);
    }
    if !base.pressure_unique() {
        return Err(NetError::DisconnectedSupport);
    }
    let mut worst = 0.0f64;
    for k in 0..c.len() {
        for sign in [1.0, -1.0] {
            let mut vals = c.as_slice().to_vec();
            vals[k] += sign * delta;
            if vals[k] < 0.0 {
                continue;
            }
            let sol = solve_kirchhoff(net, &Conductivities::new(vals)?)?;
            if !sol.solvable {
                return Err(NetError::Unsolvable);
            }
            let diff = sol
                .fluxes
                .iter()
                .zip(&base.fluxes)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            worst = worst.max(diff / delta);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(sources: Vec<f64>) -> Network {
        Network::new(3, vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)], sources, None).unwrap()
    }

    fn k4_example() -> Network {
        let mut edges = Vec::new();
        for u in 0..4 {
            for v in (u + 1)..4 {
                edges.push((u, v, 1.0));
            }
        }
        Network::new(4, edges, vec![1.0, -1.0, 1.0, -1.0], None).unwrap()
    }

    fn k4_conductivities(net: &Network, extra: &[((usize, usize), f64)]) -> Conductivities {
        let mut c = vec![0.0; net.edge_count()];
        c[net.edge_id(0, 1).unwrap()] = 1.0;
        c[net.edge_id(2, 3).unwrap()] = 1.0;
        for &((a, b), w) in extra {
            c[net.edge_id(a, b).unwrap()] = w;
        }
        Conductivities::new(c).unwrap()
    }

    #[test]
    fn two_vertex_laplacian() {
        let net = Network::new(2, vec![(0, 1, 0.5)], vec![1.0, -1.0], None).unwrap();
        let (lap, rhs) = weighted_laplacian_rhs(&net, &Conductivities::new(vec![3.0]).unwrap()).unwrap();
        assert_eq!(lap.row(0), &[6.0, -6.0]);
        assert_eq!(lap.row(1), &[-6.0, 6.0]);
        assert_eq!(rhs, vec![1.0, -1.0]);
    }

    #[test]
    fn triangle_laplacian_diagonal() {
        let net = triangle(vec![1.0, -1.0, 0.0]);
        let (c0, c1) = (0.7, 0.2);
        let (lap, _) = weighted_laplacian_rhs(&net, &Conductivities::new(vec![c0, c1, c1]).unwrap()).unwrap();
        assert!((lap[(0, 0)] - (c0 + c1)).abs() < 1e-15);
        assert!((lap[(1, 1)] - (c0 + c1)).abs() < 1e-15);
        assert!((lap[(2, 2)] - 2.0 * c1).abs() < 1e-15);
        let (zero, _) = weighted_laplacian_rhs(&net, &Conductivities::zeros(3)).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn triangle_toy1_flux() {
        let net = triangle(vec![1.0, -1.0, 0.0]);
        for &(c0, c1) in &[(1.0, 1.0), (0.3, 2.0), (5.0, 0.01)] {
            let sol = solve_kirchhoff(&net, &Conductivities::new(vec![c0, c1, c1]).unwrap()).unwrap();
            assert!(sol.solvable);
            let expect = 2.0 * c0 / (2.0 * c0 + c1);
            assert!((sol.fluxes[0] - expect).abs() < 1e-13);
            assert!((sol.fluxes[1] - (1.0 - expect)).abs() < 1e-13);
        }
    }

    #[test]
    fn triangle_toy2_flux() {
        let net = triangle(vec![1.0, -1.0 / 3.0, -2.0 / 3.0]);
        for &(a, b, c) in &[(1.0, 1.0, 1.0), (0.2, 0.9, 0.4), (3.0, 0.1, 0.05)] {
            let sol = solve_kirchhoff(&net, &Conductivities::new(vec![a, b, c]).unwrap()).unwrap();
            let q = a * (b + 3.0 * c) / (3.0 * (a * b + a * c + b * c));
            assert!((sol.fluxes[0] - q).abs() < 1e-13);
            assert!((sol.fluxes[1] - (1.0 - q)).abs() < 1e-13);
            assert!((sol.fluxes[2] - (q - 1.0 / 3.0)).abs() < 1e-13);
        }
    }

    #[test]
    fn disconnected_support_example() {
        let net = k4_example();
        let sol = solve_kirchhoff(&net, &k4_conductivities(&net, &[])).unwrap();
        assert!(sol.solvable);
        assert!(!sol.pressure_unique());
        assert_eq!(sol.components, vec![vec![0, 1], vec![2, 3]]);
        for (p, e) in sol.pressures.iter().zip([0.5, -0.5, 0.5, -0.5]) {
            assert!((p - e).abs() < 1e-14);
        }

        let swapped = net.with_sources(vec![1.0, 1.0, -1.0, -1.0]).unwrap();
        let sol = solve_kirchhoff(&swapped, &k4_conductivities(&swapped, &[])).unwrap();
        assert!(!sol.solvable);
        assert!(sol.pressures.is_empty());
    }

    #[test]
    fn discontinuous_pressure_branches() {
        let net = k4_example();
        for t in [1e-3, 0.5, 7.0] {
            let sol = solve_kirchhoff(&net, &k4_conductivities(&net, &[((1, 2), t)])).unwrap();
            assert!(sol.pressure_unique());
            for (p, e) in sol.pressures.iter().zip([1.0, 0.0, 0.0, -1.0]) {
                assert!((p - e).abs() < 1e-12, "t={t}: {:?}", sol.pressures);
            }
            let sol = solve_kirchhoff(&net, &k4_conductivities(&net, &[((0, 3), t)])).unwrap();
            for (p, e) in sol.pressures.iter().zip([0.0, -1.0, 1.0, 0.0]) {
                assert!((p - e).abs() < 1e-12, "t=-{t}: {:?}", sol.pressures);
            }
        }
    }

    #[test]
    fn continuity_probe() {
        let net = triangle(vec![1.0, -1.0, 0.0]);
        let c = Conductivities::new(vec![1.0, 1.0, 1.0]).unwrap();
        let a = kirchhoff_continuity_probe(&net, &c, 1e-6).unwrap();
        let b = kirchhoff_continuity_probe(&net, &c, 1e-7).unwrap();
        assert!(a.is_finite() && a > 0.0);
        assert!((a - b).abs() <= 0.1 * b);

        let c = Conductivities::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(kirchhoff_continuity_probe(&net, &c, 1e-6), Err(NetError::DisconnectedSupport));
        assert!(matches!(
            kirchhoff_continuity_probe(&net, &Conductivities::new(vec![1.0; 3]).unwrap(), 0.0),
            Err(NetError::InvalidParameter(_))
        ));
    }

    #[test]
    fn isolated_zero_source_vertex_is_solvable() {
        let net = triangle(vec![1.0, -1.0, 0.0]);
        let sol = solve_kirchhoff(&net, &Conductivities::new(vec![2.0, 0.0, 0.0]).unwrap()).unwrap();
        assert!(sol.solvable);
        assert_eq!(sol.pressures[2], 0.0);
        assert!((sol.fluxes[0] - 1.0).abs() < 1e-15);
    }
}
