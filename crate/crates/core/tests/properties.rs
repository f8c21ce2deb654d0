use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use netforge::energy::{energy, kinetic_energy, kinetic_quadratic_form};
use netforge::generate::{random_conductivities, random_network, triangle, Lengths};
use netforge::graph::{active_edges, min_edge_length, Conductivities, ModelParams, Network};
use netforge::io::{generate_leaf, network_from_json, network_to_json, render_svg, SvgOptions};
use netforge::kirchhoff::{fluxes_from_pressures, solve_kirchhoff, vertex_outflow};
use netforge::linalg::determinant;
use netforge::optimizer::{optimize, OptimConfig};
use netforge::oracles::toy1_optimum;
use netforge::spectral::{fiedler, fiedler_subgradient, laplacian, spectral_decompose};
use netforge::trees::{enumerate_spanning_trees, spanning_tree_count, tree_fluxes, tree_local_minimizer, SpanningTree};

/// Connected network with 2..=max_n vertices and uniform `[0.5, 2)` lengths.
fn instance(seed: u64, max_n: usize) -> (Network, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=max_n);
    let extra = rng.gen_range(0.0..0.8);
    let net = random_network(&mut rng, n, extra, Lengths::Uniform(0.5, 2.0)).unwrap();
    (net, rng)
}

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>()) {
        let (net, _) = instance(seed, 12);
        prop_assert_eq!(network_from_json(&network_to_json(&net)).unwrap(), net);
    }

    #[test]
    fn active_edges_shrink_with_threshold(seed in any::<u64>(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (net, mut rng) = instance(seed, 12);
        let c = random_conductivities(&mut rng, net.edge_count(), 0.0, 1.0);
        let (lo, hi) = (a.min(b), a.max(b));
        let small = active_edges(&c, hi);
        let large = active_edges(&c, lo);
        prop_assert!(small.iter().all(|e| large.contains(e)));
    }

    #[test]
    fn shortest_length_is_a_lower_bound(seed in any::<u64>()) {
        let (net, _) = instance(seed, 12);
        let l = min_edge_length(&net);
        prop_assert!(net.edges().iter().all(|e| l <= e.length));
    }

    #[test]
    fn fluxes_conserve_mass(seed in any::<u64>()) {
        let (net, mut rng) = instance(seed, 12);
        let c = random_conductivities(&mut rng, net.edge_count(), 0.01, 2.0);
        let flow = solve_kirchhoff(&net, &c).unwrap();
        prop_assert!(flow.solvable);
        let out = vertex_outflow(&net, &flow.fluxes);
        let err = out.iter().zip(net.sources()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        prop_assert!(err <= 1e-9 * net.sources_inf_norm(), "{err}");
    }

    #[test]
    fn pressure_shift_leaves_fluxes(seed in any::<u64>(), shift in -10.0f64..10.0) {
        let (net, mut rng) = instance(seed, 12);
        let c = random_conductivities(&mut rng, net.edge_count(), 0.01, 2.0);
        let flow = solve_kirchhoff(&net, &c).unwrap();
        let shifted: Vec<f64> = flow.pressures.iter().map(|p| p + shift).collect();
        let q = fluxes_from_pressures(&net, &c, &shifted);
        for (a, b) in q.iter().zip(&flow.fluxes) {
            prop_assert!((a - b).abs() <= 1e-12 * (1.0 + shift.abs()) * 10.0);
        }
    }

    #[test]
    fn solvable_set_is_convex(seed in any::<u64>(), alpha in 0.01f64..0.99) {
        let (net, mut rng) = instance(seed, 8);
        // Sparse supports so that some draws are unsolvable.
        let sparse = |rng: &mut ChaCha8Rng| {
            let v = (0..net.edge_count()).map(|_| if rng.gen_bool(0.6) { rng.gen_range(0.1..1.0) } else { 0.0 }).collect();
            Conductivities::new(v).unwrap()
        };
        let (c1, c2) = (sparse(&mut rng), sparse(&mut rng));
        let s1 = solve_kirchhoff(&net, &c1).unwrap().solvable;
        let s2 = solve_kirchhoff(&net, &c2).unwrap().solvable;
        if s1 && s2 {
            prop_assert!(solve_kirchhoff(&net, &c1.lerp(&c2, alpha)).unwrap().solvable);
        }
    }

    #[test]
    fn kinetic_energy_forms_agree(seed in any::<u64>()) {
        let (net, mut rng) = instance(seed, 12);
        let c = random_conductivities(&mut rng, net.edge_count(), 0.01, 2.0);
        let flow = solve_kirchhoff(&net, &c).unwrap();
        let a = kinetic_energy(&net, &c, &flow).to_f64();
        let b = kinetic_quadratic_form(&net, &c, &flow).unwrap().to_f64();
        prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300), "{a} {b}");
    }

    #[test]
    fn energy_scales_with_lengths(seed in any::<u64>(), lambda in 0.1f64..10.0, gamma in 0.3f64..1.5) {
        let (net, mut rng) = instance(seed, 10);
        let c = random_conductivities(&mut rng, net.edge_count(), 0.05, 2.0);
        let params = ModelParams::new(gamma, 1.3, 0.0).unwrap();
        let e = energy(&net, &c, &params).unwrap().total().to_f64();
        let scaled = energy(&net.with_scaled_lengths(lambda).unwrap(), &c, &params).unwrap().total().to_f64();
        prop_assert!((scaled - lambda * e).abs() <= 1e-10 * lambda * e, "{scaled} {e}");
    }

    #[test]
    fn raising_one_conductivity_lowers_kinetic_energy(seed in any::<u64>(), bump in 1e-3f64..1.0) {
        let (net, mut rng) = instance(seed, 10);
        let c = random_conductivities(&mut rng, net.edge_count(), 0.05, 2.0);
        let e = rng.gen_range(0..net.edge_count());
        let mut v = c.as_slice().to_vec();
        v[e] += bump;
        let kin = |c: &Conductivities| kinetic_energy(&net, c, &solve_kirchhoff(&net, c).unwrap()).to_f64();
        let (before, after) = (kin(&c), kin(&Conductivities::new(v).unwrap()));
        prop_assert!(after <= before * (1.0 + 1e-12), "{after} > {before}");
    }

    #[test]
    fn eigenpairs_have_small_residuals(seed in any::<u64>()) {
        let (net, mut rng) = instance(seed, 12);
        let c = random_conductivities(&mut rng, net.edge_count(), 0.0, 3.0);
        let lap = laplacian(&net, &c, false).unwrap();
        let spec = spectral_decompose(&lap).unwrap();
        let scale = lap.inf_norm().max(1.0);
        for (lambda, v) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
            let lv = lap.mul_vec(v);
            let r = lv.iter().zip(v).fold(0.0f64, |m, (a, b)| m.max((a - lambda * b).abs()));
            prop_assert!(r <= 1e-9 * scale, "{r}");
        }
    }

    #[test]
    fn fiedler_is_homogeneous(seed in any::<u64>(), lambda in 0.0f64..20.0) {
        let (net, mut rng) = instance(seed, 12);
        let c = random_conductivities(&mut rng, net.edge_count(), 0.0, 3.0);
        let f = fiedler(&net, &c).unwrap();
        let g = fiedler(&net, &c.scaled(lambda)).unwrap();
        prop_assert!((g - lambda * f).abs() <= 1e-10 * (1.0 + lambda * f.abs()), "{g} {f}");
    }

    #[test]
    fn subgradient_is_a_supergradient(seed in any::<u64>()) {
        let (net, mut rng) = instance(seed, 10);
        let c = random_conductivities(&mut rng, net.edge_count(), 0.1, 2.0);
        let g = fiedler_subgradient(&net, &c).unwrap();
        let d: Vec<f64> = (0..net.edge_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let slope: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        let f0 = fiedler(&net, &c).unwrap();
        for t in [1e-4, 1e-5] {
            let moved: Vec<f64> = c.as_slice().iter().zip(&d).map(|(x, y)| x + t * y).collect();
            let f1 = fiedler(&net, &Conductivities::new(moved).unwrap()).unwrap();
            // Concavity: the linearization lies above the function.
            prop_assert!(f1 <= f0 + t * slope + 1e-10, "t={t}: {f1} > {}", f0 + t * slope);
        }
    }

    #[test]
    fn tree_fluxes_balance_every_vertex(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let (net, _) = instance(seed, 7);
        let trees: Vec<SpanningTree> = enumerate_spanning_trees(&net, 1_000_000).unwrap().collect();
        let tree = &trees[pick.index(trees.len())];
        let q = tree_fluxes(&net, tree);
        let out = vertex_outflow(&net, &q);
        for (a, b) in out.iter().zip(net.sources()) {
            prop_assert!((a - b).abs() <= 1e-12, "{a} {b}");
        }
        prop_assert!(q.iter().enumerate().all(|(e, &x)| tree.contains(e) || x == 0.0));
    }

    #[test]
    fn enumeration_matches_matrix_tree_count(seed in any::<u64>()) {
        let (net, _) = instance(seed, 8);
        let listed = enumerate_spanning_trees(&net, 10_000_000).unwrap().count();
        prop_assert_eq!(listed as f64, spanning_tree_count(&net).round());
    }

    #[test]
    fn svg_is_deterministic(seed in any::<u64>()) {
        let (net, mut rng) = instance(seed, 10);
        let c = random_conductivities(&mut rng, net.edge_count(), 0.0, 1.0);
        let opts = SvgOptions::default();
        prop_assert_eq!(render_svg(&net, &c, &opts), render_svg(&net, &c, &opts));
    }
}

proptest! {
    #![proptest_config(cfg(16))]

    #[test]
    fn optimizer_runs_are_feasible_monotone_and_reproducible(seed in any::<u64>(), mu in 0.0f64..1.0) {
        let (net, _) = instance(seed, 7);
        let params = ModelParams::new(1.0, 1.0, mu).unwrap();
        let config = OptimConfig { iters: 3000, trace_stride: 100, seed, ..OptimConfig::default() };
        let run = optimize(&net, &params, &config).unwrap();
        prop_assert!(run.best_c.as_slice().iter().all(|&x| x >= 0.0));
        let again = optimize(&net, &params, &config).unwrap();
        prop_assert_eq!(&run.trace, &again.trace);
        prop_assert_eq!(run.best_c.as_slice(), again.best_c.as_slice());

        // The running best over the trace never increases and ends at best_f.
        let mut best = f64::INFINITY;
        for r in &run.trace {
            best = best.min(r.f);
            // F ≥ E_kin ≥ 0 for μ ≤ ν.
            prop_assert!(r.f >= r.e_kin - 1e-9 * r.e_kin.abs() && r.e_kin >= 0.0);
        }
        prop_assert_eq!(best, run.best_f);
    }

    #[test]
    fn leaf_meshes_are_valid(nodes in 4usize..80, seed in any::<u64>()) {
        let leaf = generate_leaf(nodes, seed).unwrap();
        let net = &leaf.network;
        prop_assert_eq!(net.vertex_count(), nodes);
        prop_assert_eq!(net.sources()[0], 1.0);
        let sink = -1.0 / (nodes - 1) as f64;
        prop_assert!(net.sources()[1..].iter().all(|&s| s == sink));
        prop_assert_eq!(leaf.spec.to_network().unwrap(), net.clone());
    }
}

#[test]
fn scaling_lengths_keeps_the_toy_minimizer() {
    // With all lengths scaled the tree construction returns the same
    // conductivities as the closed form, and the energy scales linearly.
    let net = triangle([1.0, -1.0, 0.0]).unwrap();
    let params = ModelParams::new(1.0, 1.0, 0.0).unwrap();
    let oracle = toy1_optimum(1.0, 0.0).unwrap();
    let tree = SpanningTree::from_edges(&net, &[0, 1]).unwrap();
    for lambda in [0.25, 1.0, 3.0] {
        let scaled = net.with_scaled_lengths(lambda).unwrap();
        let sol = tree_local_minimizer(&scaled, &tree, &params).unwrap();
        assert!((sol.conductivities.get(0) - oracle.conductivities[0]).abs() < 1e-12);
        assert_eq!(sol.conductivities.get(1), 0.0);
        assert!((sol.energy - lambda * oracle.e_value).abs() < 1e-12);
    }
}

#[test]
fn determinant_counts_spanning_trees_of_k4() {
    let net = netforge::generate::complete_network(4, vec![1.0, -1.0, 0.0, 0.0]).unwrap();
    assert_eq!(spanning_tree_count(&net).round(), 16.0);
    let lap = laplacian(&net, &Conductivities::constant(6, 1.0).unwrap(), false).unwrap();
    let minor = netforge::linalg::DenseMatrix::from_rows(&(1..4).map(|i| (1..4).map(|j| lap[(i, j)]).collect()).collect::<Vec<_>>()).unwrap();
    assert!((determinant(&minor) - 16.0).abs() < 1e-12);
}

#[test]
fn default_step_reaches_the_toy2_optimum_value() {
    let net = triangle([1.0, -1.0 / 3.0, -2.0 / 3.0]).unwrap();
    let params = ModelParams::new(1.0, 1.0, 0.75).unwrap();
    let config = OptimConfig { tau0: 0.1, iters: 100_000, seed: 2, ..OptimConfig::default() };
    let run = optimize(&net, &params, &config).unwrap();
    let oracle = netforge::oracles::toy2_optimum(1.0, 0.75).unwrap();
    assert!((run.best_f - oracle.f_value).abs() <= 1e-3, "{} vs {}", run.best_f, oracle.f_value);
}
