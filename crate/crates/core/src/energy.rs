//! Energy `E[C] = Σ (Q²/C + (ν/γ) C^γ) L` and its derivatives.

use crate::error::{NetError, Result};
use crate::graph::{support_is_connected, Conductivities, ModelParams, Network};
use crate::kirchhoff::{solve_kirchhoff, weighted_laplacian_rhs, FlowSolution};
use crate::spectral::{laplacian, spectral_decompose, ProbeReport};
use crate::value::ExtReal;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyBreakdown {
    pub kinetic: ExtReal,
    pub metabolic: f64,
}

impl EnergyBreakdown {
    pub fn total(&self) -> ExtReal {
        self.kinetic.add(ExtReal::Finite(self.metabolic))
    }
}

/// `(ν/γ) Σ C_e^γ L_e`.
pub fn metabolic_energy(net: &Network, c: &Conductivities, params: &ModelParams) -> f64 {
    let coef = params.nu / params.gamma;
    net.edges()
        .iter()
        .zip(c.as_slice())
        .map(|(e, &ce)| if ce > 0.0 { ce.powf(params.gamma) * e.length } else { 0.0 })
        .sum::<f64>()
        * coef
}

/// `Σ Q_e² L_e / C_e` over edges with `C_e > 0`; zero-conductivity edges
/// carry no flux and contribute nothing.
pub fn kinetic_energy(net: &Network, c: &Conductivities, flow: &FlowSolution) -> ExtReal {
    if !flow.solvable {
        return ExtReal::PosInfinity;
    }
    let k = net
        .edges()
        .iter()
        .zip(c.as_slice())
        .zip(&flow.fluxes)
        .filter(|((_, &ce), _)| ce > 0.0)
        .map(|((e, &ce), q)| q * q * e.length / ce)
        .sum();
    ExtReal::Finite(k)
}

/// `Pᵀ 𝓛[C̃] P`, the quadratic-form expression of the kinetic energy.
pub fn kinetic_quadratic_form(net: &Network, c: &Conductivities, flow: &FlowSolution) -> Result<ExtReal> {
    if !flow.solvable {
        return Ok(ExtReal::PosInfinity);
    }
    let (lap, _) = weighted_laplacian_rhs(net, c)?;
    let lp = lap.mul_vec(&flow.pressures);
    Ok(ExtReal::Finite(lp.iter().zip(&flow.pressures).map(|(a, b)| a * b).sum()))
}

pub fn energy_from_flow(
    net: &Network,
    c: &Conductivities,
    params: &ModelParams,
    flow: &FlowSolution,
) -> EnergyBreakdown {
    EnergyBreakdown {
        kinetic: kinetic_energy(net, c, flow),
        metabolic: metabolic_energy(net, c, params),
    }
}

pub fn energy(net: &Network, c: &Conductivities, params: &ModelParams) -> Result<EnergyBreakdown> {
    params.validate()?;
    let flow = solve_kirchhoff(net, c)?;
    Ok(energy_from_flow(net, c, params, &flow))
}

/// `∂E/∂C_e = −(P_u − P_v)²/L_e + ν C_e^{γ−1} L_e`.
///
/// Requires a connected support. For `γ < 1` the right derivative at
/// `C_e = 0` is `+∞`.
pub fn energy_gradient(net: &Network, c: &Conductivities, params: &ModelParams) -> Result<Vec<ExtReal>> {
    params.validate()?;
    net.check_conductivities(c)?;
    if !support_is_connected(net, c) {
        return Err(NetError::DisconnectedSupport);
    }
    let flow = solve_kirchhoff(net, c)?;
    Ok(gradient_from_pressures(net, c, params, &flow.pressures))
}

pub(crate) fn gradient_from_pressures(
    net: &Network,
    c: &Conductivities,
    params: &ModelParams,
    pressures: &[f64],
) -> Vec<ExtReal> {
    net.edges()
        .iter()
        .zip(c.as_slice())
        .map(|(e, &ce)| {
            let dp = pressures[e.u] - pressures[e.v];
            let kinetic = -dp * dp / e.length;
            let metabolic = if ce > 0.0 {
                params.nu * ce.powf(params.gamma - 1.0) * e.length
            } else if params.gamma < 1.0 {
                return ExtReal::PosInfinity;
            } else if params.gamma == 1.0 {
                params.nu * e.length
            } else {
                0.0
            };
            ExtReal::Finite(kinetic + metabolic)
        })
        .collect()
}

/// Checks `E(αC¹ + (1−α)C²) ≤ α E(C¹) + (1−α) E(C²) + 1e−9` at
/// `α = i/(samples+1)`. Convexity is only guaranteed for `γ ≥ 1`; for
/// smaller exponents the report may fail.
pub fn convexity_probe(
    net: &Network,
    c1: &Conductivities,
    c2: &Conductivities,
    params: &ModelParams,
    samples: usize,
) -> Result<ProbeReport> {
    let e1 = energy(net, c1, params)?.total();
    let e2 = energy(net, c2, params)?.total();
    let (e1, e2) = match (e1, e2) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => (a, b),
        _ => {
            return Ok(ProbeReport {
                pass: true,
                worst_violation: f64::NEG_INFINITY,
            })
        }
    };
    let mut worst = if samples == 0 { 0.0 } else { f64::NEG_INFINITY };
    for i in 1..=samples {
        let alpha = i as f64 / (samples + 1) as f64;
        let em = energy(net, &c1.lerp(c2, alpha), params)?.total();
        let gap = em.to_f64() - (alpha * e1 + (1.0 - alpha) * e2);
        worst = worst.max(gap);
    }
    Ok(ProbeReport {
        pass: worst <= 1e-9,
        worst_violation: worst,
    })
}

/// Both sides of `E_kin ≤ ‖S‖² / f[C̃]`. The bound is `+∞` when the support
/// is disconnected (`f[C̃] = 0`).
pub fn kinetic_bound_check(net: &Network, c: &Conductivities) -> Result<(ExtReal, ExtReal)> {
    net.check_conductivities(c)?;
    let flow = solve_kirchhoff(net, c)?;
    let ekin = kinetic_energy(net, c, &flow);
    if !support_is_connected(net, c) {
        return Ok((ekin, ExtReal::PosInfinity));
    }
    let f = spectral_decompose(&laplacian(net, c, true)?)?.fiedler;
    let s2 = net.sources_l2_norm().powi(2);
    let bound = if f > 0.0 { ExtReal::Finite(s2 / f) } else { ExtReal::PosInfinity };
    Ok((ekin, bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle(s: Vec<f64>) -> Network {
        Network::new(3, vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)], s, None).unwrap()
    }

    #[test]
    fn toy1_closed_form() {
        let net = triangle(vec![1.0, -1.0, 0.0]);
        for &nu in &[1.0, 2.5] {
            let p = ModelParams::new(1.0, nu, 0.0).unwrap();
            for &(c0, c1) in &[(1.0, 1.0), (0.4, 0.05), (2.0, 3.0)] {
                let e = energy(&net, &Conductivities::new(vec![c0, c1, c1]).unwrap(), &p).unwrap();
                let expect = 2.0 / (2.0 * c0 + c1) + nu * (c0 + 2.0 * c1);
                assert!((e.total().to_f64() - expect).abs() < 1e-12);
            }
            let tree = Conductivities::new(vec![1.0 / nu.sqrt(), 0.0, 0.0]).unwrap();
            let e = energy(&net, &tree, &p).unwrap().total().to_f64();
            assert!((e - 2.0 * nu.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn single_edge() {
        let net = Network::new(2, vec![(0, 1, 1.0)], vec![1.0, -1.0], None).unwrap();
        let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        for c in [0.5, 1.0, 3.0] {
            let cc = Conductivities::new(vec![c]).unwrap();
            let e = energy(&net, &cc, &p).unwrap().total().to_f64();
            assert!((e - (1.0 / c + c)).abs() < 1e-13);
            let g = energy_gradient(&net, &cc, &p).unwrap()[0].to_f64();
            assert!((g - (1.0 - 1.0 / (c * c))).abs() < 1e-12);
        }
        let g = energy_gradient(&net, &Conductivities::new(vec![1.0]).unwrap(), &p).unwrap();
        assert!(g[0].to_f64().abs() < 1e-14);
    }

    #[test]
    fn unsolvable_is_infinite() {
        let net = triangle(vec![1.0, -1.0, 0.0]);
        let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        let e = energy(&net, &Conductivities::new(vec![0.0, 1.0, 0.0]).unwrap(), &p).unwrap();
        assert_eq!(e.total(), ExtReal::PosInfinity);
    }

    #[test]
    fn gradient_zero_on_tree_edge_of_toy1_minimizer() {
        let net = triangle(vec![1.0, -1.0, 0.0]);
        let nu: f64 = 2.0;
        let p = ModelParams::new(1.0, nu, 0.0).unwrap();
        let c = Conductivities::new(vec![1.0 / nu.sqrt(), 0.0, 0.0]).unwrap();
        let flow = solve_kirchhoff(&net, &c).unwrap();
        let g = gradient_from_pressures(&net, &c, &p, &flow.pressures);
        assert!(g[0].to_f64().abs() < 1e-12);

        let p = ModelParams::new(0.5, 1.0, 0.0).unwrap();
        let path = Network::new(3, vec![(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)], vec![1.0, 0.0, -1.0], None).unwrap();
        let c = Conductivities::new(vec![1.0, 0.0, 1.0]).unwrap();
        let g = energy_gradient(&path, &c, &p).unwrap();
        assert_eq!(g[1], ExtReal::PosInfinity);
    }

    #[test]
    fn gradient_requires_connected_support() {
        let net = triangle(vec![1.0, -1.0, 0.0]);
        let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        let c = Conductivities::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(energy_gradient(&net, &c, &p), Err(NetError::DisconnectedSupport));
    }

    #[test]
    fn kinetic_forms_agree() {
        let net = triangle(vec![1.0, -1.0 / 3.0, -2.0 / 3.0]);
        let c = Conductivities::new(vec![0.3, 0.8, 0.1]).unwrap();
        let flow = solve_kirchhoff(&net, &c).unwrap();
        let a = kinetic_energy(&net, &c, &flow).to_f64();
        let b = kinetic_quadratic_form(&net, &c, &flow).unwrap().to_f64();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn convexity_probe_cases() {
        let net = triangle(vec![1.0, -1.0, 0.0]);
        let p = ModelParams::new(1.0, 1.0, 0.0).unwrap();
        let c1 = Conductivities::new(vec![0.2, 0.9, 0.4]).unwrap();
        let c2 = Conductivities::new(vec![1.5, 0.1, 0.7]).unwrap();
        assert!(convexity_probe(&net, &c1, &c2, &p, 9).unwrap().pass);
        let same = convexity_probe(&net, &c1, &c1, &p, 3).unwrap();
        assert!(same.pass && same.worst_violation.abs() < 1e-12);
    }

    #[test]
    fn kinetic_bound_complete_graph() {
        let n = 5;
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v, 0.5));
            }
        }
        let net = Network::new(n, edges, vec![2.0, -1.0, 0.5, -0.5, -1.0], None).unwrap();
        let c = Conductivities::constant(net.edge_count(), 3.0).unwrap();
        let (ekin, bound) = kinetic_bound_check(&net, &c).unwrap();
        let s2 = net.sources_l2_norm().powi(2);
        assert!((bound.to_f64() - s2 * 0.5 / (3.0 * n as f64)).abs() < 1e-12);
        assert!(ekin.to_f64() <= bound.to_f64() + 1e-9, "{ekin:?} {bound:?}");

        let tri = triangle(vec![1.0, -1.0, 0.0]);
        let (_, bound) = kinetic_bound_check(&tri, &Conductivities::new(vec![1.0, 0.0, 0.0]).unwrap()).unwrap();
        assert_eq!(bound, ExtReal::PosInfinity);
    }
}
