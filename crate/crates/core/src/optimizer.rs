//! Projected subgradient minimization of
//! `F[C] = E[C] − μ · ℓ · (|V| − 1)/2 · f[C]` for `γ = 1`.
//!
//! Each step moves along `−∂F`,
//!
//! ```text
//! C_e ← max(0, C_e + τ_k ((P_u − P_v)²/L_e − ν L_e + μ ℓ (|V|−1)/2 (v_u − v_v)²))
//! ```
//!
//! with `τ_k = τ₀/√k`, `k = 1, 2, …`. The method is not a descent method, so
//! the best iterate seen is returned. When a step leaves the solvable set or
//! the linear solve breaks down, the run restarts from the best iterate with
//! a smaller `τ₀`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::{energy_from_flow, EnergyBreakdown};
use crate::error::{NetError, Result};
use crate::graph::{active_edges, min_edge_length, Conductivities, ModelParams, Network};
use crate::kirchhoff::{solve_kirchhoff, FlowSolution};
use crate::spectral::{
    eigen_summary, laplacian, spectral_decompose_with, subgradient_from, EigenSummary, GapTolerance, SpectralResult,
};
use crate::value::ExtReal;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OptimConfig {
    pub tau0: f64,
    pub iters: u64,
    pub seed: u64,
    /// Factor applied to `τ₀` on each restart.
    pub restart_shrink: f64,
    /// Relative threshold for counting an edge as active.
    pub zero_threshold: f64,
    /// Record every `trace_stride`-th iterate in addition to improvements.
    pub trace_stride: u64,
    pub max_restarts: u32,
    /// The run is declared divergent once `‖C‖∞` exceeds this multiple of
    /// the initial `‖C‖∞`.
    pub divergence_factor: f64,
    pub gap: GapTolerance,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            tau0: 0.1,
            iters: 100_000,
            seed: 0,
            restart_shrink: 0.5,
            zero_threshold: 1e-8,
            trace_stride: 1000,
            max_restarts: 10,
            divergence_factor: 1e8,
            gap: GapTolerance::default(),
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(NetError::InvalidParameter(what.to_string()));
        if !(self.tau0 > 0.0 && self.tau0.is_finite()) {
            return bad("tau0 must be positive");
        }
        if self.iters == 0 {
            return bad("iters must be positive");
        }
        if !(self.restart_shrink > 0.0 && self.restart_shrink < 1.0) {
            return bad("restart_shrink must lie in (0, 1)");
        }
        if !(self.zero_threshold >= 0.0) {
            return bad("zero_threshold must be non-negative");
        }
        if self.trace_stride == 0 {
            return bad("trace_stride must be positive");
        }
        if !(self.divergence_factor > 1.0) {
            return bad("divergence_factor must exceed 1");
        }
        Ok(())
    }
}

/// Everything known about one iterate.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub f: ExtReal,
    pub energy: EnergyBreakdown,
    pub flow: FlowSolution,
    pub spectrum: SpectralResult,
}

/// `μ · ℓ · (|V| − 1)/2`, the weight of the Fiedler number in `F`.
pub fn fiedler_weight(net: &Network, params: &ModelParams) -> f64 {
    params.mu * min_edge_length(net) * (net.vertex_count() as f64 - 1.0) / 2.0
}

fn require_linear(params: &ModelParams) -> Result<()> {
    params.validate()?;
    if params.gamma != 1.0 {
        return Err(NetError::InvalidParameter(format!(
            "the modified energy needs gamma = 1, got {}",
            params.gamma
        )));
    }
    Ok(())
}

pub fn evaluate(net: &Network, c: &Conductivities, params: &ModelParams, gap: GapTolerance) -> Result<Evaluation> {
    let it = Iterate::new(net, c, params, gap, true)?;
    Ok(Evaluation {
        f: it.f,
        energy: it.energy,
        flow: it.flow,
        spectrum: it.spectrum.expect("spectrum requested"),
    })
}

/// An evaluation whose spectrum is skipped when `μ = 0` and not needed.
#[derive(Clone, Debug)]
struct Iterate {
    f: ExtReal,
    energy: EnergyBreakdown,
    flow: FlowSolution,
    spectrum: Option<SpectralResult>,
}

impl Iterate {
    fn new(net: &Network, c: &Conductivities, params: &ModelParams, gap: GapTolerance, spectrum: bool) -> Result<Iterate> {
        require_linear(params)?;
        let flow = solve_kirchhoff(net, c)?;
        let energy = energy_from_flow(net, c, params, &flow);
        let weight = fiedler_weight(net, params);
        let spectrum = if spectrum || weight != 0.0 {
            Some(spectral_decompose_with(&laplacian(net, c, false)?, gap)?)
        } else {
            None
        };
        let fiedler = spectrum.as_ref().map_or(0.0, |s| s.fiedler);
        let f = match energy.total() {
            ExtReal::Finite(e) => ExtReal::Finite(e - weight * fiedler),
            ExtReal::PosInfinity => ExtReal::PosInfinity,
        };
        Ok(Iterate {
            f,
            energy,
            flow,
            spectrum,
        })
    }

    fn summary(&self, net: &Network, c: &Conductivities, gap: GapTolerance) -> Result<EigenSummary> {
        match &self.spectrum {
            Some(s) => Ok(s.into()),
            None => eigen_summary(&laplacian(net, c, false)?, gap),
        }
    }
}

/// `F[C]`, with the Fiedler number taken on the raw conductivities.
pub fn modified_energy(net: &Network, c: &Conductivities, params: &ModelParams) -> Result<ExtReal> {
    Ok(evaluate(net, c, params, GapTolerance::default())?.f)
}

/// Unprojected update `C + τ·d` from an evaluation of `C`.
fn raw_step(net: &Network, c: &Conductivities, params: &ModelParams, eval: &Iterate, tau: f64) -> Vec<f64> {
    let weight = fiedler_weight(net, params);
    let sub = if let (true, Some(spectrum)) = (weight != 0.0, &eval.spectrum) {
        subgradient_from(net, spectrum)
    } else {
        vec![0.0; net.edge_count()]
    };
    let p = &eval.flow.pressures;
    net.edges()
        .iter()
        .enumerate()
        .map(|(id, e)| {
            let dp = p[e.u] - p[e.v];
            let d = dp * dp / e.length - params.nu * e.length + weight * sub[id];
            c.get(id) + tau * d
        })
        .collect()
}

/// Update before projection. Errors when `C` itself is infeasible.
pub fn subgradient_step_raw(net: &Network, c: &Conductivities, params: &ModelParams, tau: f64) -> Result<Vec<f64>> {
    let eval = Iterate::new(net, c, params, GapTolerance::default(), false)?;
    if !eval.flow.solvable {
        return Err(NetError::Unsolvable);
    }
    Ok(raw_step(net, c, params, &eval, tau))
}

/// One projected subgradient step.
///
/// A disconnected but solvable support is accepted: the Fiedler vector is
/// then taken from the null space orthogonal to the constant vector.
pub fn subgradient_step(net: &Network, c: &Conductivities, params: &ModelParams, tau: f64) -> Result<Conductivities> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(NetError::InvalidParameter(format!("step size {tau}")));
    }
    Conductivities::project(subgradient_step_raw(net, c, params, tau)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: u64,
    pub f: f64,
    pub e: f64,
    pub e_kin: f64,
    pub e_met: f64,
    /// `λ₁`, the Fiedler number.
    pub fiedler: f64,
    pub lambda2: Option<f64>,
    pub lambda3: Option<f64>,
    pub multiplicity: usize,
    pub active_edges: usize,
    pub tau: f64,
}

impl TraceRecord {
    fn new(k: u64, it: &Iterate, spectrum: &EigenSummary, c: &Conductivities, tau: f64, threshold: f64) -> TraceRecord {
        let (f, energy) = (it.f, &it.energy);
        TraceRecord {
            k,
            f: f.to_f64(),
            e: energy.total().to_f64(),
            e_kin: energy.kinetic.to_f64(),
            e_met: energy.metabolic,
            fiedler: spectrum.fiedler,
            lambda2: spectrum.eigenvalue(2),
            lambda3: spectrum.eigenvalue(3),
            multiplicity: spectrum.multiplicity,
            active_edges: active_edges(c, threshold).len(),
            tau,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Termination {
    Completed,
    /// Completed after `restarts` restarts.
    Restarted { restarts: u32 },
    Diverged { at: u64 },
    /// Gave up after the restart budget was spent.
    RestartsExhausted { at: u64 },
}

impl Termination {
    pub fn diverged(&self) -> bool {
        matches!(self, Termination::Diverged { .. })
    }
}

#[derive(Clone, Debug)]
pub struct OptimRun {
    pub best_c: Conductivities,
    pub best_f: f64,
    /// Iteration at which `best_c` was reached (0 = initial guess).
    pub best_k: u64,
    pub trace: Vec<TraceRecord>,
    pub termination: Termination,
    pub restarts: u32,
}

/// Uniform `(0, 1)` conductivities on every edge.
pub fn random_initial(edge_count: usize, seed: u64) -> Conductivities {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..edge_count)
        .map(|_| loop {
            let x: f64 = rng.gen();
            if x > 0.0 {
                break x;
            }
        })
        .collect();
    Conductivities::new(values).expect("uniform draws are valid")
}

pub fn optimize(net: &Network, params: &ModelParams, config: &OptimConfig) -> Result<OptimRun> {
    optimize_from(net, params, config, random_initial(net.edge_count(), config.seed))
}

/// Runs the method from a given starting point, which must be solvable.
pub fn optimize_from(
    net: &Network,
    params: &ModelParams,
    config: &OptimConfig,
    start: Conductivities,
) -> Result<OptimRun> {
    require_linear(params)?;
    config.validate()?;
    net.check_conductivities(&start)?;
    let eval = Iterate::new(net, &start, params, config.gap, false)?;
    if !eval.f.is_finite() {
        return Err(NetError::Unsolvable);
    }
    let scale = start.max().max(f64::MIN_POSITIVE);
    let limit = config.divergence_factor * scale;

    let record = |k: u64, it: &Iterate, c: &Conductivities, tau: f64| -> Result<TraceRecord> {
        let summary = it.summary(net, c, config.gap)?;
        Ok(TraceRecord::new(k, it, &summary, c, tau, config.zero_threshold))
    };
    let mut trace = vec![record(0, &eval, &start, config.tau0)?];
    let mut best = (start.clone(), eval.clone(), 0u64);
    let mut current = (start, eval);
    let mut tau0 = config.tau0;
    let mut restarts = 0u32;
    let mut termination = None;

    for k in 1..=config.iters {
        let tau = tau0 / (k as f64).sqrt();
        let raw = raw_step(net, &current.0, params, &current.1, tau);
        let next = Conductivities::project(raw)?;
        if next.max() > limit {
            termination = Some(Termination::Diverged { at: k });
            break;
        }
        let feasible = match Iterate::new(net, &next, params, config.gap, false) {
            Ok(ev) if ev.f.is_finite() => Some(ev),
            Ok(_) | Err(NetError::IllConditioned { .. }) => None,
            Err(e) => return Err(e),
        };
        let Some(ev) = feasible else {
            restarts += 1;
            if restarts > config.max_restarts {
                termination = Some(Termination::RestartsExhausted { at: k });
                break;
            }
            tau0 *= config.restart_shrink;
            current = (best.0.clone(), best.1.clone());
            continue;
        };
        let improved = ev.f < best.1.f;
        if improved || k % config.trace_stride == 0 {
            trace.push(record(k, &ev, &next, tau)?);
        }
        if improved {
            best = (next.clone(), ev.clone(), k);
        }
        current = (next, ev);
    }

    let termination = termination.unwrap_or(if restarts == 0 {
        Termination::Completed
    } else {
        Termination::Restarted { restarts }
    });
    Ok(OptimRun {
        best_f: best.1.f.to_f64(),
        best_c: best.0,
        best_k: best.2,
        trace,
        termination,
        restarts,
    })
}

/// Seed for the `index`-th run of a sweep.
pub fn derive_seed(base: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(index as u64 + 1);
    rng.gen()
}

/// Statistics of a run's best iterate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub mu: f64,
    pub e: f64,
    pub f: f64,
    pub e_kin: f64,
    pub e_met: f64,
    pub lambda1: f64,
    pub lambda2: Option<f64>,
    pub lambda3: Option<f64>,
    pub multiplicity: usize,
    pub active_edges: usize,
}

impl SummaryRow {
    pub fn from_run(net: &Network, params: &ModelParams, config: &OptimConfig, run: &OptimRun) -> Result<SummaryRow> {
        let ev = evaluate(net, &run.best_c, params, config.gap)?;
        Ok(SummaryRow {
            mu: params.mu,
            e: ev.energy.total().to_f64(),
            f: ev.f.to_f64(),
            e_kin: ev.energy.kinetic.to_f64(),
            e_met: ev.energy.metabolic,
            lambda1: ev.spectrum.fiedler,
            lambda2: ev.spectrum.eigenvalue(2),
            lambda3: ev.spectrum.eigenvalue(3),
            multiplicity: ev.spectrum.multiplicity,
            active_edges: active_edges(&run.best_c, config.zero_threshold).len(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct SweepEntry {
    pub mu: f64,
    pub seed: u64,
    pub outcome: Result<(OptimRun, SummaryRow)>,
}

/// One run per `μ`, each with its own seed derived from `config.seed`.
/// Runs execute on up to `jobs` threads (0 = rayon default); results come
/// back in the order of `mu_values`.
pub fn sweep_mu(
    net: &Network,
    base: &ModelParams,
    mu_values: &[f64],
    config: &OptimConfig,
    jobs: usize,
) -> Result<Vec<SweepEntry>> {
    require_linear(base)?;
    config.validate()?;
    let run_one = |(i, &mu): (usize, &f64)| {
        let seed = derive_seed(config.seed, i);
        let cfg = OptimConfig { seed, ..*config };
        let outcome = ModelParams::new(base.gamma, base.nu, mu).and_then(|params| {
            let run = optimize(net, &params, &cfg)?;
            let row = SummaryRow::from_run(net, &params, &cfg, &run)?;
            Ok((run, row))
        });
        SweepEntry { mu, seed, outcome }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| NetError::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| mu_values.par_iter().enumerate().map(run_one).collect()))
}
