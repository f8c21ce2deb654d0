//! # netforge
//!
//! Synthesis of optimal transportation networks on a fixed graph.
//!
//! Edge conductivities `C` are chosen to minimize the pumping + metabolic
//! energy
//!
//! ```text
//! E[C] = Σ_e (Q_e² / C_e + (ν/γ) C_e^γ) L_e
//! ```
//!
//! where the fluxes `Q` come from the Kirchhoff law on the length-weighted
//! Laplacian. With `γ = 1` the energy is convex, and a robustness reward
//! can be added through the algebraic connectivity (Fiedler number) of the
//! conductivity-weighted Laplacian:
//!
//! ```text
//! F[C] = E[C] − μ · ℓ · (|V| − 1)/2 · f[C],      ℓ = min_e L_e
//! ```
//!
//! `F` is convex (the Fiedler number is concave in `C`) and is minimized by a
//! projected subgradient method with diminishing steps.
//!
//! ## Modules
//!
//! | Module | Purpose |
//! |--------|---------|
//! | [`graph`] | [`Network`], [`Conductivities`], [`ModelParams`] |
//! | [`kirchhoff`] | Component-aware Kirchhoff solve: pressures and fluxes |
//! | [`energy`] | Energy evaluation, gradient, convexity probe |
//! | [`spectral`] | Laplacian spectrum, Fiedler number and its subgradient, Cheeger constant |
//! | [`trees`] | Spanning-tree minimizers, enumeration, loop diagnostics |
//! | [`optimizer`] | Projected subgradient minimization of `F` |
//! | [`oracles`] | Closed-form optima of the two triangle models |
//! | [`io`] | Graph/conductivity JSON, trace CSV, SVG, leaf mesh, fixtures |

pub mod energy;
pub mod error;
pub mod generate;
pub mod graph;
pub mod io;
pub mod kirchhoff;
pub mod linalg;
pub mod optimizer;
pub mod oracles;
pub mod spectral;
pub mod trees;
mod value;

pub use energy::{energy, energy_gradient, EnergyBreakdown};
pub use error::{NetError, Result};
pub use graph::{active_edges, min_edge_length, Conductivities, Edge, ModelParams, Network};
pub use kirchhoff::{solve_kirchhoff, FlowSolution};
pub use optimizer::{optimize, OptimConfig, OptimRun, Termination};
pub use spectral::{spectral_decompose, SpectralResult};
pub use value::ExtReal;
