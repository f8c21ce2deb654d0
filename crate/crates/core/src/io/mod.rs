//! File formats and fixtures.
//!
//! * [`json`]: graph spec, conductivities, flow solution.
//! * [`trace`]: optimizer trace CSV.
//! * [`svg`]: network drawing with stroke width proportional to `√C`.
//! * [`leaf`]: leaf-shaped Delaunay meshes.
//! * [`fixtures`]: the 7-vertex test network.

pub mod fixtures;
pub mod json;
pub mod leaf;
pub mod svg;
pub mod trace;

pub use fixtures::table1_network;
pub use json::{
    conductivities_from_json, conductivities_to_json, load_conductivities, load_network, network_from_json,
    network_to_json, save_conductivities, save_network, FlowFile, GraphSpecFile,
};
pub use leaf::{generate_leaf, LeafMesh};
pub use svg::{render_svg, SvgOptions};
pub use trace::{read_trace, write_trace};

/// Floats in text outputs carry 17 significant digits.
pub(crate) fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x > 0.0 {
        "inf".to_string()
    } else if x < 0.0 {
        "-inf".to_string()
    } else {
        "nan".to_string()
    }
}
