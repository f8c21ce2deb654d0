//! JSON documents: graph spec, conductivities and flow solutions.
//!
//! Graph spec:
//!
//! ```json
//! {"vertices": [{"id": 0, "x": 0.0, "y": 0.0, "source": 1.0}, ...],
//!  "edges": [{"u": 0, "v": 1, "length": 1.0}, ...]}
//! ```
//!
//! Positions are optional but must be given for all vertices or none. A
//! missing edge length defaults to the Euclidean distance of the endpoints,
//! or 1 without positions.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{NetError, Result};
use crate::graph::{Conductivities, Network};
use crate::kirchhoff::FlowSolution;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexSpec {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default)]
    pub source: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub u: usize,
    pub v: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSpecFile {
    pub vertices: Vec<VertexSpec>,
    pub edges: Vec<EdgeSpec>,
}

impl GraphSpecFile {
    pub fn to_network(&self) -> Result<Network> {
        let n = self.vertices.len();
        let mut slots: Vec<Option<&VertexSpec>> = vec![None; n];
        for v in &self.vertices {
            if v.id >= n {
                return Err(NetError::Parse(format!("vertex id {} is not in 0..{n}", v.id)));
            }
            if slots[v.id].replace(v).is_some() {
                return Err(NetError::Parse(format!("vertex id {} appears twice", v.id)));
            }
        }
        let ordered: Vec<&VertexSpec> = slots.into_iter().map(|s| s.expect("ids are dense")).collect();

        let with_pos = ordered.iter().filter(|v| v.x.is_some() && v.y.is_some()).count();
        let partial = ordered.iter().any(|v| v.x.is_some() != v.y.is_some());
        if partial || (with_pos != 0 && with_pos != n) {
            return Err(NetError::Parse("positions must be given for all vertices or none".into()));
        }
        let positions: Option<Vec<[f64; 2]>> = (with_pos == n && n > 0)
            .then(|| ordered.iter().map(|v| [v.x.unwrap(), v.y.unwrap()]).collect());

        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            let length = match (e.length, &positions) {
                (Some(l), _) => l,
                (None, Some(p)) if e.u < n && e.v < n => {
                    let (a, b) = (p[e.u], p[e.v]);
                    (a[0] - b[0]).hypot(a[1] - b[1])
                }
                _ => 1.0,
            };
            edges.push((e.u, e.v, length));
        }
        let sources = ordered.iter().map(|v| v.source).collect();
        Network::new(n, edges, sources, positions)
    }

    /// Spec with explicit lengths, so loading it back is exact.
    pub fn from_network(net: &Network) -> GraphSpecFile {
        let vertices = (0..net.vertex_count())
            .map(|i| {
                let pos = net.positions().map(|p| p[i]);
                VertexSpec {
                    id: i,
                    x: pos.map(|p| p[0]),
                    y: pos.map(|p| p[1]),
                    source: net.sources()[i],
                }
            })
            .collect();
        let edges = net
            .edges()
            .iter()
            .map(|e| EdgeSpec {
                u: e.u,
                v: e.v,
                length: Some(e.length),
            })
            .collect();
        GraphSpecFile { vertices, edges }
    }
}

fn parse_err(e: serde_json::Error) -> NetError {
    NetError::Parse(e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| NetError::Parse(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| NetError::Parse(format!("{}: {e}", path.display())))
}

pub fn network_from_json(text: &str) -> Result<Network> {
    serde_json::from_str::<GraphSpecFile>(text).map_err(parse_err)?.to_network()
}

pub fn network_to_json(net: &Network) -> String {
    serde_json::to_string_pretty(&GraphSpecFile::from_network(net)).expect("graph spec serializes")
}

pub fn load_network(path: &Path) -> Result<Network> {
    network_from_json(&read(path)?)
}

pub fn save_network(path: &Path, net: &Network) -> Result<()> {
    write(path, &network_to_json(net))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeValue {
    pub u: usize,
    pub v: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ConductivityFile {
    conductivities: Vec<EdgeValue>,
}

/// Reads `{"conductivities": [{"u", "v", "value"}, ...]}`. Edges not listed
/// get conductivity 0.
pub fn conductivities_from_json(net: &Network, text: &str) -> Result<Conductivities> {
    let file: ConductivityFile = serde_json::from_str(text).map_err(parse_err)?;
    let mut values = vec![0.0; net.edge_count()];
    let mut seen = vec![false; net.edge_count()];
    for ev in file.conductivities {
        let id = net
            .edge_id(ev.u, ev.v)
            .ok_or_else(|| NetError::Parse(format!("({}, {}) is not an edge", ev.u, ev.v)))?;
        if std::mem::replace(&mut seen[id], true) {
            return Err(NetError::Parse(format!("edge ({}, {}) listed twice", ev.u, ev.v)));
        }
        values[id] = ev.value;
    }
    Conductivities::new(values)
}

pub fn conductivities_to_json(net: &Network, c: &Conductivities) -> String {
    let file = ConductivityFile {
        conductivities: net
            .edges()
            .iter()
            .zip(c.as_slice())
            .map(|(e, &value)| EdgeValue { u: e.u, v: e.v, value })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("conductivities serialize")
}

pub fn load_conductivities(path: &Path, net: &Network) -> Result<Conductivities> {
    conductivities_from_json(net, &read(path)?)
}

pub fn save_conductivities(path: &Path, net: &Network, c: &Conductivities) -> Result<()> {
    write(path, &conductivities_to_json(net, c))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeFlux {
    pub u: usize,
    pub v: usize,
    pub flux: f64,
}

/// Output of `solve`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowFile {
    pub solvable: bool,
    pub components: Vec<Vec<usize>>,
    pub pressures: Vec<f64>,
    pub fluxes: Vec<EdgeFlux>,
    /// `null` when unsolvable.
    pub kinetic_energy: Option<f64>,
}

impl FlowFile {
    pub fn new(net: &Network, flow: &FlowSolution, kinetic: Option<f64>) -> FlowFile {
        let fluxes = if flow.solvable {
            net.edges()
                .iter()
                .zip(&flow.fluxes)
                .map(|(e, &flux)| EdgeFlux { u: e.u, v: e.v, flux })
                .collect()
        } else {
            Vec::new()
        };
        FlowFile {
            solvable: flow.solvable,
            components: flow.components.clone(),
            pressures: flow.pressures.clone(),
            fluxes,
            kinetic_energy: kinetic,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE: &str = r#"{
        "vertices": [{"id": 0, "source": 1.0}, {"id": 2, "source": 0.0}, {"id": 1, "source": -1.0}],
        "edges": [{"u": 1, "v": 0}, {"u": 0, "v": 2, "length": 2.5}, {"u": 1, "v": 2}]
    }"#;

    #[test]
    fn parses_with_defaults() {
        let net = network_from_json(TRIANGLE).unwrap();
        assert_eq!(net.sources(), &[1.0, -1.0, 0.0]);
        let lengths: Vec<f64> = net.edges().iter().map(|e| e.length).collect();
        assert_eq!(lengths, vec![1.0, 2.5, 1.0]);
        assert!(net.positions().is_none());
    }

    #[test]
    fn euclidean_default_length() {
        let text = r#"{"vertices": [{"id": 0, "x": 0, "y": 0, "source": 1}, {"id": 1, "x": 3, "y": 4, "source": -1}],
                       "edges": [{"u": 0, "v": 1}]}"#;
        assert_eq!(network_from_json(text).unwrap().edge(0).length, 5.0);
    }

    #[test]
    fn rejects_bad_specs() {
        let dup = r#"{"vertices": [{"id": 0, "source": 0}, {"id": 0, "source": 0}], "edges": []}"#;
        assert!(matches!(network_from_json(dup), Err(NetError::Parse(_))));
        let gap = r#"{"vertices": [{"id": 0, "source": 0}, {"id": 2, "source": 0}], "edges": []}"#;
        assert!(network_from_json(gap).is_err());
        let half = r#"{"vertices": [{"id": 0, "x": 1, "y": 0, "source": 1}, {"id": 1, "source": -1}],
                       "edges": [{"u": 0, "v": 1}]}"#;
        assert!(network_from_json(half).is_err());
        assert!(network_from_json("{").is_err());
        let unbalanced = r#"{"vertices": [{"id": 0, "source": 1}, {"id": 1, "source": -0.5}], "edges": [{"u": 0, "v": 1}]}"#;
        assert!(matches!(network_from_json(unbalanced), Err(NetError::UnbalancedSources { .. })));
    }

    #[test]
    fn round_trip() {
        let net = network_from_json(TRIANGLE).unwrap();
        let again = network_from_json(&network_to_json(&net)).unwrap();
        assert_eq!(net, again);
        assert_eq!(network_to_json(&net), network_to_json(&again));
    }

    #[test]
    fn conductivity_round_trip() {
        let net = network_from_json(TRIANGLE).unwrap();
        let c = Conductivities::new(vec![0.1, 1.0 / 3.0, 0.0]).unwrap();
        let back = conductivities_from_json(&net, &conductivities_to_json(&net, &c)).unwrap();
        assert_eq!(back, c);
        let partial = r#"{"conductivities": [{"u": 2, "v": 1, "value": 0.5}]}"#;
        assert_eq!(conductivities_from_json(&net, partial).unwrap().as_slice(), &[0.0, 0.0, 0.5]);
        let bad = r#"{"conductivities": [{"u": 0, "v": 1, "value": -1}]}"#;
        assert!(conductivities_from_json(&net, bad).is_err());
    }
}
