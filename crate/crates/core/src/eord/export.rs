//! JSON and Graphviz renderings of an [`Eord`].

use std::fmt::Write;

use serde::Serialize;

use super::{Eord, EordEdge, TransitiveChain};
use crate::coupling::Weights;

#[derive(Serialize)]
struct EdgeOut<'e> {
    #[serde(flatten)]
    edge: &'e EordEdge,
    scplx: f64,
}

#[derive(Serialize)]
struct EordOut<'e> {
    nodes: &'e [String],
    edges: Vec<EdgeOut<'e>>,
    chains: &'e [TransitiveChain],
}

pub fn to_json(eord: &Eord, w: &Weights) -> serde_json::Value {
    let out = EordOut {
        nodes: &eord.nodes,
        edges: eord
            .edges
            .iter()
            .map(|edge| EdgeOut {
                edge,
                scplx: edge.coupling.scplx(w),
            })
            .collect(),
        chains: &eord.chains,
    };
    serde_json::to_value(out).expect("EORD serializes")
}

/// Graphviz `digraph`; transitive edges are dashed.
pub fn to_dot(eord: &Eord) -> String {
    let mut out = String::from("digraph eord {\n");
    for n in &eord.nodes {
        writeln!(out, "    \"{n}\";").unwrap();
    }
    for e in &eord.edges {
        let style = match e.label {
            super::EdgeLabel::T => ", style=dashed",
            _ => "",
        };
        writeln!(
            out,
            "    \"{}\" -> \"{}\" [label=\"{:?}\"{style}];",
            e.from, e.to, e.label
        )
        .unwrap();
    }
    out.push_str("}\n");
    out
}
