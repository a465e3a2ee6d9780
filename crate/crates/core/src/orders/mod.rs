//! Class integration test order strategies.
//!
//! All strategies return dependencies before their dependents where they
//! can; any dependency integrated later than its dependent needs a stub.

mod cycles;
mod feedback;
mod graph;
mod ria;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coupling::Weights;
use crate::eord::Eord;

pub use cycles::{enumerate_cycles, tarjan_scc, CycleSet, Digraph, Scc, DEFAULT_CYCLE_CAP};
pub use feedback::{multilevel_feedback, PriorityState};
pub use graph::{graph_based, topological_order, GraphConfig};
pub use ria::{ria, ria_traced, RiaConfig, RiaRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Graph,
    Feedback,
    Ria,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Graph, Strategy::Feedback, Strategy::Ria];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Graph => "graph",
            Strategy::Feedback => "feedback",
            Strategy::Ria => "ria",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Strategy::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown strategy `{s}` (expected graph, feedback or ria)"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OrderMeta {
    /// Cycle-breaking rounds, integration rounds, or search iterations.
    pub iterations: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub removed_edges: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_cycles: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestOrder {
    pub classes: Vec<String>,
    pub strategy: Strategy,
    pub meta: OrderMeta,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OrderError {
    #[error("more than {cap} elementary cycles; raise the cycle cap (--cycle-cap) to continue")]
    CycleCap { cap: usize },
    #[error("cycle {} has no removable edge; allow breaking structural edges (--break-any)", .cycle.join(" -> "))]
    Stuck { cycle: Vec<String> },
}

/// Edge list of an EORD by node index, with each edge's stubbing cost.
#[derive(Debug, Clone)]
pub(crate) struct CostGraph {
    pub n: usize,
    /// `(from, to, scplx)` in the EORD's edge order.
    pub edges: Vec<(usize, usize, f64)>,
}

impl CostGraph {
    pub fn new(eord: &Eord, w: &Weights) -> Self {
        let (index, _) = eord.adjacency();
        let edges = eord
            .edges
            .iter()
            .map(|e| {
                (
                    index[e.from.as_str()],
                    index[e.to.as_str()],
                    e.coupling.scplx(w),
                )
            })
            .collect();
        CostGraph {
            n: eord.nodes.len(),
            edges,
        }
    }

    /// Sum of stub costs when nodes are integrated in `order` (by index).
    pub fn cost(&self, order: &[usize]) -> f64 {
        let mut pos = vec![0; self.n];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        self.edges
            .iter()
            .filter(|(a, b, _)| pos[*a] < pos[*b])
            .fold(0.0, |acc, (_, _, c)| acc + c)
    }
}
