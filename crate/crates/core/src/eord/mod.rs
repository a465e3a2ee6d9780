//! Object relation diagram (direct dependencies) and its extension with
//! transitive dependencies found through member chains.

mod chains;
mod export;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::cfg::ProbabilityIndex;
use crate::coupling::{measure_data_coupling, normalize, CouplingRecord};
use crate::model::ProgramModel;

pub use chains::{
    admissible_classes, chain_probability, enumerate_chains, Member, MemberGraph, TransitiveChain,
};
pub use export::{to_dot, to_json};

pub const DEFAULT_MAX_CHAIN_LEN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectKind {
    Inheritance,
    Aggregation,
    Association,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum EdgeLabel {
    /// Direct only.
    D,
    /// Transitive only.
    T,
    /// Both.
    C,
}

/// `from` depends on `to`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EordEdge {
    pub from: String,
    pub to: String,
    pub label: EdgeLabel,
    pub direct_kinds: BTreeSet<DirectKind>,
    pub coupling: CouplingRecord,
}

impl EordEdge {
    /// Edges that only encode structure (inheritance, or aggregation without
    /// any member use) are kept when breaking cycles unless explicitly allowed.
    pub fn is_protected(&self) -> bool {
        self.direct_kinds.contains(&DirectKind::Inheritance)
            || (self.direct_kinds.contains(&DirectKind::Aggregation)
                && !self.direct_kinds.contains(&DirectKind::Association))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Eord {
    /// Class names, sorted.
    pub nodes: Vec<String>,
    /// At most one edge per ordered pair, sorted by `(from, to)`.
    pub edges: Vec<EordEdge>,
    pub chains: Vec<TransitiveChain>,
}

impl Eord {
    pub fn edge(&self, from: &str, to: &str) -> Option<&EordEdge> {
        self.edges
            .binary_search_by(|e| (e.from.as_str(), e.to.as_str()).cmp(&(from, to)))
            .ok()
            .map(|i| &self.edges[i])
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edge(from, to).is_some()
    }

    pub fn edge_count(&self, label: EdgeLabel) -> usize {
        self.edges.iter().filter(|e| e.label == label).count()
    }

    /// Builds a graph from explicit edges, normalizing A and M over them.
    /// Duplicate pairs and self-edges are dropped.
    pub fn from_edges(nodes: impl IntoIterator<Item = String>, edges: Vec<EordEdge>) -> Eord {
        let mut nodes: Vec<String> = nodes.into_iter().collect();
        nodes.sort();
        nodes.dedup();
        let mut edges: Vec<EordEdge> = edges.into_iter().filter(|e| e.from != e.to).collect();
        edges.sort_by(|a, b| (&a.from, &a.to).cmp(&(&b.from, &b.to)));
        edges.dedup_by(|a, b| a.from == b.from && a.to == b.to);
        normalize(edges.iter_mut().map(|e| &mut e.coupling));
        Eord {
            nodes,
            edges,
            chains: Vec::new(),
        }
    }

    /// Chains from `from` to `to`.
    pub fn chains_between<'e>(
        &'e self,
        from: &'e str,
        to: &'e str,
    ) -> impl Iterator<Item = &'e TransitiveChain> {
        self.chains
            .iter()
            .filter(move |c| c.source() == from && c.target() == to)
    }

    /// Indices of `nodes` and adjacency lists by index.
    pub fn adjacency(&self) -> (BTreeMap<&str, usize>, Vec<Vec<usize>>) {
        let index: BTreeMap<&str, usize> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adj[index[e.from.as_str()]].push(index[e.to.as_str()]);
        }
        (index, adj)
    }
}

/// Direct-dependency graph: association per cross-class member reference,
/// aggregation per object-typed attribute, inheritance per `extends`.
pub fn build_ord(model: &ProgramModel) -> Eord {
    let mut kinds: BTreeMap<(String, String), BTreeSet<DirectKind>> = BTreeMap::new();
    let mut add = |from: &str, to: &str, kind| {
        if from != to {
            kinds
                .entry((from.to_string(), to.to_string()))
                .or_default()
                .insert(kind);
        }
    };
    for c in &model.classes {
        if let Some(p) = &c.extends {
            add(&c.name, p, DirectKind::Inheritance);
        }
        for t in c.field_object_types() {
            add(&c.name, t, DirectKind::Aggregation);
        }
        for m in &c.methods {
            for s in m.body.statements() {
                if let Some(site) = &s.call_site {
                    add(&c.name, &site.target_class, DirectKind::Association);
                }
            }
        }
    }
    let data: BTreeMap<(String, String), CouplingRecord> = measure_data_coupling(model)
        .into_iter()
        .map(|r| ((r.from.clone(), r.to.clone()), r))
        .collect();
    let edges = kinds
        .into_iter()
        .map(|((from, to), direct_kinds)| {
            let coupling = data
                .get(&(from.clone(), to.clone()))
                .cloned()
                .unwrap_or_else(|| CouplingRecord::new(&from, &to));
            EordEdge {
                from,
                to,
                label: EdgeLabel::D,
                direct_kinds,
                coupling,
            }
        })
        .collect();
    Eord::from_edges(model.class_names(), edges)
}

/// `T(i,j) = 1 - Π(1 - t_k)` over the chains of one class pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlComplexity {
    pub from: String,
    pub to: String,
    pub chains: Vec<TransitiveChain>,
    pub value: f64,
}

pub fn control_complexity(from: &str, to: &str, chains: &[TransitiveChain]) -> ControlComplexity {
    let miss: f64 = chains.iter().map(|c| 1.0 - c.chain_probability).product();
    ControlComplexity {
        from: from.into(),
        to: to.into(),
        chains: chains.to_vec(),
        value: if chains.is_empty() { 0.0 } else { 1.0 - miss },
    }
}

/// The direct graph extended with transitive dependencies found by chains of
/// 3 to `max_len` members.
pub fn build_eord(model: &ProgramModel, max_len: usize) -> Eord {
    let index = ProbabilityIndex::build(model);
    let graph = MemberGraph::build(model);
    let chains = chains::enumerate_with(&graph, &index, max_len);
    extend_with_chains(build_ord(model), chains)
}

/// Adds T edges (or relabels direct edges C) for every pair joined by chains.
pub fn extend_with_chains(ord: Eord, chains: Vec<TransitiveChain>) -> Eord {
    let mut by_pair: BTreeMap<(String, String), Vec<TransitiveChain>> = BTreeMap::new();
    for c in &chains {
        by_pair
            .entry((c.source().to_string(), c.target().to_string()))
            .or_default()
            .push(c.clone());
    }
    let mut edges: BTreeMap<(String, String), EordEdge> = ord
        .edges
        .into_iter()
        .map(|e| ((e.from.clone(), e.to.clone()), e))
        .collect();
    for ((from, to), cs) in by_pair {
        let t = control_complexity(&from, &to, &cs).value;
        let edge = edges
            .entry((from.clone(), to.clone()))
            .or_insert_with(|| EordEdge {
                label: EdgeLabel::T,
                direct_kinds: BTreeSet::new(),
                coupling: CouplingRecord::new(&from, &to),
                from,
                to,
            });
        if !edge.direct_kinds.is_empty() {
            edge.label = EdgeLabel::C;
        }
        edge.coupling.t = t;
    }
    let mut eord = Eord::from_edges(ord.nodes, edges.into_values().collect());
    eord.chains = chains;
    eord
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationshipStats {
    pub edges: usize,
    pub direct: usize,
    pub transitive: usize,
    pub combined: usize,
    /// Share of edges carrying a transitive relationship (T or C).
    pub transitive_fraction: f64,
    pub direct_fraction: f64,
    pub combined_fraction: f64,
    pub classes_touched: usize,
    pub members_touched: usize,
    pub chains: usize,
    /// Chain counts keyed by member count.
    pub chains_by_len: BTreeMap<usize, usize>,
}

pub fn relationship_stats(eord: &Eord) -> RelationshipStats {
    let edges = eord.edges.len();
    let direct = eord.edge_count(EdgeLabel::D);
    let transitive = eord.edge_count(EdgeLabel::T);
    let combined = eord.edge_count(EdgeLabel::C);
    let frac = |n: usize| {
        if edges == 0 {
            0.0
        } else {
            n as f64 / edges as f64
        }
    };
    let classes: BTreeSet<&str> = eord
        .chains
        .iter()
        .flat_map(|c| c.member_path.iter().map(|m| m.class.as_str()))
        .collect();
    let members: BTreeSet<&Member> = eord
        .chains
        .iter()
        .flat_map(|c| c.member_path.iter())
        .collect();
    let mut chains_by_len = BTreeMap::new();
    for c in &eord.chains {
        *chains_by_len.entry(c.len()).or_insert(0) += 1;
    }
    RelationshipStats {
        edges,
        direct,
        transitive,
        combined,
        transitive_fraction: frac(transitive + combined),
        direct_fraction: frac(direct),
        combined_fraction: frac(combined),
        classes_touched: classes.len(),
        members_touched: members.len(),
        chains: eord.chains.len(),
        chains_by_len,
    }
}
