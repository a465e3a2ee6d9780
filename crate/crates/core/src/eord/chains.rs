//! Transitive chain enumeration over the member graph.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cfg::{CallOperation, ProbabilityIndex};
use crate::model::{MemberKind, ProgramModel};

/// A method or attribute of a class.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Member {
    pub class: String,
    pub name: String,
    pub kind: MemberKind,
}

impl Member {
    pub fn new(class: &str, name: &str, kind: MemberKind) -> Self {
        Member {
            class: class.into(),
            name: name.into(),
            kind,
        }
    }
}

impl std::fmt::Display for Member {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            MemberKind::Method => write!(f, "{}.{}()", self.class, self.name),
            MemberKind::Attribute => write!(f, "{}.{}", self.class, self.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitiveChain {
    pub member_path: Vec<Member>,
    pub call_ops: Vec<CallOperation>,
    pub op_probabilities: Vec<f64>,
    pub chain_probability: f64,
}

impl TransitiveChain {
    pub fn source(&self) -> &str {
        &self.member_path[0].class
    }

    pub fn target(&self) -> &str {
        &self.member_path[self.member_path.len() - 1].class
    }

    pub fn len(&self) -> usize {
        self.member_path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.member_path.is_empty()
    }
}

impl std::fmt::Display for TransitiveChain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let path: Vec<String> = self.member_path.iter().map(Member::to_string).collect();
        write!(f, "{} (t = {})", path.join(" -> "), self.chain_probability)
    }
}

/// `Π pc` over the chain's call operations.
pub fn chain_probability(op_probabilities: &[f64]) -> f64 {
    op_probabilities.iter().product()
}

/// Directed member graph: `x -> y` when `x` (a method) references `y`, or
/// `x` (an attribute) is assigned the result of a call to `y`.
#[derive(Debug, Clone, Default)]
pub struct MemberGraph {
    pub hops: BTreeMap<Member, Vec<Member>>,
}

impl MemberGraph {
    pub fn build(model: &ProgramModel) -> Self {
        let mut hops: BTreeMap<Member, Vec<Member>> = BTreeMap::new();
        for c in &model.classes {
            for m in &c.methods {
                let from = Member::new(&c.name, &m.name, MemberKind::Method);
                for s in m.body.statements() {
                    let Some(site) = &s.call_site else { continue };
                    let to = Member::new(&site.target_class, &site.target_member, site.member_kind);
                    hops.entry(from.clone()).or_default().push(to.clone());
                    if let Some(attr) = &s.assigns {
                        let holder = Member::new(&c.name, attr, MemberKind::Attribute);
                        hops.entry(holder).or_default().push(to);
                    }
                }
            }
        }
        for targets in hops.values_mut() {
            targets.sort();
            targets.dedup();
        }
        MemberGraph { hops }
    }

    pub fn successors(&self, m: &Member) -> &[Member] {
        self.hops.get(m).map_or(&[], Vec::as_slice)
    }
}

/// Whether a class sequence (one entry per member) is an admissible chain
/// shape: ends in different classes, never two intraclass hops in a row, and
/// at least one intermediate class distinct from both ends.
pub fn admissible_classes(classes: &[&str]) -> bool {
    let n = classes.len();
    if n < 3 || classes[0] == classes[n - 1] {
        return false;
    }
    if classes.windows(3).any(|w| w[0] == w[1] && w[1] == w[2]) {
        return false;
    }
    let (i, j) = (classes[0], classes[n - 1]);
    let mut runs: Vec<&str> = classes.to_vec();
    runs.dedup();
    runs.len() >= 3 && runs[1..runs.len() - 1].iter().all(|k| *k != i && *k != j)
}

/// Whether a prefix can still grow into an admissible chain.
fn viable_prefix(classes: &[&str]) -> bool {
    let n = classes.len();
    if n >= 3 && classes[n - 1] == classes[n - 2] && classes[n - 2] == classes[n - 3] {
        return false;
    }
    // Once the path has left the source class it may not return to it.
    let i = classes[0];
    let left = classes.iter().position(|c| *c != i);
    match left {
        Some(p) => classes[p..].iter().all(|c| *c != i),
        None => n <= 2,
    }
}

/// All admissible chains with 3 to `max_len` members, sorted by member path.
pub fn enumerate_chains(model: &ProgramModel, max_len: usize) -> Vec<TransitiveChain> {
    let graph = MemberGraph::build(model);
    let index = ProbabilityIndex::build(model);
    enumerate_with(&graph, &index, max_len)
}

pub(crate) fn enumerate_with(
    graph: &MemberGraph,
    index: &ProbabilityIndex,
    max_len: usize,
) -> Vec<TransitiveChain> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    for start in graph.hops.keys() {
        path.push(start.clone());
        extend(graph, index, max_len, &mut path, &mut out);
        path.pop();
    }
    out.sort_by(|a, b| a.member_path.cmp(&b.member_path));
    out
}

fn extend(
    graph: &MemberGraph,
    index: &ProbabilityIndex,
    max_len: usize,
    path: &mut Vec<Member>,
    out: &mut Vec<TransitiveChain>,
) {
    let classes: Vec<&str> = path.iter().map(|m| m.class.as_str()).collect();
    if !viable_prefix(&classes) {
        return;
    }
    if path.len() >= 3 && admissible_classes(&classes) {
        out.push(make_chain(index, path));
    }
    if path.len() == max_len {
        return;
    }
    let last = path[path.len() - 1].clone();
    for next in graph.successors(&last) {
        if path.contains(next) {
            continue;
        }
        path.push(next.clone());
        extend(graph, index, max_len, path, out);
        path.pop();
    }
}

fn make_chain(index: &ProbabilityIndex, path: &[Member]) -> TransitiveChain {
    let call_ops: Vec<CallOperation> = path
        .windows(2)
        .map(|w| CallOperation::new(&w[0].class, &w[1].class, &w[1].name, w[1].kind))
        .collect();
    let op_probabilities: Vec<f64> = call_ops.iter().map(|op| index.operation(op)).collect();
    TransitiveChain {
        member_path: path.to_vec(),
        chain_probability: chain_probability(&op_probabilities),
        call_ops,
        op_probabilities,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_shapes() {
        assert!(admissible_classes(&["A", "B", "C"]));
        assert!(admissible_classes(&["A", "A", "B", "C"]));
        assert!(admissible_classes(&["A", "B", "B", "C"]));
        assert!(!admissible_classes(&["A", "A", "A", "C"]));
        assert!(!admissible_classes(&["A", "B", "A"]));
        assert!(!admissible_classes(&["A", "A", "C"]));
        assert!(!admissible_classes(&["A", "B", "A", "C"]));
        assert!(!admissible_classes(&["A", "B", "C", "C", "C"]));
        assert!(admissible_classes(&["A", "B", "D", "B", "C"]));
    }

    #[test]
    fn prefix_pruning_agrees_with_shape() {
        // Any admissible sequence has only viable prefixes.
        let names = ["A", "B", "C"];
        for len in 3..=5 {
            let mut idx = vec![0usize; len];
            loop {
                let seq: Vec<&str> = idx.iter().map(|&i| names[i]).collect();
                if admissible_classes(&seq) {
                    for k in 1..=len {
                        assert!(viable_prefix(&seq[..k]), "{seq:?} at {k}");
                    }
                }
                let mut p = 0;
                while p < len {
                    idx[p] += 1;
                    if idx[p] < names.len() {
                        break;
                    }
                    idx[p] = 0;
                    p += 1;
                }
                if p == len {
                    break;
                }
            }
        }
    }

    #[test]
    fn probability_is_product() {
        assert_eq!(chain_probability(&[0.625, 0.5]), 0.3125);
        assert_eq!(chain_probability(&[0.75, 1.0]), 0.75);
        assert_eq!(chain_probability(&[0.9, 0.0, 0.5]), 0.0);
    }
}
