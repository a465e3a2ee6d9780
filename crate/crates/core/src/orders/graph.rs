//! Cycle breaking by cycle-weight ratio followed by a topological sort.

use std::collections::{BTreeSet, HashMap};

use super::cycles::{Digraph, DEFAULT_CYCLE_CAP};
use super::{OrderError, OrderMeta, Strategy, TestOrder};
use crate::coupling::Weights;
use crate::eord::Eord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphConfig {
    /// Allow removing inheritance and pure aggregation edges.
    pub break_any: bool,
    pub cycle_cap: usize,
}

impl Default for GraphConfig {
    fn default() -> Self {
        GraphConfig {
            break_any: false,
            cycle_cap: DEFAULT_CYCLE_CAP,
        }
    }
}

/// Relative tolerance under which two ratios count as equal.
const RATIO_TOL: f64 = 1e-9;

struct Candidate {
    edge: usize,
    count: usize,
    ratio: f64,
}

impl Candidate {
    /// Whether `self` should be removed in preference to `other`, which
    /// comes earlier in (from, to) order.
    fn beats(&self, other: &Candidate) -> bool {
        match (self.ratio.is_infinite(), other.ratio.is_infinite()) {
            (true, true) => self.count > other.count,
            (true, false) => true,
            (false, true) => false,
            (false, false) => {
                let scale = self.ratio.abs().max(other.ratio.abs());
                self.ratio - other.ratio > RATIO_TOL * scale
            }
        }
    }
}

/// Repeatedly removes the removable edge on the most cycles per unit of
/// stubbing cost, then sorts the remaining acyclic graph.
pub fn graph_based(
    eord: &Eord,
    w: &Weights,
    config: &GraphConfig,
) -> Result<TestOrder, OrderError> {
    let n = eord.nodes.len();
    let (index, _) = eord.adjacency();
    let edges: Vec<(usize, usize)> = eord
        .edges
        .iter()
        .map(|e| (index[e.from.as_str()], index[e.to.as_str()]))
        .collect();
    let cost: Vec<f64> = eord.edges.iter().map(|e| e.coupling.scplx(w)).collect();
    let removable: Vec<bool> = eord
        .edges
        .iter()
        .map(|e| config.break_any || !e.is_protected())
        .collect();
    let mut active = vec![true; edges.len()];
    let mut meta = OrderMeta::default();
    loop {
        let g = Digraph::new(
            n,
            edges
                .iter()
                .zip(&active)
                .filter(|(_, a)| **a)
                .map(|(e, _)| *e),
        );
        let cycles = g
            .elementary_cycles(config.cycle_cap)
            .map_err(|cap| OrderError::CycleCap { cap })?;
        if meta.initial_cycles.is_none() {
            meta.initial_cycles = Some(cycles.len());
        }
        if cycles.is_empty() {
            break;
        }
        let slot: HashMap<(usize, usize), usize> = edges
            .iter()
            .enumerate()
            .filter(|(i, _)| active[*i])
            .map(|(i, e)| (*e, i))
            .collect();
        let mut counts = vec![0usize; edges.len()];
        for c in &cycles {
            for (k, &a) in c.iter().enumerate() {
                let b = c[(k + 1) % c.len()];
                counts[slot[&(a, b)]] += 1;
            }
        }
        let mut best: Option<Candidate> = None;
        for i in 0..edges.len() {
            if !active[i] || !removable[i] || counts[i] == 0 {
                continue;
            }
            let cand = Candidate {
                edge: i,
                count: counts[i],
                ratio: if cost[i] == 0.0 {
                    f64::INFINITY
                } else {
                    counts[i] as f64 / cost[i]
                },
            };
            if best.as_ref().is_none_or(|b| cand.beats(b)) {
                best = Some(cand);
            }
        }
        let Some(best) = best else {
            let stuck = cycles
                .iter()
                .find(|c| !c.is_empty())
                .map(|c| c.iter().map(|&i| eord.nodes[i].clone()).collect())
                .unwrap_or_default();
            return Err(OrderError::Stuck { cycle: stuck });
        };
        active[best.edge] = false;
        let e = &eord.edges[best.edge];
        meta.removed_edges.push((e.from.clone(), e.to.clone()));
        meta.iterations += 1;
    }
    let kept: Vec<(usize, usize)> = edges
        .iter()
        .zip(&active)
        .filter(|(_, a)| **a)
        .map(|(e, _)| *e)
        .collect();
    let order = topological_order(n, &kept).expect("graph is acyclic after removals");
    Ok(TestOrder {
        classes: order.into_iter().map(|i| eord.nodes[i].clone()).collect(),
        strategy: Strategy::Graph,
        meta,
    })
}

/// Dependencies-first order of `0..n` under edges `dependent -> dependency`;
/// ready nodes are taken smallest first. `None` if the edges have a cycle.
pub fn topological_order(n: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut pending = vec![0usize; n];
    let mut dependents = vec![Vec::new(); n];
    for &(a, b) in edges {
        if a != b {
            pending[a] += 1;
            dependents[b].push(a);
        } else {
            return None;
        }
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&v| pending[v] == 0).collect();
    let mut out = Vec::with_capacity(n);
    while let Some(v) = ready.pop_first() {
        out.push(v);
        for &d in &dependents[v] {
            pending[d] -= 1;
            if pending[d] == 0 {
                ready.insert(d);
            }
        }
    }
    (out.len() == n).then_some(out)
}
