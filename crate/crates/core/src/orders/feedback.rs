//! Incremental integration by test priority (profit minus cost), recomputed
//! after every integration round.

use std::collections::BTreeSet;

use super::{CostGraph, OrderMeta, Strategy, TestOrder};
use crate::coupling::Weights;
use crate::eord::Eord;

/// Per-class state of one integration round. Vectors are indexed like the
/// EORD's nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityState {
    pub testing_cost: Vec<f64>,
    pub test_profit: Vec<f64>,
    pub priority: Vec<f64>,
    pub integrated: Vec<bool>,
    /// Unintegrated dependencies per class.
    pub pending_deps: Vec<usize>,
}

impl PriorityState {
    fn compute(g: &CostGraph, integrated: &[bool]) -> Self {
        let mut testing_cost = vec![0.0; g.n];
        let mut test_profit = vec![0.0; g.n];
        let mut pending_deps = vec![0; g.n];
        for &(a, b, c) in &g.edges {
            if integrated[a] || integrated[b] {
                continue;
            }
            testing_cost[a] += c;
            test_profit[b] += c;
            pending_deps[a] += 1;
        }
        let priority = test_profit
            .iter()
            .zip(&testing_cost)
            .map(|(p, c)| p - c)
            .collect();
        PriorityState {
            testing_cost,
            test_profit,
            priority,
            integrated: integrated.to_vec(),
            pending_deps,
        }
    }

    /// Classes to integrate this round: every class without pending
    /// dependencies; failing that, every class whose pending dependencies
    /// cost nothing to stub; failing that, the single highest-priority class
    /// (first by name on ties).
    fn pick(&self) -> Vec<usize> {
        let open = || (0..self.integrated.len()).filter(|&v| !self.integrated[v]);
        let free: Vec<usize> = open().filter(|&v| self.pending_deps[v] == 0).collect();
        if !free.is_empty() {
            return free;
        }
        let zero: Vec<usize> = open().filter(|&v| self.testing_cost[v] == 0.0).collect();
        if !zero.is_empty() {
            return zero;
        }
        let mut best: Option<usize> = None;
        for v in open() {
            if best.is_none_or(|b| self.priority[v] > self.priority[b]) {
                best = Some(v);
            }
        }
        best.into_iter().collect()
    }
}

pub fn multilevel_feedback(eord: &Eord, w: &Weights) -> TestOrder {
    let g = CostGraph::new(eord, w);
    let mut integrated = vec![false; g.n];
    let mut order = Vec::with_capacity(g.n);
    let mut rounds = 0;
    while order.len() < g.n {
        let state = PriorityState::compute(&g, &integrated);
        let picked: BTreeSet<usize> = state.pick().into_iter().collect();
        for v in picked {
            integrated[v] = true;
            order.push(v);
        }
        rounds += 1;
    }
    TestOrder {
        classes: order.into_iter().map(|i| eord.nodes[i].clone()).collect(),
        strategy: Strategy::Feedback,
        meta: OrderMeta {
            iterations: rounds,
            ..OrderMeta::default()
        },
    }
}
