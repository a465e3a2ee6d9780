//! Random iterative search: adjacent swaps from a seeded random permutation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CostGraph, OrderMeta, Strategy, TestOrder};
use crate::coupling::Weights;
use crate::eord::Eord;

/// Per-iteration temperature decay when annealing is enabled.
const COOLING: f64 = 0.995;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiaConfig {
    pub seed: u64,
    pub iterations: u64,
    /// Initial temperature; `None` accepts only non-worsening swaps.
    pub sa_temp: Option<f64>,
}

impl Default for RiaConfig {
    fn default() -> Self {
        RiaConfig {
            seed: 0,
            iterations: 1000,
            sa_temp: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiaRun {
    /// Best order seen.
    pub order: TestOrder,
    pub initial_cost: f64,
    pub best_cost: f64,
    /// Cost of the current order after each iteration, starting with the
    /// initial permutation.
    pub trace: Vec<f64>,
}

pub fn ria(eord: &Eord, w: &Weights, config: &RiaConfig) -> TestOrder {
    ria_traced(eord, w, config).order
}

pub fn ria_traced(eord: &Eord, w: &Weights, config: &RiaConfig) -> RiaRun {
    let g = CostGraph::new(eord, w);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut current: Vec<usize> = (0..g.n).collect();
    current.shuffle(&mut rng);
    let mut cost = g.cost(&current);
    let initial_cost = cost;
    let mut best = (current.clone(), cost);
    let mut trace = Vec::with_capacity(config.iterations as usize + 1);
    trace.push(cost);
    let mut temp = config.sa_temp.unwrap_or(0.0);
    for _ in 0..config.iterations {
        if g.n >= 2 {
            let i = rng.gen_range(0..g.n - 1);
            current.swap(i, i + 1);
            let next = g.cost(&current);
            let accept = next <= cost
                || (config.sa_temp.is_some()
                    && temp > 0.0
                    && rng.gen::<f64>() < (-(next - cost) / temp).exp());
            if accept {
                cost = next;
                if cost < best.1 {
                    best = (current.clone(), cost);
                }
            } else {
                current.swap(i, i + 1);
            }
            temp *= COOLING;
        }
        trace.push(cost);
    }
    RiaRun {
        order: TestOrder {
            classes: best.0.into_iter().map(|i| eord.nodes[i].clone()).collect(),
            strategy: Strategy::Ria,
            meta: OrderMeta {
                iterations: config.iterations,
                seed: Some(config.seed),
                ..OrderMeta::default()
            },
        },
        initial_cost,
        best_cost: best.1,
        trace,
    }
}
