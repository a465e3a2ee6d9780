//! Report types and their text renderings.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::wilcoxon::{WilcoxonOutcome, WilcoxonResult};
use crate::coupling::{OrderCost, Weights};
use crate::eord::RelationshipStats;
use crate::orders::{OrderMeta, Strategy};

/// One execution of one strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyRun {
    pub order: Vec<String>,
    pub cost: OrderCost,
    pub meta: OrderMeta,
    /// Wall-clock time including graph construction.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

/// Per-run averages of an [`OrderCost`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MeanCost {
    #[serde(rename = "OCplx")]
    pub ocplx: f64,
    #[serde(rename = "ACplx")]
    pub acplx: f64,
    #[serde(rename = "MCplx")]
    pub mcplx: f64,
    #[serde(rename = "TCplx")]
    pub tcplx: f64,
    #[serde(rename = "Stubs")]
    pub stubs: f64,
}

impl MeanCost {
    pub fn of(costs: &[OrderCost]) -> MeanCost {
        if costs.is_empty() {
            return MeanCost::default();
        }
        let n = costs.len() as f64;
        let sum = |f: fn(&OrderCost) -> f64| costs.iter().map(f).sum::<f64>() / n;
        MeanCost {
            ocplx: sum(|c| c.ocplx),
            acplx: sum(|c| f64::from(c.acplx)),
            mcplx: sum(|c| f64::from(c.mcplx)),
            tcplx: sum(|c| c.tcplx),
            stubs: sum(|c| f64::from(c.stub_count)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub strategy: Strategy,
    pub runs: Vec<StrategyRun>,
    pub mean: MeanCost,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_runtime_ms: Option<f64>,
    /// Mean runtime relative to the reference strategy.
    #[serde(rename = "RT", default, skip_serializing_if = "Option::is_none")]
    pub rt: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Ocplx,
    Runtime,
}

/// Paired test between the strategies at positions `a` and `b` of the
/// report's strategy list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTest {
    pub a: usize,
    pub b: usize,
    pub metric: Metric,
    pub result: WilcoxonOutcome,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub model: String,
    pub classes: usize,
    pub edges: usize,
    pub transitive: bool,
    pub max_chain_len: usize,
    pub weights: Weights,
    pub rt_base: Strategy,
    pub repeats: usize,
    /// Seconds since the Unix epoch.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
    pub strategies: Vec<StrategySummary>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub wilcoxon: Vec<PairTest>,
}

/// Chain-probability histogram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Histogram {
    #[serde(rename = "<0.01")]
    pub below_001: usize,
    #[serde(rename = "0.01-0.5")]
    pub low: usize,
    #[serde(rename = "0.5")]
    pub half: usize,
    #[serde(rename = "0.5-1")]
    pub high: usize,
    #[serde(rename = "1")]
    pub certain: usize,
}

impl Histogram {
    pub fn add(&mut self, t: f64) {
        let slot = if t < 0.01 {
            &mut self.below_001
        } else if t < 0.5 {
            &mut self.low
        } else if t == 0.5 {
            &mut self.half
        } else if t < 1.0 {
            &mut self.high
        } else {
            &mut self.certain
        };
        *slot += 1;
    }

    pub fn total(&self) -> usize {
        self.below_001 + self.low + self.half + self.high + self.certain
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatementOut {
    pub class: String,
    pub method: String,
    pub line: u32,
    pub path_condition: String,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationOut {
    pub operation: String,
    pub probability: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub statements: Vec<StatementOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainOut {
    pub path: Vec<String>,
    pub probability: f64,
    pub operations: Vec<OperationOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeReport {
    pub model: String,
    pub classes: usize,
    pub max_chain_len: usize,
    pub stats: RelationshipStats,
    /// Chains found when the length limit is 3, 4 and 5.
    pub chains_up_to: BTreeMap<usize, usize>,
    pub histogram: Histogram,
    pub chains: Vec<ChainOut>,
}

fn cell(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.prec$}"))
}

/// Aligned table, one row per strategy, then any significance tests.
pub fn render_run_table(r: &RunReport) -> String {
    let header = [
        "Strategy", "OCplx", "ACplx", "MCplx", "TCplx", "Stubs", "RT", "Order",
    ];
    let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for s in &r.strategies {
        let first = s.runs.first();
        let order = if s
            .runs
            .iter()
            .all(|x| Some(&x.order) == first.map(|f| &f.order))
        {
            first.map(|f| f.order.join(",")).unwrap_or_default()
        } else {
            "(varies)".into()
        };
        let int_like = r.repeats == 1;
        rows.push(vec![
            s.strategy.to_string(),
            format!("{:.4}", s.mean.ocplx),
            format!("{:.*}", if int_like { 0 } else { 2 }, s.mean.acplx),
            format!("{:.*}", if int_like { 0 } else { 2 }, s.mean.mcplx),
            format!("{:.4}", s.mean.tcplx),
            format!("{:.*}", if int_like { 0 } else { 2 }, s.mean.stubs),
            cell(s.rt, 3),
            order,
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = format!(
        "model {} ({} classes, {} edges)\n",
        r.model, r.classes, r.edges
    );
    for row in &rows {
        let mut line = String::new();
        for (c, v) in row.iter().enumerate() {
            if c == 0 || c == row.len() - 1 {
                let _ = write!(line, "{v:<w$}  ", w = widths[c]);
            } else {
                let _ = write!(line, "{v:>w$}  ", w = widths[c]);
            }
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    for t in &r.wilcoxon {
        let (a, b) = (r.strategies[t.a].strategy, r.strategies[t.b].strategy);
        let metric = match t.metric {
            Metric::Ocplx => "ocplx",
            Metric::Runtime => "runtime",
        };
        let verdict = match &t.result {
            WilcoxonOutcome::NoNonzeroDifferences => "no nonzero differences".to_string(),
            WilcoxonOutcome::Tested(WilcoxonResult {
                statistic,
                p_value,
                decision,
                ..
            }) => format!("W = {statistic}, p = {p_value:.4} ({decision:?})").to_lowercase(),
        };
        let _ = writeln!(
            out,
            "wilcoxon {a}[{}] vs {b}[{}] on {metric}: {verdict}",
            t.a, t.b
        );
    }
    out
}

pub fn render_analyze_table(r: &AnalyzeReport) -> String {
    let s = &r.stats;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "model {} ({} classes, chains up to {} members)",
        r.model, r.classes, r.max_chain_len
    );
    let _ = writeln!(
        out,
        "edges {}  D {}  T {}  C {}  transitive share {:.3}",
        s.edges, s.direct, s.transitive, s.combined, s.transitive_fraction
    );
    let counts: Vec<String> = r
        .chains_up_to
        .iter()
        .map(|(k, v)| format!("len<={k}: {v}"))
        .collect();
    let _ = writeln!(out, "chains {}", counts.join("  "));
    let h = &r.histogram;
    let _ = writeln!(
        out,
        "t histogram  <0.01: {}  0.01-0.5: {}  0.5: {}  0.5-1: {}  1: {}",
        h.below_001, h.low, h.half, h.high, h.certain
    );
    for c in &r.chains {
        let _ = writeln!(out, "  {} (t = {})", c.path.join(" -> "), c.probability);
        for op in &c.operations {
            let _ = writeln!(out, "    {} p = {}", op.operation, op.probability);
            for st in &op.statements {
                let _ = writeln!(
                    out,
                    "      {}.{} line {}: {} p = {}",
                    st.class, st.method, st.line, st.path_condition, st.probability
                );
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_buckets() {
        let mut h = Histogram::default();
        for t in [0.0, 0.005, 0.01, 0.3125, 0.5, 0.75, 1.0] {
            h.add(t);
        }
        assert_eq!(
            h,
            Histogram {
                below_001: 2,
                low: 2,
                half: 1,
                high: 1,
                certain: 1
            }
        );
        assert_eq!(h.total(), 7);
    }

    #[test]
    fn mean_of_costs() {
        let c = |o: f64, s: u32| OrderCost {
            ocplx: o,
            stub_count: s,
            ..OrderCost::default()
        };
        let m = MeanCost::of(&[c(1.0, 1), c(2.0, 2)]);
        assert_eq!(m.ocplx, 1.5);
        assert_eq!(m.stubs, 1.5);
        assert_eq!(MeanCost::of(&[]), MeanCost::default());
    }
}
