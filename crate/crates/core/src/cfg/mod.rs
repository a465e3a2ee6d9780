//! Path conditions and execution probabilities of call operations.
//!
//! A statement's path condition is the set of branch edges that lie on every
//! entry-to-statement path of its method's CFG, ordered from the entry. Its
//! probability is the product of the branch-outcome probabilities, or 0 when
//! the asserted comparisons cannot hold together.

mod predicate;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;
use thiserror::Error;

use crate::model::*;

pub use predicate::{expr_probability, predicate_probability};

/// A member reference made from anywhere in `source_class`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CallOperation {
    pub source_class: String,
    pub target_class: String,
    pub target_member: String,
    pub member_kind: MemberKind,
}

impl CallOperation {
    pub fn new(source: &str, target: &str, member: &str, kind: MemberKind) -> Self {
        CallOperation {
            source_class: source.into(),
            target_class: target.into(),
            target_member: member.into(),
            member_kind: kind,
        }
    }

    pub fn method(source: &str, target: &str, member: &str) -> Self {
        Self::new(source, target, member, MemberKind::Method)
    }

    fn matches(&self, site: &CallSite) -> bool {
        site.target_class == self.target_class
            && site.target_member == self.target_member
            && site.member_kind == self.member_kind
    }
}

/// Edge taken out of a governing branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    True,
    False,
    Case(u32),
    LoopBody,
    LoopExit,
}

impl Outcome {
    fn of(kind: EdgeKind) -> Option<Outcome> {
        match kind {
            EdgeKind::Fallthrough => None,
            EdgeKind::BranchTrue => Some(Outcome::True),
            EdgeKind::BranchFalse => Some(Outcome::False),
            EdgeKind::Case(k) => Some(Outcome::Case(k)),
            EdgeKind::LoopBody => Some(Outcome::LoopBody),
            EdgeKind::LoopExit => Some(Outcome::LoopExit),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Conjunct {
    /// Block whose terminator governs this conjunct.
    pub block: BlockId,
    pub branch: BranchKind,
    pub predicate: Option<PredicateExpr>,
    pub outcome: Outcome,
}

impl Conjunct {
    pub fn probability(&self) -> f64 {
        predicate_probability(self.predicate.as_ref(), self.outcome, self.branch)
    }

    /// Comparison asserted by an if-conjunct whose predicate is a literal.
    fn asserted(&self) -> Vec<Comparison> {
        if self.branch != BranchKind::If {
            return Vec::new();
        }
        let Some(pred) = &self.predicate else {
            return Vec::new();
        };
        match (self.outcome, pred) {
            (Outcome::True, PredicateExpr::And(args)) => {
                args.iter().filter_map(predicate::literal).collect()
            }
            (Outcome::True, p) => predicate::literal(p).into_iter().collect(),
            (Outcome::False, p) => predicate::literal(p)
                .map(|c| Comparison {
                    op: c.op.negate(),
                    ..c
                })
                .into_iter()
                .collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathCondition {
    pub conjuncts: Vec<Conjunct>,
}

impl PathCondition {
    pub fn is_empty(&self) -> bool {
        self.conjuncts.is_empty()
    }

    /// Product of conjunct probabilities; 0 when literal conjuncts on one
    /// variable contradict each other across branches.
    pub fn probability(&self) -> f64 {
        if predicate::contradictory(self.conjuncts.iter().flat_map(Conjunct::asserted)) {
            return 0.0;
        }
        self.conjuncts.iter().map(Conjunct::probability).product()
    }
}

impl std::fmt::Display for PathCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.conjuncts.is_empty() {
            return f.write_str("{}");
        }
        let parts: Vec<String> = self
            .conjuncts
            .iter()
            .map(|c| match (&c.predicate, c.outcome) {
                (_, Outcome::Case(k)) => format!("case {k}"),
                (Some(p), Outcome::True) => p.to_string(),
                (Some(p), Outcome::False) => format!("!({p})"),
                (Some(p), Outcome::LoopBody) => format!("loop({p})"),
                (Some(p), Outcome::LoopExit) => format!("exit({p})"),
                (None, o) => format!("{o:?}"),
            })
            .collect();
        write!(f, "{{{}}}", parts.join(" && "))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StmtProbability {
    pub stmt: StmtRef,
    pub path_condition: PathCondition,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CfgError {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("unknown {kind} `{class}.{member}`")]
    UnknownMember {
        class: String,
        member: String,
        kind: MemberKind,
    },
    #[error("unknown statement {0}")]
    UnknownStatement(StmtRef),
}

/// Statements of `op.source_class` whose call site matches `op`, in id order.
pub fn extract_statements(
    model: &ProgramModel,
    op: &CallOperation,
) -> Result<Vec<StmtRef>, CfgError> {
    let source = model
        .class(&op.source_class)
        .ok_or_else(|| CfgError::UnknownClass(op.source_class.clone()))?;
    if model.class(&op.target_class).is_none() {
        return Err(CfgError::UnknownClass(op.target_class.clone()));
    }
    if !model.member_exists(&op.target_class, &op.target_member, op.member_kind) {
        return Err(CfgError::UnknownMember {
            class: op.target_class.clone(),
            member: op.target_member.clone(),
            kind: op.member_kind,
        });
    }
    let mut out = Vec::new();
    for m in &source.methods {
        for s in m.body.statements() {
            if s.call_site.as_ref().is_some_and(|site| op.matches(site)) {
                out.push(StmtRef::new(&source.name, &m.name, s.id));
            }
        }
    }
    out.sort();
    Ok(out)
}

/// Branch edges present on every entry-to-`block` path, in entry order.
pub fn block_path_condition(cfg: &Cfg, block: BlockId) -> PathCondition {
    let must = must_edges(cfg);
    conjuncts_of(cfg, must.get(&block).cloned().unwrap_or_default())
}

pub fn gen_path_condition(model: &ProgramModel, stmt: &StmtRef) -> Result<PathCondition, CfgError> {
    let (cfg, block) = locate(model, stmt)?;
    Ok(block_path_condition(cfg, block))
}

pub fn statement_probability(
    model: &ProgramModel,
    stmt: &StmtRef,
) -> Result<StmtProbability, CfgError> {
    let path_condition = gen_path_condition(model, stmt)?;
    Ok(StmtProbability {
        stmt: stmt.clone(),
        probability: path_condition.probability(),
        path_condition,
    })
}

/// `1 - Π(1 - p(s))` over the statements matching `op`; 0 when none match.
pub fn call_operation_probability(
    model: &ProgramModel,
    op: &CallOperation,
) -> Result<f64, CfgError> {
    let mut miss = 1.0;
    for s in extract_statements(model, op)? {
        miss *= 1.0 - statement_probability(model, &s)?.probability;
    }
    Ok(1.0 - miss)
}

fn locate<'m>(model: &'m ProgramModel, stmt: &StmtRef) -> Result<(&'m Cfg, BlockId), CfgError> {
    let cfg = &model
        .method(&stmt.class, &stmt.method)
        .ok_or_else(|| CfgError::UnknownStatement(stmt.clone()))?
        .body;
    let block = cfg
        .block_of(stmt.ordinal)
        .ok_or_else(|| CfgError::UnknownStatement(stmt.clone()))?;
    Ok((cfg, block))
}

/// Greatest fixpoint of `Must(b) = ∩ over preds p of (Must(p) ∪ {p→b if branch})`
/// with `Must(entry) = ∅`. Edges are indices into `cfg.edges`.
fn must_edges(cfg: &Cfg) -> HashMap<BlockId, BTreeSet<usize>> {
    let order = reverse_postorder(cfg);
    let mut must: HashMap<BlockId, Option<BTreeSet<usize>>> =
        order.iter().map(|&b| (b, None)).collect();
    must.insert(cfg.entry, Some(BTreeSet::new()));
    let mut changed = true;
    while changed {
        changed = false;
        for &b in &order {
            if b == cfg.entry {
                continue;
            }
            let mut acc: Option<BTreeSet<usize>> = None;
            for (i, e) in cfg.edges.iter().enumerate().filter(|(_, e)| e.to == b) {
                let Some(Some(from)) = must.get(&e.from) else {
                    continue;
                };
                let mut via = from.clone();
                if e.kind.is_branch() {
                    via.insert(i);
                }
                acc = Some(match acc {
                    None => via,
                    Some(a) => a.intersection(&via).copied().collect(),
                });
            }
            if acc.is_some() && must[&b] != acc {
                must.insert(b, acc);
                changed = true;
            }
        }
    }
    must.into_iter()
        .map(|(b, s)| (b, s.unwrap_or_default()))
        .collect()
}

fn reverse_postorder(cfg: &Cfg) -> Vec<BlockId> {
    let mut seen = BTreeSet::new();
    let mut post = Vec::new();
    let mut stack = vec![(cfg.entry, false)];
    while let Some((b, done)) = stack.pop() {
        if done {
            post.push(b);
            continue;
        }
        if !seen.insert(b) {
            continue;
        }
        stack.push((b, true));
        let succ: Vec<BlockId> = cfg.successors(b).map(|e| e.to).collect();
        for s in succ.into_iter().rev() {
            if !seen.contains(&s) {
                stack.push((s, false));
            }
        }
    }
    post.reverse();
    post
}

fn conjuncts_of(cfg: &Cfg, edges: BTreeSet<usize>) -> PathCondition {
    let rank: BTreeMap<BlockId, usize> = reverse_postorder(cfg)
        .into_iter()
        .enumerate()
        .map(|(i, b)| (b, i))
        .collect();
    let mut edges: Vec<&CfgEdge> = edges.into_iter().map(|i| &cfg.edges[i]).collect();
    edges.sort_by_key(|e| (rank.get(&e.from), rank.get(&e.to), e.kind));
    let conjuncts = edges
        .into_iter()
        .filter_map(|e| {
            let term = cfg.block(e.from)?.terminator.as_ref()?;
            Some(Conjunct {
                block: e.from,
                branch: term.kind(),
                predicate: term.predicate().cloned(),
                outcome: Outcome::of(e.kind)?,
            })
        })
        .collect();
    PathCondition { conjuncts }
}

/// Every statement probability and call-operation probability of a model,
/// computed once.
#[derive(Debug, Clone, Default)]
pub struct ProbabilityIndex {
    statements: BTreeMap<StmtRef, StmtProbability>,
    ops: BTreeMap<CallOperation, f64>,
}

impl ProbabilityIndex {
    pub fn build(model: &ProgramModel) -> Self {
        let mut statements = BTreeMap::new();
        let mut miss: BTreeMap<CallOperation, f64> = BTreeMap::new();
        for c in &model.classes {
            for m in &c.methods {
                let must = must_edges(&m.body);
                for b in &m.body.blocks {
                    let pc = conjuncts_of(&m.body, must.get(&b.id).cloned().unwrap_or_default());
                    let p = pc.probability();
                    for s in &b.statements {
                        let id = StmtRef::new(&c.name, &m.name, s.id);
                        if let Some(site) = &s.call_site {
                            let op = CallOperation::new(
                                &c.name,
                                &site.target_class,
                                &site.target_member,
                                site.member_kind,
                            );
                            *miss.entry(op).or_insert(1.0) *= 1.0 - p;
                        }
                        statements.insert(
                            id.clone(),
                            StmtProbability {
                                stmt: id,
                                path_condition: pc.clone(),
                                probability: p,
                            },
                        );
                    }
                }
            }
        }
        let ops = miss.into_iter().map(|(op, m)| (op, 1.0 - m)).collect();
        ProbabilityIndex { statements, ops }
    }

    pub fn statement(&self, id: &StmtRef) -> Option<&StmtProbability> {
        self.statements.get(id)
    }

    /// Probability of `op`; 0 for operations with no statements.
    pub fn operation(&self, op: &CallOperation) -> f64 {
        self.ops.get(op).copied().unwrap_or(0.0)
    }

    pub fn operations(&self) -> impl Iterator<Item = (&CallOperation, f64)> {
        self.ops.iter().map(|(k, v)| (k, *v))
    }
}
