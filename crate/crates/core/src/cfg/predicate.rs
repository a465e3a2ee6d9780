//! Probability rules for branch predicates.

use std::collections::BTreeMap;

use crate::model::{BranchKind, Comparator, Comparison, Operand, PredicateExpr};

use super::Outcome;

/// Probability that `pred` evaluates to true.
///
/// Leaves and opaque atoms count 0.5, `NOT` complements, `AND` multiplies,
/// `OR` takes the complement product. An `AND` whose comparison operands on
/// one variable cannot hold together is 0.
pub fn expr_probability(pred: &PredicateExpr) -> f64 {
    match pred {
        PredicateExpr::Compare(_) | PredicateExpr::Opaque(_) => 0.5,
        PredicateExpr::Not(inner) => 1.0 - expr_probability(inner),
        PredicateExpr::And(args) => {
            if contradictory(args.iter().filter_map(literal)) {
                return 0.0;
            }
            args.iter().map(expr_probability).product()
        }
        PredicateExpr::Or(args) => {
            1.0 - args
                .iter()
                .map(|a| 1.0 - expr_probability(a))
                .product::<f64>()
        }
    }
}

/// Probability that a branch of kind `kind` takes the `outcome` edge.
/// `pred` is ignored for switches and loops.
pub fn predicate_probability(
    pred: Option<&PredicateExpr>,
    outcome: Outcome,
    kind: BranchKind,
) -> f64 {
    match (kind, outcome) {
        (BranchKind::Switch { arms }, _) => 1.0 / f64::from(arms.max(1)),
        (_, Outcome::LoopBody | Outcome::LoopExit) => 1.0,
        (_, Outcome::True) => pred.map_or(0.5, expr_probability),
        (_, Outcome::False) => 1.0 - pred.map_or(0.5, expr_probability),
        (_, Outcome::Case(_)) => 1.0,
    }
}

/// The comparison a conjunct asserts, if it is a plain literal.
pub(crate) fn literal(pred: &PredicateExpr) -> Option<Comparison> {
    match pred {
        PredicateExpr::Compare(c) => Some(c.clone()),
        PredicateExpr::Not(inner) => match inner.as_ref() {
            PredicateExpr::Compare(c) => Some(Comparison {
                var: c.var.clone(),
                op: c.op.negate(),
                rhs: c.rhs.clone(),
            }),
            _ => None,
        },
        _ => None,
    }
}

#[derive(Debug, Default)]
struct Range {
    lo: Option<(f64, bool)>,
    hi: Option<(f64, bool)>,
    excluded: Vec<f64>,
    truth: Option<bool>,
    empty: bool,
}

impl Range {
    fn raise_lo(&mut self, v: f64, inclusive: bool) {
        let tighter = match self.lo {
            None => true,
            Some((l, li)) => v > l || (v == l && li && !inclusive),
        };
        if tighter {
            self.lo = Some((v, inclusive));
        }
    }

    fn lower_hi(&mut self, v: f64, inclusive: bool) {
        let tighter = match self.hi {
            None => true,
            Some((h, hi)) => v < h || (v == h && hi && !inclusive),
        };
        if tighter {
            self.hi = Some((v, inclusive));
        }
    }

    fn add(&mut self, op: Comparator, rhs: &Operand) {
        match rhs {
            Operand::Num(v) => match op {
                Comparator::Lt => self.lower_hi(*v, false),
                Comparator::Le => self.lower_hi(*v, true),
                Comparator::Gt => self.raise_lo(*v, false),
                Comparator::Ge => self.raise_lo(*v, true),
                Comparator::Eq => {
                    self.raise_lo(*v, true);
                    self.lower_hi(*v, true);
                }
                Comparator::Ne => self.excluded.push(*v),
            },
            Operand::Bool(b) => {
                let want = match op {
                    Comparator::Eq => *b,
                    Comparator::Ne => !*b,
                    _ => return,
                };
                match self.truth {
                    Some(t) if t != want => self.empty = true,
                    _ => self.truth = Some(want),
                }
            }
            Operand::Var(_) => {}
        }
    }

    fn is_empty(&self) -> bool {
        if self.empty {
            return true;
        }
        match (self.lo, self.hi) {
            (Some((l, li)), Some((h, hi))) => {
                l > h || (l == h && !(li && hi)) || (l == h && self.excluded.contains(&l))
            }
            _ => false,
        }
    }
}

/// True when the conjunction of `lits` is unsatisfiable by interval reasoning
/// on each variable separately.
pub(crate) fn contradictory(lits: impl IntoIterator<Item = Comparison>) -> bool {
    let mut ranges: BTreeMap<String, Range> = BTreeMap::new();
    for c in lits {
        ranges.entry(c.var).or_default().add(c.op, &c.rhs);
    }
    ranges.values().any(Range::is_empty)
}
