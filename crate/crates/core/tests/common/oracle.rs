//! Brute-force reference implementations and input generators shared by the
//! property tests and the acceptance harness. Nothing here reuses the
//! library's search or pruning code.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use cito_core::cfg::{call_operation_probability, CallOperation, Outcome};
use cito_core::cli::SynthSpec;
use cito_core::coupling::{CouplingRecord, Weights};
use cito_core::eord::{DirectKind, EdgeLabel, Eord, EordEdge};
use cito_core::frontend::ast::*;
use cito_core::model::{
    BasicBlock, BlockId, BranchStmt, Cfg, CfgEdge, Comparator, EdgeKind, MemberKind, PredicateExpr,
    ProgramModel,
};

// ---- chains ----

type Node = (String, String, MemberKind);

fn label(n: &Node) -> String {
    match n.2 {
        MemberKind::Method => format!("{}.{}()", n.0, n.1),
        MemberKind::Attribute => format!("{}.{}", n.0, n.1),
    }
}

fn shape_ok(classes: &[&str]) -> bool {
    let n = classes.len();
    let (first, last) = (classes[0], classes[n - 1]);
    if first == last {
        return false;
    }
    for k in 2..n {
        if classes[k] == classes[k - 1] && classes[k - 1] == classes[k - 2] {
            return false;
        }
    }
    let mut runs: Vec<&str> = Vec::new();
    for c in classes {
        if runs.last() != Some(c) {
            runs.push(c);
        }
    }
    runs.len() >= 3
        && runs[1..runs.len() - 1]
            .iter()
            .all(|c| *c != first && *c != last)
}

/// Every admissible member path of 3..=max_len members, keyed by its
/// rendering, with the product of call-operation probabilities.
pub fn brute_chains(model: &ProgramModel, max_len: usize) -> BTreeMap<Vec<String>, f64> {
    let mut succ: BTreeMap<Node, BTreeSet<Node>> = BTreeMap::new();
    for c in &model.classes {
        for m in &c.methods {
            for s in m.body.statements() {
                let Some(site) = &s.call_site else { continue };
                let to = (
                    site.target_class.clone(),
                    site.target_member.clone(),
                    site.member_kind,
                );
                succ.entry((c.name.clone(), m.name.clone(), MemberKind::Method))
                    .or_default()
                    .insert(to.clone());
                if let Some(a) = &s.assigns {
                    succ.entry((c.name.clone(), a.clone(), MemberKind::Attribute))
                        .or_default()
                        .insert(to);
                }
            }
        }
    }
    let mut out = BTreeMap::new();
    let mut stack: Vec<Vec<Node>> = succ.keys().map(|n| vec![n.clone()]).collect();
    while let Some(path) = stack.pop() {
        if path.len() >= 3 {
            let classes: Vec<&str> = path.iter().map(|n| n.0.as_str()).collect();
            if shape_ok(&classes) {
                let mut t = 1.0;
                for w in path.windows(2) {
                    let op = CallOperation::new(&w[0].0, &w[1].0, &w[1].1, w[1].2);
                    t *= call_operation_probability(model, &op).unwrap();
                }
                out.insert(path.iter().map(label).collect(), t);
            }
        }
        if path.len() < max_len {
            if let Some(next) = succ.get(path.last().unwrap()) {
                for n in next {
                    if !path.contains(n) {
                        let mut p = path.clone();
                        p.push(n.clone());
                        stack.push(p);
                    }
                }
            }
        }
    }
    out
}

// ---- costs ----

/// Stub cost of `order` straight from the definition.
pub fn recompute_ocplx(eord: &Eord, order: &[String], w: &Weights) -> f64 {
    let pos = |c: &str| order.iter().position(|x| x == c).unwrap();
    let mut total = 0.0;
    for e in &eord.edges {
        if pos(&e.from) < pos(&e.to) {
            let r = &e.coupling;
            total +=
                (w.wa * r.a_norm.powi(2) + w.wm * r.m_norm.powi(2) + w.wt * r.t.powi(2)).sqrt();
        }
    }
    total
}

/// Minimum cost over all permutations (Heap's algorithm).
pub fn exhaustive_min(eord: &Eord, w: &Weights) -> f64 {
    let n = eord.nodes.len();
    let index: BTreeMap<&str, usize> = eord
        .nodes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let edges: Vec<(usize, usize, f64)> = eord
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
    let cost = |perm: &[usize]| {
        let mut pos = vec![0; n];
        for (i, &v) in perm.iter().enumerate() {
            pos[v] = i;
        }
        edges
            .iter()
            .filter(|(a, b, _)| pos[*a] < pos[*b])
            .map(|e| e.2)
            .fold(0.0, |x, y| x + y)
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = cost(&perm);
    let mut c = vec![0; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(cost(&perm));
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

// ---- path conditions ----

/// `(block, outcome)` of the branch edges on every simple entry-to-`target`
/// path; `None` when `target` is unreachable.
pub fn brute_must_edges(cfg: &Cfg, target: BlockId) -> Option<BTreeSet<(BlockId, Outcome)>> {
    let mut result: Option<BTreeSet<usize>> = None;
    let mut stack: Vec<(BlockId, Vec<BlockId>, BTreeSet<usize>)> =
        vec![(cfg.entry, vec![cfg.entry], BTreeSet::new())];
    while let Some((b, visited, used)) = stack.pop() {
        if b == target {
            result = Some(match result {
                None => used,
                Some(r) => r.intersection(&used).copied().collect(),
            });
            continue;
        }
        for (i, e) in cfg.edges.iter().enumerate() {
            if e.from == b && !visited.contains(&e.to) {
                let mut v = visited.clone();
                v.push(e.to);
                let mut u = used.clone();
                if outcome(e.kind).is_some() {
                    u.insert(i);
                }
                stack.push((e.to, v, u));
            }
        }
    }
    result.map(|r| {
        r.into_iter()
            .map(|i| (cfg.edges[i].from, outcome(cfg.edges[i].kind).unwrap()))
            .collect()
    })
}

fn outcome(kind: EdgeKind) -> Option<Outcome> {
    match kind {
        EdgeKind::Fallthrough => None,
        EdgeKind::BranchTrue => Some(Outcome::True),
        EdgeKind::BranchFalse => Some(Outcome::False),
        EdgeKind::Case(k) => Some(Outcome::Case(k)),
        EdgeKind::LoopBody => Some(Outcome::LoopBody),
        EdgeKind::LoopExit => Some(Outcome::LoopExit),
    }
}

/// Random predicate trees.
pub fn predicate() -> impl Strategy<Value = PredicateExpr> {
    let leaf = (0usize..1000, 0u8..6, -5i32..5).prop_map(|(v, op, k)| {
        let op = [
            Comparator::Lt,
            Comparator::Le,
            Comparator::Gt,
            Comparator::Ge,
            Comparator::Eq,
            Comparator::Ne,
        ][op as usize];
        PredicateExpr::cmp(&format!("v{v}"), op, k)
    });
    let leaf = prop_oneof![4 => leaf, 1 => "[a-z]{1,4}\\(\\)".prop_map(PredicateExpr::Opaque)];
    leaf.prop_recursive(4, 32, 4, |inner| {
        prop_oneof![
            proptest::collection::vec(inner.clone(), 2..4).prop_map(PredicateExpr::And),
            proptest::collection::vec(inner.clone(), 2..4).prop_map(PredicateExpr::Or),
            inner.prop_map(|p| PredicateExpr::Not(Box::new(p))),
        ]
    })
}

fn leaf(k: usize) -> PredicateExpr {
    PredicateExpr::cmp(&format!("v{k}"), Comparator::Gt, 0.0)
}

/// Random CFG with up to six blocks. Block 0 is the entry.
pub fn small_cfg() -> impl Strategy<Value = Cfg> {
    (2usize..=6)
        .prop_flat_map(|n| {
            let shape = (0u8..5, 0..n, 0..n, 0..n);
            proptest::collection::vec(shape, n).prop_map(move |shapes| (n, shapes))
        })
        .prop_map(|(n, shapes)| {
            let mut blocks = Vec::new();
            let mut edges = Vec::new();
            for (id, (kind, a, b, c)) in shapes.into_iter().enumerate() {
                let id = id as BlockId;
                let (a, b, c) = (a as BlockId, b as BlockId, c as BlockId);
                let terminator = match kind {
                    0 => None,
                    1 => {
                        edges.push(CfgEdge {
                            from: id,
                            to: a,
                            kind: EdgeKind::Fallthrough,
                        });
                        None
                    }
                    2 => {
                        edges.push(CfgEdge {
                            from: id,
                            to: a,
                            kind: EdgeKind::BranchTrue,
                        });
                        edges.push(CfgEdge {
                            from: id,
                            to: b,
                            kind: EdgeKind::BranchFalse,
                        });
                        Some(BranchStmt::If(leaf(id as usize)))
                    }
                    3 => {
                        edges.push(CfgEdge {
                            from: id,
                            to: a,
                            kind: EdgeKind::LoopBody,
                        });
                        edges.push(CfgEdge {
                            from: id,
                            to: b,
                            kind: EdgeKind::LoopExit,
                        });
                        Some(BranchStmt::While(leaf(id as usize)))
                    }
                    _ => {
                        for (k, t) in [a, b, c].into_iter().enumerate() {
                            edges.push(CfgEdge {
                                from: id,
                                to: t,
                                kind: EdgeKind::Case(k as u32),
                            });
                        }
                        Some(BranchStmt::Switch { arms: 3 })
                    }
                };
                blocks.push(BasicBlock {
                    id,
                    statements: Vec::new(),
                    terminator,
                });
            }
            let _ = n;
            Cfg {
                entry: 0,
                blocks,
                edges,
            }
        })
}

// ---- models and graphs ----

/// Synthetic programs with at most eight classes.
pub fn small_spec() -> impl Strategy<Value = SynthSpec> {
    (
        2usize..=8,
        0.0f64..0.5,
        0.0f64..=1.0,
        0.0f64..=1.0,
        any::<u64>(),
    )
        .prop_map(
            |(classes, edge_density, branch_density, chain_fraction, seed)| SynthSpec {
                classes,
                edge_density,
                branch_density,
                chain_fraction,
                seed,
            },
        )
}

/// Random acyclic graph: edges only run from a later to an earlier node.
pub fn dag_eord() -> impl Strategy<Value = Eord> {
    (2usize..=8)
        .prop_flat_map(|n| {
            let edge = (0..n, 0..n, 0u32..4, 0u32..4, 0.0f64..=1.0);
            (Just(n), proptest::collection::vec(edge, 0..20))
        })
        .prop_map(|(n, raw)| {
            let name = |i: usize| format!("K{i}");
            let edges = raw
                .into_iter()
                .filter(|(a, b, ..)| a > b)
                .map(|(a, b, am, mm, t)| EordEdge {
                    from: name(a),
                    to: name(b),
                    label: EdgeLabel::C,
                    direct_kinds: [DirectKind::Association].into_iter().collect(),
                    coupling: CouplingRecord {
                        a: am,
                        m: mm,
                        t,
                        ..CouplingRecord::new(&name(a), &name(b))
                    },
                })
                .collect();
            Eord::from_edges((0..n).map(name), edges)
        })
}

// ---- significance test ----

/// Two-sided signed-rank p by enumerating all sign assignments; `None` when
/// every difference is zero.
pub fn wilcoxon_by_enumeration(diffs: &[f64]) -> Option<f64> {
    let d: Vec<f64> = diffs.iter().copied().filter(|x| *x != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return None;
    }
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    let ranks: Vec<f64> = abs
        .iter()
        .map(|a| {
            let below = abs.iter().filter(|b| *b < a).count() as f64;
            let equal = abs.iter().filter(|b| *b == a).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect();
    let observed: f64 = d
        .iter()
        .zip(&ranks)
        .filter(|(x, _)| **x > 0.0)
        .map(|(_, r)| r)
        .fold(0.0, |a, b| a + b);
    let (mut le, mut ge) = (0u64, 0u64);
    for mask in 0u64..(1 << n) {
        let w: f64 = (0..n)
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| ranks[i])
            .fold(0.0, |a, b| a + b);
        if w <= observed + 1e-9 {
            le += 1;
        }
        if w >= observed - 1e-9 {
            ge += 1;
        }
    }
    let total = (1u64 << n) as f64;
    Some((2.0 * (le.min(ge) as f64) / total).min(1.0))
}

// ---- syntax trees ----

const RESERVED: &[&str] = &[
    "class",
    "extends",
    "public",
    "private",
    "protected",
    "if",
    "else",
    "while",
    "for",
    "switch",
    "case",
    "default",
    "return",
    "break",
    "new",
    "this",
    "true",
    "false",
    "null",
    "int",
    "double",
    "boolean",
    "void",
];

fn ident() -> impl Strategy<Value = String> {
    "[a-z][a-zA-Z0-9_]{0,5}".prop_filter("keyword", |s| !RESERVED.contains(&s.as_str()))
}

fn class_ident() -> impl Strategy<Value = String> {
    "[A-Z][a-zA-Z0-9]{0,4}"
}

fn ty() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("int".to_string()),
        Just("double".to_string()),
        Just("boolean".to_string()),
        class_ident(),
    ]
}

fn e(kind: ExprAst) -> Expr {
    Expr::new(kind, 0)
}

fn s(kind: StmtAst) -> Stmt {
    Stmt::new(kind, 0)
}

fn literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        (-1_000_000_000i64..1_000_000_000).prop_map(Literal::Int),
        prop_oneof![
            (-4000i32..4000).prop_map(|k| f64::from(k) / 8.0),
            Just(1e-7),
            Just(2.5e16),
            Just(-0.0),
        ]
        .prop_map(Literal::Double),
        any::<bool>().prop_map(Literal::Bool),
    ]
}

fn binop() -> impl Strategy<Value = BinOp> {
    use BinOp::*;
    proptest::sample::select(vec![
        Or, And, Eq, Ne, Lt, Le, Gt, Ge, Add, Sub, Mul, Div, Rem,
    ])
}

/// Expressions that may be followed by `.name`.
fn receiver(inner: BoxedStrategy<Expr>) -> BoxedStrategy<Expr> {
    prop_oneof![
        ident().prop_map(|v| e(ExprAst::Var(v))),
        Just(e(ExprAst::This)),
        class_ident().prop_map(|c| e(ExprAst::New(c))),
        (ident(), ident()).prop_map(|(o, f)| e(ExprAst::Field {
            obj: Box::new(e(ExprAst::Var(o))),
            name: f
        })),
        (ident(), proptest::collection::vec(inner, 0..2)).prop_map(|(m, args)| e(ExprAst::Call {
            recv: None,
            name: m,
            args
        })),
    ]
    .boxed()
}

pub fn expr() -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        literal().prop_map(|l| e(ExprAst::Lit(l))),
        Just(e(ExprAst::Null)),
        Just(e(ExprAst::This)),
        ident().prop_map(|v| e(ExprAst::Var(v))),
        class_ident().prop_map(|c| e(ExprAst::New(c))),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            (receiver(inner.clone()), ident()).prop_map(|(obj, name)| e(ExprAst::Field {
                obj: Box::new(obj),
                name
            })),
            (
                proptest::option::of(receiver(inner.clone())),
                ident(),
                proptest::collection::vec(inner.clone(), 0..3)
            )
                .prop_map(|(recv, name, args)| e(ExprAst::Call {
                    recv: recv.map(Box::new),
                    name,
                    args
                })),
            (
                prop_oneof![Just(UnaryOp::Not), Just(UnaryOp::Neg)],
                inner.clone()
            )
                .prop_map(|(op, x)| e(ExprAst::Unary {
                    op,
                    expr: Box::new(x)
                })),
            (binop(), inner.clone(), inner).prop_map(|(op, l, r)| e(ExprAst::Binary {
                op,
                lhs: Box::new(l),
                rhs: Box::new(r)
            })),
        ]
    })
    .boxed()
}

fn lvalue() -> impl Strategy<Value = Expr> {
    prop_oneof![
        ident().prop_map(|v| e(ExprAst::Var(v))),
        (receiver(expr()), ident()).prop_map(|(obj, name)| e(ExprAst::Field {
            obj: Box::new(obj),
            name
        })),
    ]
}

fn simple_stmt() -> BoxedStrategy<Stmt> {
    prop_oneof![
        (ty(), ident(), proptest::option::of(expr()))
            .prop_map(|(ty, name, init)| s(StmtAst::VarDecl { ty, name, init })),
        (lvalue(), expr()).prop_map(|(target, value)| s(StmtAst::Assign { target, value })),
        (lvalue(), any::<bool>())
            .prop_map(|(target, increment)| s(StmtAst::Step { target, increment })),
        (
            proptest::option::of(receiver(expr())),
            ident(),
            proptest::collection::vec(expr(), 0..3)
        )
            .prop_map(|(recv, name, args)| s(StmtAst::Expr(e(ExprAst::Call {
                recv: recv.map(Box::new),
                name,
                args
            })))),
    ]
    .boxed()
}

pub fn stmt() -> BoxedStrategy<Stmt> {
    let leaf = prop_oneof![
        4 => simple_stmt(),
        1 => proptest::option::of(expr()).prop_map(|v| s(StmtAst::Return(v))),
        1 => Just(s(StmtAst::Break)),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        let block =
            proptest::collection::vec(inner.clone(), 0..4).prop_map(|b| s(StmtAst::Block(b)));
        prop_oneof![
            // An `else` needs a braced then-branch to avoid the dangling-else
            // reading.
            (expr(), inner.clone()).prop_map(|(cond, then)| s(StmtAst::If {
                cond,
                then: Box::new(then),
                els: None
            })),
            (expr(), block.clone(), inner.clone()).prop_map(|(cond, then, els)| s(StmtAst::If {
                cond,
                then: Box::new(then),
                els: Some(Box::new(els))
            })),
            (expr(), inner.clone()).prop_map(|(cond, body)| s(StmtAst::While {
                cond,
                body: Box::new(body)
            })),
            (
                proptest::option::of(simple_stmt()),
                proptest::option::of(expr()),
                proptest::option::of(
                    simple_stmt()
                        .prop_filter("no decl", |s| !matches!(s.kind, StmtAst::VarDecl { .. }))
                ),
                inner.clone()
            )
                .prop_map(|(init, cond, update, body)| s(StmtAst::For {
                    init: init.map(Box::new),
                    cond,
                    update: update.map(Box::new),
                    body: Box::new(body)
                })),
            (
                expr(),
                proptest::collection::vec(
                    (
                        proptest::option::of((-50i64..50).prop_map(Literal::Int)),
                        proptest::collection::vec(inner.clone(), 0..3)
                    ),
                    0..4
                )
            )
                .prop_map(|(scrutinee, arms)| s(StmtAst::Switch {
                    scrutinee,
                    arms: arms
                        .into_iter()
                        .map(|(label, body)| SwitchArm {
                            label,
                            body,
                            line: 0
                        })
                        .collect()
                })),
            block,
        ]
    })
    .boxed()
}

pub fn ast() -> impl Strategy<Value = Ast> {
    let field =
        (ty(), ident(), proptest::option::of(expr())).prop_map(|(ty, name, init)| FieldAst {
            ty,
            name,
            init,
            line: 0,
        });
    let param = (ty(), ident()).prop_map(|(ty, name)| ParamAst { ty, name });
    let ret = prop_oneof![Just("void".to_string()), ty()];
    let method = (
        ret,
        ident(),
        proptest::collection::vec(param, 0..3),
        proptest::collection::vec(stmt(), 0..4),
    )
        .prop_map(|(ret, name, params, body)| MethodAst {
            ret,
            name,
            params,
            body,
            line: 0,
        });
    let class = (
        class_ident(),
        proptest::option::of(class_ident()),
        proptest::collection::vec(field, 0..3),
        proptest::collection::vec(method, 0..3),
    )
        .prop_map(|(name, extends, fields, methods)| ClassAst {
            name,
            extends,
            fields,
            methods,
            line: 0,
        });
    proptest::collection::vec(class, 0..3).prop_map(|classes| Ast { classes })
}
