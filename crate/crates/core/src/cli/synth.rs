//! Seeded generator of synthetic `.minij` programs.
//!
//! Every chosen ordered class pair `(i, j)` becomes an object-typed field of
//! `j` in `i` plus at least one call from `i` into `j`, so the direct graph
//! has exactly the requested number of edges. No inheritance is generated.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::frontend::ast::*;
use crate::frontend::lower_named;
use crate::model::ProgramModel;

const METHODS_PER_CLASS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub classes: usize,
    /// Fraction of ordered class pairs joined by a direct dependency.
    pub edge_density: f64,
    /// Probability that a call sits under a branch.
    pub branch_density: f64,
    /// Probability that a call targets a method that itself makes calls.
    pub chain_fraction: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            classes: 10,
            edge_density: 0.2,
            branch_density: 0.5,
            chain_fraction: 0.5,
            seed: 1,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), String> {
        if self.classes == 0 {
            return Err("class count must be at least 1".into());
        }
        for (name, v) in [
            ("edge density", self.edge_density),
            ("branch density", self.branch_density),
            ("chain fraction", self.chain_fraction),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        Ok(())
    }

    /// Number of ordered pairs that receive an edge.
    pub fn edge_count(&self) -> usize {
        let n = self.classes;
        (self.edge_density * (n * n.saturating_sub(1)) as f64).round() as usize
    }
}

pub fn class_name(i: usize, n: usize) -> String {
    let width = (n.max(2) - 1).to_string().len();
    format!("C{i:0width$}")
}

fn e(kind: ExprAst) -> Expr {
    Expr::new(kind, 0)
}

fn s(kind: StmtAst) -> Stmt {
    Stmt::new(kind, 0)
}

fn var(name: &str) -> Expr {
    e(ExprAst::Var(name.into()))
}

fn int(n: i64) -> Expr {
    e(ExprAst::Lit(Literal::Int(n)))
}

fn bin(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
    e(ExprAst::Binary {
        op,
        lhs: Box::new(lhs),
        rhs: Box::new(rhs),
    })
}

struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    fn comparison(&mut self) -> Expr {
        let ops = [
            BinOp::Lt,
            BinOp::Le,
            BinOp::Gt,
            BinOp::Ge,
            BinOp::Eq,
            BinOp::Ne,
        ];
        let op = *ops.choose(&mut self.rng).unwrap();
        let lhs = if self.rng.gen_bool(0.5) {
            var("p")
        } else {
            var("v")
        };
        let rhs = if self.rng.gen_bool(0.2) {
            e(ExprAst::Lit(Literal::Double(
                f64::from(self.rng.gen_range(0..40)) / 4.0,
            )))
        } else {
            int(self.rng.gen_range(-3..10))
        };
        bin(op, lhs, rhs)
    }

    fn condition(&mut self) -> Expr {
        match self.rng.gen_range(0..6) {
            0 => bin(BinOp::And, self.comparison(), self.comparison()),
            1 => bin(BinOp::Or, self.comparison(), self.comparison()),
            2 => e(ExprAst::Unary {
                op: UnaryOp::Not,
                expr: Box::new(self.comparison()),
            }),
            3 => var("flag"),
            _ => self.comparison(),
        }
    }

    /// Wraps `body` in a random branch construct.
    fn guard(&mut self, body: Stmt) -> Stmt {
        let block = |b: Stmt| Box::new(s(StmtAst::Block(vec![b])));
        match self.rng.gen_range(0..5) {
            0 => s(StmtAst::If {
                cond: self.condition(),
                then: block(body),
                els: None,
            }),
            1 => {
                let other = s(StmtAst::Assign {
                    target: var("v"),
                    value: bin(BinOp::Add, var("v"), int(1)),
                });
                if self.rng.gen_bool(0.5) {
                    s(StmtAst::If {
                        cond: self.condition(),
                        then: block(other),
                        els: Some(block(body)),
                    })
                } else {
                    s(StmtAst::If {
                        cond: self.condition(),
                        then: block(body),
                        els: Some(block(other)),
                    })
                }
            }
            2 => s(StmtAst::While {
                cond: self.comparison(),
                body: Box::new(s(StmtAst::Block(vec![
                    body,
                    s(StmtAst::Step {
                        target: var("p"),
                        increment: false,
                    }),
                ]))),
            }),
            3 => s(StmtAst::For {
                init: Some(Box::new(s(StmtAst::VarDecl {
                    ty: "int".into(),
                    name: "i".into(),
                    init: Some(int(0)),
                }))),
                cond: Some(bin(BinOp::Lt, var("i"), var("p"))),
                update: Some(Box::new(s(StmtAst::Step {
                    target: var("i"),
                    increment: true,
                }))),
                body: block(body),
            }),
            _ => {
                let arms = self.rng.gen_range(1..4);
                let hit = self.rng.gen_range(0..arms);
                let mut out = Vec::new();
                for k in 0..arms {
                    let mut stmts = Vec::new();
                    if k == hit {
                        stmts.push(body.clone());
                    }
                    stmts.push(s(StmtAst::Break));
                    out.push(SwitchArm {
                        label: Some(Literal::Int(k as i64)),
                        body: stmts,
                        line: 0,
                    });
                }
                if self.rng.gen_bool(0.5) {
                    out.push(SwitchArm {
                        label: None,
                        body: vec![s(StmtAst::Assign {
                            target: var("v"),
                            value: int(0),
                        })],
                        line: 0,
                    });
                }
                s(StmtAst::Switch {
                    scrutinee: var("p"),
                    arms: out,
                })
            }
        }
    }
}

/// Synthetic program as a syntax tree (all line numbers 0).
pub fn generate_synthetic_ast(spec: &SynthSpec) -> Ast {
    let n = spec.classes;
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(spec.seed),
    };
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    pairs.shuffle(&mut g.rng);
    pairs.truncate(spec.edge_count());
    pairs.sort_unstable();

    // Host method in the caller for each pair, decided up front so that
    // targets can prefer methods that make calls.
    let hosts: Vec<usize> = pairs
        .iter()
        .map(|_| g.rng.gen_range(0..METHODS_PER_CLASS))
        .collect();
    let mut calling = vec![vec![false; METHODS_PER_CLASS]; n];
    for (&(i, _), &h) in pairs.iter().zip(&hosts) {
        calling[i][h] = true;
    }

    let mut bodies: Vec<Vec<Vec<Stmt>>> = vec![vec![Vec::new(); METHODS_PER_CLASS]; n];
    let mut fields: Vec<Vec<FieldAst>> = (0..n)
        .map(|_| {
            vec![
                FieldAst {
                    ty: "int".into(),
                    name: "v".into(),
                    init: None,
                    line: 0,
                },
                FieldAst {
                    ty: "boolean".into(),
                    name: "flag".into(),
                    init: Some(e(ExprAst::Lit(Literal::Bool(true)))),
                    line: 0,
                },
            ]
        })
        .collect();
    for (&(i, j), &host) in pairs.iter().zip(&hosts) {
        let cj = class_name(j, n);
        let field = format!("f{j}");
        fields[i].push(FieldAst {
            ty: cj.clone(),
            name: field.clone(),
            init: Some(e(ExprAst::New(cj))),
            line: 0,
        });
        let chained: Vec<usize> = (0..METHODS_PER_CLASS).filter(|&k| calling[j][k]).collect();
        let target = if !chained.is_empty() && g.rng.gen_bool(spec.chain_fraction) {
            *chained.choose(&mut g.rng).unwrap()
        } else {
            g.rng.gen_range(0..METHODS_PER_CLASS)
        };
        let call = e(ExprAst::Call {
            recv: Some(Box::new(var(&field))),
            name: format!("m{target}"),
            args: vec![var("p")],
        });
        let stmt = match g.rng.gen_range(0..4) {
            0 => s(StmtAst::Assign {
                target: var("v"),
                value: bin(BinOp::Add, call, int(1)),
            }),
            1 => s(StmtAst::VarDecl {
                ty: "int".into(),
                name: format!("r{j}"),
                init: Some(call),
            }),
            _ => s(StmtAst::Expr(call)),
        };
        let stmt = if g.rng.gen_bool(spec.branch_density) {
            g.guard(stmt)
        } else {
            stmt
        };
        bodies[i][host].push(stmt);
        if g.rng.gen_bool(0.25) {
            bodies[i][host].push(s(StmtAst::Assign {
                target: var("v"),
                value: e(ExprAst::Field {
                    obj: Box::new(var(&field)),
                    name: "v".into(),
                }),
            }));
        }
    }

    let classes = (0..n)
        .map(|i| ClassAst {
            name: class_name(i, n),
            extends: None,
            fields: std::mem::take(&mut fields[i]),
            methods: (0..METHODS_PER_CLASS)
                .map(|k| {
                    let mut body = std::mem::take(&mut bodies[i][k]);
                    body.push(s(StmtAst::Return(Some(var("v")))));
                    MethodAst {
                        ret: "int".into(),
                        name: format!("m{k}"),
                        params: vec![ParamAst {
                            ty: "int".into(),
                            name: "p".into(),
                        }],
                        body,
                        line: 0,
                    }
                })
                .collect(),
            line: 0,
        })
        .collect();
    Ast { classes }
}

/// Synthetic program model, deterministic in `spec`.
pub fn generate_synthetic(spec: &SynthSpec) -> ProgramModel {
    let ast = generate_synthetic_ast(spec);
    lower_named(&ast, &format!("synthetic-{}", spec.seed))
        .expect("generated programs always resolve")
}
