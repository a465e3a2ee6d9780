//! Syntax tree for the `.minij` demo language.
//!
//! Every node carries the 1-based source line it started on.

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ast {
    pub classes: Vec<ClassAst>,
}

impl Ast {
    /// Concatenates several parsed units into one program.
    pub fn merge(units: impl IntoIterator<Item = Ast>) -> Ast {
        Ast {
            classes: units.into_iter().flat_map(|u| u.classes).collect(),
        }
    }

    /// Resets every line number to zero, for comparisons that ignore layout.
    pub fn erase_lines(&mut self) {
        for c in &mut self.classes {
            c.line = 0;
            for f in &mut c.fields {
                f.line = 0;
                if let Some(init) = &mut f.init {
                    init.erase_lines();
                }
            }
            for m in &mut c.methods {
                m.line = 0;
                for s in &mut m.body {
                    s.erase_lines();
                }
            }
        }
    }

    pub fn method_count(&self) -> usize {
        self.classes.iter().map(|c| c.methods.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassAst {
    pub name: String,
    pub extends: Option<String>,
    pub fields: Vec<FieldAst>,
    pub methods: Vec<MethodAst>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldAst {
    pub ty: String,
    pub name: String,
    pub init: Option<Expr>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamAst {
    pub ty: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodAst {
    pub ret: String,
    pub name: String,
    pub params: Vec<ParamAst>,
    pub body: Vec<Stmt>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtAst,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtAst {
    If {
        cond: Expr,
        then: Box<Stmt>,
        els: Option<Box<Stmt>>,
    },
    While {
        cond: Expr,
        body: Box<Stmt>,
    },
    For {
        init: Option<Box<Stmt>>,
        cond: Option<Expr>,
        update: Option<Box<Stmt>>,
        body: Box<Stmt>,
    },
    Switch {
        scrutinee: Expr,
        arms: Vec<SwitchArm>,
    },
    Return(Option<Expr>),
    Break,
    Block(Vec<Stmt>),
    VarDecl {
        ty: String,
        name: String,
        init: Option<Expr>,
    },
    Assign {
        target: Expr,
        value: Expr,
    },
    /// `x++` / `x--`
    Step {
        target: Expr,
        increment: bool,
    },
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchArm {
    /// `None` for `default`.
    pub label: Option<Literal>,
    pub body: Vec<Stmt>,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    Double(f64),
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprAst,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Lit(Literal),
    Null,
    This,
    Var(String),
    Field {
        obj: Box<Expr>,
        name: String,
    },
    Call {
        recv: Option<Box<Expr>>,
        name: String,
        args: Vec<Expr>,
    },
    New(String),
    Unary {
        op: UnaryOp,
        expr: Box<Expr>,
    },
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "||",
            BinOp::And => "&&",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge
        )
    }
}

impl Expr {
    pub fn new(kind: ExprAst, line: u32) -> Expr {
        Expr { kind, line }
    }

    fn erase_lines(&mut self) {
        self.line = 0;
        match &mut self.kind {
            ExprAst::Field { obj, .. } => obj.erase_lines(),
            ExprAst::Call { recv, args, .. } => {
                if let Some(r) = recv {
                    r.erase_lines();
                }
                args.iter_mut().for_each(Expr::erase_lines);
            }
            ExprAst::Unary { expr, .. } => expr.erase_lines(),
            ExprAst::Binary { lhs, rhs, .. } => {
                lhs.erase_lines();
                rhs.erase_lines();
            }
            ExprAst::Lit(_) | ExprAst::Null | ExprAst::This | ExprAst::Var(_) | ExprAst::New(_) => {
            }
        }
    }
}

impl Stmt {
    pub fn new(kind: StmtAst, line: u32) -> Stmt {
        Stmt { kind, line }
    }

    fn erase_lines(&mut self) {
        self.line = 0;
        match &mut self.kind {
            StmtAst::If { cond, then, els } => {
                cond.erase_lines();
                then.erase_lines();
                if let Some(e) = els {
                    e.erase_lines();
                }
            }
            StmtAst::While { cond, body } => {
                cond.erase_lines();
                body.erase_lines();
            }
            StmtAst::For {
                init,
                cond,
                update,
                body,
            } => {
                if let Some(i) = init {
                    i.erase_lines();
                }
                if let Some(c) = cond {
                    c.erase_lines();
                }
                if let Some(u) = update {
                    u.erase_lines();
                }
                body.erase_lines();
            }
            StmtAst::Switch { scrutinee, arms } => {
                scrutinee.erase_lines();
                for a in arms {
                    a.line = 0;
                    a.body.iter_mut().for_each(Stmt::erase_lines);
                }
            }
            StmtAst::Return(e) => {
                if let Some(e) = e {
                    e.erase_lines();
                }
            }
            StmtAst::Break => {}
            StmtAst::Block(body) => body.iter_mut().for_each(Stmt::erase_lines),
            StmtAst::VarDecl { init, .. } => {
                if let Some(e) = init {
                    e.erase_lines();
                }
            }
            StmtAst::Assign { target, value } => {
                target.erase_lines();
                value.erase_lines();
            }
            StmtAst::Step { target, .. } => target.erase_lines(),
            StmtAst::Expr(e) => e.erase_lines(),
        }
    }

    /// Number of statements in this subtree, counting `self`.
    pub fn count(&self) -> usize {
        1 + match &self.kind {
            StmtAst::If { then, els, .. } => then.count() + els.as_ref().map_or(0, |e| e.count()),
            StmtAst::While { body, .. } => body.count(),
            StmtAst::For {
                init, update, body, ..
            } => {
                init.as_ref().map_or(0, |s| s.count())
                    + update.as_ref().map_or(0, |s| s.count())
                    + body.count()
            }
            StmtAst::Switch { arms, .. } => arms
                .iter()
                .flat_map(|a| a.body.iter())
                .map(Stmt::count)
                .sum(),
            StmtAst::Block(body) => body.iter().map(Stmt::count).sum(),
            _ => 0,
        }
    }
}
