//! Program model: classes, members, and per-method control-flow graphs.
//!
//! A [`ProgramModel`] is immutable once loaded. Every analysis in the crate
//! borrows it read-only.

mod pmif;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use pmif::{load_pmif, save_pmif, validate, PmifError, PMIF_VERSION};

/// Whole-program model.
#[derive(Debug, Clone, PartialEq)]
pub struct ProgramModel {
    pub name: String,
    pub classes: Vec<ClassDecl>,
}

impl ProgramModel {
    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn class_names(&self) -> Vec<String> {
        self.classes.iter().map(|c| c.name.clone()).collect()
    }

    pub fn method(&self, class: &str, method: &str) -> Option<&MethodDecl> {
        self.class(class)?.method(method)
    }

    /// Looks up a statement by its full id.
    pub fn statement(&self, id: &StmtRef) -> Option<&Statement> {
        self.method(&id.class, &id.method)?
            .body
            .blocks
            .iter()
            .flat_map(|b| b.statements.iter())
            .find(|s| s.id == id.ordinal)
    }

    /// Statements of `class` at a given source line, in id order.
    pub fn statements_at_line(&self, class: &str, line: u32) -> Vec<StmtRef> {
        let Some(c) = self.class(class) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for m in &c.methods {
            for s in m.body.statements() {
                if s.line == line {
                    out.push(StmtRef::new(&c.name, &m.name, s.id));
                }
            }
        }
        out.sort();
        out
    }

    pub fn member_exists(&self, class: &str, member: &str, kind: MemberKind) -> bool {
        match self.class(class) {
            Some(c) => match kind {
                MemberKind::Method => c.method(member).is_some(),
                MemberKind::Attribute => c.attribute(member).is_some(),
            },
            None => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    pub name: String,
    pub extends: Option<String>,
    pub attributes: Vec<AttributeDecl>,
    pub methods: Vec<MethodDecl>,
}

impl ClassDecl {
    pub fn method(&self, name: &str) -> Option<&MethodDecl> {
        self.methods.iter().find(|m| m.name == name)
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeDecl> {
        self.attributes.iter().find(|a| a.name == name)
    }

    /// Classes named by attribute types (aggregation/association targets).
    pub fn field_object_types(&self) -> BTreeSet<&str> {
        self.attributes
            .iter()
            .filter_map(|a| a.ty.class_name())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeDecl {
    pub name: String,
    pub ty: TypeRef,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: TypeRef,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub return_type: TypeRef,
    pub body: Cfg,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeRef {
    Int,
    Double,
    Boolean,
    Void,
    Class(String),
}

impl TypeRef {
    /// Parses a type name; anything that is not a scalar or `void` is a class.
    pub fn parse(name: &str) -> TypeRef {
        match name {
            "int" => TypeRef::Int,
            "double" => TypeRef::Double,
            "boolean" => TypeRef::Boolean,
            "void" => TypeRef::Void,
            other => TypeRef::Class(other.to_string()),
        }
    }

    pub fn class_name(&self) -> Option<&str> {
        match self {
            TypeRef::Class(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRef::Int => f.write_str("int"),
            TypeRef::Double => f.write_str("double"),
            TypeRef::Boolean => f.write_str("boolean"),
            TypeRef::Void => f.write_str("void"),
            TypeRef::Class(c) => f.write_str(c),
        }
    }
}

pub type BlockId = u32;

/// Control-flow graph of one method body.
#[derive(Debug, Clone, PartialEq)]
pub struct Cfg {
    pub entry: BlockId,
    pub blocks: Vec<BasicBlock>,
    pub edges: Vec<CfgEdge>,
}

impl Cfg {
    pub fn block(&self, id: BlockId) -> Option<&BasicBlock> {
        self.blocks.iter().find(|b| b.id == id)
    }

    pub fn statements(&self) -> impl Iterator<Item = &Statement> {
        self.blocks.iter().flat_map(|b| b.statements.iter())
    }

    /// Block holding the statement with the given ordinal.
    pub fn block_of(&self, ordinal: u32) -> Option<BlockId> {
        self.blocks
            .iter()
            .find(|b| b.statements.iter().any(|s| s.id == ordinal))
            .map(|b| b.id)
    }

    pub fn successors(&self, id: BlockId) -> impl Iterator<Item = &CfgEdge> {
        self.edges.iter().filter(move |e| e.from == id)
    }

    pub fn predecessors(&self, id: BlockId) -> impl Iterator<Item = &CfgEdge> {
        self.edges.iter().filter(move |e| e.to == id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasicBlock {
    pub id: BlockId,
    pub statements: Vec<Statement>,
    pub terminator: Option<BranchStmt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CfgEdge {
    pub from: BlockId,
    pub to: BlockId,
    pub kind: EdgeKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    Fallthrough,
    BranchTrue,
    BranchFalse,
    /// Zero-based switch arm in source order. A switch written without
    /// `default` gets an implicit empty default as its last arm.
    Case(u32),
    LoopBody,
    LoopExit,
}

impl EdgeKind {
    pub fn is_branch(self) -> bool {
        !matches!(self, EdgeKind::Fallthrough)
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeKind::Fallthrough => f.write_str("fallthrough"),
            EdgeKind::BranchTrue => f.write_str("branch-true"),
            EdgeKind::BranchFalse => f.write_str("branch-false"),
            EdgeKind::Case(k) => write!(f, "case:{k}"),
            EdgeKind::LoopBody => f.write_str("loop-body"),
            EdgeKind::LoopExit => f.write_str("loop-exit"),
        }
    }
}

/// Source statement after lowering. One source statement with several member
/// references lowers to several `Statement`s on the same line, one per call site.
#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    /// Ordinal within the method, in source order.
    pub id: u32,
    pub line: u32,
    pub kind: StmtKind,
    pub call_site: Option<CallSite>,
    /// Own attribute that receives the value of this statement's call.
    pub assigns: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StmtKind {
    Call,
    AttributeAccess,
    Assignment,
    Return,
    Other,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CallSite {
    pub target_class: String,
    pub target_member: String,
    pub member_kind: MemberKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MemberKind {
    Method,
    Attribute,
}

impl fmt::Display for MemberKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MemberKind::Method => f.write_str("method"),
            MemberKind::Attribute => f.write_str("attribute"),
        }
    }
}

/// Terminating branch of a basic block.
#[derive(Debug, Clone, PartialEq)]
pub enum BranchStmt {
    If(PredicateExpr),
    Switch { arms: u32 },
    While(PredicateExpr),
    For(PredicateExpr),
}

impl BranchStmt {
    pub fn kind(&self) -> BranchKind {
        match self {
            BranchStmt::If(_) => BranchKind::If,
            BranchStmt::Switch { arms } => BranchKind::Switch { arms: *arms },
            BranchStmt::While(_) => BranchKind::While,
            BranchStmt::For(_) => BranchKind::For,
        }
    }

    pub fn predicate(&self) -> Option<&PredicateExpr> {
        match self {
            BranchStmt::If(p) | BranchStmt::While(p) | BranchStmt::For(p) => Some(p),
            BranchStmt::Switch { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BranchKind {
    If,
    Switch { arms: u32 },
    While,
    For,
}

impl BranchKind {
    pub fn is_loop(self) -> bool {
        matches!(self, BranchKind::While | BranchKind::For)
    }
}

/// Boolean condition tree.
#[derive(Debug, Clone, PartialEq)]
pub enum PredicateExpr {
    Compare(Comparison),
    Opaque(String),
    And(Vec<PredicateExpr>),
    Or(Vec<PredicateExpr>),
    Not(Box<PredicateExpr>),
}

impl PredicateExpr {
    pub fn cmp(var: &str, op: Comparator, rhs: impl Into<Operand>) -> PredicateExpr {
        PredicateExpr::Compare(Comparison {
            var: var.to_string(),
            op,
            rhs: rhs.into(),
        })
    }

    /// Number of comparison and opaque leaves.
    pub fn leaf_count(&self) -> usize {
        match self {
            PredicateExpr::Compare(_) | PredicateExpr::Opaque(_) => 1,
            PredicateExpr::And(args) | PredicateExpr::Or(args) => {
                args.iter().map(PredicateExpr::leaf_count).sum()
            }
            PredicateExpr::Not(a) => a.leaf_count(),
        }
    }
}

impl fmt::Display for PredicateExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn join(f: &mut fmt::Formatter<'_>, args: &[PredicateExpr], sep: &str) -> fmt::Result {
            f.write_str("(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    f.write_str(sep)?;
                }
                write!(f, "{a}")?;
            }
            f.write_str(")")
        }
        match self {
            PredicateExpr::Compare(c) => write!(f, "{} {} {}", c.var, c.op, c.rhs),
            PredicateExpr::Opaque(s) => write!(f, "<{s}>"),
            PredicateExpr::And(args) => join(f, args, " && "),
            PredicateExpr::Or(args) => join(f, args, " || "),
            PredicateExpr::Not(a) => write!(f, "!({a})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub var: String,
    pub op: Comparator,
    pub rhs: Operand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Eq => "==",
            Comparator::Ne => "!=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Comparator> {
        Some(match s {
            "<" => Comparator::Lt,
            "<=" => Comparator::Le,
            ">" => Comparator::Gt,
            ">=" => Comparator::Ge,
            "==" => Comparator::Eq,
            "!=" => Comparator::Ne,
            _ => return None,
        })
    }

    /// The comparator that holds exactly when `self` does not.
    pub fn negate(self) -> Comparator {
        match self {
            Comparator::Lt => Comparator::Ge,
            Comparator::Le => Comparator::Gt,
            Comparator::Gt => Comparator::Le,
            Comparator::Ge => Comparator::Lt,
            Comparator::Eq => Comparator::Ne,
            Comparator::Ne => Comparator::Eq,
        }
    }

    /// `a op b` rewritten as `b op' a`.
    pub fn mirror(self) -> Comparator {
        match self {
            Comparator::Lt => Comparator::Gt,
            Comparator::Le => Comparator::Ge,
            Comparator::Gt => Comparator::Lt,
            Comparator::Ge => Comparator::Le,
            Comparator::Eq => Comparator::Eq,
            Comparator::Ne => Comparator::Ne,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Right-hand side of a comparison leaf.
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Num(f64),
    Bool(bool),
    Var(String),
}

impl From<f64> for Operand {
    fn from(v: f64) -> Self {
        Operand::Num(v)
    }
}

impl From<i32> for Operand {
    fn from(v: i32) -> Self {
        Operand::Num(v as f64)
    }
}

impl From<bool> for Operand {
    fn from(v: bool) -> Self {
        Operand::Bool(v)
    }
}

impl From<&str> for Operand {
    fn from(v: &str) -> Self {
        Operand::Var(v.to_string())
    }
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Num(n) => write!(f, "{n}"),
            Operand::Bool(b) => write!(f, "{b}"),
            Operand::Var(v) => f.write_str(v),
        }
    }
}

/// Fully qualified statement id: (class, method, ordinal).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StmtRef {
    pub class: String,
    pub method: String,
    pub ordinal: u32,
}

impl StmtRef {
    pub fn new(class: &str, method: &str, ordinal: u32) -> StmtRef {
        StmtRef {
            class: class.to_string(),
            method: method.to_string(),
            ordinal,
        }
    }
}

impl fmt::Display for StmtRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}#{}", self.class, self.method, self.ordinal)
    }
}
