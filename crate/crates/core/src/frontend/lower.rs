//! Lowering from the syntax tree to a [`ProgramModel`].
//!
//! Member references become call sites: `obj.m()` and unqualified `m()` are
//! method call sites, `obj.f` is an attribute call site when `f` is declared in
//! another class. Reads and writes of the class's own attributes are not call
//! sites. Conditions stay whole as one [`PredicateExpr`] per branch; calls
//! inside a condition become opaque atoms plus call statements in the
//! branching block.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ast::*;
use super::printer;
use super::LowerError;
use crate::model::*;

struct ClassInfo<'a> {
    ast: &'a ClassAst,
    fields: BTreeMap<&'a str, TypeRef>,
    methods: BTreeMap<&'a str, TypeRef>,
}

struct Program<'a> {
    classes: BTreeMap<&'a str, ClassInfo<'a>>,
}

impl<'a> Program<'a> {
    fn declared(&self, name: &str) -> bool {
        self.classes.contains_key(name)
    }

    fn resolve_type(&self, ty: &str, line: u32) -> Result<TypeRef, LowerError> {
        let t = TypeRef::parse(ty);
        if let TypeRef::Class(c) = &t {
            if !self.declared(c) {
                return Err(LowerError::Unresolved {
                    line,
                    name: c.clone(),
                });
            }
        }
        Ok(t)
    }

    /// Walks `class` and its ancestors; returns the declaring class and type.
    fn find_field(&self, class: &str, name: &str) -> Option<(String, TypeRef)> {
        let mut cur = Some(class);
        while let Some(c) = cur {
            let info = self.classes.get(c)?;
            if let Some(t) = info.fields.get(name) {
                return Some((c.to_string(), t.clone()));
            }
            cur = info.ast.extends.as_deref();
        }
        None
    }

    fn find_method(&self, class: &str, name: &str) -> Option<(String, TypeRef)> {
        let mut cur = Some(class);
        while let Some(c) = cur {
            let info = self.classes.get(c)?;
            if let Some(t) = info.methods.get(name) {
                return Some((c.to_string(), t.clone()));
            }
            cur = info.ast.extends.as_deref();
        }
        None
    }
}

/// Lowers a parsed program under the model name `program`.
pub fn lower(ast: &Ast) -> Result<ProgramModel, LowerError> {
    lower_named(ast, "program")
}

pub fn lower_named(ast: &Ast, name: &str) -> Result<ProgramModel, LowerError> {
    let program = index(ast)?;
    let mut classes = Vec::with_capacity(ast.classes.len());
    for c in &ast.classes {
        let info = &program.classes[c.name.as_str()];
        let mut attributes = Vec::with_capacity(c.fields.len());
        for f in &c.fields {
            let ty = info.fields[f.name.as_str()].clone();
            if let Some(init) = &f.init {
                // Initializers are resolved but contribute no statements.
                let scope = Scope::new(&c.name);
                let mut sink = Vec::new();
                expr_sites(&program, &scope, init, &mut sink)?;
            }
            attributes.push(AttributeDecl {
                name: f.name.clone(),
                ty,
            });
        }
        let mut methods = Vec::with_capacity(c.methods.len());
        for m in &c.methods {
            let return_type = program.resolve_type(&m.ret, m.line)?;
            let mut params = Vec::with_capacity(m.params.len());
            for p in &m.params {
                let ty = program.resolve_type(&p.ty, m.line)?;
                if ty == TypeRef::Void {
                    return Err(LowerError::Invalid {
                        line: m.line,
                        message: format!("parameter `{}` cannot be void", p.name),
                    });
                }
                params.push(Param {
                    name: p.name.clone(),
                    ty,
                });
            }
            let body = build_cfg(&program, &c.name, &params, m)?;
            methods.push(MethodDecl {
                name: m.name.clone(),
                params,
                return_type,
                body,
            });
        }
        classes.push(ClassDecl {
            name: c.name.clone(),
            extends: c.extends.clone(),
            attributes,
            methods,
        });
    }
    Ok(ProgramModel {
        name: name.to_string(),
        classes,
    })
}

fn index(ast: &Ast) -> Result<Program<'_>, LowerError> {
    let mut classes = BTreeMap::new();
    for c in &ast.classes {
        if classes.contains_key(c.name.as_str()) {
            return Err(LowerError::Duplicate {
                line: c.line,
                name: c.name.clone(),
            });
        }
        classes.insert(
            c.name.as_str(),
            ClassInfo {
                ast: c,
                fields: BTreeMap::new(),
                methods: BTreeMap::new(),
            },
        );
    }
    let mut program = Program { classes };
    for c in &ast.classes {
        if let Some(p) = &c.extends {
            if p == &c.name || !program.declared(p) {
                return Err(if p == &c.name {
                    LowerError::InheritanceCycle {
                        classes: vec![c.name.clone(), c.name.clone()],
                    }
                } else {
                    LowerError::Unresolved {
                        line: c.line,
                        name: p.clone(),
                    }
                });
            }
        }
        let mut fields = BTreeMap::new();
        for f in &c.fields {
            let ty = program.resolve_type(&f.ty, f.line)?;
            if ty == TypeRef::Void {
                return Err(LowerError::Invalid {
                    line: f.line,
                    message: format!("field `{}` cannot be void", f.name),
                });
            }
            if fields.insert(f.name.as_str(), ty).is_some() {
                return Err(LowerError::Duplicate {
                    line: f.line,
                    name: format!("{}.{}", c.name, f.name),
                });
            }
        }
        let mut methods = BTreeMap::new();
        for m in &c.methods {
            let ty = program.resolve_type(&m.ret, m.line)?;
            if methods.insert(m.name.as_str(), ty).is_some() {
                return Err(LowerError::Duplicate {
                    line: m.line,
                    name: format!("{}.{}", c.name, m.name),
                });
            }
        }
        let info = program.classes.get_mut(c.name.as_str()).unwrap();
        info.fields = fields;
        info.methods = methods;
    }
    for c in &ast.classes {
        let mut seen = BTreeSet::from([c.name.as_str()]);
        let mut trail = vec![c.name.clone()];
        let mut cur = c.extends.as_deref();
        while let Some(p) = cur {
            trail.push(p.to_string());
            if !seen.insert(p) {
                return Err(LowerError::InheritanceCycle { classes: trail });
            }
            cur = program.classes[p].ast.extends.as_deref();
        }
    }
    Ok(program)
}

struct Scope<'s> {
    class: &'s str,
    frames: Vec<HashMap<String, TypeRef>>,
}

impl<'s> Scope<'s> {
    fn new(class: &'s str) -> Self {
        Scope {
            class,
            frames: vec![HashMap::new()],
        }
    }

    fn local(&self, name: &str) -> Option<&TypeRef> {
        self.frames.iter().rev().find_map(|f| f.get(name))
    }

    fn declare(&mut self, name: &str, ty: TypeRef) {
        self.frames.last_mut().unwrap().insert(name.to_string(), ty);
    }
}

/// Static type of an expression, `None` when it is not statically known.
type StaticType = Option<TypeRef>;

fn expr_sites(
    program: &Program<'_>,
    scope: &Scope<'_>,
    e: &Expr,
    sites: &mut Vec<CallSite>,
) -> Result<StaticType, LowerError> {
    Ok(match &e.kind {
        ExprAst::Lit(Literal::Int(_)) => Some(TypeRef::Int),
        ExprAst::Lit(Literal::Double(_)) => Some(TypeRef::Double),
        ExprAst::Lit(Literal::Bool(_)) => Some(TypeRef::Boolean),
        ExprAst::Null => None,
        ExprAst::This => Some(TypeRef::Class(scope.class.to_string())),
        ExprAst::New(c) => {
            if !program.declared(c) {
                return Err(LowerError::Unresolved {
                    line: e.line,
                    name: c.clone(),
                });
            }
            Some(TypeRef::Class(c.clone()))
        }
        ExprAst::Var(name) => {
            if let Some(t) = scope.local(name) {
                Some(t.clone())
            } else {
                field_access(program, scope, scope.class, name, e.line, sites)?
            }
        }
        ExprAst::Field { obj, name } => {
            let owner = receiver_class(program, scope, obj, sites)?;
            field_access(program, scope, &owner, name, e.line, sites)?
        }
        ExprAst::Call { recv, name, args } => {
            let owner = match recv {
                Some(r) => receiver_class(program, scope, r, sites)?,
                None => scope.class.to_string(),
            };
            for a in args {
                expr_sites(program, scope, a, sites)?;
            }
            let (declaring, ret) =
                program
                    .find_method(&owner, name)
                    .ok_or_else(|| LowerError::Unresolved {
                        line: e.line,
                        name: format!("{owner}.{name}"),
                    })?;
            sites.push(CallSite {
                target_class: declaring,
                target_member: name.clone(),
                member_kind: MemberKind::Method,
            });
            Some(ret)
        }
        ExprAst::Unary { op, expr } => {
            let t = expr_sites(program, scope, expr, sites)?;
            match op {
                UnaryOp::Not => Some(TypeRef::Boolean),
                UnaryOp::Neg => t,
            }
        }
        ExprAst::Binary { op, lhs, rhs } => {
            let l = expr_sites(program, scope, lhs, sites)?;
            let r = expr_sites(program, scope, rhs, sites)?;
            if op.is_comparison() || matches!(op, BinOp::And | BinOp::Or) {
                Some(TypeRef::Boolean)
            } else if l == Some(TypeRef::Double) || r == Some(TypeRef::Double) {
                Some(TypeRef::Double)
            } else {
                l
            }
        }
    })
}

fn receiver_class(
    program: &Program<'_>,
    scope: &Scope<'_>,
    recv: &Expr,
    sites: &mut Vec<CallSite>,
) -> Result<String, LowerError> {
    match expr_sites(program, scope, recv, sites)? {
        Some(TypeRef::Class(c)) => Ok(c),
        _ => Err(LowerError::NotAnObject {
            line: recv.line,
            expr: printer::expr(recv),
        }),
    }
}

fn field_access(
    program: &Program<'_>,
    scope: &Scope<'_>,
    owner: &str,
    name: &str,
    line: u32,
    sites: &mut Vec<CallSite>,
) -> Result<StaticType, LowerError> {
    let (declaring, ty) =
        program
            .find_field(owner, name)
            .ok_or_else(|| LowerError::Unresolved {
                line,
                name: if owner == scope.class {
                    name.to_string()
                } else {
                    format!("{owner}.{name}")
                },
            })?;
    if declaring != scope.class {
        sites.push(CallSite {
            target_class: declaring,
            target_member: name.to_string(),
            member_kind: MemberKind::Attribute,
        });
    }
    Ok(Some(ty))
}

/// Converts a condition to a predicate tree. Calls anywhere inside a
/// comparison make that comparison opaque.
pub(crate) fn to_predicate(e: &Expr) -> PredicateExpr {
    match &e.kind {
        ExprAst::Binary { op: BinOp::And, .. } => {
            let mut args = Vec::new();
            flatten(e, BinOp::And, &mut args);
            PredicateExpr::And(args)
        }
        ExprAst::Binary { op: BinOp::Or, .. } => {
            let mut args = Vec::new();
            flatten(e, BinOp::Or, &mut args);
            PredicateExpr::Or(args)
        }
        ExprAst::Unary {
            op: UnaryOp::Not,
            expr,
        } => PredicateExpr::Not(Box::new(to_predicate(expr))),
        ExprAst::Binary { op, lhs, rhs } if op.is_comparison() && !has_call(e) => {
            let cmp = Comparator::from_symbol(op.symbol()).unwrap();
            match (var_path(lhs), operand(rhs), var_path(rhs), operand(lhs)) {
                (Some(var), Some(rhs), _, _) => {
                    PredicateExpr::Compare(Comparison { var, op: cmp, rhs })
                }
                (_, _, Some(var), Some(lhs)) => PredicateExpr::Compare(Comparison {
                    var,
                    op: cmp.mirror(),
                    rhs: lhs,
                }),
                _ => PredicateExpr::Opaque(printer::expr(e)),
            }
        }
        _ if !has_call(e) => match var_path(e) {
            Some(var) => PredicateExpr::Compare(Comparison {
                var,
                op: Comparator::Eq,
                rhs: Operand::Bool(true),
            }),
            None => PredicateExpr::Opaque(printer::expr(e)),
        },
        _ => PredicateExpr::Opaque(printer::expr(e)),
    }
}

fn flatten(e: &Expr, op: BinOp, out: &mut Vec<PredicateExpr>) {
    match &e.kind {
        ExprAst::Binary { op: o, lhs, rhs } if *o == op => {
            flatten(lhs, op, out);
            flatten(rhs, op, out);
        }
        _ => out.push(to_predicate(e)),
    }
}

fn has_call(e: &Expr) -> bool {
    match &e.kind {
        ExprAst::Call { .. } => true,
        ExprAst::Field { obj, .. } => has_call(obj),
        ExprAst::Unary { expr, .. } => has_call(expr),
        ExprAst::Binary { lhs, rhs, .. } => has_call(lhs) || has_call(rhs),
        _ => false,
    }
}

/// `x`, `this.x`, `a.b.c` as a dotted name.
fn var_path(e: &Expr) -> Option<String> {
    match &e.kind {
        ExprAst::Var(v) => Some(v.clone()),
        ExprAst::Field { obj, name } => match &obj.kind {
            ExprAst::This => Some(name.clone()),
            _ => Some(format!("{}.{name}", var_path(obj)?)),
        },
        _ => None,
    }
}

fn operand(e: &Expr) -> Option<Operand> {
    match &e.kind {
        ExprAst::Lit(Literal::Int(n)) => Some(Operand::Num(*n as f64)),
        ExprAst::Lit(Literal::Double(d)) => Some(Operand::Num(*d)),
        ExprAst::Lit(Literal::Bool(b)) => Some(Operand::Bool(*b)),
        ExprAst::Unary {
            op: UnaryOp::Neg,
            expr,
        } => match operand(expr)? {
            Operand::Num(n) => Some(Operand::Num(-n)),
            _ => None,
        },
        _ => var_path(e).map(Operand::Var),
    }
}

struct BlockBuild {
    statements: Vec<Statement>,
    terminator: Option<BranchStmt>,
}

struct CfgBuilder<'p, 'a> {
    program: &'p Program<'a>,
    scope: Scope<'p>,
    blocks: Vec<BlockBuild>,
    edges: Vec<CfgEdge>,
    /// `None` once control cannot reach the next statement.
    current: Option<usize>,
    next_ordinal: u32,
    break_targets: Vec<usize>,
}

fn build_cfg(
    program: &Program<'_>,
    class: &str,
    params: &[Param],
    m: &MethodAst,
) -> Result<Cfg, LowerError> {
    let mut scope = Scope::new(class);
    for p in params {
        scope.declare(&p.name, p.ty.clone());
    }
    let mut b = CfgBuilder {
        program,
        scope,
        blocks: Vec::new(),
        edges: Vec::new(),
        current: None,
        next_ordinal: 0,
        break_targets: Vec::new(),
    };
    let entry = b.new_block();
    b.current = Some(entry);
    for s in &m.body {
        b.stmt(s)?;
    }
    Ok(b.finish())
}

impl CfgBuilder<'_, '_> {
    fn new_block(&mut self) -> usize {
        self.blocks.push(BlockBuild {
            statements: Vec::new(),
            terminator: None,
        });
        self.blocks.len() - 1
    }

    fn edge(&mut self, from: usize, to: usize, kind: EdgeKind) {
        self.edges.push(CfgEdge {
            from: from as BlockId,
            to: to as BlockId,
            kind,
        });
    }

    fn has_preds(&self, block: usize) -> bool {
        self.edges.iter().any(|e| e.to as usize == block)
    }

    fn sites(&self, e: &Expr) -> Result<Vec<CallSite>, LowerError> {
        let mut sites = Vec::new();
        expr_sites(self.program, &self.scope, e, &mut sites)?;
        Ok(sites)
    }

    fn emit(&mut self, line: u32, plain: StmtKind, sites: Vec<CallSite>, assigns: Option<String>) {
        let block = self.current.expect("emit on a reachable block");
        if sites.is_empty() {
            let id = self.next_ordinal;
            self.next_ordinal += 1;
            self.blocks[block].statements.push(Statement {
                id,
                line,
                kind: plain,
                call_site: None,
                assigns: None,
            });
            return;
        }
        for site in sites {
            let id = self.next_ordinal;
            self.next_ordinal += 1;
            let kind = match site.member_kind {
                MemberKind::Method => StmtKind::Call,
                MemberKind::Attribute => StmtKind::AttributeAccess,
            };
            self.blocks[block].statements.push(Statement {
                id,
                line,
                kind,
                call_site: Some(site),
                assigns: assigns.clone(),
            });
        }
    }

    /// Call statements for a condition, placed in the branching block.
    fn emit_condition_calls(&mut self, cond: &Expr, line: u32) -> Result<(), LowerError> {
        let sites = self.sites(cond)?;
        if !sites.is_empty() {
            self.emit(line, StmtKind::Other, sites, None);
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt) -> Result<(), LowerError> {
        if self.current.is_none() {
            return Err(LowerError::UnreachableCode { line: s.line });
        }
        match &s.kind {
            StmtAst::Block(body) => {
                self.scope.frames.push(HashMap::new());
                for inner in body {
                    self.stmt(inner)?;
                }
                self.scope.frames.pop();
            }
            StmtAst::VarDecl { ty, name, init } => {
                let t = self.program.resolve_type(ty, s.line)?;
                let sites = match init {
                    Some(e) => self.sites(e)?,
                    None => Vec::new(),
                };
                let plain = if init.is_some() {
                    StmtKind::Assignment
                } else {
                    StmtKind::Other
                };
                self.emit(s.line, plain, sites, None);
                self.scope.declare(name, t);
            }
            StmtAst::Assign { target, value } => {
                let mut sites = self.sites(target)?;
                sites.extend(self.sites(value)?);
                let assigns = self.own_attribute(target);
                self.emit(s.line, StmtKind::Assignment, sites, assigns);
            }
            StmtAst::Step { target, .. } => {
                let sites = self.sites(target)?;
                self.emit(s.line, StmtKind::Assignment, sites, None);
            }
            StmtAst::Expr(e) => {
                let sites = self.sites(e)?;
                self.emit(s.line, StmtKind::Other, sites, None);
            }
            StmtAst::Return(value) => {
                let sites = match value {
                    Some(e) => self.sites(e)?,
                    None => Vec::new(),
                };
                self.emit(s.line, StmtKind::Return, sites, None);
                self.current = None;
            }
            StmtAst::Break => {
                let target = *self
                    .break_targets
                    .last()
                    .ok_or(LowerError::BreakOutsideLoop { line: s.line })?;
                let cur = self.current.take().unwrap();
                self.edge(cur, target, EdgeKind::Fallthrough);
            }
            StmtAst::If { cond, then, els } => {
                self.emit_condition_calls(cond, s.line)?;
                let cur = self.current.unwrap();
                self.blocks[cur].terminator = Some(BranchStmt::If(to_predicate(cond)));
                let then_b = self.new_block();
                self.edge(cur, then_b, EdgeKind::BranchTrue);
                let else_b = els.as_ref().map(|_| self.new_block());
                let join = self.new_block();
                self.edge(cur, else_b.unwrap_or(join), EdgeKind::BranchFalse);

                self.branch_body(then_b, then, join)?;
                if let (Some(else_b), Some(els)) = (else_b, els) {
                    self.branch_body(else_b, els, join)?;
                }
                self.current = self.has_preds(join).then_some(join);
            }
            StmtAst::While { cond, body } => {
                self.lower_loop(s.line, Some(cond), None, body, false)?;
            }
            StmtAst::For {
                init,
                cond,
                update,
                body,
            } => {
                self.scope.frames.push(HashMap::new());
                if let Some(init) = init {
                    self.stmt(init)?;
                }
                self.lower_loop(s.line, cond.as_ref(), update.as_deref(), body, true)?;
                self.scope.frames.pop();
            }
            StmtAst::Switch { scrutinee, arms } => {
                let sites = self.sites(scrutinee)?;
                if !sites.is_empty() {
                    self.emit(s.line, StmtKind::Other, sites, None);
                }
                let cur = self.current.unwrap();
                let has_default = arms.iter().any(|a| a.label.is_none());
                let count = arms.len() as u32 + u32::from(!has_default);
                self.blocks[cur].terminator = Some(BranchStmt::Switch { arms: count });
                let join = self.new_block();
                self.break_targets.push(join);
                for (k, arm) in arms.iter().enumerate() {
                    let arm_b = self.new_block();
                    self.edge(cur, arm_b, EdgeKind::Case(k as u32));
                    self.current = Some(arm_b);
                    self.scope.frames.push(HashMap::new());
                    for inner in &arm.body {
                        self.stmt(inner)?;
                    }
                    self.scope.frames.pop();
                    if let Some(end) = self.current {
                        self.edge(end, join, EdgeKind::Fallthrough);
                    }
                }
                if !has_default {
                    self.edge(cur, join, EdgeKind::Case(count - 1));
                }
                self.break_targets.pop();
                self.current = self.has_preds(join).then_some(join);
            }
        }
        Ok(())
    }

    fn branch_body(&mut self, start: usize, body: &Stmt, join: usize) -> Result<(), LowerError> {
        self.current = Some(start);
        self.scope.frames.push(HashMap::new());
        self.stmt(body)?;
        self.scope.frames.pop();
        if let Some(end) = self.current {
            self.edge(end, join, EdgeKind::Fallthrough);
        }
        Ok(())
    }

    fn lower_loop(
        &mut self,
        line: u32,
        cond: Option<&Expr>,
        update: Option<&Stmt>,
        body: &Stmt,
        is_for: bool,
    ) -> Result<(), LowerError> {
        let cur = self.current.unwrap();
        let header = self.new_block();
        self.edge(cur, header, EdgeKind::Fallthrough);
        self.current = Some(header);
        let pred = match cond {
            Some(c) => {
                self.emit_condition_calls(c, line)?;
                to_predicate(c)
            }
            None => PredicateExpr::Opaque("true".into()),
        };
        self.blocks[header].terminator = Some(if is_for {
            BranchStmt::For(pred)
        } else {
            BranchStmt::While(pred)
        });
        let body_b = self.new_block();
        let exit = self.new_block();
        self.edge(header, body_b, EdgeKind::LoopBody);
        self.edge(header, exit, EdgeKind::LoopExit);
        self.break_targets.push(exit);
        self.current = Some(body_b);
        self.scope.frames.push(HashMap::new());
        self.stmt(body)?;
        self.scope.frames.pop();
        if let (Some(_), Some(update)) = (self.current, update) {
            self.stmt(update)?;
        }
        if let Some(end) = self.current {
            self.edge(end, header, EdgeKind::Fallthrough);
        }
        self.break_targets.pop();
        self.current = Some(exit);
        Ok(())
    }

    fn own_attribute(&self, target: &Expr) -> Option<String> {
        let name = match &target.kind {
            ExprAst::Var(v) if self.scope.local(v).is_none() => v,
            ExprAst::Field { obj, name } if matches!(obj.kind, ExprAst::This) => name,
            _ => return None,
        };
        let (declaring, _) = self.program.find_field(self.scope.class, name)?;
        (declaring == self.scope.class).then(|| name.clone())
    }

    /// Drops unreachable (necessarily empty) blocks and renumbers densely.
    fn finish(self) -> Cfg {
        let n = self.blocks.len();
        let mut reach = vec![false; n];
        let mut stack = vec![0usize];
        reach[0] = true;
        while let Some(b) = stack.pop() {
            for e in self.edges.iter().filter(|e| e.from as usize == b) {
                if !reach[e.to as usize] {
                    reach[e.to as usize] = true;
                    stack.push(e.to as usize);
                }
            }
        }
        let mut remap = vec![None; n];
        let mut next = 0;
        for (i, r) in reach.iter().enumerate() {
            if *r {
                remap[i] = Some(next as BlockId);
                next += 1;
            }
        }
        let blocks = self
            .blocks
            .into_iter()
            .enumerate()
            .filter_map(|(i, b)| {
                debug_assert!(reach[i] || b.statements.is_empty());
                remap[i].map(|id| BasicBlock {
                    id,
                    statements: b.statements,
                    terminator: b.terminator,
                })
            })
            .collect();
        let edges = self
            .edges
            .into_iter()
            .filter_map(|e| {
                Some(CfgEdge {
                    from: remap[e.from as usize]?,
                    to: remap[e.to as usize]?,
                    kind: e.kind,
                })
            })
            .collect();
        Cfg {
            entry: 0,
            blocks,
            edges,
        }
    }
}
