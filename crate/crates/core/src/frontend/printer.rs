//! Pretty-printer producing `.minij` source that parses back to an equal tree
//! (up to line numbers).

use std::fmt::Write;

use super::ast::*;

pub fn print(ast: &Ast) -> String {
    let mut out = String::new();
    for (i, c) in ast.classes.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        print_class(&mut out, c);
    }
    out
}

fn print_class(out: &mut String, c: &ClassAst) {
    match &c.extends {
        Some(p) => writeln!(out, "class {} extends {} {{", c.name, p),
        None => writeln!(out, "class {} {{", c.name),
    }
    .unwrap();
    for f in &c.fields {
        match &f.init {
            Some(e) => writeln!(out, "    {} {} = {};", f.ty, f.name, expr(e)),
            None => writeln!(out, "    {} {};", f.ty, f.name),
        }
        .unwrap();
    }
    for m in &c.methods {
        let params: Vec<String> = m
            .params
            .iter()
            .map(|p| format!("{} {}", p.ty, p.name))
            .collect();
        writeln!(out, "    {} {}({}) {{", m.ret, m.name, params.join(", ")).unwrap();
        for s in &m.body {
            stmt(out, s, 2);
        }
        out.push_str("    }\n");
    }
    out.push_str("}\n");
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match &s.kind {
        StmtAst::If { cond, then, els } => {
            writeln!(out, "if ({})", expr(cond)).unwrap();
            nested(out, then, depth);
            if let Some(e) = els {
                indent(out, depth);
                out.push_str("else\n");
                nested(out, e, depth);
            }
        }
        StmtAst::While { cond, body } => {
            writeln!(out, "while ({})", expr(cond)).unwrap();
            nested(out, body, depth);
        }
        StmtAst::For {
            init,
            cond,
            update,
            body,
        } => {
            let init = init.as_ref().map(|s| simple(s)).unwrap_or_default();
            let cond = cond.as_ref().map(expr).unwrap_or_default();
            let update = update.as_ref().map(|s| simple(s)).unwrap_or_default();
            writeln!(out, "for ({init}; {cond}; {update})").unwrap();
            nested(out, body, depth);
        }
        StmtAst::Switch { scrutinee, arms } => {
            writeln!(out, "switch ({}) {{", expr(scrutinee)).unwrap();
            for a in arms {
                indent(out, depth + 1);
                match &a.label {
                    Some(l) => writeln!(out, "case {}:", literal(l)).unwrap(),
                    None => out.push_str("default:\n"),
                }
                for s in &a.body {
                    stmt(out, s, depth + 2);
                }
            }
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtAst::Block(body) => {
            out.push_str("{\n");
            for s in body {
                stmt(out, s, depth + 1);
            }
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtAst::Return(Some(e)) => writeln!(out, "return {};", expr(e)).unwrap(),
        StmtAst::Return(None) => out.push_str("return;\n"),
        StmtAst::Break => out.push_str("break;\n"),
        _ => writeln!(out, "{};", simple(s)).unwrap(),
    }
}

// A then-branch that is an else-less `if` would capture a following `else`;
// such trees cannot come out of the parser, so they are printed as-is.
fn nested(out: &mut String, s: &Stmt, depth: usize) {
    match s.kind {
        StmtAst::Block(_) => stmt(out, s, depth),
        _ => stmt(out, s, depth + 1),
    }
}

fn simple(s: &Stmt) -> String {
    match &s.kind {
        StmtAst::VarDecl { ty, name, init } => match init {
            Some(e) => format!("{ty} {name} = {}", expr(e)),
            None => format!("{ty} {name}"),
        },
        StmtAst::Assign { target, value } => format!("{} = {}", expr(target), expr(value)),
        StmtAst::Step { target, increment } => {
            format!("{}{}", expr(target), if *increment { "++" } else { "--" })
        }
        StmtAst::Expr(e) => expr(e),
        other => panic!("not a simple statement: {other:?}"),
    }
}

fn literal(l: &Literal) -> String {
    match l {
        Literal::Int(n) => n.to_string(),
        Literal::Double(d) => format!("{d:?}"),
        Literal::Bool(b) => b.to_string(),
    }
}

pub fn expr(e: &Expr) -> String {
    match &e.kind {
        ExprAst::Lit(Literal::Int(n)) if *n < 0 => format!("({n})"),
        ExprAst::Lit(Literal::Double(d)) if d.is_sign_negative() => format!("({d:?})"),
        ExprAst::Lit(l) => literal(l),
        ExprAst::Null => "null".into(),
        ExprAst::This => "this".into(),
        ExprAst::Var(v) => v.clone(),
        ExprAst::New(c) => format!("new {c}()"),
        ExprAst::Field { obj, name } => format!("{}.{name}", operand(obj)),
        ExprAst::Call { recv, name, args } => {
            let args: Vec<String> = args.iter().map(expr).collect();
            match recv {
                Some(r) => format!("{}.{name}({})", operand(r), args.join(", ")),
                None => format!("{name}({})", args.join(", ")),
            }
        }
        ExprAst::Unary { op, expr: inner } => {
            let sym = match op {
                UnaryOp::Not => "!",
                UnaryOp::Neg => "-",
            };
            match (op, &inner.kind) {
                // Keeps `-(2)` from reading back as the literal `-2`.
                (UnaryOp::Neg, ExprAst::Lit(Literal::Int(_) | Literal::Double(_))) => {
                    format!("-({})", expr(inner))
                }
                _ => format!("{sym}{}", operand(inner)),
            }
        }
        ExprAst::Binary { op, lhs, rhs } => {
            format!("{} {} {}", operand(lhs), op.symbol(), operand(rhs))
        }
    }
}

/// Parenthesizes anything that is not atomic.
fn operand(e: &Expr) -> String {
    match &e.kind {
        ExprAst::Binary { .. } | ExprAst::Unary { .. } => format!("({})", expr(e)),
        _ => expr(e),
    }
}
