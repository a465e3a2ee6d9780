//! Recursive-descent parser for `.minij`.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{SourceUnit, SyntaxError};

pub fn parse(src: &SourceUnit) -> Result<Ast, SyntaxError> {
    let tokens = tokenize(&src.text)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut classes = Vec::new();
    while !p.at_eof() {
        classes.push(p.class()?);
    }
    Ok(Ast { classes })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

const SCALARS: &[&str] = &["int", "double", "boolean", "void"];

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        &self.tokens[(self.pos + offset).min(self.tokens.len() - 1)].tok
    }

    fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn line(&self) -> u32 {
        self.peek().line
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        let t = self.peek();
        Err(SyntaxError::new(
            t.line,
            t.col,
            format!("expected {wanted}, found {}", t.tok),
        ))
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(&self.peek().tok, Tok::Punct(q) if *q == p)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(&self.peek().tok, Tok::Kw(q) if *q == k)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.unexpected(&format!("`{p}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.unexpected(&format!("`{k}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.unexpected("an identifier"),
        }
    }

    fn modifiers(&mut self) {
        while self.eat_kw("public") || self.eat_kw("private") || self.eat_kw("protected") {}
    }

    fn at_type(&self) -> bool {
        match &self.peek().tok {
            Tok::Kw(k) => SCALARS.contains(k),
            Tok::Ident(_) => true,
            _ => false,
        }
    }

    fn ty(&mut self) -> PResult<String> {
        match &self.peek().tok {
            Tok::Kw(k) if SCALARS.contains(k) => {
                let k = k.to_string();
                self.bump();
                Ok(k)
            }
            Tok::Ident(_) => self.ident(),
            _ => self.unexpected("a type"),
        }
    }

    fn class(&mut self) -> PResult<ClassAst> {
        self.modifiers();
        let line = self.line();
        self.expect_kw("class")?;
        let name = self.ident()?;
        let extends = if self.eat_kw("extends") {
            Some(self.ident()?)
        } else {
            None
        };
        self.expect_punct("{")?;
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        while !self.eat_punct("}") {
            if self.at_eof() {
                return self.unexpected("`}`");
            }
            self.modifiers();
            let line = self.line();
            let ty = self.ty()?;
            let name = self.ident()?;
            if self.eat_punct("(") {
                let mut params = Vec::new();
                if !self.eat_punct(")") {
                    loop {
                        let ty = self.ty()?;
                        let name = self.ident()?;
                        params.push(ParamAst { ty, name });
                        if self.eat_punct(")") {
                            break;
                        }
                        self.expect_punct(",")?;
                    }
                }
                self.expect_punct("{")?;
                let body = self.block_tail()?;
                methods.push(MethodAst {
                    ret: ty,
                    name,
                    params,
                    body,
                    line,
                });
            } else {
                let mut decl_name = name;
                let mut decl_line = line;
                loop {
                    let init = if self.eat_punct("=") {
                        Some(self.expr()?)
                    } else {
                        None
                    };
                    fields.push(FieldAst {
                        ty: ty.clone(),
                        name: decl_name,
                        init,
                        line: decl_line,
                    });
                    if self.eat_punct(";") {
                        break;
                    }
                    self.expect_punct(",")?;
                    decl_line = self.line();
                    decl_name = self.ident()?;
                }
            }
        }
        Ok(ClassAst {
            name,
            extends,
            fields,
            methods,
            line,
        })
    }

    /// Statements up to and including the closing `}`.
    fn block_tail(&mut self) -> PResult<Vec<Stmt>> {
        let mut body = Vec::new();
        while !self.eat_punct("}") {
            if self.at_eof() {
                return self.unexpected("`}`");
            }
            body.push(self.stmt()?);
        }
        Ok(body)
    }

    fn at_var_decl(&self) -> bool {
        match &self.peek().tok {
            Tok::Kw(k) => SCALARS.contains(k),
            Tok::Ident(_) => matches!(self.peek_at(1), Tok::Ident(_)),
            _ => false,
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let line = self.line();
        if self.eat_kw("if") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let then = Box::new(self.stmt()?);
            let els = if self.eat_kw("else") {
                Some(Box::new(self.stmt()?))
            } else {
                None
            };
            return Ok(Stmt::new(StmtAst::If { cond, then, els }, line));
        }
        if self.eat_kw("while") {
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let body = Box::new(self.stmt()?);
            return Ok(Stmt::new(StmtAst::While { cond, body }, line));
        }
        if self.eat_kw("for") {
            self.expect_punct("(")?;
            let init = if self.is_punct(";") {
                None
            } else {
                Some(Box::new(self.simple_stmt()?))
            };
            self.expect_punct(";")?;
            let cond = if self.is_punct(";") {
                None
            } else {
                Some(self.expr()?)
            };
            self.expect_punct(";")?;
            let update = if self.is_punct(")") {
                None
            } else {
                Some(Box::new(self.simple_stmt()?))
            };
            self.expect_punct(")")?;
            let body = Box::new(self.stmt()?);
            return Ok(Stmt::new(
                StmtAst::For {
                    init,
                    cond,
                    update,
                    body,
                },
                line,
            ));
        }
        if self.eat_kw("switch") {
            self.expect_punct("(")?;
            let scrutinee = self.expr()?;
            self.expect_punct(")")?;
            self.expect_punct("{")?;
            let mut arms: Vec<SwitchArm> = Vec::new();
            while !self.eat_punct("}") {
                let arm_line = self.line();
                let label = if self.eat_kw("case") {
                    Some(self.case_label()?)
                } else if self.eat_kw("default") {
                    None
                } else {
                    return self.unexpected("`case`, `default` or `}`");
                };
                self.expect_punct(":")?;
                let mut body = Vec::new();
                while !(self.is_kw("case") || self.is_kw("default") || self.is_punct("}")) {
                    if self.at_eof() {
                        return self.unexpected("`}`");
                    }
                    body.push(self.stmt()?);
                }
                arms.push(SwitchArm {
                    label,
                    body,
                    line: arm_line,
                });
            }
            return Ok(Stmt::new(StmtAst::Switch { scrutinee, arms }, line));
        }
        if self.eat_kw("return") {
            let value = if self.is_punct(";") {
                None
            } else {
                Some(self.expr()?)
            };
            self.expect_punct(";")?;
            return Ok(Stmt::new(StmtAst::Return(value), line));
        }
        if self.eat_kw("break") {
            self.expect_punct(";")?;
            return Ok(Stmt::new(StmtAst::Break, line));
        }
        if self.eat_punct("{") {
            let body = self.block_tail()?;
            return Ok(Stmt::new(StmtAst::Block(body), line));
        }
        let s = self.simple_stmt()?;
        self.expect_punct(";")?;
        Ok(s)
    }

    /// Declaration, assignment, step or expression, without the trailing `;`.
    fn simple_stmt(&mut self) -> PResult<Stmt> {
        let line = self.line();
        if self.at_var_decl() && self.at_type() {
            let ty = self.ty()?;
            let name = self.ident()?;
            let init = if self.eat_punct("=") {
                Some(self.expr()?)
            } else {
                None
            };
            return Ok(Stmt::new(StmtAst::VarDecl { ty, name, init }, line));
        }
        let target_tok = (self.peek().line, self.peek().col);
        let e = self.expr()?;
        let assignable = matches!(e.kind, ExprAst::Var(_) | ExprAst::Field { .. });
        if self.is_punct("=") || self.is_punct("++") || self.is_punct("--") {
            if !assignable {
                return Err(SyntaxError::new(
                    target_tok.0,
                    target_tok.1,
                    "left-hand side is not assignable",
                ));
            }
            if self.eat_punct("=") {
                let value = self.expr()?;
                return Ok(Stmt::new(StmtAst::Assign { target: e, value }, line));
            }
            let increment = self.eat_punct("++");
            if !increment {
                self.expect_punct("--")?;
            }
            return Ok(Stmt::new(
                StmtAst::Step {
                    target: e,
                    increment,
                },
                line,
            ));
        }
        Ok(Stmt::new(StmtAst::Expr(e), line))
    }

    fn case_label(&mut self) -> PResult<Literal> {
        let neg = self.eat_punct("-");
        let t = self.bump();
        match t.tok {
            Tok::Int(n) => Ok(Literal::Int(if neg { -n } else { n })),
            Tok::Double(d) => Ok(Literal::Double(if neg { -d } else { d })),
            Tok::Kw("true") if !neg => Ok(Literal::Bool(true)),
            Tok::Kw("false") if !neg => Ok(Literal::Bool(false)),
            other => Err(SyntaxError::new(
                t.line,
                t.col,
                format!("expected a case constant, found {other}"),
            )),
        }
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(0)
    }

    fn binary(&mut self, level: usize) -> PResult<Expr> {
        const LEVELS: &[&[(&str, BinOp)]] = &[
            &[("||", BinOp::Or)],
            &[("&&", BinOp::And)],
            &[("==", BinOp::Eq), ("!=", BinOp::Ne)],
            &[
                ("<", BinOp::Lt),
                ("<=", BinOp::Le),
                (">", BinOp::Gt),
                (">=", BinOp::Ge),
            ],
            &[("+", BinOp::Add), ("-", BinOp::Sub)],
            &[("*", BinOp::Mul), ("/", BinOp::Div), ("%", BinOp::Rem)],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let mut lhs = self.binary(level + 1)?;
        'outer: loop {
            for (sym, op) in LEVELS[level] {
                if self.is_punct(sym) {
                    self.bump();
                    let rhs = self.binary(level + 1)?;
                    let line = lhs.line;
                    lhs = Expr::new(
                        ExprAst::Binary {
                            op: *op,
                            lhs: Box::new(lhs),
                            rhs: Box::new(rhs),
                        },
                        line,
                    );
                    continue 'outer;
                }
            }
            return Ok(lhs);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        let line = self.line();
        let op = if self.eat_punct("!") {
            UnaryOp::Not
        } else if self.eat_punct("-") {
            // A minus directly before a number is part of the literal.
            match self.peek().tok {
                Tok::Int(n) => {
                    self.bump();
                    return Ok(Expr::new(ExprAst::Lit(Literal::Int(-n)), line));
                }
                Tok::Double(d) => {
                    self.bump();
                    return Ok(Expr::new(ExprAst::Lit(Literal::Double(-d)), line));
                }
                _ => UnaryOp::Neg,
            }
        } else {
            return self.postfix();
        };
        let expr = Box::new(self.unary()?);
        Ok(Expr::new(ExprAst::Unary { op, expr }, line))
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        while self.eat_punct(".") {
            let name = self.ident()?;
            let line = e.line;
            if self.eat_punct("(") {
                let args = self.args()?;
                e = Expr::new(
                    ExprAst::Call {
                        recv: Some(Box::new(e)),
                        name,
                        args,
                    },
                    line,
                );
            } else {
                e = Expr::new(
                    ExprAst::Field {
                        obj: Box::new(e),
                        name,
                    },
                    line,
                );
            }
        }
        Ok(e)
    }

    /// Arguments after `(`, through the closing `)`.
    fn args(&mut self) -> PResult<Vec<Expr>> {
        let mut args = Vec::new();
        if self.eat_punct(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat_punct(")") {
                return Ok(args);
            }
            self.expect_punct(",")?;
        }
    }

    fn primary(&mut self) -> PResult<Expr> {
        let line = self.line();
        let kind = match self.peek().tok.clone() {
            Tok::Int(n) => {
                self.bump();
                ExprAst::Lit(Literal::Int(n))
            }
            Tok::Double(d) => {
                self.bump();
                ExprAst::Lit(Literal::Double(d))
            }
            Tok::Kw("true") => {
                self.bump();
                ExprAst::Lit(Literal::Bool(true))
            }
            Tok::Kw("false") => {
                self.bump();
                ExprAst::Lit(Literal::Bool(false))
            }
            Tok::Kw("null") => {
                self.bump();
                ExprAst::Null
            }
            Tok::Kw("this") => {
                self.bump();
                ExprAst::This
            }
            Tok::Kw("new") => {
                self.bump();
                let class = self.ident()?;
                self.expect_punct("(")?;
                self.expect_punct(")")?;
                ExprAst::New(class)
            }
            Tok::Ident(name) => {
                self.bump();
                if self.eat_punct("(") {
                    let args = self.args()?;
                    ExprAst::Call {
                        recv: None,
                        name,
                        args,
                    }
                } else {
                    ExprAst::Var(name)
                }
            }
            Tok::Punct("(") => {
                self.bump();
                let inner = self.expr()?;
                self.expect_punct(")")?;
                return Ok(Expr::new(inner.kind, line));
            }
            _ => return self.unexpected("an expression"),
        };
        Ok(Expr::new(kind, line))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_str(s: &str) -> Result<Ast, SyntaxError> {
        parse(&SourceUnit::new("test.minij", s))
    }

    #[test]
    fn empty_source() {
        assert!(parse_str("").unwrap().classes.is_empty());
        assert!(parse_str("  // nothing\n").unwrap().classes.is_empty());
    }

    #[test]
    fn malformed_method_header() {
        let err = parse_str("class A { int f( }").unwrap_err();
        assert_eq!(err.line, 1);
        assert_eq!(err.col, 18);
    }

    #[test]
    fn precedence_and_associativity() {
        let ast = parse_str("class A { void m() { x = 1 + 2 * 3 - 4; } }").unwrap();
        let StmtAst::Assign { value, .. } = &ast.classes[0].methods[0].body[0].kind else {
            panic!()
        };
        // ((1 + (2 * 3)) - 4)
        let ExprAst::Binary {
            op: BinOp::Sub,
            lhs,
            ..
        } = &value.kind
        else {
            panic!("{value:?}")
        };
        assert!(matches!(lhs.kind, ExprAst::Binary { op: BinOp::Add, .. }));
    }

    #[test]
    fn multi_declarator_fields() {
        let ast = parse_str("public class A { int a, b = 1; B c = new B(); }").unwrap();
        let names: Vec<&str> = ast.classes[0]
            .fields
            .iter()
            .map(|f| f.name.as_str())
            .collect();
        assert_eq!(names, ["a", "b", "c"]);
        assert!(ast.classes[0].fields[0].init.is_none());
    }

    #[test]
    fn statement_forms() {
        let src = r#"
class A extends B {
  void m(int n) {
    for (int i = 0; i < n; i++) { f(); }
    while (n > 0) n--;
    switch (n) { case 1: g(); break; case -2: default: h(); }
    if (a) b(); else if (c) d(); else e();
    return;
  }
}"#;
        let ast = parse_str(src).unwrap();
        assert_eq!(ast.classes[0].extends.as_deref(), Some("B"));
        let body = &ast.classes[0].methods[0].body;
        assert_eq!(body.len(), 5);
        assert_eq!(body[0].line, 4);
        let StmtAst::Switch { arms, .. } = &body[2].kind else {
            panic!()
        };
        assert_eq!(arms.len(), 3);
        assert_eq!(arms[1].label, Some(Literal::Int(-2)));
        assert!(arms[1].body.is_empty());
        let StmtAst::If { els: Some(e), .. } = &body[3].kind else {
            panic!()
        };
        assert!(matches!(e.kind, StmtAst::If { .. }));
    }

    #[test]
    fn rejects_bad_assignment_target() {
        let err = parse_str("class A { void m() { f() = 3; } }").unwrap_err();
        assert_eq!(err.line, 1);
    }
}
