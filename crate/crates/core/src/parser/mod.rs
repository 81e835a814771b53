//! Concrete syntax: tokenizer, recursive-descent parser and canonical printer.

mod lexer;
mod printer;

pub use lexer::{tokenize, Keyword, Token, TokenKind};
pub use printer::{pretty_print, print_expr, print_stmts};

use thiserror::Error;

use crate::syntax::*;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SyntaxError {
    #[error("{message}")]
    Lex { span: Span, message: String },
    #[error("expected {expected}, found {found}")]
    Parse { span: Span, expected: String, found: String },
}

impl SyntaxError {
    pub fn span(&self) -> Span {
        match self {
            SyntaxError::Lex { span, .. } | SyntaxError::Parse { span, .. } => *span,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            SyntaxError::Lex { .. } => "lex-error",
            SyntaxError::Parse { .. } => "parse-error",
        }
    }
}

/// Tokenizes and parses a whole source file.
pub fn parse(source: &str) -> Result<Program, SyntaxError> {
    parse_program(&tokenize(source)?)
}

pub fn parse_program(tokens: &[Token]) -> Result<Program, SyntaxError> {
    let mut parser = Parser { tokens, pos: 0 };
    let mut program = Program::default();
    while parser.at_kw(Keyword::Type) {
        program.records.push(parser.record()?);
    }
    while !parser.at(&TokenKind::Eof) {
        program.procedures.push(parser.procedure()?);
    }
    program.renumber();
    Ok(program)
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

type PResult<T> = Result<T, SyntaxError>;

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        // The lexer always terminates the stream with Eof.
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_kind_at(&self, n: usize) -> &'t TokenKind {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)].kind
    }

    fn at(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    fn at_kw(&self, kw: Keyword) -> bool {
        self.at(&TokenKind::Keyword(kw))
    }

    fn bump(&mut self) -> &'t Token {
        let tok = self.peek();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn error<T>(&self, expected: impl Into<String>) -> PResult<T> {
        let tok = self.peek();
        Err(SyntaxError::Parse { span: tok.span, expected: expected.into(), found: tok.kind.to_string() })
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.at(kind) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<Span> {
        if self.at(&kind) {
            Ok(self.bump().span)
        } else {
            self.error(kind.to_string())
        }
    }

    fn expect_kw(&mut self, kw: Keyword) -> PResult<Span> {
        self.expect(TokenKind::Keyword(kw))
    }

    fn ident(&mut self) -> PResult<(String, Span)> {
        match &self.peek().kind {
            TokenKind::Ident(name) => {
                let span = self.bump().span;
                Ok((name.clone(), span))
            }
            _ => self.error("identifier"),
        }
    }

    fn ident_list(&mut self) -> PResult<Vec<(String, Span)>> {
        let mut names = vec![self.ident()?];
        while self.eat(&TokenKind::Comma) {
            names.push(self.ident()?);
        }
        Ok(names)
    }

    fn ty(&mut self) -> PResult<Type> {
        if self.eat(&TokenKind::Keyword(Keyword::Access)) {
            return Ok(Type::access(self.ty()?));
        }
        let (name, _) = match self.ident() {
            Ok(x) => x,
            Err(_) => return self.error("type"),
        };
        Ok(match name.as_str() {
            "Integer" => Type::INTEGER,
            "Real" => Type::REAL,
            "Boolean" => Type::BOOLEAN,
            _ => Type::Named(name),
        })
    }

    fn record(&mut self) -> PResult<RecordDecl> {
        let start = self.expect_kw(Keyword::Type)?;
        let (name, _) = self.ident()?;
        self.expect_kw(Keyword::Is)?;
        self.expect_kw(Keyword::Record)?;
        let mut fields = Vec::new();
        while !self.at_kw(Keyword::End) {
            let names = self.ident_list()?;
            self.expect(TokenKind::Colon)?;
            let ty = self.ty()?;
            let end = self.expect(TokenKind::Semi)?;
            for (fname, fspan) in names {
                fields.push(FieldDecl { name: fname, ty: ty.clone(), span: fspan.to(end) });
            }
        }
        self.expect_kw(Keyword::End)?;
        self.expect_kw(Keyword::Record)?;
        let end = self.expect(TokenKind::Semi)?;
        Ok(RecordDecl { name, fields, span: start.to(end) })
    }

    fn mode(&mut self) -> Mode {
        if self.eat(&TokenKind::Keyword(Keyword::In)) {
            if self.eat(&TokenKind::Keyword(Keyword::Out)) {
                Mode::InOut
            } else {
                Mode::In
            }
        } else if self.eat(&TokenKind::Keyword(Keyword::Out)) {
            Mode::Out
        } else {
            Mode::In
        }
    }

    fn procedure(&mut self) -> PResult<ProcDecl> {
        let start = self.expect_kw(Keyword::Procedure)?;
        let (name, _) = self.ident()?;
        let mut params = Vec::new();
        if self.eat(&TokenKind::LParen) {
            loop {
                let names = self.ident_list()?;
                self.expect(TokenKind::Colon)?;
                let mode = self.mode();
                let ty = self.ty()?;
                let end = self.prev_span();
                for (pname, pspan) in names {
                    params.push(Param { name: pname, mode, ty: ty.clone(), span: pspan.to(end) });
                }
                if !self.eat(&TokenKind::Semi) {
                    break;
                }
            }
            self.expect(TokenKind::RParen)?;
        }
        self.expect_kw(Keyword::Is)?;

        let mut locals = Vec::new();
        let mut init = Vec::new();
        while !self.at_kw(Keyword::Begin) {
            let names = self.ident_list()?;
            self.expect(TokenKind::Colon)?;
            let ty = self.ty()?;
            let value = if self.eat(&TokenKind::Assign) { Some(self.expr()?) } else { None };
            let end = self.expect(TokenKind::Semi)?;
            for (lname, lspan) in names {
                let span = lspan.to(end);
                if let Some(v) = &value {
                    init.push(Stmt { id: StmtId::default(), span, kind: StmtKind::Assign { lhs: Path::var(&lname), rhs: v.clone() } });
                }
                locals.push(Local { name: lname, ty: ty.clone(), span });
            }
        }
        self.expect_kw(Keyword::Begin)?;
        let mut body = init;
        body.extend(self.stmts(&[Keyword::End])?);
        self.expect_kw(Keyword::End)?;
        if let TokenKind::Ident(closing) = &self.peek().kind {
            if *closing != name {
                return self.error(format!("`{name}`"));
            }
            self.bump();
        }
        let end = self.expect(TokenKind::Semi)?;
        Ok(ProcDecl { name, params, locals, body, span: start.to(end) })
    }

    fn stmts(&mut self, terminators: &[Keyword]) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        while !terminators.iter().any(|k| self.at_kw(*k)) {
            if self.at(&TokenKind::Eof) {
                let expected: Vec<_> = terminators.iter().map(|k| format!("`{}`", k.text())).collect();
                return self.error(expected.join(" or "));
            }
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let start = self.peek().span;
        let kind = match &self.peek().kind {
            TokenKind::Keyword(Keyword::If) => {
                self.bump();
                let cond = self.expr()?;
                self.expect_kw(Keyword::Then)?;
                let then_branch = self.stmts(&[Keyword::Else, Keyword::End])?;
                let else_branch = if self.eat(&TokenKind::Keyword(Keyword::Else)) {
                    self.stmts(&[Keyword::End])?
                } else {
                    Vec::new()
                };
                self.expect_kw(Keyword::End)?;
                self.expect_kw(Keyword::If)?;
                StmtKind::If { cond, then_branch, else_branch }
            }
            TokenKind::Keyword(Keyword::While) => {
                self.bump();
                let cond = self.expr()?;
                self.expect_kw(Keyword::Loop)?;
                let body = self.stmts(&[Keyword::End])?;
                self.expect_kw(Keyword::End)?;
                self.expect_kw(Keyword::Loop)?;
                StmtKind::While { cond, body }
            }
            TokenKind::Ident(_) => {
                let path = self.path()?;
                if self.eat(&TokenKind::Assign) {
                    if self.eat(&TokenKind::Keyword(Keyword::New)) {
                        StmtKind::Alloc { lhs: path, ty: self.ty()? }
                    } else {
                        StmtKind::Assign { lhs: path, rhs: self.expr()? }
                    }
                } else if path.is_var() {
                    let mut args = Vec::new();
                    if self.eat(&TokenKind::LParen) {
                        loop {
                            args.push(self.expr()?);
                            if !self.eat(&TokenKind::Comma) {
                                break;
                            }
                        }
                        self.expect(TokenKind::RParen)?;
                    }
                    StmtKind::Call { callee: path.root, args }
                } else {
                    return self.error("`:=`");
                }
            }
            _ => return self.error("statement"),
        };
        let end = self.expect(TokenKind::Semi)?;
        Ok(Stmt { id: StmtId::default(), span: start.to(end), kind })
    }

    fn path(&mut self) -> PResult<Path> {
        let (root, _) = self.ident()?;
        let mut path = Path::var(root);
        while self.at(&TokenKind::Dot) {
            self.bump();
            match &self.peek().kind {
                TokenKind::Keyword(Keyword::All) => {
                    self.bump();
                    path = path.deref();
                }
                TokenKind::Ident(name) => {
                    self.bump();
                    path = path.field(name.clone());
                }
                _ => return self.error("field name or `all`"),
            }
        }
        Ok(path)
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binop_at(&self) -> Option<BinOp> {
        Some(match &self.peek().kind {
            TokenKind::Plus => BinOp::Add,
            TokenKind::Minus => BinOp::Sub,
            TokenKind::Star => BinOp::Mul,
            TokenKind::Slash => BinOp::Div,
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Le => BinOp::Le,
            TokenKind::Gt => BinOp::Gt,
            TokenKind::Ge => BinOp::Ge,
            TokenKind::Eq => BinOp::Eq,
            TokenKind::Ne => BinOp::Ne,
            TokenKind::Keyword(Keyword::And) => BinOp::And,
            TokenKind::Keyword(Keyword::Or) => BinOp::Or,
            _ => return None,
        })
    }

    /// Precedence climbing. Comparisons do not chain.
    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.primary()?;
        let mut compared = false;
        while let Some(op) = self.binop_at() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            if op.is_comparison() {
                if compared {
                    return self.error("operand grouping (comparisons do not chain)");
                }
                compared = true;
            }
            self.bump();
            let rhs = self.binary(prec + 1)?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr { kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let tok = self.peek();
        let kind = match &tok.kind {
            TokenKind::Int(v) => {
                self.bump();
                ExprKind::Lit(Literal::Int(*v))
            }
            TokenKind::Real(v) => {
                self.bump();
                ExprKind::Lit(Literal::Real(*v))
            }
            TokenKind::Keyword(Keyword::True) => {
                self.bump();
                ExprKind::Lit(Literal::Bool(true))
            }
            TokenKind::Keyword(Keyword::False) => {
                self.bump();
                ExprKind::Lit(Literal::Bool(false))
            }
            TokenKind::Keyword(Keyword::Null) => {
                self.bump();
                ExprKind::Null
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr()?;
                let end = self.expect(TokenKind::RParen)?;
                return Ok(Expr { kind: inner.kind, span: tok.span.to(end) });
            }
            TokenKind::Ident(_) => {
                let path = self.path()?;
                if self.at(&TokenKind::Tick) && self.peek_kind_at(1) == &TokenKind::Keyword(Keyword::AccessAttr) {
                    self.bump();
                    self.bump();
                    ExprKind::AddressOf(path)
                } else {
                    ExprKind::Path(path)
                }
            }
            _ => return self.error("expression"),
        };
        Ok(Expr { kind, span: tok.span.to(self.prev_span()) })
    }
}
