//! Abstract syntax, the path algebra, and source locations.

use std::fmt;

use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

/// Half-open `[start, end)` range of source positions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Span {
    pub start: Pos,
    pub end: Pos,
}

impl Span {
    pub fn new(start: Pos, end: Pos) -> Self {
        Span { start, end }
    }

    pub fn to(self, other: Span) -> Span {
        Span { start: self.start, end: other.end }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start.line, self.start.col)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScalarKind {
    Integer,
    Real,
    Boolean,
}

impl ScalarKind {
    pub fn name(self) -> &'static str {
        match self {
            ScalarKind::Integer => "Integer",
            ScalarKind::Real => "Real",
            ScalarKind::Boolean => "Boolean",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Scalar(ScalarKind),
    Access(Box<Type>),
    Named(String),
}

impl Type {
    pub const INTEGER: Type = Type::Scalar(ScalarKind::Integer);
    pub const REAL: Type = Type::Scalar(ScalarKind::Real);
    pub const BOOLEAN: Type = Type::Scalar(ScalarKind::Boolean);

    pub fn access(inner: Type) -> Type {
        Type::Access(Box::new(inner))
    }

    pub fn named(name: impl Into<String>) -> Type {
        Type::Named(name.into())
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, Type::Scalar(_))
    }

    pub fn pointee(&self) -> Option<&Type> {
        match self {
            Type::Access(inner) => Some(inner),
            _ => None,
        }
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Scalar(k) => f.write_str(k.name()),
            Type::Access(inner) => write!(f, "access {inner}"),
            Type::Named(name) => f.write_str(name),
        }
    }
}

/// One step of a path: a record field selection or a pointer dereference (`.all`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Segment {
    Field(String),
    Deref,
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Segment::Field(name) => f.write_str(name),
            Segment::Deref => f.write_str("all"),
        }
    }
}

/// An l-value: a variable followed by field selections and dereferences.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Path {
    pub root: String,
    pub segments: Vec<Segment>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtensionKind {
    NotExtension,
    Near,
    Far,
}

impl Path {
    pub fn var(name: impl Into<String>) -> Path {
        Path { root: name.into(), segments: Vec::new() }
    }

    pub fn field(&self, name: impl Into<String>) -> Path {
        self.child(Segment::Field(name.into()))
    }

    pub fn deref(&self) -> Path {
        self.child(Segment::Deref)
    }

    pub fn child(&self, seg: Segment) -> Path {
        let mut segments = self.segments.clone();
        segments.push(seg);
        Path { root: self.root.clone(), segments }
    }

    pub fn is_var(&self) -> bool {
        self.segments.is_empty()
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    /// Splits off the last segment.
    pub fn split_last(&self) -> Option<(Path, &Segment)> {
        let (last, init) = self.segments.split_last()?;
        Some((Path { root: self.root.clone(), segments: init.to_vec() }, last))
    }

    /// All strict prefixes, shortest first.
    pub fn prefixes(&self) -> Vec<Path> {
        (0..self.segments.len())
            .map(|n| Path { root: self.root.clone(), segments: self.segments[..n].to_vec() })
            .collect()
    }

    pub fn deref_count(&self) -> usize {
        self.segments.iter().filter(|s| matches!(s, Segment::Deref)).count()
    }

    pub fn is_prefix_of(&self, other: &Path) -> bool {
        self.root == other.root
            && self.segments.len() <= other.segments.len()
            && other.segments[..self.segments.len()] == self.segments[..]
    }

    pub fn is_strict_prefix_of(&self, other: &Path) -> bool {
        self.segments.len() < other.segments.len() && self.is_prefix_of(other)
    }

    pub fn comparable(&self, other: &Path) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// Classifies `ext` relative to `self`: near extensions add no dereference.
    pub fn extension_kind(&self, ext: &Path) -> ExtensionKind {
        if !self.is_strict_prefix_of(ext) {
            ExtensionKind::NotExtension
        } else if ext.deref_count() == self.deref_count() {
            ExtensionKind::Near
        } else {
            ExtensionKind::Far
        }
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.root)?;
        for seg in &self.segments {
            write!(f, ".{seg}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "=",
            BinOp::Ne => "/=",
            BinOp::And => "and",
            BinOp::Or => "or",
        }
    }

    /// Binding strength: `or` < `and` < comparisons < additive < multiplicative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge | BinOp::Eq | BinOp::Ne => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }

    pub fn is_arithmetic(self) -> bool {
        self.precedence() >= 4
    }

    pub fn is_logical(self) -> bool {
        self.precedence() <= 2
    }

    pub const ALL: [BinOp; 12] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
        BinOp::Eq,
        BinOp::Ne,
        BinOp::And,
        BinOp::Or,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Literal {
    Int(i64),
    Real(f64),
    Bool(bool),
}

impl Literal {
    pub fn kind(self) -> ScalarKind {
        match self {
            Literal::Int(_) => ScalarKind::Integer,
            Literal::Real(_) => ScalarKind::Real,
            Literal::Bool(_) => ScalarKind::Boolean,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Path(Path),
    Lit(Literal),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    AddressOf(Path),
    Null,
}

impl Expr {
    pub fn new(kind: ExprKind) -> Expr {
        Expr { kind, span: Span::default() }
    }

    pub fn path(p: Path) -> Expr {
        Expr::new(ExprKind::Path(p))
    }

    pub fn int(v: i64) -> Expr {
        Expr::new(ExprKind::Lit(Literal::Int(v)))
    }

    pub fn boolean(v: bool) -> Expr {
        Expr::new(ExprKind::Lit(Literal::Bool(v)))
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)))
    }

    pub fn as_path(&self) -> Option<&Path> {
        match &self.kind {
            ExprKind::Path(p) => Some(p),
            _ => None,
        }
    }

    /// Operand paths in left-to-right order. `'Access` operands are not included.
    pub fn paths(&self) -> Vec<&Path> {
        let mut out = Vec::new();
        self.collect_paths(&mut out);
        out
    }

    fn collect_paths<'a>(&'a self, out: &mut Vec<&'a Path>) {
        match &self.kind {
            ExprKind::Path(p) => out.push(p),
            ExprKind::Binary(_, l, r) => {
                l.collect_paths(out);
                r.collect_paths(out);
            }
            ExprKind::Lit(_) | ExprKind::AddressOf(_) | ExprKind::Null => {}
        }
    }
}

/// Pre-order statement number within its procedure, starting at 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StmtId(pub u32);

impl fmt::Display for StmtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub id: StmtId,
    pub span: Span,
    pub kind: StmtKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    Assign { lhs: Path, rhs: Expr },
    Alloc { lhs: Path, ty: Type },
    If { cond: Expr, then_branch: Vec<Stmt>, else_branch: Vec<Stmt> },
    While { cond: Expr, body: Vec<Stmt> },
    Call { callee: String, args: Vec<Expr> },
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Stmt {
        Stmt { id: StmtId::default(), span: Span::default(), kind }
    }

    pub fn assign(lhs: Path, rhs: Expr) -> Stmt {
        Stmt::new(StmtKind::Assign { lhs, rhs })
    }

    pub fn alloc(lhs: Path, ty: Type) -> Stmt {
        Stmt::new(StmtKind::Alloc { lhs, ty })
    }

    /// Number of statements in this subtree, including `self`.
    pub fn count(&self) -> usize {
        1 + match &self.kind {
            StmtKind::If { then_branch, else_branch, .. } => {
                count_stmts(then_branch) + count_stmts(else_branch)
            }
            StmtKind::While { body, .. } => count_stmts(body),
            _ => 0,
        }
    }
}

pub fn count_stmts(stmts: &[Stmt]) -> usize {
    stmts.iter().map(Stmt::count).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    In,
    InOut,
    Out,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::In => "in",
            Mode::InOut => "in out",
            Mode::Out => "out",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub mode: Mode,
    pub ty: Type,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Local {
    pub name: String,
    pub ty: Type,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldDecl {
    pub name: String,
    pub ty: Type,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecordDecl {
    pub name: String,
    pub fields: Vec<FieldDecl>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProcDecl {
    pub name: String,
    pub params: Vec<Param>,
    pub locals: Vec<Local>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

impl ProcDecl {
    /// Renumbers statements in pre-order, starting from 1.
    pub fn renumber(&mut self) {
        fn walk(stmts: &mut [Stmt], next: &mut u32) {
            for s in stmts {
                *next += 1;
                s.id = StmtId(*next);
                match &mut s.kind {
                    StmtKind::If { then_branch, else_branch, .. } => {
                        walk(then_branch, next);
                        walk(else_branch, next);
                    }
                    StmtKind::While { body, .. } => walk(body, next),
                    _ => {}
                }
            }
        }
        let mut next = 0;
        walk(&mut self.body, &mut next);
    }

    pub fn find_stmt(&self, id: StmtId) -> Option<&Stmt> {
        fn walk(stmts: &[Stmt], id: StmtId) -> Option<&Stmt> {
            for s in stmts {
                if s.id == id {
                    return Some(s);
                }
                let found = match &s.kind {
                    StmtKind::If { then_branch, else_branch, .. } => {
                        walk(then_branch, id).or_else(|| walk(else_branch, id))
                    }
                    StmtKind::While { body, .. } => walk(body, id),
                    _ => None,
                };
                if found.is_some() {
                    return found;
                }
            }
            None
        }
        walk(&self.body, id)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Program {
    pub records: Vec<RecordDecl>,
    pub procedures: Vec<ProcDecl>,
}

impl Program {
    pub fn procedure(&self, name: &str) -> Option<&ProcDecl> {
        self.procedures.iter().find(|p| p.name == name)
    }

    pub fn renumber(&mut self) {
        for p in &mut self.procedures {
            p.renumber();
        }
    }

    /// Resets every span, leaving a value suitable for structural comparison.
    pub fn without_spans(&self) -> Program {
        let mut out = self.clone();
        for r in &mut out.records {
            r.span = Span::default();
            for f in &mut r.fields {
                f.span = Span::default();
            }
        }
        for p in &mut out.procedures {
            p.span = Span::default();
            for prm in &mut p.params {
                prm.span = Span::default();
            }
            for l in &mut p.locals {
                l.span = Span::default();
            }
            strip_stmts(&mut p.body);
        }
        out
    }
}

fn strip_stmts(stmts: &mut [Stmt]) {
    for s in stmts {
        s.span = Span::default();
        match &mut s.kind {
            StmtKind::Assign { rhs, .. } => strip_expr(rhs),
            StmtKind::Alloc { .. } => {}
            StmtKind::If { cond, then_branch, else_branch } => {
                strip_expr(cond);
                strip_stmts(then_branch);
                strip_stmts(else_branch);
            }
            StmtKind::While { cond, body } => {
                strip_expr(cond);
                strip_stmts(body);
            }
            StmtKind::Call { args, .. } => args.iter_mut().for_each(strip_expr),
        }
    }
}

fn strip_expr(e: &mut Expr) {
    e.span = Span::default();
    if let ExprKind::Binary(_, l, r) = &mut e.kind {
        strip_expr(l);
        strip_expr(r);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Before,
    After,
}

/// A program point immediately before or after a statement.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeqPoint {
    pub proc: String,
    pub stmt: StmtId,
    pub side: Side,
}

impl SeqPoint {
    pub fn before(proc: &str, stmt: StmtId) -> Self {
        SeqPoint { proc: proc.to_string(), stmt, side: Side::Before }
    }

    pub fn after(proc: &str, stmt: StmtId) -> Self {
        SeqPoint { proc: proc.to_string(), stmt, side: Side::After }
    }

    /// Parses the `Proc#N:before|after` rendering.
    pub fn parse(text: &str) -> Option<SeqPoint> {
        let (proc, rest) = text.split_once('#')?;
        let (num, side) = rest.split_once(':')?;
        let side = match side {
            "before" => Side::Before,
            "after" => Side::After,
            _ => return None,
        };
        if proc.is_empty() {
            return None;
        }
        Some(SeqPoint { proc: proc.to_string(), stmt: StmtId(num.parse().ok()?), side })
    }
}

impl fmt::Display for SeqPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::Before => "before",
            Side::After => "after",
        };
        write!(f, "{}#{}:{}", self.proc, self.stmt, side)
    }
}
