//! Type checking and the type-derived classifications used by the analysis (path types, deep/shallow).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::syntax::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TypeErrorCode {
    UnknownName,
    UnknownField,
    DerefOfNonAccess,
    BinopNonScalar,
    ModeArgNotPath,
    AllocTypeMismatch,
    DuplicateName,
    MissingMain,
    ForwardRecordRef,
    ArityMismatch,
    ArgTypeMismatch,
    AssignTypeMismatch,
    CondNotBoolean,
}

impl TypeErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            TypeErrorCode::UnknownName => "unknown-name",
            TypeErrorCode::UnknownField => "unknown-field",
            TypeErrorCode::DerefOfNonAccess => "deref-of-non-access",
            TypeErrorCode::BinopNonScalar => "binop-non-scalar",
            TypeErrorCode::ModeArgNotPath => "mode-arg-not-path",
            TypeErrorCode::AllocTypeMismatch => "alloc-type-mismatch",
            TypeErrorCode::DuplicateName => "duplicate-name",
            TypeErrorCode::MissingMain => "missing-main",
            TypeErrorCode::ForwardRecordRef => "forward-record-ref",
            TypeErrorCode::ArityMismatch => "arity-mismatch",
            TypeErrorCode::ArgTypeMismatch => "arg-type-mismatch",
            TypeErrorCode::AssignTypeMismatch => "assign-type-mismatch",
            TypeErrorCode::CondNotBoolean => "cond-not-boolean",
        }
    }
}

impl fmt::Display for TypeErrorCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeError {
    pub span: Span,
    pub code: TypeErrorCode,
    pub message: String,
}

impl TypeError {
    fn new(span: Span, code: TypeErrorCode, message: impl Into<String>) -> Self {
        TypeError { span, code, message: message.into() }
    }
}

impl fmt::Display for TypeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl std::error::Error for TypeError {}

/// Declared records plus the precomputed deep/shallow classification of each.
#[derive(Clone, Debug, Default)]
pub struct RecordTable {
    records: BTreeMap<String, RecordDecl>,
    deep: BTreeMap<String, bool>,
}

impl RecordTable {
    pub fn new(decls: &[RecordDecl]) -> RecordTable {
        let mut table = RecordTable::default();
        for r in decls {
            table.records.entry(r.name.clone()).or_insert_with(|| r.clone());
        }
        // Fixpoint, since records may be declared in any order in ill-formed input.
        loop {
            let mut changed = false;
            for r in table.records.values() {
                let deep = r.fields.iter().any(|f| table.is_deep(&f.ty));
                if deep && !table.deep.get(&r.name).copied().unwrap_or(false) {
                    changed = true;
                    table.deep.insert(r.name.clone(), true);
                }
            }
            if !changed {
                break;
            }
        }
        table
    }

    pub fn get(&self, name: &str) -> Option<&RecordDecl> {
        self.records.get(name)
    }

    pub fn field_type(&self, record: &str, field: &str) -> Option<&Type> {
        self.records.get(record)?.fields.iter().find(|f| f.name == field).map(|f| &f.ty)
    }

    /// True iff a pointer is reachable from a value of type `ty`.
    pub fn is_deep(&self, ty: &Type) -> bool {
        match ty {
            Type::Scalar(_) => false,
            Type::Access(_) => true,
            Type::Named(name) => self.deep.get(name).copied().unwrap_or(false),
        }
    }

    /// The one-segment extensions available on a value of type `ty`.
    pub fn children(&self, ty: &Type) -> Vec<(Segment, Type)> {
        match ty {
            Type::Scalar(_) => Vec::new(),
            Type::Access(inner) => vec![(Segment::Deref, (**inner).clone())],
            Type::Named(name) => self
                .records
                .get(name)
                .map(|r| r.fields.iter().map(|f| (Segment::Field(f.name.clone()), f.ty.clone())).collect())
                .unwrap_or_default(),
        }
    }

    pub fn child_type(&self, ty: &Type, seg: &Segment) -> Option<Type> {
        match (ty, seg) {
            (Type::Access(inner), Segment::Deref) => Some((**inner).clone()),
            (Type::Named(name), Segment::Field(f)) => self.field_type(name, f).cloned(),
            _ => None,
        }
    }

    pub fn is_resolvable(&self, ty: &Type) -> bool {
        match ty {
            Type::Scalar(_) => true,
            Type::Access(inner) => self.is_resolvable(inner),
            Type::Named(name) => self.records.contains_key(name),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarInfo {
    pub ty: Type,
    /// `None` for locals.
    pub mode: Option<Mode>,
}

/// Typing context of one procedure.
#[derive(Clone, Debug)]
pub struct TypeEnv {
    pub proc_name: String,
    pub records: Arc<RecordTable>,
    vars: BTreeMap<String, VarInfo>,
    order: Vec<String>,
}

/// Static type of an expression. `Null` unifies with any access type.
#[derive(Clone, Debug, PartialEq)]
pub enum ExprType {
    Ty(Type),
    Null,
}

impl ExprType {
    pub fn fits(&self, target: &Type) -> bool {
        match self {
            ExprType::Ty(t) => t == target,
            ExprType::Null => matches!(target, Type::Access(_)),
        }
    }
}

impl fmt::Display for ExprType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprType::Ty(t) => write!(f, "{t}"),
            ExprType::Null => f.write_str("null"),
        }
    }
}

impl TypeEnv {
    pub fn new(proc_name: impl Into<String>, records: Arc<RecordTable>) -> TypeEnv {
        TypeEnv { proc_name: proc_name.into(), records, vars: BTreeMap::new(), order: Vec::new() }
    }

    /// Adds a variable; returns false if the name is taken.
    pub fn declare(&mut self, name: &str, ty: Type, mode: Option<Mode>) -> bool {
        if self.vars.contains_key(name) {
            return false;
        }
        self.vars.insert(name.to_string(), VarInfo { ty, mode });
        self.order.push(name.to_string());
        true
    }

    pub fn var(&self, name: &str) -> Option<&VarInfo> {
        self.vars.get(name)
    }

    /// Variables in declaration order (parameters first).
    pub fn vars(&self) -> impl Iterator<Item = (&str, &VarInfo)> {
        self.order.iter().map(move |n| (n.as_str(), &self.vars[n]))
    }

    pub fn is_deep(&self, ty: &Type) -> bool {
        self.records.is_deep(ty)
    }

    pub fn type_of_path(&self, p: &Path) -> Result<Type, TypeError> {
        self.type_of_path_at(p, Span::default())
    }

    fn type_of_path_at(&self, p: &Path, span: Span) -> Result<Type, TypeError> {
        let mut ty = match self.vars.get(&p.root) {
            Some(v) => v.ty.clone(),
            None => return Err(TypeError::new(span, TypeErrorCode::UnknownName, format!("unknown variable `{}`", p.root))),
        };
        for seg in &p.segments {
            ty = match (&ty, seg) {
                (Type::Access(inner), Segment::Deref) => (**inner).clone(),
                (_, Segment::Deref) => {
                    return Err(TypeError::new(span, TypeErrorCode::DerefOfNonAccess, format!("`.all` applied to a value of type {ty} in `{p}`")))
                }
                (Type::Named(r), Segment::Field(f)) => match self.records.field_type(r, f) {
                    Some(t) => t.clone(),
                    None => return Err(TypeError::new(span, TypeErrorCode::UnknownField, format!("record {r} has no field `{f}`"))),
                },
                (_, Segment::Field(f)) => {
                    return Err(TypeError::new(span, TypeErrorCode::UnknownField, format!("type {ty} has no field `{f}`")))
                }
            };
        }
        Ok(ty)
    }

    pub fn type_of_expr(&self, e: &Expr) -> Result<ExprType, TypeError> {
        match &e.kind {
            ExprKind::Path(p) => self.type_of_path_at(p, e.span).map(ExprType::Ty),
            ExprKind::Lit(lit) => Ok(ExprType::Ty(Type::Scalar(lit.kind()))),
            ExprKind::AddressOf(p) => Ok(ExprType::Ty(Type::access(self.type_of_path_at(p, e.span)?))),
            ExprKind::Null => Ok(ExprType::Null),
            ExprKind::Binary(op, l, r) => {
                let lt = self.type_of_expr(l)?;
                let rt = self.type_of_expr(r)?;
                binop_type(*op, &lt, &rt).map_err(|(code, msg)| TypeError::new(e.span, code, msg))
            }
        }
    }
}

fn binop_type(op: BinOp, lt: &ExprType, rt: &ExprType) -> Result<ExprType, (TypeErrorCode, String)> {
    let mismatch = || (TypeErrorCode::ArgTypeMismatch, format!("operator `{}` cannot combine {lt} and {rt}", op.symbol()));
    if matches!(lt, ExprType::Null) || matches!(rt, ExprType::Null) {
        return Err(mismatch());
    }
    let (ExprType::Ty(Type::Scalar(a)), ExprType::Ty(Type::Scalar(b))) = (lt, rt) else {
        return Err((TypeErrorCode::BinopNonScalar, format!("operator `{}` applied to non-scalar operands {lt} and {rt}", op.symbol())));
    };
    if a != b {
        return Err(mismatch());
    }
    let numeric = matches!(a, ScalarKind::Integer | ScalarKind::Real);
    match op {
        _ if op.is_arithmetic() && numeric => Ok(ExprType::Ty(Type::Scalar(*a))),
        BinOp::Eq | BinOp::Ne => Ok(ExprType::Ty(Type::BOOLEAN)),
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge if numeric => Ok(ExprType::Ty(Type::BOOLEAN)),
        BinOp::And | BinOp::Or if *a == ScalarKind::Boolean => Ok(ExprType::Ty(Type::BOOLEAN)),
        _ => Err(mismatch()),
    }
}

/// Result of checking a whole program: the record table, one environment per procedure, and
/// each procedure's signature.
#[derive(Clone, Debug)]
pub struct ProgramEnv {
    pub records: Arc<RecordTable>,
    pub procs: BTreeMap<String, Arc<TypeEnv>>,
    pub signatures: BTreeMap<String, Vec<(Mode, Type)>>,
}

impl ProgramEnv {
    pub fn proc_env(&self, name: &str) -> Option<&Arc<TypeEnv>> {
        self.procs.get(name)
    }
}

pub fn check_program(program: &Program) -> Result<ProgramEnv, Vec<TypeError>> {
    let mut errors = Vec::new();
    check_records(&program.records, &mut errors);
    let records = Arc::new(RecordTable::new(&program.records));

    let mut signatures = BTreeMap::new();
    for p in &program.procedures {
        if signatures.contains_key(&p.name) {
            errors.push(TypeError::new(p.span, TypeErrorCode::DuplicateName, format!("procedure `{}` declared twice", p.name)));
            continue;
        }
        signatures.insert(p.name.clone(), p.params.iter().map(|prm| (prm.mode, prm.ty.clone())).collect::<Vec<_>>());
    }
    match program.procedure("Main") {
        None => errors.push(TypeError::new(Span::default(), TypeErrorCode::MissingMain, "no procedure named `Main`")),
        Some(m) if !m.params.is_empty() => {
            errors.push(TypeError::new(m.span, TypeErrorCode::MissingMain, "`Main` must have an empty parameter list"))
        }
        Some(_) => {}
    }

    let mut procs = BTreeMap::new();
    let mut seen = BTreeSet::new();
    for p in &program.procedures {
        if !seen.insert(p.name.as_str()) {
            continue;
        }
        let mut env = TypeEnv::new(&p.name, records.clone());
        let decls = p
            .params
            .iter()
            .map(|prm| (&prm.name, &prm.ty, Some(prm.mode), prm.span))
            .chain(p.locals.iter().map(|l| (&l.name, &l.ty, None, l.span)));
        for (name, ty, mode, span) in decls {
            check_type_resolves(&records, ty, span, &mut errors);
            if !env.declare(name, ty.clone(), mode) {
                errors.push(TypeError::new(span, TypeErrorCode::DuplicateName, format!("`{name}` declared twice in `{}`", p.name)));
            }
        }
        let checker = BodyChecker { env: &env, signatures: &signatures };
        checker.stmts(&p.body, &mut errors);
        procs.insert(p.name.clone(), Arc::new(env));
    }

    if errors.is_empty() {
        Ok(ProgramEnv { records, procs, signatures })
    } else {
        Err(errors)
    }
}

fn check_type_resolves(records: &RecordTable, ty: &Type, span: Span, errors: &mut Vec<TypeError>) {
    if !records.is_resolvable(ty) {
        errors.push(TypeError::new(span, TypeErrorCode::UnknownName, format!("unknown type {ty}")));
    }
}

fn check_records(decls: &[RecordDecl], errors: &mut Vec<TypeError>) {
    let mut declared: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fields = BTreeSet::new();
    for (idx, r) in decls.iter().enumerate() {
        if matches!(r.name.as_str(), "Integer" | "Real" | "Boolean") || declared.contains_key(r.name.as_str()) {
            errors.push(TypeError::new(r.span, TypeErrorCode::DuplicateName, format!("type `{}` declared twice", r.name)));
        } else {
            declared.insert(&r.name, idx);
        }
    }
    let position: BTreeMap<&str, usize> = decls.iter().enumerate().rev().map(|(i, r)| (r.name.as_str(), i)).collect();
    for (idx, r) in decls.iter().enumerate() {
        for f in &r.fields {
            if !fields.insert(f.name.as_str()) {
                errors.push(TypeError::new(f.span, TypeErrorCode::DuplicateName, format!("field name `{}` is not unique", f.name)));
            }
            // Direct record-typed fields must refer to earlier records; through `access`,
            // the record itself is allowed too.
            let (base, through_access) = innermost(&f.ty);
            if let Type::Named(target) = base {
                match position.get(target.as_str()) {
                    None => errors.push(TypeError::new(f.span, TypeErrorCode::UnknownName, format!("unknown type {target}"))),
                    Some(&pos) => {
                        let ok = if through_access { pos <= idx } else { pos < idx };
                        if !ok {
                            errors.push(TypeError::new(
                                f.span,
                                TypeErrorCode::ForwardRecordRef,
                                format!("field `{}` of `{}` refers to `{target}` before its declaration", f.name, r.name),
                            ));
                        }
                    }
                }
            }
        }
    }
}

fn innermost(ty: &Type) -> (&Type, bool) {
    match ty {
        Type::Access(inner) => (innermost(inner).0, true),
        other => (other, false),
    }
}

struct BodyChecker<'a> {
    env: &'a TypeEnv,
    signatures: &'a BTreeMap<String, Vec<(Mode, Type)>>,
}

impl BodyChecker<'_> {
    fn stmts(&self, stmts: &[Stmt], errors: &mut Vec<TypeError>) {
        for s in stmts {
            if let Err(e) = self.stmt(s, errors) {
                errors.push(e);
            }
        }
    }

    fn path(&self, p: &Path, span: Span) -> Result<Type, TypeError> {
        self.env.type_of_path_at(p, span)
    }

    fn expr(&self, e: &Expr) -> Result<ExprType, TypeError> {
        self.env.type_of_expr(e)
    }

    fn cond(&self, cond: &Expr) -> Result<(), TypeError> {
        match self.expr(cond)? {
            ExprType::Ty(Type::Scalar(ScalarKind::Boolean)) => Ok(()),
            other => Err(TypeError::new(cond.span, TypeErrorCode::CondNotBoolean, format!("condition has type {other}, expected Boolean"))),
        }
    }

    fn stmt(&self, s: &Stmt, errors: &mut Vec<TypeError>) -> Result<(), TypeError> {
        match &s.kind {
            StmtKind::Assign { lhs, rhs } => {
                let lt = self.path(lhs, s.span)?;
                let rt = self.expr(rhs)?;
                if !rt.fits(&lt) {
                    return Err(TypeError::new(s.span, TypeErrorCode::AssignTypeMismatch, format!("cannot assign {rt} to `{lhs}` of type {lt}")));
                }
            }
            StmtKind::Alloc { lhs, ty } => {
                if !self.env.records.is_resolvable(ty) {
                    return Err(TypeError::new(s.span, TypeErrorCode::UnknownName, format!("unknown type {ty}")));
                }
                let lt = self.path(lhs, s.span)?;
                if lt.pointee() != Some(ty) {
                    return Err(TypeError::new(s.span, TypeErrorCode::AllocTypeMismatch, format!("`{lhs}` has type {lt}, expected access {ty}")));
                }
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                if let Err(e) = self.cond(cond) {
                    errors.push(e);
                }
                self.stmts(then_branch, errors);
                self.stmts(else_branch, errors);
            }
            StmtKind::While { cond, body } => {
                if let Err(e) = self.cond(cond) {
                    errors.push(e);
                }
                self.stmts(body, errors);
            }
            StmtKind::Call { callee, args } => {
                let Some(sig) = self.signatures.get(callee) else {
                    return Err(TypeError::new(s.span, TypeErrorCode::UnknownName, format!("unknown procedure `{callee}`")));
                };
                if sig.len() != args.len() {
                    return Err(TypeError::new(
                        s.span,
                        TypeErrorCode::ArityMismatch,
                        format!("`{callee}` expects {} arguments, got {}", sig.len(), args.len()),
                    ));
                }
                for (idx, ((mode, pty), arg)) in sig.iter().zip(args).enumerate() {
                    if *mode != Mode::In && arg.as_path().is_none() {
                        errors.push(TypeError::new(
                            arg.span,
                            TypeErrorCode::ModeArgNotPath,
                            format!("argument {} of `{callee}` has mode {mode} and must be a path", idx + 1),
                        ));
                        continue;
                    }
                    match self.expr(arg) {
                        Ok(at) if at.fits(pty) => {}
                        Ok(at) => errors.push(TypeError::new(
                            arg.span,
                            TypeErrorCode::ArgTypeMismatch,
                            format!("argument {} of `{callee}` has type {at}, expected {pty}", idx + 1),
                        )),
                        Err(e) => errors.push(e),
                    }
                }
            }
        }
        Ok(())
    }
}
