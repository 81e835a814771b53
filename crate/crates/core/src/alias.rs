//! Alias safety checking: threads an [`AccessPolicy`] through every statement of every
//! procedure, recording a snapshot at each sequence point.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::permission::{AccessPolicy, PathOrder, PermError, Permission, PolicyError};
use crate::syntax::{Expr, Mode, Path, ProcDecl, Program, SeqPoint, Span, Stmt, StmtKind, Type};
use crate::typecheck::{ProgramEnv, TypeEnv};

/// The rule whose premise failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    Assign,
    Alloc,
    If,
    While,
    Call,
    ProcExit,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Assign => "P-assign",
            Rule::Alloc => "P-alloc",
            Rule::If => "P-if",
            Rule::While => "P-while",
            Rule::Call => "P-call",
            Rule::ProcExit => "Proc-exit",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub proc: String,
    pub span: Span,
    pub rule: Rule,
    pub path: Path,
    pub required: Permission,
    pub actual: Permission,
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} (path {} requires {}, has {})",
            self.rule, self.message, self.path, self.required, self.actual
        )
    }
}

/// Deliberate weakenings of the rules, used to check that testing notices unsound analyses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mutation {
    /// Moves of deep paths skip `cut`.
    WeakCut,
    /// Moves and allocations skip `block`.
    WeakBlock,
    /// Calls skip `borrow` on in-out and out arguments.
    WeakBorrow,
}

impl Mutation {
    pub const ALL: [Mutation; 3] = [Mutation::WeakCut, Mutation::WeakBlock, Mutation::WeakBorrow];

    pub fn as_str(self) -> &'static str {
        match self {
            Mutation::WeakCut => "weak-cut",
            Mutation::WeakBlock => "weak-block",
            Mutation::WeakBorrow => "weak-borrow",
        }
    }

    pub fn parse(s: &str) -> Option<Mutation> {
        Mutation::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CheckOptions {
    pub path_order: PathOrder,
    pub mutation: Option<Mutation>,
}

/// Policy snapshots keyed by sequence point.
#[derive(Clone, Debug, Default)]
pub struct PolicyMap {
    points: BTreeMap<SeqPoint, AccessPolicy>,
}

impl PolicyMap {
    pub fn new() -> PolicyMap {
        PolicyMap::default()
    }

    pub fn get(&self, point: &SeqPoint) -> Option<&AccessPolicy> {
        self.points.get(point)
    }

    pub fn insert(&mut self, point: SeqPoint, policy: AccessPolicy) {
        self.points.insert(point, policy);
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SeqPoint, &AccessPolicy)> {
        self.points.iter()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn extend(&mut self, other: PolicyMap) {
        self.points.extend(other.points);
    }
}

/// Outcome of checking a whole program: snapshots for every procedure (truncated at the
/// failure point of failing ones) and all diagnostics.
#[derive(Clone, Debug, Default)]
pub struct AliasReport {
    pub map: PolicyMap,
    pub diagnostics: Vec<Diagnostic>,
}

impl AliasReport {
    pub fn accepted(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

pub type Signatures = BTreeMap<String, Vec<(Mode, Type)>>;

struct Checker<'a> {
    proc: &'a str,
    signatures: &'a Signatures,
    opts: CheckOptions,
    map: PolicyMap,
}

impl Checker<'_> {
    fn fail(&self, rule: Rule, span: Span, err: PolicyError) -> Diagnostic {
        match err {
            PolicyError::Denied(PermError { path, required, actual, .. }) => Diagnostic {
                proc: self.proc.to_string(),
                span,
                rule,
                message: format!("insufficient permission for `{path}`"),
                path,
                required,
                actual,
                code: "permission-denied",
            },
            PolicyError::ReadOnlyPrefix { path } => Diagnostic {
                proc: self.proc.to_string(),
                span,
                rule,
                message: format!("cannot block through read-only `{path}`"),
                path,
                required: Permission::W,
                actual: Permission::R,
                code: "read-only-prefix",
            },
        }
    }

    fn move_expr(&self, pol: &mut AccessPolicy, e: &Expr) -> Result<(), PolicyError> {
        let Some(mutation) = self.opts.mutation else {
            return pol.move_expr(e, self.opts.path_order);
        };
        let deep_path = e.as_path().filter(|p| {
            let ty = pol.env().type_of_path(p).expect("well-typed expression");
            pol.env().is_deep(&ty)
        });
        match (mutation, deep_path) {
            (Mutation::WeakCut, Some(p)) => {
                pol.check(p, Permission::RW)?;
                pol.block(p)
            }
            (Mutation::WeakBlock, Some(p)) => {
                pol.check(p, Permission::RW)?;
                pol.cut(p);
                Ok(())
            }
            _ => pol.move_expr(e, self.opts.path_order),
        }
    }

    fn check_seq(&mut self, mut pol: AccessPolicy, stmts: &[Stmt]) -> Result<AccessPolicy, Diagnostic> {
        for s in stmts {
            pol = self.check_stmt(pol, s)?;
        }
        Ok(pol)
    }

    fn check_stmt(&mut self, pol: AccessPolicy, s: &Stmt) -> Result<AccessPolicy, Diagnostic> {
        self.map.insert(SeqPoint::before(self.proc, s.id), pol.clone());
        let out = self.apply(pol, s)?;
        self.map.insert(SeqPoint::after(self.proc, s.id), out.clone());
        Ok(out)
    }

    fn apply(&mut self, mut pol: AccessPolicy, s: &Stmt) -> Result<AccessPolicy, Diagnostic> {
        let order = self.opts.path_order;
        match &s.kind {
            StmtKind::Assign { lhs, rhs } => {
                let fail = |c: &Self, e| c.fail(Rule::Assign, s.span, e);
                self.move_expr(&mut pol, rhs).map_err(|e| fail(self, e))?;
                pol.check(lhs, Permission::W).map_err(|e| fail(self, e.into()))?;
                pol.fresh(lhs, Permission::RW);
                pol.lift(lhs);
                Ok(pol)
            }
            StmtKind::Alloc { lhs, .. } => {
                pol.check(lhs, Permission::W).map_err(|e| self.fail(Rule::Alloc, s.span, e.into()))?;
                let target = lhs.deref();
                pol.fresh(&target, Permission::W);
                pol.cut(&target);
                if self.opts.mutation != Some(Mutation::WeakBlock) {
                    pol.block(&target).map_err(|e| self.fail(Rule::Alloc, s.span, e))?;
                }
                Ok(pol)
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                pol.check_expr(cond, Permission::R, order).map_err(|e| self.fail(Rule::If, cond.span, e.into()))?;
                let then_pol = self.check_seq(pol.clone(), then_branch)?;
                let else_pol = self.check_seq(pol, else_branch)?;
                Ok(then_pol.meet(&else_pol))
            }
            StmtKind::While { cond, body } => {
                pol.check_expr(cond, Permission::R, order).map_err(|e| self.fail(Rule::While, cond.span, e.into()))?;
                let after_body = self.check_seq(pol.clone(), body)?;
                if let Err(path) = after_body.dominates(&pol) {
                    return Err(Diagnostic {
                        proc: self.proc.to_string(),
                        span: s.span,
                        rule: Rule::While,
                        required: pol.get(&path),
                        actual: after_body.get(&path),
                        code: "loop-permission-lost",
                        message: format!("loop body does not restore the permission of `{path}`"),
                        path,
                    });
                }
                Ok(pol)
            }
            StmtKind::Call { callee, args } => {
                let modes: Vec<Mode> = self.signatures[callee].iter().map(|(m, _)| *m).collect();
                let mut inner = pol.clone();
                let fail = |c: &Self, e: PermError| c.fail(Rule::Call, s.span, e.into());
                for (arg, _) in args.iter().zip(&modes).filter(|(_, m)| **m == Mode::In) {
                    inner.check_expr(arg, Permission::R, order).map_err(|e| fail(self, e))?;
                    inner.observe(arg);
                }
                for group in [Mode::InOut, Mode::Out] {
                    let required = if group == Mode::InOut { Permission::RW } else { Permission::W };
                    for (arg, _) in args.iter().zip(&modes).filter(|(_, m)| **m == group) {
                        let p = arg.as_path().expect("in out and out arguments are paths");
                        inner.check(p, required).map_err(|e| fail(self, e))?;
                        if self.opts.mutation != Some(Mutation::WeakBorrow) {
                            inner.borrow(p);
                        }
                    }
                }
                for (arg, mode) in args.iter().zip(&modes) {
                    if *mode != Mode::In {
                        let p = arg.as_path().expect("in out and out arguments are paths");
                        pol.fresh(p, Permission::RW);
                        pol.lift(p);
                    }
                }
                Ok(pol)
            }
        }
    }
}

/// Checks one statement from `pol` inside procedure `proc`.
pub fn check_stmt(
    pol: AccessPolicy,
    s: &Stmt,
    proc: &str,
    signatures: &Signatures,
    opts: CheckOptions,
) -> Result<AccessPolicy, Diagnostic> {
    Checker { proc, signatures, opts, map: PolicyMap::new() }.check_stmt(pol, s)
}

/// Left fold of [`check_stmt`] over `stmts`.
pub fn check_seq(
    pol: AccessPolicy,
    stmts: &[Stmt],
    proc: &str,
    signatures: &Signatures,
    opts: CheckOptions,
) -> Result<AccessPolicy, Diagnostic> {
    Checker { proc, signatures, opts, map: PolicyMap::new() }.check_seq(pol, stmts)
}

/// Initial policy of a procedure body: `in` parameters readable, `in out` parameters owned,
/// `out` parameters and locals writable only.
pub fn entry_policy(proc: &ProcDecl, env: Arc<TypeEnv>) -> AccessPolicy {
    let mut pol = AccessPolicy::new(env);
    for prm in &proc.params {
        let p = Path::var(&prm.name);
        match prm.mode {
            Mode::In => pol.fresh(&p, Permission::R),
            Mode::InOut => pol.fresh(&p, Permission::RW),
            Mode::Out => {
                pol.fresh(&p, Permission::W);
                pol.cut(&p);
            }
        }
    }
    for local in &proc.locals {
        let p = Path::var(&local.name);
        pol.fresh(&p, Permission::W);
        pol.cut(&p);
    }
    pol
}

/// Checks one procedure. The returned map covers every sequence point reached before the
/// first diagnostic.
pub fn check_procedure(
    proc: &ProcDecl,
    env: Arc<TypeEnv>,
    signatures: &Signatures,
    opts: CheckOptions,
) -> (PolicyMap, Vec<Diagnostic>) {
    let mut checker = Checker { proc: &proc.name, signatures, opts, map: PolicyMap::new() };
    let entry = entry_policy(proc, env);
    let exit = match checker.check_seq(entry, &proc.body) {
        Ok(pol) => pol,
        Err(d) => return (checker.map, vec![d]),
    };
    let diagnostics = proc
        .params
        .iter()
        .filter(|prm| prm.mode != Mode::In)
        .filter_map(|prm| {
            let p = Path::var(&prm.name);
            let actual = exit.get(&p);
            (actual != Permission::RW).then(|| Diagnostic {
                proc: proc.name.clone(),
                span: prm.span,
                rule: Rule::ProcExit,
                message: format!("parameter `{}` must be fully owned on return", prm.name),
                path: p,
                required: Permission::RW,
                actual,
                code: "exit-permission-lost",
            })
        })
        .collect();
    (checker.map, diagnostics)
}

/// Checks every procedure independently and aggregates the results.
pub fn analyze_program(program: &Program, env: &ProgramEnv, opts: CheckOptions) -> AliasReport {
    let results: Vec<_> = program
        .procedures
        .par_iter()
        .map(|proc| check_procedure(proc, env.procs[&proc.name].clone(), &env.signatures, opts))
        .collect();
    let mut report = AliasReport::default();
    for (map, diagnostics) in results {
        report.map.extend(map);
        report.diagnostics.extend(diagnostics);
    }
    report
}

pub fn check_program_aliasing(program: &Program, env: &ProgramEnv, opts: CheckOptions) -> Result<PolicyMap, Vec<Diagnostic>> {
    let report = analyze_program(program, env, opts);
    if report.accepted() {
        Ok(report.map)
    } else {
        Err(report.diagnostics)
    }
}
