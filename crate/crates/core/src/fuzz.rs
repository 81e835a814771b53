//! Random generation of well-typed programs, shrinking, and property campaigns.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::alias::{analyze_program, AliasReport, CheckOptions, Mutation};
use crate::interp::{run_program, ExecOutcome, Monitor, RunOptions, DEFAULT_FUEL};
use crate::parser::{parse, pretty_print};
use crate::permission::{PathOrder, Permission};
use crate::syntax::*;
use crate::typecheck::{check_program, RecordTable};

/// Bounds and biases for [`generate_program`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenConfig {
    pub seed: u64,
    pub max_records: usize,
    pub max_fields: usize,
    /// Maximum number of directly nested `access` constructors in a type.
    pub max_access_nesting: usize,
    /// Helper procedures besides `Main`.
    pub max_procedures: usize,
    pub max_params: usize,
    pub max_locals: usize,
    /// Statements per body, not counting initialization.
    pub max_stmts: usize,
    pub max_expr_depth: usize,
    pub max_path_len: usize,
    pub loop_prob: f64,
    pub call_prob: f64,
    pub if_prob: f64,
    pub alloc_prob: f64,
    /// Share of assignments whose target has a deep type.
    pub deep_assign_prob: f64,
    /// Chance that a call reuses an argument path for another `in out` or `out` argument.
    pub overlap_prob: f64,
    /// Chance that a local is fully initialized before the body.
    pub init_prob: f64,
    /// Chance that initialization allocates rather than assigning `null`.
    pub alloc_init_prob: f64,
    pub loop_iterations: i64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_records: 3,
            max_fields: 3,
            max_access_nesting: 2,
            max_procedures: 3,
            max_params: 3,
            max_locals: 3,
            max_stmts: 6,
            max_expr_depth: 2,
            max_path_len: 3,
            loop_prob: 0.1,
            call_prob: 0.15,
            if_prob: 0.1,
            alloc_prob: 0.1,
            deep_assign_prob: 0.3,
            overlap_prob: 0.05,
            init_prob: 0.9,
            alloc_init_prob: 0.7,
            loop_iterations: 3,
        }
    }
}

impl GenConfig {
    pub fn from_toml(text: &str) -> Result<GenConfig, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Recovers the configuration from a reproducer's comment header.
    pub fn from_reproducer(text: &str) -> Result<GenConfig, String> {
        let header: Vec<&str> = text
            .lines()
            .skip(1)
            .map_while(|l| l.strip_prefix("-- "))
            .collect();
        GenConfig::from_toml(&header.join("\n"))
    }
}

/// Seed of the `index`-th program of a campaign.
pub fn program_seed(campaign_seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(campaign_seed);
    rng.set_stream(index);
    rng.gen()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    In,
    Writable,
}

#[derive(Clone, Debug)]
struct Candidate {
    path: Path,
    ty: Type,
    role: Role,
}

struct Signature {
    name: String,
    params: Vec<Param>,
}

struct Gen<'a> {
    cfg: &'a GenConfig,
    rng: ChaCha8Rng,
    records: RecordTable,
    record_names: Vec<String>,
}

struct Body<'a> {
    candidates: Vec<Candidate>,
    callees: &'a [Signature],
    counters: usize,
}

impl Gen<'_> {
    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p.clamp(0.0, 1.0))
    }

    fn upto(&mut self, max: usize) -> usize {
        self.rng.gen_range(0..=max)
    }

    fn pick<'v, T>(&mut self, items: &'v [T]) -> Option<&'v T> {
        if items.is_empty() {
            None
        } else {
            Some(&items[self.rng.gen_range(0..items.len())])
        }
    }

    fn scalar_type(&mut self) -> Type {
        match self.rng.gen_range(0..4) {
            0 => Type::BOOLEAN,
            1 => Type::REAL,
            _ => Type::INTEGER,
        }
    }

    fn wrap_access(&mut self, mut ty: Type, min: usize) -> Type {
        let mut n = min;
        while n < self.cfg.max_access_nesting.max(min) && self.chance(if n == 0 { 0.5 } else { 0.25 }) {
            n += 1;
        }
        for _ in 0..n {
            ty = Type::access(ty);
        }
        ty
    }

    fn gen_records(&mut self) -> Vec<RecordDecl> {
        let count = self.upto(self.cfg.max_records);
        let mut decls: Vec<RecordDecl> = Vec::new();
        let mut field_no = 0;
        for i in 0..count {
            let name = format!("R{}", i + 1);
            let nfields = self.rng.gen_range(1..=self.cfg.max_fields.max(1));
            let mut fields = Vec::new();
            for _ in 0..nfields {
                field_no += 1;
                let ty = match self.rng.gen_range(0..4) {
                    0 if i > 0 => Type::named(format!("R{}", self.rng.gen_range(1..=i))),
                    1 | 2 if self.cfg.max_access_nesting > 0 => {
                        let target = Type::named(format!("R{}", self.rng.gen_range(1..=i + 1)));
                        self.wrap_access(target, 1)
                    }
                    _ => {
                        let s = self.scalar_type();
                        self.wrap_access(s, 0)
                    }
                };
                fields.push(FieldDecl { name: format!("F{field_no}"), ty, span: Span::default() });
            }
            decls.push(RecordDecl { name, fields, span: Span::default() });
        }
        decls
    }

    fn any_type(&mut self) -> Type {
        let base = match self.pick(&self.record_names.clone()) {
            Some(r) if self.chance(0.5) => Type::named(r.clone()),
            _ => self.scalar_type(),
        };
        self.wrap_access(base, 0)
    }

    /// Paths rooted at the given variables, up to the configured length.
    fn enumerate(&self, roots: &[(String, Type, Role)]) -> Vec<Candidate> {
        let mut out = Vec::new();
        let mut stack: Vec<Candidate> = roots
            .iter()
            .map(|(n, t, r)| Candidate { path: Path::var(n), ty: t.clone(), role: *r })
            .collect();
        stack.reverse();
        while let Some(c) = stack.pop() {
            if c.path.len() < self.cfg.max_path_len {
                for (seg, ty) in self.records.children(&c.ty).into_iter().rev() {
                    stack.push(Candidate { path: c.path.child(seg), ty, role: c.role });
                }
            }
            out.push(c);
        }
        out
    }

    fn literal(&mut self, kind: ScalarKind) -> Expr {
        match kind {
            ScalarKind::Integer => Expr::int(self.rng.gen_range(0..=20)),
            ScalarKind::Real => Expr::new(ExprKind::Lit(Literal::Real(self.rng.gen_range(0..=40) as f64 / 4.0))),
            ScalarKind::Boolean => Expr::boolean(self.rng.gen()),
        }
    }

    fn scalar_expr(&mut self, body: &Body, kind: ScalarKind, depth: usize) -> Expr {
        if depth == 0 || self.chance(0.4) {
            let reads: Vec<Path> = body
                .candidates
                .iter()
                .filter(|c| c.ty == Type::Scalar(kind))
                .map(|c| c.path.clone())
                .collect();
            return match self.pick(&reads) {
                Some(p) if self.chance(0.6) => Expr::path(p.clone()),
                _ => self.literal(kind),
            };
        }
        let d = depth - 1;
        match kind {
            ScalarKind::Integer | ScalarKind::Real => {
                let op = match self.rng.gen_range(0..20) {
                    0 => BinOp::Div,
                    1..=7 => BinOp::Add,
                    8..=13 => BinOp::Sub,
                    _ => BinOp::Mul,
                };
                let l = self.scalar_expr(body, kind, d);
                let r = self.scalar_expr(body, kind, d);
                Expr::binary(op, l, r)
            }
            ScalarKind::Boolean => match self.rng.gen_range(0..3) {
                0 => {
                    let op = if self.rng.gen() { BinOp::And } else { BinOp::Or };
                    let l = self.scalar_expr(body, kind, d);
                    let r = self.scalar_expr(body, kind, d);
                    Expr::binary(op, l, r)
                }
                _ => {
                    let ops = [BinOp::Lt, BinOp::Le, BinOp::Gt, BinOp::Ge, BinOp::Eq, BinOp::Ne];
                    let op = ops[self.rng.gen_range(0..ops.len())];
                    let k = if self.chance(0.8) { ScalarKind::Integer } else { ScalarKind::Real };
                    // Operands of a comparison cannot themselves be comparisons.
                    let l = self.arith_operand(body, k, d);
                    let r = self.arith_operand(body, k, d);
                    Expr::binary(op, l, r)
                }
            },
        }
    }

    fn arith_operand(&mut self, body: &Body, kind: ScalarKind, depth: usize) -> Expr {
        self.scalar_expr(body, kind, depth)
    }

    /// Right-hand side of type `ty`, or `None` if nothing in scope fits.
    fn expr_of(&mut self, body: &Body, ty: &Type, depth: usize) -> Option<Expr> {
        match ty {
            Type::Scalar(k) => Some(self.scalar_expr(body, *k, depth)),
            Type::Access(inner) => {
                let same: Vec<Path> = body.candidates.iter().filter(|c| &c.ty == ty).map(|c| c.path.clone()).collect();
                let targets: Vec<Path> = body
                    .candidates
                    .iter()
                    .filter(|c| &c.ty == inner.as_ref() && c.role == Role::Writable)
                    .map(|c| c.path.clone())
                    .collect();
                match self.rng.gen_range(0..10) {
                    0..=1 => Some(Expr::new(ExprKind::Null)),
                    2..=3 if !targets.is_empty() => {
                        let p = self.pick(&targets).unwrap().clone();
                        Some(Expr::new(ExprKind::AddressOf(p)))
                    }
                    _ => Some(self.pick(&same).map_or(Expr::new(ExprKind::Null), |p| Expr::path(p.clone()))),
                }
            }
            Type::Named(_) => {
                let same: Vec<Path> = body.candidates.iter().filter(|c| &c.ty == ty).map(|c| c.path.clone()).collect();
                self.pick(&same).map(|p| Expr::path(p.clone()))
            }
        }
    }

    /// Statements giving `path` and everything reachable from it a value.
    fn init(&mut self, path: &Path, ty: &Type, allocs: usize, out: &mut Vec<Stmt>) {
        match ty {
            Type::Scalar(k) => {
                let lit = self.literal(*k);
                out.push(Stmt::assign(path.clone(), lit));
            }
            Type::Access(inner) => {
                if allocs > 0 && self.chance(self.cfg.alloc_init_prob) {
                    out.push(Stmt::alloc(path.clone(), (**inner).clone()));
                    self.init(&path.deref(), inner, allocs - 1, out);
                } else {
                    out.push(Stmt::assign(path.clone(), Expr::new(ExprKind::Null)));
                }
            }
            Type::Named(name) => {
                let fields = self.records.get(name).expect("generated record").fields.clone();
                for f in fields {
                    self.init(&path.field(&f.name), &f.ty, allocs, out);
                }
            }
        }
    }

    fn writable(&self, body: &Body, pred: impl Fn(&Candidate) -> bool) -> Vec<Candidate> {
        body.candidates.iter().filter(|c| c.role == Role::Writable && pred(c)).cloned().collect()
    }

    fn stmt(&mut self, body: &mut Body, depth: usize, locals: &mut Vec<Local>, out: &mut Vec<Stmt>) {
        let roll: f64 = self.rng.gen();
        let mut acc = 0.0;
        let mut next = |p: f64| {
            acc += p;
            roll < acc
        };
        if next(self.cfg.loop_prob) && depth < 2 {
            body.counters += 1;
            let counter = format!("C{}", body.counters);
            locals.push(Local { name: counter.clone(), ty: Type::INTEGER, span: Span::default() });
            let c = Path::var(&counter);
            out.push(Stmt::assign(c.clone(), Expr::int(0)));
            let mut inner = Vec::new();
            for _ in 0..self.rng.gen_range(1..=3) {
                self.stmt(body, depth + 1, locals, &mut inner);
            }
            inner.push(Stmt::assign(c.clone(), Expr::binary(BinOp::Add, Expr::path(c.clone()), Expr::int(1))));
            let cond = Expr::binary(BinOp::Lt, Expr::path(c), Expr::int(self.cfg.loop_iterations));
            out.push(Stmt::new(StmtKind::While { cond, body: inner }));
        } else if next(self.cfg.if_prob) && depth < 2 {
            let cond = self.scalar_expr(body, ScalarKind::Boolean, self.cfg.max_expr_depth);
            let mut then_branch = Vec::new();
            for _ in 0..self.rng.gen_range(1..=3) {
                self.stmt(body, depth + 1, locals, &mut then_branch);
            }
            let mut else_branch = Vec::new();
            for _ in 0..self.rng.gen_range(0..=2) {
                self.stmt(body, depth + 1, locals, &mut else_branch);
            }
            out.push(Stmt::new(StmtKind::If { cond, then_branch, else_branch }));
        } else if next(self.cfg.call_prob) && !body.callees.is_empty() {
            if let Some(call) = self.call(body) {
                out.push(call);
            }
        } else if next(self.cfg.alloc_prob) {
            let targets = self.writable(body, |c| matches!(c.ty, Type::Access(_)));
            if let Some(c) = self.pick(&targets).cloned() {
                let inner = c.ty.pointee().unwrap().clone();
                out.push(Stmt::alloc(c.path.clone(), inner.clone()));
                if self.chance(0.7) {
                    self.init(&c.path.deref(), &inner, 0, out);
                }
            }
        } else {
            self.assign(body, out);
        }
    }

    fn assign(&mut self, body: &Body, out: &mut Vec<Stmt>) {
        let deep = self.chance(self.cfg.deep_assign_prob);
        let targets = self.writable(body, |c| self.records.is_deep(&c.ty) == deep);
        let Some(target) = self.pick(&targets).cloned() else { return };
        if let Some(rhs) = self.expr_of(body, &target.ty, self.cfg.max_expr_depth) {
            out.push(Stmt::assign(target.path, rhs));
        }
    }

    fn call(&mut self, body: &Body) -> Option<Stmt> {
        let callee = &body.callees[self.rng.gen_range(0..body.callees.len())];
        let mut args = Vec::new();
        let mut used: Vec<Path> = Vec::new();
        for prm in &callee.params {
            let arg = match prm.mode {
                Mode::In => self.expr_of(body, &prm.ty, 1)?,
                Mode::InOut | Mode::Out => {
                    let reuse: Vec<Path> = used
                        .iter()
                        .filter(|p| body.candidates.iter().any(|c| &c.path == *p && c.ty == prm.ty))
                        .cloned()
                        .collect();
                    let p = match self.pick(&reuse) {
                        Some(p) if self.chance(self.cfg.overlap_prob) => p.clone(),
                        _ => {
                            let fits = self.writable(body, |c| c.ty == prm.ty);
                            self.pick(&fits)?.path.clone()
                        }
                    };
                    used.push(p.clone());
                    Expr::path(p)
                }
            };
            args.push(arg);
        }
        Some(Stmt::new(StmtKind::Call { callee: callee.name.clone(), args }))
    }

    fn procedure(&mut self, sig: &Signature, callees: &[Signature]) -> ProcDecl {
        let mut locals: Vec<Local> = (0..self.upto(self.cfg.max_locals))
            .map(|i| Local { name: format!("L{}", i + 1), ty: self.any_type(), span: Span::default() })
            .collect();
        let mut roots: Vec<(String, Type, Role)> = sig
            .params
            .iter()
            .map(|p| (p.name.clone(), p.ty.clone(), if p.mode == Mode::In { Role::In } else { Role::Writable }))
            .collect();
        roots.extend(locals.iter().map(|l| (l.name.clone(), l.ty.clone(), Role::Writable)));
        let mut body = Body { candidates: self.enumerate(&roots), callees, counters: 0 };

        let mut stmts = Vec::new();
        let to_init: Vec<(String, Type, f64)> = sig
            .params
            .iter()
            .filter(|p| p.mode == Mode::Out)
            .map(|p| (p.name.clone(), p.ty.clone(), 0.95))
            .chain(locals.iter().map(|l| (l.name.clone(), l.ty.clone(), self.cfg.init_prob)))
            .collect();
        for (name, ty, prob) in to_init {
            if self.chance(prob) {
                self.init(&Path::var(name), &ty, 2, &mut stmts);
            }
        }
        for _ in 0..self.upto(self.cfg.max_stmts) {
            self.stmt(&mut body, 0, &mut locals, &mut stmts);
        }
        ProcDecl { name: sig.name.clone(), params: sig.params.clone(), locals, body: stmts, span: Span::default() }
    }
}

/// A well-typed program, deterministic in `config`.
pub fn generate_program(config: &GenConfig) -> Program {
    let mut gen = Gen {
        cfg: config,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        records: RecordTable::new(&[]),
        record_names: Vec::new(),
    };
    let records = gen.gen_records();
    gen.records = RecordTable::new(&records);
    gen.record_names = records.iter().map(|r| r.name.clone()).collect();

    let mut sigs = vec![Signature { name: "Main".to_string(), params: Vec::new() }];
    for i in 0..gen.upto(config.max_procedures) {
        let params = (0..gen.upto(config.max_params))
            .map(|j| {
                let mode = match gen.rng.gen_range(0..3) {
                    0 => Mode::In,
                    1 => Mode::InOut,
                    _ => Mode::Out,
                };
                Param { name: format!("X{}", j + 1), mode, ty: gen.any_type(), span: Span::default() }
            })
            .collect();
        sigs.push(Signature { name: format!("P{}", i + 1), params });
    }
    // Calls only go to later procedures, so there is no recursion.
    let mut procedures = Vec::new();
    for i in 0..sigs.len() {
        procedures.push(gen.procedure(&sigs[i], &sigs[i + 1..]));
    }
    procedures.rotate_left(1);
    let mut program = Program { records, procedures };
    program.renumber();
    program
}

fn remove_stmt(stmts: &mut Vec<Stmt>, mut target: usize) -> Result<(), usize> {
    for i in 0..stmts.len() {
        if target == 0 {
            stmts.remove(i);
            return Ok(());
        }
        target -= 1;
        let nested = match &mut stmts[i].kind {
            StmtKind::If { then_branch, else_branch, .. } => {
                match remove_stmt(then_branch, target) {
                    Ok(()) => return Ok(()),
                    Err(rest) => target = rest,
                }
                remove_stmt(else_branch, target)
            }
            StmtKind::While { body, .. } => remove_stmt(body, target),
            _ => Err(target),
        };
        match nested {
            Ok(()) => return Ok(()),
            Err(rest) => target = rest,
        }
    }
    Err(target)
}

fn shrink_candidates(program: &Program) -> Vec<Program> {
    let mut out = Vec::new();
    for (pi, proc) in program.procedures.iter().enumerate() {
        for k in 0..count_stmts(&proc.body) {
            let mut p = program.clone();
            if remove_stmt(&mut p.procedures[pi].body, k).is_ok() {
                out.push(p);
            }
        }
    }
    for (pi, proc) in program.procedures.iter().enumerate() {
        if proc.name != "Main" {
            let mut p = program.clone();
            p.procedures.remove(pi);
            out.push(p);
        }
        for li in 0..proc.locals.len() {
            let mut p = program.clone();
            p.procedures[pi].locals.remove(li);
            out.push(p);
        }
    }
    for (ri, rec) in program.records.iter().enumerate() {
        if rec.fields.len() > 1 {
            for fi in 0..rec.fields.len() {
                let mut p = program.clone();
                p.records[ri].fields.remove(fi);
                out.push(p);
            }
        }
    }
    out
}

/// Greedily removes statements, then procedures and locals, then record fields while the
/// program stays well-typed and `still_fails` holds.
pub fn shrink(program: &Program, still_fails: impl Fn(&Program) -> bool) -> Program {
    let mut current = program.clone();
    'outer: loop {
        for mut candidate in shrink_candidates(&current) {
            candidate.renumber();
            if check_program(&candidate).is_ok() && still_fails(&candidate) {
                current = candidate;
                continue 'outer;
            }
        }
        return current;
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FailureKind {
    IllTyped,
    RoundTrip,
    Consistency,
    OrderDependence,
    CrewViolation,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::IllTyped => "ill-typed",
            FailureKind::RoundTrip => "round-trip",
            FailureKind::Consistency => "consistency",
            FailureKind::OrderDependence => "order-dependence",
            FailureKind::CrewViolation => "crew-violation",
        }
    }
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CampaignOptions {
    pub fuel: u64,
    pub mutation: Option<Mutation>,
    /// Run every program, accepted or not, against its partial policy map with an all-`RW`
    /// fallback. Violations are then expected and not failures.
    pub unchecked: bool,
    pub check_orders: bool,
    pub consistency_depth: usize,
    pub shrink: bool,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        CampaignOptions {
            fuel: DEFAULT_FUEL,
            mutation: None,
            unchecked: false,
            check_orders: true,
            consistency_depth: 6,
            shrink: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RunTally {
    NotRun,
    Completed,
    Blocked,
    Fuel,
    Violation,
}

struct Verdict {
    accepted: bool,
    run: RunTally,
    failure: Option<(FailureKind, String)>,
}

fn examine(program: &Program, opts: &CampaignOptions, order_seed: u64) -> Verdict {
    let fail = |kind, detail: String, accepted| Verdict { accepted, run: RunTally::NotRun, failure: Some((kind, detail)) };
    let env = match check_program(program) {
        Ok(env) => env,
        Err(errs) => return fail(FailureKind::IllTyped, errs[0].to_string(), false),
    };
    let text = pretty_print(program);
    match parse(&text) {
        Ok(back) if back.without_spans() == program.without_spans() => {}
        Ok(_) => return fail(FailureKind::RoundTrip, "reparsed program differs".into(), false),
        Err(e) => return fail(FailureKind::RoundTrip, e.to_string(), false),
    }
    let check = |path_order| CheckOptions { path_order, mutation: opts.mutation };
    let report: AliasReport = analyze_program(program, &env, check(PathOrder::Textual));
    let accepted = report.accepted();
    if opts.check_orders {
        for order in [PathOrder::Reversed, PathOrder::Shuffled(order_seed)] {
            if analyze_program(program, &env, check(order)).accepted() != accepted {
                return fail(FailureKind::OrderDependence, format!("{order:?} changes the verdict"), accepted);
            }
        }
    }
    if accepted && opts.consistency_depth > 0 {
        for (point, pol) in report.map.iter() {
            if let Err(v) = pol.check_consistency(opts.consistency_depth) {
                return fail(FailureKind::Consistency, format!("at {point}: {v}"), accepted);
            }
        }
    }
    if !accepted && !opts.unchecked {
        return Verdict { accepted, run: RunTally::NotRun, failure: None };
    }
    let monitor = Monitor { fallback: opts.unchecked.then_some(Permission::RW), ..Monitor::new(&report.map) };
    let result = run_program(program, &env, RunOptions { fuel: opts.fuel, monitor: Some(monitor), ..RunOptions::default() });
    let (run, failure) = match result.outcome {
        ExecOutcome::Completed(_) => (RunTally::Completed, None),
        ExecOutcome::Blocked { .. } => (RunTally::Blocked, None),
        ExecOutcome::FuelExhausted => (RunTally::Fuel, None),
        ExecOutcome::CrewViolation(v) => {
            (RunTally::Violation, (!opts.unchecked).then(|| (FailureKind::CrewViolation, v.to_string())))
        }
    };
    Verdict { accepted, run, failure }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignFailure {
    pub index: u64,
    pub seed: u64,
    pub kind: FailureKind,
    pub detail: String,
    /// Minimized program with the generating configuration in its header.
    pub reproducer: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CampaignReport {
    pub seed: u64,
    pub count: u64,
    pub accepted: u64,
    pub rejected: u64,
    pub completed: u64,
    pub blocked: u64,
    pub fuel_exhausted: u64,
    pub violations: u64,
    pub failures: Vec<CampaignFailure>,
}

impl CampaignReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for CampaignReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "seed:           {}", self.seed)?;
        writeln!(f, "programs:       {}", self.count)?;
        writeln!(f, "accepted:       {}", self.accepted)?;
        writeln!(f, "rejected:       {}", self.rejected)?;
        writeln!(f, "completed:      {}", self.completed)?;
        writeln!(f, "blocked:        {}", self.blocked)?;
        writeln!(f, "fuel exhausted: {}", self.fuel_exhausted)?;
        writeln!(f, "violations:     {}", self.violations)?;
        write!(f, "failures:       {}", self.failures.len())?;
        for fl in &self.failures {
            write!(f, "\n  #{} (seed {}): {}: {}", fl.index, fl.seed, fl.kind, fl.detail)?;
        }
        Ok(())
    }
}

pub fn render_reproducer(config: &GenConfig, kind: FailureKind, detail: &str, program: &Program) -> String {
    let mut out = format!("-- reproducer: {kind}: {}\n", detail.replace('\n', " "));
    for line in config.to_toml().lines() {
        out.push_str("-- ");
        out.push_str(line);
        out.push('\n');
    }
    out.push('\n');
    out.push_str(&pretty_print(program));
    out
}

/// Generates and examines `count` programs. Only the first failure is shrunk.
pub fn run_campaign(config: &GenConfig, count: u64, opts: &CampaignOptions) -> CampaignReport {
    let verdicts: Vec<(u64, u64, Program, Verdict)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let seed = program_seed(config.seed, i);
            let program = generate_program(&GenConfig { seed, ..config.clone() });
            let verdict = examine(&program, opts, seed);
            (i, seed, program, verdict)
        })
        .collect();

    let mut report = CampaignReport { seed: config.seed, count, ..CampaignReport::default() };
    for (i, seed, program, v) in verdicts {
        if v.accepted {
            report.accepted += 1;
        } else {
            report.rejected += 1;
        }
        match v.run {
            RunTally::NotRun => {}
            RunTally::Completed => report.completed += 1,
            RunTally::Blocked => report.blocked += 1,
            RunTally::Fuel => report.fuel_exhausted += 1,
            RunTally::Violation => report.violations += 1,
        }
        if let Some((kind, detail)) = v.failure {
            let gen_config = GenConfig { seed, ..config.clone() };
            let minimized = if opts.shrink && report.failures.is_empty() {
                shrink(&program, |p| matches!(examine(p, opts, seed).failure, Some((k, _)) if k == kind))
            } else {
                program
            };
            let detail = match examine(&minimized, opts, seed).failure {
                Some((_, d)) => d,
                None => detail,
            };
            let reproducer = render_reproducer(&gen_config, kind, &detail, &minimized);
            report.failures.push(CampaignFailure { index: i, seed, kind, detail, reproducer });
        }
    }
    report
}
