//! Big-step reference interpreter with blocking semantics and an optional runtime monitor
//! for the concurrent-read, exclusive-write condition.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::alias::PolicyMap;
use crate::permission::{AccessPolicy, Permission};
use crate::syntax::*;
use crate::typecheck::{ProgramEnv, RecordTable, TypeEnv};

pub const DEFAULT_FUEL: u64 = 100_000;
pub const DEFAULT_DEPTH_BOUND: usize = 64;
/// Upper bound on paths enumerated per sequence point; the rest count as unmonitored.
pub const MAX_MONITORED_PATHS: usize = 200_000;

pub type Location = usize;

/// A location or a component of the record stored there.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Address {
    pub base: Location,
    pub fields: Vec<String>,
}

impl Address {
    pub fn loc(base: Location) -> Address {
        Address { base, fields: Vec::new() }
    }

    pub fn field(&self, name: &str) -> Address {
        let mut fields = self.fields.clone();
        fields.push(name.to_string());
        Address { base: self.base, fields }
    }
}

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.base)?;
        for field in &self.fields {
            write!(f, ".{field}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Real(f64),
    Bool(bool),
    Addr(Address),
    Null,
    /// Fields in declaration order.
    Record(Vec<(String, Value)>),
}

impl Value {
    fn component(&self, name: &str) -> &Value {
        match self {
            Value::Record(fields) => &fields.iter().find(|(f, _)| f == name).expect("field of stored record").1,
            other => panic!("field `{name}` of non-record value {other:?}"),
        }
    }

    fn component_mut(&mut self, name: &str) -> &mut Value {
        match self {
            Value::Record(fields) => &mut fields.iter_mut().find(|(f, _)| f == name).expect("field of stored record").1,
            other => panic!("field `{name}` of non-record value {other:?}"),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Real(v) => write!(f, "{v:?}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Addr(a) => write!(f, "{a}"),
            Value::Null => f.write_str("null"),
            Value::Record(fields) => {
                f.write_str("(")?;
                for (i, (name, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{name} => {v}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Default value of a type: zero, false, null, or a record of defaults. Nothing is allocated.
pub fn default_value(records: &RecordTable, ty: &Type) -> Value {
    match ty {
        Type::Scalar(ScalarKind::Integer) => Value::Int(0),
        Type::Scalar(ScalarKind::Real) => Value::Real(0.0),
        Type::Scalar(ScalarKind::Boolean) => Value::Bool(false),
        Type::Access(_) => Value::Null,
        Type::Named(name) => {
            let decl = records.get(name).unwrap_or_else(|| panic!("unknown record `{name}`"));
            Value::Record(decl.fields.iter().map(|f| (f.name.clone(), default_value(records, &f.ty))).collect())
        }
    }
}

/// Locations are never reused, so the store is indexed by allocation order.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Store {
    cells: Vec<Value>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    pub fn alloc(&mut self, v: Value) -> Location {
        self.cells.push(v);
        self.cells.len() - 1
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn read(&self, a: &Address) -> &Value {
        let mut v = &self.cells[a.base];
        for f in &a.fields {
            v = v.component(f);
        }
        v
    }

    pub fn write(&mut self, a: &Address, value: Value) {
        let mut v = &mut self.cells[a.base];
        for f in &a.fields {
            v = v.component_mut(f);
        }
        *v = value;
    }

    pub fn cells(&self) -> &[Value] {
        &self.cells
    }
}

/// Variables of one frame mapped to their addresses.
pub type Binding = BTreeMap<String, Address>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlockReason {
    NullDeref,
    DivByZero,
    Overflow,
}

impl BlockReason {
    pub fn as_str(self) -> &'static str {
        match self {
            BlockReason::NullDeref => "null-deref",
            BlockReason::DivByZero => "div-by-zero",
            BlockReason::Overflow => "overflow",
        }
    }
}

impl fmt::Display for BlockReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Two distinct paths evaluating to one address where one may write and the other is not `NO`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrewConflict {
    pub p: Path,
    pub q: Path,
    pub perm_p: Permission,
    pub perm_q: Permission,
    pub address: Address,
}

impl fmt::Display for CrewConflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "`{}` ({}) and `{}` ({}) both denote {}",
            self.p, self.perm_p, self.q, self.perm_q, self.address
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrewViolation {
    pub point: SeqPoint,
    pub conflict: CrewConflict,
}

impl fmt::Display for CrewViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at {}: {}", self.point, self.conflict)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExecOutcome {
    Completed(Store),
    Blocked { reason: BlockReason, span: Span },
    FuelExhausted,
    CrewViolation(CrewViolation),
}

impl ExecOutcome {
    pub fn is_completed(&self) -> bool {
        matches!(self, ExecOutcome::Completed(_))
    }

    pub fn is_crew_violation(&self) -> bool {
        matches!(self, ExecOutcome::CrewViolation(_))
    }
}

/// Policy source for monitored runs.
#[derive(Clone, Copy, Debug)]
pub struct Monitor<'a> {
    pub policies: &'a PolicyMap,
    /// Uniform policy used at points without a snapshot; `None` leaves those points unmonitored.
    pub fallback: Option<Permission>,
    pub depth_bound: usize,
}

impl<'a> Monitor<'a> {
    pub fn new(policies: &'a PolicyMap) -> Monitor<'a> {
        Monitor { policies, fallback: None, depth_bound: DEFAULT_DEPTH_BOUND }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct RunOptions<'a> {
    pub fuel: u64,
    pub trap_overflow: bool,
    pub monitor: Option<Monitor<'a>>,
    pub verbose: bool,
}

impl Default for RunOptions<'_> {
    fn default() -> Self {
        RunOptions { fuel: DEFAULT_FUEL, trap_overflow: false, monitor: None, verbose: false }
    }
}

/// One line of the verbose trace, emitted at each sequence point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEvent {
    pub point: SeqPoint,
    pub store_size: usize,
    pub monitored: usize,
    pub unmonitored: usize,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} store={} paths={}", self.point, self.store_size, self.monitored)?;
        if self.unmonitored > 0 {
            write!(f, " unmonitored={}", self.unmonitored)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub outcome: ExecOutcome,
    /// Main's frame, for inspecting final values.
    pub main_binding: Binding,
    pub steps: u64,
    pub trace: Vec<TraceEvent>,
}

enum Stop {
    Blocked(BlockReason, Span),
    Fuel,
    Crew(CrewViolation),
}

type Exec<T> = Result<T, Stop>;

/// Address denoted by a path, or the reason its evaluation blocks.
pub fn eval_lval(binding: &Binding, store: &Store, p: &Path) -> Result<Address, BlockReason> {
    let mut addr = binding.get(&p.root).unwrap_or_else(|| panic!("`{}` is not bound", p.root)).clone();
    for seg in &p.segments {
        addr = match seg {
            Segment::Field(f) => addr.field(f),
            Segment::Deref => match store.read(&addr) {
                Value::Addr(a) => a.clone(),
                Value::Null => return Err(BlockReason::NullDeref),
                other => panic!("dereference of non-pointer {other:?}"),
            },
        };
    }
    Ok(addr)
}

pub fn eval_expr(binding: &Binding, store: &Store, e: &Expr, trap_overflow: bool) -> Result<Value, BlockReason> {
    match &e.kind {
        ExprKind::Lit(Literal::Int(v)) => Ok(Value::Int(*v)),
        ExprKind::Lit(Literal::Real(v)) => Ok(Value::Real(*v)),
        ExprKind::Lit(Literal::Bool(v)) => Ok(Value::Bool(*v)),
        ExprKind::Null => Ok(Value::Null),
        ExprKind::Path(p) => Ok(store.read(&eval_lval(binding, store, p)?).clone()),
        ExprKind::AddressOf(p) => Ok(Value::Addr(eval_lval(binding, store, p)?)),
        ExprKind::Binary(op, l, r) => {
            let l = eval_expr(binding, store, l, trap_overflow)?;
            let r = eval_expr(binding, store, r, trap_overflow)?;
            binop(*op, l, r, trap_overflow)
        }
    }
}

fn binop(op: BinOp, l: Value, r: Value, trap_overflow: bool) -> Result<Value, BlockReason> {
    use BinOp::*;
    let v = match (l, r) {
        (Value::Int(a), Value::Int(b)) => match op {
            Add | Sub | Mul | Div => {
                if op == Div && b == 0 {
                    return Err(BlockReason::DivByZero);
                }
                let (v, overflow) = match op {
                    Add => a.overflowing_add(b),
                    Sub => a.overflowing_sub(b),
                    Mul => a.overflowing_mul(b),
                    _ => a.overflowing_div(b),
                };
                if overflow && trap_overflow {
                    return Err(BlockReason::Overflow);
                }
                Value::Int(v)
            }
            _ => Value::Bool(compare(op, a.cmp(&b) as i8)),
        },
        (Value::Real(a), Value::Real(b)) => match op {
            Add => Value::Real(a + b),
            Sub => Value::Real(a - b),
            Mul => Value::Real(a * b),
            Div if b == 0.0 => return Err(BlockReason::DivByZero),
            Div => Value::Real(a / b),
            Eq => Value::Bool(a == b),
            Ne => Value::Bool(a != b),
            Lt => Value::Bool(a < b),
            Le => Value::Bool(a <= b),
            Gt => Value::Bool(a > b),
            _ => Value::Bool(a >= b),
        },
        (Value::Bool(a), Value::Bool(b)) => match op {
            And => Value::Bool(a && b),
            Or => Value::Bool(a || b),
            Eq => Value::Bool(a == b),
            _ => Value::Bool(a != b),
        },
        (l, r) => panic!("ill-typed operands {l:?} {} {r:?}", op.symbol()),
    };
    Ok(v)
}

fn compare(op: BinOp, ord: i8) -> bool {
    match op {
        BinOp::Lt => ord < 0,
        BinOp::Le => ord <= 0,
        BinOp::Gt => ord > 0,
        BinOp::Ge => ord >= 0,
        BinOp::Eq => ord == 0,
        _ => ord != 0,
    }
}

/// Well-typed paths of a frame whose evaluation succeeds, with their addresses.
#[derive(Clone, Debug, Default)]
pub struct PathEnumeration {
    pub paths: Vec<(Path, Address)>,
    /// Paths cut off by the dereference bound or the total path cap.
    pub skipped: usize,
}

/// Enumerates paths depth-first in declaration order, pruning at null pointers and beyond
/// `depth_bound` dereferences.
pub fn enumerate_paths(env: &TypeEnv, binding: &Binding, store: &Store, depth_bound: usize) -> PathEnumeration {
    let mut out = PathEnumeration::default();
    for (name, info) in env.vars() {
        let Some(addr) = binding.get(name) else { continue };
        walk_paths(&env.records, store, Path::var(name), addr.clone(), &info.ty, depth_bound, &mut out);
    }
    out
}

fn walk_paths(
    records: &RecordTable,
    store: &Store,
    path: Path,
    addr: Address,
    ty: &Type,
    depth_bound: usize,
    out: &mut PathEnumeration,
) {
    if out.paths.len() >= MAX_MONITORED_PATHS {
        out.skipped += 1;
        return;
    }
    out.paths.push((path.clone(), addr.clone()));
    match ty {
        Type::Scalar(_) => {}
        Type::Access(inner) => {
            if let Value::Addr(target) = store.read(&addr) {
                if path.deref_count() >= depth_bound {
                    out.skipped += 1;
                } else {
                    walk_paths(records, store, path.deref(), target.clone(), inner, depth_bound, out);
                }
            }
        }
        Type::Named(name) => {
            let decl = records.get(name).expect("resolvable record type");
            for f in &decl.fields {
                walk_paths(records, store, path.field(&f.name), addr.field(&f.name), &f.ty, depth_bound, out);
            }
        }
    }
}

/// Checks that no two distinct paths share an address while one of them may write and the
/// other has any permission. Returns the number of paths examined and the number skipped.
pub fn crew_check(policy: &AccessPolicy, binding: &Binding, store: &Store, depth_bound: usize) -> Result<(usize, usize), CrewConflict> {
    let paths = enumerate_paths(policy.env(), binding, store, depth_bound);
    let mut groups: HashMap<&Address, Vec<&Path>> = HashMap::new();
    for (p, a) in &paths.paths {
        groups.entry(a).or_default().push(p);
    }
    let mut shared: Vec<_> = groups.into_iter().filter(|(_, ps)| ps.len() > 1).collect();
    shared.sort();
    for (addr, ps) in shared {
        let perms: Vec<Permission> = ps.iter().map(|p| policy.get(p)).collect();
        for i in 0..ps.len() {
            if !perms[i].geq(Permission::W) {
                continue;
            }
            for j in 0..ps.len() {
                if i != j && perms[j] != Permission::NO {
                    return Err(CrewConflict {
                        p: ps[i].clone(),
                        q: ps[j].clone(),
                        perm_p: perms[i],
                        perm_q: perms[j],
                        address: addr.clone(),
                    });
                }
            }
        }
    }
    Ok((paths.paths.len(), paths.skipped))
}

struct Interp<'a> {
    program: &'a Program,
    env: &'a ProgramEnv,
    opts: RunOptions<'a>,
    store: Store,
    fuel: u64,
    steps: u64,
    trace: Vec<TraceEvent>,
}

impl Interp<'_> {
    fn blocked<T>(r: Result<T, BlockReason>, span: Span) -> Exec<T> {
        r.map_err(|reason| Stop::Blocked(reason, span))
    }

    fn point(&mut self, proc: &str, binding: &Binding, point: SeqPoint) -> Exec<()> {
        let Some(monitor) = self.opts.monitor else {
            if self.opts.verbose {
                self.trace.push(TraceEvent { point, store_size: self.store.len(), monitored: 0, unmonitored: 0 });
            }
            return Ok(());
        };
        let fallback;
        let policy = match (monitor.policies.get(&point), monitor.fallback) {
            (Some(p), _) => Some(p),
            (None, Some(perm)) => {
                fallback = AccessPolicy::uniform(self.env.procs[proc].clone(), perm);
                Some(&fallback)
            }
            (None, None) => None,
        };
        let (monitored, unmonitored) = match policy {
            Some(policy) => crew_check(policy, binding, &self.store, monitor.depth_bound)
                .map_err(|conflict| Stop::Crew(CrewViolation { point: point.clone(), conflict }))?,
            None => (0, enumerate_paths(&self.env.procs[proc], binding, &self.store, monitor.depth_bound).paths.len()),
        };
        if self.opts.verbose {
            self.trace.push(TraceEvent { point, store_size: self.store.len(), monitored, unmonitored });
        }
        Ok(())
    }

    fn exec_seq(&mut self, proc: &str, binding: &Binding, stmts: &[Stmt]) -> Exec<()> {
        for s in stmts {
            self.exec_stmt(proc, binding, s)?;
        }
        Ok(())
    }

    fn exec_stmt(&mut self, proc: &str, binding: &Binding, s: &Stmt) -> Exec<()> {
        if self.fuel == 0 {
            return Err(Stop::Fuel);
        }
        self.fuel -= 1;
        self.steps += 1;
        self.point(proc, binding, SeqPoint::before(proc, s.id))?;
        let trap = self.opts.trap_overflow;
        match &s.kind {
            StmtKind::Assign { lhs, rhs } => {
                let v = Self::blocked(eval_expr(binding, &self.store, rhs, trap), rhs.span)?;
                let a = Self::blocked(eval_lval(binding, &self.store, lhs), s.span)?;
                self.store.write(&a, v);
            }
            StmtKind::Alloc { lhs, ty } => {
                let a = Self::blocked(eval_lval(binding, &self.store, lhs), s.span)?;
                let loc = self.store.alloc(default_value(&self.env.records, ty));
                self.store.write(&a, Value::Addr(Address::loc(loc)));
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                let branch = match Self::blocked(eval_expr(binding, &self.store, cond, trap), cond.span)? {
                    Value::Bool(true) => then_branch,
                    _ => else_branch,
                };
                self.exec_seq(proc, binding, branch)?;
            }
            StmtKind::While { cond, body } => {
                while let Value::Bool(true) = Self::blocked(eval_expr(binding, &self.store, cond, trap), cond.span)? {
                    self.exec_seq(proc, binding, body)?;
                    // Each further iteration re-executes the loop statement.
                    if self.fuel == 0 {
                        return Err(Stop::Fuel);
                    }
                    self.fuel -= 1;
                    self.steps += 1;
                    self.point(proc, binding, SeqPoint::before(proc, s.id))?;
                }
            }
            StmtKind::Call { callee, args } => {
                let decl = self.program.procedure(callee).expect("callee exists");
                let mut frame = Binding::new();
                for (prm, arg) in decl.params.iter().zip(args) {
                    let addr = match prm.mode {
                        Mode::In => {
                            let v = Self::blocked(eval_expr(binding, &self.store, arg, trap), arg.span)?;
                            Address::loc(self.store.alloc(v))
                        }
                        Mode::InOut | Mode::Out => {
                            let p = arg.as_path().expect("in out and out arguments are paths");
                            Self::blocked(eval_lval(binding, &self.store, p), arg.span)?
                        }
                    };
                    frame.insert(prm.name.clone(), addr);
                }
                self.bind_locals(decl, &mut frame);
                self.exec_seq(&decl.name, &frame, &decl.body)?;
            }
        }
        self.point(proc, binding, SeqPoint::after(proc, s.id))
    }

    fn bind_locals(&mut self, decl: &ProcDecl, frame: &mut Binding) {
        for local in &decl.locals {
            let loc = self.store.alloc(default_value(&self.env.records, &local.ty));
            frame.insert(local.name.clone(), Address::loc(loc));
        }
    }
}

/// Executes `Main` from an empty store.
pub fn run_program(program: &Program, env: &ProgramEnv, opts: RunOptions<'_>) -> RunResult {
    let main = program.procedure("Main").expect("type-checked program has Main");
    let mut interp = Interp { program, env, opts, store: Store::new(), fuel: opts.fuel, steps: 0, trace: Vec::new() };
    let mut binding = Binding::new();
    interp.bind_locals(main, &mut binding);
    let outcome = match interp.exec_seq("Main", &binding, &main.body) {
        Ok(()) => ExecOutcome::Completed(std::mem::take(&mut interp.store)),
        Err(Stop::Blocked(reason, span)) => ExecOutcome::Blocked { reason, span },
        Err(Stop::Fuel) => ExecOutcome::FuelExhausted,
        Err(Stop::Crew(v)) => ExecOutcome::CrewViolation(v),
    };
    RunResult { outcome, main_binding: binding, steps: interp.steps, trace: interp.trace }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::typecheck::check_program;

    fn run(src: &str, fuel: u64) -> RunResult {
        let prog = parse(src).unwrap();
        let env = check_program(&prog).unwrap();
        run_program(&prog, &env, RunOptions { fuel, ..RunOptions::default() })
    }

    fn read(result: &RunResult, path: &str) -> Value {
        let ExecOutcome::Completed(store) = &result.outcome else { panic!("{:?}", result.outcome) };
        let e = crate::parser::parse(&format!("procedure Main is begin X := {path}; end;")).unwrap();
        let StmtKind::Assign { rhs, .. } = &e.procedures[0].body[0].kind else { unreachable!() };
        eval_expr(&result.main_binding, store, rhs, false).unwrap()
    }

    #[test]
    fn defaults() {
        let prog = parse("type List is record Flag : Boolean; Key : access Integer; Next : access List; end record;").unwrap();
        let records = RecordTable::new(&prog.records);
        assert_eq!(default_value(&records, &Type::INTEGER), Value::Int(0));
        assert_eq!(default_value(&records, &Type::access(Type::named("List"))), Value::Null);
        assert_eq!(
            default_value(&records, &Type::named("List")),
            Value::Record(vec![
                ("Flag".into(), Value::Bool(false)),
                ("Key".into(), Value::Null),
                ("Next".into(), Value::Null),
            ])
        );
    }

    #[test]
    fn arithmetic_and_assignment() {
        let r = run("procedure Main is X : Integer; Y : Real; begin X := 7 / 2 + 1; Y := 1.5 * 2.0; end Main;", 100);
        assert_eq!(read(&r, "X"), Value::Int(4));
        assert_eq!(read(&r, "Y"), Value::Real(3.0));
    }

    #[test]
    fn integers_wrap_unless_trapped() {
        let src = "procedure Main is X : Integer; begin X := 9223372036854775807; X := X + 1; end Main;";
        assert_eq!(read(&run(src, 100), "X"), Value::Int(i64::MIN));
        let prog = parse(src).unwrap();
        let env = check_program(&prog).unwrap();
        let r = run_program(&prog, &env, RunOptions { trap_overflow: true, ..RunOptions::default() });
        assert!(matches!(r.outcome, ExecOutcome::Blocked { reason: BlockReason::Overflow, .. }));
    }

    #[test]
    fn blocking() {
        let r = run("procedure Main is X : Integer; begin X := 1 / X; end Main;", 100);
        assert!(matches!(r.outcome, ExecOutcome::Blocked { reason: BlockReason::DivByZero, .. }));
        let r = run("procedure Main is P : access Integer; begin P.all := 1; end Main;", 100);
        assert!(matches!(r.outcome, ExecOutcome::Blocked { reason: BlockReason::NullDeref, .. }));
    }

    #[test]
    fn fuel_bounds_divergence() {
        let r = run("procedure Main is begin while true loop end loop; end Main;", 50);
        assert_eq!(r.outcome, ExecOutcome::FuelExhausted);
        let r = run("procedure Main is X : Integer; begin while true loop X := X + 1; end loop; end Main;", 50);
        assert_eq!(r.outcome, ExecOutcome::FuelExhausted);
        assert_eq!(r.steps, 50);
    }

    #[test]
    fn allocation_and_address_of() {
        let r = run(
            "type Cell is record V : Integer; end record;
             procedure Main is P : access Cell; Q : access Integer; begin
               P := new Cell; P.all.V := 5; Q := P.all.V'Access; Q.all := Q.all + 1; end Main;",
            100,
        );
        assert_eq!(read(&r, "P.all.V"), Value::Int(6));
        let ExecOutcome::Completed(store) = &r.outcome else { panic!() };
        assert_eq!(store.len(), 3);
    }

    #[test]
    fn in_parameters_are_copies() {
        let r = run(
            "procedure Inc (X : in Integer; Y : out Integer) is Z : Integer; begin Z := X + 1; Y := Z; end Inc;
             procedure Main is A, B : Integer; begin A := 1; Inc (A, B); Inc (B, A); end Main;",
            100,
        );
        assert_eq!(read(&r, "A"), Value::Int(3));
        assert_eq!(read(&r, "B"), Value::Int(2));
    }
}
