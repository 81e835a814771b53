//! The permission lattice, lazily expanded access policies, and the permission transformers.
//!
//! An [`AccessPolicy`] maps every well-typed path of a procedure scope to a [`Permission`].
//! Recursive record types make that path space infinite, so each variable owns a
//! [`PolicyTree`] that is only expanded along the paths a transformer touches. Unexpanded
//! descendants are summarized by a [`Frontier`] descriptor.

use std::borrow::Cow;
use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::syntax::{Expr, ExprKind, Path, Segment, Span};
use crate::typecheck::{RecordTable, TypeEnv};
use crate::syntax::Type;

/// Element of the diamond lattice `RW > R | W > NO`.
#[allow(clippy::upper_case_acronyms)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Permission {
    RW,
    R,
    W,
    NO,
}

impl Permission {
    pub const ALL: [Permission; 4] = [Permission::RW, Permission::R, Permission::W, Permission::NO];

    fn bits(self) -> u8 {
        match self {
            Permission::RW => 0b11,
            Permission::R => 0b10,
            Permission::W => 0b01,
            Permission::NO => 0b00,
        }
    }

    fn from_bits(bits: u8) -> Permission {
        match bits & 0b11 {
            0b11 => Permission::RW,
            0b10 => Permission::R,
            0b01 => Permission::W,
            _ => Permission::NO,
        }
    }

    /// Greatest lower bound.
    pub fn meet(self, other: Permission) -> Permission {
        Permission::from_bits(self.bits() & other.bits())
    }

    /// Least upper bound.
    pub fn join(self, other: Permission) -> Permission {
        Permission::from_bits(self.bits() | other.bits())
    }

    /// Lattice order: `self <= other`.
    pub fn leq(self, other: Permission) -> bool {
        self.meet(other) == self
    }

    pub fn geq(self, other: Permission) -> bool {
        other.leq(self)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Permission::RW => "RW",
            Permission::R => "R",
            Permission::W => "W",
            Permission::NO => "NO",
        }
    }
}

impl fmt::Display for Permission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Permission {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "RW" => Ok(Permission::RW),
            "R" => Ok(Permission::R),
            "W" => Ok(Permission::W),
            "NO" => Ok(Permission::NO),
            _ => Err(format!("unknown permission `{s}`")),
        }
    }
}

pub fn meet(a: Permission, b: Permission) -> Permission {
    a.meet(b)
}

pub fn leq(a: Permission, b: Permission) -> bool {
    a.leq(b)
}

/// Summary of all unexpanded strict descendants of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frontier {
    /// Every descendant has this permission.
    Uniform(Permission),
    /// Image of a `Uniform(π)` subtree under `cut`: near deep descendants `W`, near shallow
    /// descendants `π`, far descendants `NO`.
    CutFrom(Permission),
}

#[derive(Clone, Debug, PartialEq)]
enum Rest {
    Lazy(Frontier),
    /// One entry per child slot of the node's type, in declaration order.
    Expanded(Vec<(Segment, PolicyTree)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicyTree {
    perm: Permission,
    rest: Rest,
}

impl PolicyTree {
    pub fn uniform(perm: Permission) -> PolicyTree {
        PolicyTree { perm, rest: Rest::Lazy(Frontier::Uniform(perm)) }
    }

    fn lazy(perm: Permission, frontier: Frontier) -> PolicyTree {
        PolicyTree { perm, rest: Rest::Lazy(frontier) }
    }

    pub fn perm(&self) -> Permission {
        self.perm
    }

    /// The unexpanded-descendant descriptor, if this node is not expanded.
    pub fn frontier(&self) -> Option<Frontier> {
        match self.rest {
            Rest::Lazy(f) => Some(f),
            Rest::Expanded(_) => None,
        }
    }

    pub fn is_expanded(&self) -> bool {
        matches!(self.rest, Rest::Expanded(_))
    }

    /// Children of this node as trees, materializing lazy ones on the fly.
    fn children<'a>(&'a self, records: &RecordTable, ty: &Type) -> Vec<(Segment, Type, Cow<'a, PolicyTree>)> {
        match &self.rest {
            Rest::Expanded(children) => children
                .iter()
                .map(|(seg, child)| {
                    let cty = records.child_type(ty, seg).expect("policy tree shape follows its type");
                    (seg.clone(), cty, Cow::Borrowed(child))
                })
                .collect(),
            Rest::Lazy(frontier) => records
                .children(ty)
                .into_iter()
                .map(|(seg, cty)| {
                    let child = lazy_child(records, *frontier, &seg, &cty);
                    (seg, cty, Cow::Owned(child))
                })
                .collect(),
        }
    }

    fn child(&self, records: &RecordTable, ty: &Type, seg: &Segment) -> Option<(Type, Cow<'_, PolicyTree>)> {
        let cty = records.child_type(ty, seg)?;
        match &self.rest {
            Rest::Expanded(children) => {
                children.iter().find(|(s, _)| s == seg).map(|(_, c)| (cty, Cow::Borrowed(c)))
            }
            Rest::Lazy(frontier) => {
                let child = lazy_child(records, *frontier, seg, &cty);
                Some((cty, Cow::Owned(child)))
            }
        }
    }

    fn expand(&mut self, records: &RecordTable, ty: &Type) {
        if let Rest::Lazy(frontier) = self.rest {
            let children = records
                .children(ty)
                .into_iter()
                .map(|(seg, cty)| {
                    let child = lazy_child(records, frontier, &seg, &cty);
                    (seg, child)
                })
                .collect();
            self.rest = Rest::Expanded(children);
        }
    }

    fn child_mut(&mut self, records: &RecordTable, ty: &Type, seg: &Segment) -> Option<(&mut PolicyTree, Type)> {
        let cty = records.child_type(ty, seg)?;
        self.expand(records, ty);
        let Rest::Expanded(children) = &mut self.rest else { unreachable!() };
        children.iter_mut().find(|(s, _)| s == seg).map(|(_, c)| (c, cty))
    }

    /// Collapses fully uniform expanded subtrees back into descriptors.
    fn normalize(&mut self, records: &RecordTable, ty: &Type) {
        match &mut self.rest {
            Rest::Expanded(children) => {
                let mut common: Option<Option<Permission>> = None;
                for (seg, child) in children.iter_mut() {
                    let cty = records.child_type(ty, seg).expect("policy tree shape follows its type");
                    child.normalize(records, &cty);
                    let uniform = match child.rest {
                        Rest::Lazy(Frontier::Uniform(p)) if p == child.perm => Some(p),
                        _ => None,
                    };
                    common = Some(match common {
                        None => uniform,
                        Some(prev) if prev == uniform => prev,
                        Some(_) => None,
                    });
                }
                match common {
                    None => self.rest = Rest::Lazy(Frontier::Uniform(self.perm)),
                    Some(Some(p)) => self.rest = Rest::Lazy(Frontier::Uniform(p)),
                    Some(None) => {}
                }
            }
            Rest::Lazy(Frontier::Uniform(_)) => {
                if records.children(ty).is_empty() {
                    self.rest = Rest::Lazy(Frontier::Uniform(self.perm));
                }
            }
            Rest::Lazy(Frontier::CutFrom(_)) => {
                let mut expanded = self.clone();
                expanded.expand(records, ty);
                expanded.normalize(records, ty);
                if let Rest::Lazy(Frontier::Uniform(_)) = expanded.rest {
                    *self = expanded;
                }
            }
        }
    }

    fn all_descendants_are(&self, records: &RecordTable, ty: &Type, perm: Permission) -> bool {
        match &self.rest {
            Rest::Lazy(Frontier::Uniform(p)) => *p == perm || records.children(ty).is_empty(),
            _ => self
                .children(records, ty)
                .iter()
                .all(|(_, cty, child)| child.perm == perm && child.all_descendants_are(records, cty, perm)),
        }
    }

    fn meet_with(&mut self, records: &RecordTable, ty: &Type, perm: Permission) {
        self.perm = self.perm.meet(perm);
        match &mut self.rest {
            Rest::Lazy(Frontier::Uniform(p)) => *p = p.meet(perm),
            Rest::Lazy(Frontier::CutFrom(_)) => {
                self.expand(records, ty);
                self.meet_with_children(records, ty, perm);
            }
            Rest::Expanded(_) => self.meet_with_children(records, ty, perm),
        }
    }

    fn meet_with_children(&mut self, records: &RecordTable, ty: &Type, perm: Permission) {
        if let Rest::Expanded(children) = &mut self.rest {
            for (seg, child) in children.iter_mut() {
                let cty = records.child_type(ty, seg).expect("policy tree shape follows its type");
                child.meet_with(records, &cty, perm);
            }
        }
    }

    fn cut(&mut self, records: &RecordTable, ty: &Type) {
        self.perm = Permission::W;
        if !records.is_deep(ty) {
            return;
        }
        match &mut self.rest {
            Rest::Lazy(Frontier::Uniform(p)) => {
                let p = *p;
                self.rest = Rest::Lazy(Frontier::CutFrom(p));
            }
            Rest::Lazy(Frontier::CutFrom(_)) => {}
            Rest::Expanded(children) => {
                for (seg, child) in children.iter_mut() {
                    let cty = records.child_type(ty, seg).expect("policy tree shape follows its type");
                    match seg {
                        Segment::Deref => *child = PolicyTree::uniform(Permission::NO),
                        Segment::Field(_) if records.is_deep(&cty) => child.cut(records, &cty),
                        Segment::Field(_) => {}
                    }
                }
            }
        }
    }
}

fn lazy_child(records: &RecordTable, frontier: Frontier, seg: &Segment, child_ty: &Type) -> PolicyTree {
    match frontier {
        Frontier::Uniform(p) => PolicyTree::uniform(p),
        Frontier::CutFrom(p) => match seg {
            Segment::Deref => PolicyTree::uniform(Permission::NO),
            Segment::Field(_) if records.is_deep(child_ty) => PolicyTree::lazy(Permission::W, Frontier::CutFrom(p)),
            Segment::Field(_) => PolicyTree::uniform(p),
        },
    }
}

fn meet_trees(a: &PolicyTree, b: &PolicyTree, records: &RecordTable, ty: &Type) -> PolicyTree {
    let perm = a.perm.meet(b.perm);
    match (&a.rest, &b.rest) {
        (Rest::Lazy(Frontier::Uniform(x)), Rest::Lazy(Frontier::Uniform(y))) => {
            PolicyTree::lazy(perm, Frontier::Uniform(x.meet(*y)))
        }
        (Rest::Lazy(Frontier::CutFrom(x)), Rest::Lazy(Frontier::CutFrom(y))) => {
            PolicyTree::lazy(perm, Frontier::CutFrom(x.meet(*y)))
        }
        _ => {
            let children = a
                .children(records, ty)
                .into_iter()
                .zip(b.children(records, ty))
                .map(|((seg, cty, ca), (_, _, cb))| {
                    let child = meet_trees(&ca, &cb, records, &cty);
                    (seg, child)
                })
                .collect();
            PolicyTree { perm, rest: Rest::Expanded(children) }
        }
    }
}

/// A failed `check π` premise.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("`{path}` requires {required}, has {actual}")]
pub struct PermError {
    pub path: Path,
    pub required: Permission,
    pub actual: Permission,
    pub transformer: &'static str,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error(transparent)]
    Denied(#[from] PermError),
    /// `block` reached a field whose prefix is read-only; no rule applies.
    #[error("block reached read-only prefix `{path}`")]
    ReadOnlyPrefix { path: Path },
}

/// Processing order for the operand paths of an expression.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PathOrder {
    #[default]
    Textual,
    Reversed,
    Shuffled(u64),
}

impl PathOrder {
    pub fn arrange(self, mut paths: Vec<Path>) -> Vec<Path> {
        match self {
            PathOrder::Textual => {}
            PathOrder::Reversed => paths.reverse(),
            PathOrder::Shuffled(seed) => {
                // Mix in the list length so equal seeds still vary across expressions.
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (paths.len() as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                paths.shuffle(&mut rng);
            }
        }
        paths
    }
}

/// Maximal operand paths of `e`, left to right. `'Access` operands and literals contribute nothing.
pub fn paths_of_expr(e: &Expr) -> Vec<Path> {
    e.paths().into_iter().cloned().collect()
}

/// A consistency invariant violated at `parent -> child`.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("inconsistent policy: `{parent}` is {parent_perm} but `{child}` is {child_perm}")]
pub struct ConsistencyViolation {
    pub parent: Path,
    pub parent_perm: Permission,
    pub child: Path,
    pub child_perm: Permission,
}

/// Map from every well-typed path of a procedure scope to a permission.
#[derive(Clone, Debug)]
pub struct AccessPolicy {
    env: Arc<TypeEnv>,
    roots: BTreeMap<String, PolicyTree>,
}

impl PartialEq for AccessPolicy {
    fn eq(&self, other: &Self) -> bool {
        self.roots == other.roots
    }
}

impl AccessPolicy {
    /// Every variable of `env` starts with `NO` everywhere.
    pub fn new(env: Arc<TypeEnv>) -> AccessPolicy {
        AccessPolicy::uniform(env, Permission::NO)
    }

    pub fn uniform(env: Arc<TypeEnv>, perm: Permission) -> AccessPolicy {
        let roots = env.vars().map(|(name, _)| (name.to_string(), PolicyTree::uniform(perm))).collect();
        AccessPolicy { env, roots }
    }

    pub fn env(&self) -> &Arc<TypeEnv> {
        &self.env
    }

    pub fn root(&self, name: &str) -> Option<&PolicyTree> {
        self.roots.get(name)
    }

    fn records(&self) -> &RecordTable {
        &self.env.records
    }

    fn root_type(&self, name: &str) -> Type {
        self.env.var(name).unwrap_or_else(|| panic!("`{name}` is not in scope")).ty.clone()
    }

    /// Node at `p` and its type; lazy nodes are materialized without mutating the policy.
    pub fn node(&self, p: &Path) -> (Cow<'_, PolicyTree>, Type) {
        let records = &*self.env.records;
        let mut ty = self.root_type(&p.root);
        let mut node: Cow<'_, PolicyTree> = Cow::Borrowed(&self.roots[&p.root]);
        for seg in &p.segments {
            let next = match node {
                Cow::Borrowed(n) => n.child(records, &ty, seg),
                Cow::Owned(ref n) => n.child(records, &ty, seg).map(|(t, c)| (t, Cow::Owned(c.into_owned()))),
            };
            let (cty, child) = next.unwrap_or_else(|| panic!("`{p}` is not a well-typed path"));
            ty = cty;
            node = child;
        }
        (node, ty)
    }

    fn node_mut(&mut self, p: &Path) -> (&mut PolicyTree, Type) {
        let mut ty = self.root_type(&p.root);
        let records = self.env.records.clone();
        let mut node = self.roots.get_mut(&p.root).expect("root in scope");
        for seg in &p.segments {
            let (child, cty) = node.child_mut(&records, &ty, seg).unwrap_or_else(|| panic!("`{p}` is not a well-typed path"));
            node = child;
            ty = cty;
        }
        (node, ty)
    }

    fn normalize_root(&mut self, root: &str) {
        let ty = self.root_type(root);
        let records = self.env.records.clone();
        if let Some(tree) = self.roots.get_mut(root) {
            tree.normalize(&records, &ty);
        }
    }

    fn set(&mut self, p: &Path, perm: Permission) {
        self.node_mut(p).0.perm = perm;
    }

    pub fn get(&self, p: &Path) -> Permission {
        self.node(p).0.perm
    }

    pub fn check(&self, p: &Path, required: Permission) -> Result<(), PermError> {
        let actual = self.get(p);
        if required.leq(actual) {
            Ok(())
        } else {
            Err(PermError { path: p.clone(), required, actual, transformer: "check", span: Span::default() })
        }
    }

    /// `check π` on every operand path of `e`.
    pub fn check_expr(&self, e: &Expr, required: Permission, order: PathOrder) -> Result<(), PermError> {
        for p in order.arrange(paths_of_expr(e)) {
            self.check(&p, required)?;
        }
        Ok(())
    }

    /// Assigns `perm` to `p` and all its extensions.
    pub fn fresh(&mut self, p: &Path, perm: Permission) {
        *self.node_mut(p).0 = PolicyTree::uniform(perm);
        self.normalize_root(&p.root);
    }

    /// `p` and its near deep extensions get `W`, near shallow extensions keep their
    /// permission, far extensions get `NO`. On a shallow path only `p` itself changes.
    pub fn cut(&mut self, p: &Path) {
        let records = self.env.records.clone();
        let (node, ty) = self.node_mut(p);
        node.cut(&records, &ty);
        self.normalize_root(&p.root);
    }

    /// Propagates the loss of read permission to the prefixes of `p`.
    pub fn block(&mut self, p: &Path) -> Result<(), PolicyError> {
        let result = self.block_inner(p);
        self.normalize_root(&p.root);
        result
    }

    fn block_inner(&mut self, p: &Path) -> Result<(), PolicyError> {
        let mut cur = p.clone();
        while let Some((prefix, seg)) = cur.split_last() {
            if let Segment::Field(_) = seg {
                match self.get(&prefix) {
                    Permission::NO => return Ok(()),
                    Permission::R => return Err(PolicyError::ReadOnlyPrefix { path: prefix }),
                    Permission::W | Permission::RW => {}
                }
            }
            self.set(&prefix, Permission::W);
            cur = prefix;
        }
        Ok(())
    }

    /// Revokes all permissions from the prefixes of `p` up to the first dereference, then
    /// continues as `block`.
    pub fn drop(&mut self, p: &Path) -> Result<(), PolicyError> {
        let mut cur = p.clone();
        let result = loop {
            let Some((prefix, seg)) = cur.split_last() else { break Ok(()) };
            match seg {
                Segment::Field(_) => {
                    self.set(&prefix, Permission::NO);
                    cur = prefix;
                }
                Segment::Deref => {
                    self.set(&prefix, Permission::W);
                    break self.block_inner(&prefix);
                }
            }
        };
        self.normalize_root(&p.root);
        result
    }

    /// Propagates `RW` from `p` to its prefixes wherever every extension of the prefix is `RW`.
    /// Dereference steps propagate unconditionally.
    pub fn lift(&mut self, p: &Path) {
        let mut cur = p.clone();
        while let Some((prefix, seg)) = cur.split_last() {
            if let Segment::Field(_) = seg {
                let (node, ty) = self.node(&prefix);
                if !node.all_descendants_are(self.records(), &ty, Permission::RW) {
                    break;
                }
            }
            self.set(&prefix, Permission::RW);
            cur = prefix;
        }
        self.normalize_root(&p.root);
    }

    /// `NO` for `p`, all its prefixes and all its extensions.
    pub fn borrow(&mut self, p: &Path) {
        *self.node_mut(p).0 = PolicyTree::uniform(Permission::NO);
        for prefix in p.prefixes() {
            self.set(&prefix, Permission::NO);
        }
        self.normalize_root(&p.root);
    }

    /// Caps every path comparable to `p` at `R`.
    pub fn freeze(&mut self, p: &Path) {
        for prefix in p.prefixes() {
            let perm = self.get(&prefix).meet(Permission::R);
            self.set(&prefix, perm);
        }
        let records = self.env.records.clone();
        let (node, ty) = self.node_mut(p);
        node.meet_with(&records, &ty, Permission::R);
        self.normalize_root(&p.root);
    }

    fn is_deep_expr(&self, e: &Expr) -> bool {
        match &e.kind {
            ExprKind::Path(p) => {
                let ty = self.env.type_of_path(p).expect("well-typed expression");
                self.env.is_deep(&ty)
            }
            ExprKind::AddressOf(_) | ExprKind::Null => true,
            ExprKind::Lit(_) | ExprKind::Binary(..) => false,
        }
    }

    /// Ownership transfer out of an assignment's right-hand side.
    pub fn move_expr(&mut self, e: &Expr, order: PathOrder) -> Result<(), PolicyError> {
        if !self.is_deep_expr(e) {
            return Ok(self.check_expr(e, Permission::R, order)?);
        }
        match &e.kind {
            ExprKind::Path(p) => {
                self.check(p, Permission::RW)?;
                self.cut(p);
                self.block(p)
            }
            ExprKind::AddressOf(p) => {
                self.check(p, Permission::RW)?;
                self.fresh(p, Permission::NO);
                self.drop(p)
            }
            ExprKind::Null => Ok(()),
            ExprKind::Lit(_) | ExprKind::Binary(..) => unreachable!("scalar expressions are shallow"),
        }
    }

    /// Read-only sharing of an `in` argument.
    pub fn observe(&mut self, e: &Expr) {
        if !self.is_deep_expr(e) {
            return;
        }
        match &e.kind {
            ExprKind::Path(p) | ExprKind::AddressOf(p) => self.freeze(p),
            _ => {}
        }
    }

    /// Pointwise meet with a policy over the same scope.
    pub fn meet(&self, other: &AccessPolicy) -> AccessPolicy {
        let records = self.records();
        let roots = self
            .roots
            .iter()
            .map(|(name, tree)| {
                let ty = self.root_type(name);
                let mut merged = meet_trees(tree, &other.roots[name], records, &ty);
                merged.normalize(records, &ty);
                (name.clone(), merged)
            })
            .collect();
        AccessPolicy { env: self.env.clone(), roots }
    }

    /// `Ok` iff `self(p) >= other(p)` for every path; otherwise a shortest witness path.
    pub fn dominates(&self, other: &AccessPolicy) -> Result<(), Path> {
        let records = self.records();
        let mut queue: VecDeque<(Path, Type, Cow<'_, PolicyTree>, Cow<'_, PolicyTree>)> = VecDeque::new();
        for (name, _) in self.env.vars() {
            queue.push_back((Path::var(name), self.root_type(name), Cow::Borrowed(&self.roots[name]), Cow::Borrowed(&other.roots[name])));
        }
        while let Some((path, ty, hi, lo)) = queue.pop_front() {
            if !hi.perm.geq(lo.perm) {
                return Err(path);
            }
            if let (Rest::Lazy(Frontier::Uniform(x)), Rest::Lazy(Frontier::Uniform(y))) = (&hi.rest, &lo.rest) {
                if x.geq(*y) {
                    continue;
                }
            }
            let hc: Vec<_> = hi.children(records, &ty).into_iter().map(|(s, t, c)| (s, t, Cow::Owned(c.into_owned()))).collect();
            let lc = lo.children(records, &ty).into_iter().map(|(_, _, c)| Cow::Owned(c.into_owned()));
            for ((seg, cty, h), l) in hc.into_iter().zip(lc) {
                queue.push_back((path.child(seg), cty, h, l));
            }
        }
        Ok(())
    }

    pub fn same_as(&self, other: &AccessPolicy) -> bool {
        self.dominates(other).is_ok() && other.dominates(self).is_ok()
    }

    /// All paths with at most `depth` segments, with their permissions, in declaration order.
    pub fn entries(&self, depth: usize) -> Vec<(Path, Permission)> {
        fn walk(records: &RecordTable, path: Path, ty: &Type, node: &PolicyTree, depth: usize, out: &mut Vec<(Path, Permission)>) {
            out.push((path.clone(), node.perm));
            if path.len() >= depth {
                return;
            }
            for (seg, cty, child) in node.children(records, ty) {
                walk(records, path.child(seg), &cty, &child, depth, out);
            }
        }
        let mut out = Vec::new();
        for (name, info) in self.env.vars() {
            walk(self.records(), Path::var(name), &info.ty, &self.roots[name], depth, &mut out);
        }
        out
    }

    /// Checks the three consistency invariants on every parent/child pair within `depth`:
    /// `RW` and `R` propagate to every extension; `W` implies at least `W` on each field.
    pub fn check_consistency(&self, depth: usize) -> Result<(), ConsistencyViolation> {
        fn walk(records: &RecordTable, path: &Path, ty: &Type, node: &PolicyTree, depth: usize) -> Result<(), ConsistencyViolation> {
            if path.len() >= depth || node.rest == Rest::Lazy(Frontier::Uniform(node.perm)) {
                return Ok(());
            }
            for (seg, cty, child) in node.children(records, ty) {
                let ok = match node.perm {
                    Permission::RW => child.perm == Permission::RW,
                    Permission::R => child.perm == Permission::R,
                    Permission::W => matches!(seg, Segment::Deref) || child.perm.geq(Permission::W),
                    Permission::NO => true,
                };
                let child_path = path.child(seg);
                if !ok {
                    return Err(ConsistencyViolation {
                        parent: path.clone(),
                        parent_perm: node.perm,
                        child: child_path,
                        child_perm: child.perm,
                    });
                }
                walk(records, &child_path, &cty, &child, depth)?;
            }
            Ok(())
        }
        for (name, info) in self.env.vars() {
            walk(self.records(), &Path::var(name), &info.ty, &self.roots[name], depth)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse;
    use crate::syntax::Mode;
    use crate::typecheck::RecordTable;
    use Permission::*;

    const LIST: &str = "type List is record Flag : Boolean; Key : access Integer; Next : access List; end record;
                        type Pair is record L : Integer; M : Integer; end record;";

    fn env(vars: &[(&str, Type)]) -> Arc<TypeEnv> {
        let prog = parse(LIST).unwrap();
        let mut env = TypeEnv::new("T", Arc::new(RecordTable::new(&prog.records)));
        for (n, t) in vars {
            env.declare(n, t.clone(), Some(Mode::InOut));
        }
        Arc::new(env)
    }

    fn path(s: &str) -> Path {
        let mut parts = s.split('.');
        let mut p = Path::var(parts.next().unwrap());
        for seg in parts {
            p = if seg == "all" { p.deref() } else { p.field(seg) };
        }
        p
    }

    fn list() -> Type {
        Type::named("List")
    }

    fn access_list() -> Type {
        Type::access(list())
    }

    fn rw_policy(vars: &[(&str, Type)]) -> AccessPolicy {
        AccessPolicy::uniform(env(vars), RW)
    }

    #[test]
    fn lattice_examples() {
        assert_eq!(meet(RW, R), R);
        assert_eq!(meet(R, W), NO);
        assert_eq!(meet(NO, RW), NO);
        assert!(leq(NO, W));
        assert!(!leq(R, W));
        assert!(leq(RW, RW));
        assert_eq!(R.join(W), RW);
    }

    #[test]
    fn fresh_is_uniform_below() {
        let mut pol = AccessPolicy::new(env(&[("B", list())]));
        pol.fresh(&path("B"), RW);
        assert_eq!(pol.get(&path("B.Flag")), RW);
        assert_eq!(pol.get(&path("B.Next.all.Next.all.Key.all")), RW);
        pol.fresh(&path("B.Next"), NO);
        assert!(pol.check(&path("B.Next.all"), R).is_err());
        assert_eq!(pol.get(&path("B")), RW, "prefixes untouched");
        assert!(pol.check(&path("B.Next.all"), NO).is_ok());
    }

    #[test]
    fn cut_after_move_of_record() {
        let mut pol = rw_policy(&[("A", list()), ("B", list())]);
        pol.check(&path("B"), RW).unwrap();
        pol.cut(&path("B"));
        assert_eq!(pol.get(&path("B")), W);
        assert_eq!(pol.get(&path("B.Key")), W);
        assert_eq!(pol.get(&path("B.Next")), W);
        assert_eq!(pol.get(&path("B.Flag")), RW);
        assert_eq!(pol.get(&path("B.Key.all")), NO);
        assert_eq!(pol.get(&path("B.Next.all.Flag")), NO);
        assert_eq!(pol.get(&path("A.Key.all")), RW);
    }

    #[test]
    fn cut_on_shallow_path_only_touches_the_path() {
        let mut pol = rw_policy(&[("P", Type::named("Pair"))]);
        pol.cut(&path("P"));
        assert_eq!(pol.get(&path("P")), W);
        assert_eq!(pol.get(&path("P.L")), RW);
        assert_eq!(pol.get(&path("P.M")), RW);
    }

    #[test]
    fn cut_through_dereference() {
        let mut pol = rw_policy(&[("Q", access_list())]);
        pol.cut(&path("Q.all.Next"));
        assert_eq!(pol.get(&path("Q.all.Next")), W);
        assert_eq!(pol.get(&path("Q.all.Next.all")), NO);
        assert_eq!(pol.get(&path("Q.all.Next.all.Key")), NO);
        assert_eq!(pol.get(&path("Q.all.Key")), RW);
        pol.block(&path("Q.all.Next")).unwrap();
        assert_eq!(pol.get(&path("Q.all")), W);
        assert_eq!(pol.get(&path("Q")), W);
        assert_eq!(pol.get(&path("Q.all.Flag")), RW);
    }

    #[test]
    fn block_rules() {
        let mut pol = rw_policy(&[("B", list())]);
        pol.block(&path("B")).unwrap();
        assert_eq!(pol.get(&path("B")), RW);

        let mut pol = rw_policy(&[("X", list())]);
        pol.fresh(&path("X"), NO);
        pol.set(&path("X.Flag"), W);
        pol.block(&path("X.Flag")).unwrap();
        assert_eq!(pol.get(&path("X")), NO);

        let mut pol = rw_policy(&[("X", list())]);
        pol.fresh(&path("X"), R);
        assert_eq!(pol.block(&path("X.Flag")), Err(PolicyError::ReadOnlyPrefix { path: path("X") }));
    }

    #[test]
    fn drop_stops_at_the_first_pointer() {
        let mut pol = rw_policy(&[("Q", access_list())]);
        pol.drop(&path("Q.all.Flag")).unwrap();
        assert_eq!(pol.get(&path("Q.all")), NO);
        assert_eq!(pol.get(&path("Q")), W);
        assert_eq!(pol.get(&path("Q.all.Key")), RW);
        assert_eq!(pol.get(&path("Q.all.Next")), RW);

        let mut pol = rw_policy(&[("X", list())]);
        pol.drop(&path("X")).unwrap();
        assert_eq!(pol.get(&path("X")), RW);
    }

    #[test]
    fn move_of_address_revokes_the_record() {
        let e = parse("procedure Main is begin R := Q.all.Flag'Access; end;").unwrap();
        let crate::syntax::StmtKind::Assign { rhs, .. } = e.procedures[0].body[0].kind.clone() else { panic!() };
        let mut pol = rw_policy(&[("Q", access_list()), ("R", Type::access(Type::BOOLEAN))]);
        pol.move_expr(&rhs, PathOrder::Textual).unwrap();
        assert_eq!(pol.get(&path("Q.all.Flag")), NO);
        assert_eq!(pol.get(&path("Q.all")), NO);
        assert_eq!(pol.get(&path("Q")), W);
        assert_eq!(pol.get(&path("Q.all.Key")), RW);
    }

    #[test]
    fn move_of_null_is_identity() {
        let mut pol = rw_policy(&[("Q", access_list())]);
        let before = pol.clone();
        pol.move_expr(&Expr::new(ExprKind::Null), PathOrder::Textual).unwrap();
        assert_eq!(pol, before);
    }

    #[test]
    fn lift_rules() {
        let mut pol = rw_policy(&[("X", access_list())]);
        pol.fresh(&path("X"), W);
        pol.fresh(&path("X.all"), RW);
        pol.lift(&path("X.all"));
        assert_eq!(pol.get(&path("X")), RW);

        let mut pol = rw_policy(&[("X", list())]);
        pol.fresh(&path("X"), W);
        pol.fresh(&path("X.Flag"), RW);
        pol.set(&path("X.Key"), W);
        pol.lift(&path("X.Flag"));
        assert_eq!(pol.get(&path("X")), W);

        let mut pol = rw_policy(&[("X", list())]);
        pol.set(&path("X"), W);
        pol.lift(&path("X.Flag"));
        assert_eq!(pol.get(&path("X")), RW, "all extensions are RW");
    }

    #[test]
    fn borrow_and_freeze() {
        let mut pol = rw_policy(&[("X", list())]);
        pol.borrow(&path("X.Next"));
        assert_eq!(pol.get(&path("X")), NO);
        assert_eq!(pol.get(&path("X.Next.all.Flag")), NO);
        assert_eq!(pol.get(&path("X.Flag")), RW);
        assert!(pol.check(&path("X.Next"), RW).is_err());

        let mut pol = rw_policy(&[("X", list())]);
        pol.freeze(&path("X"));
        assert!(pol.entries(5).iter().all(|(_, p)| *p == R));

        let mut pol = rw_policy(&[("X", list())]);
        pol.cut(&path("X"));
        pol.freeze(&path("X.Next"));
        assert_eq!(pol.get(&path("X")), NO, "W meets R to NO");
        assert_eq!(pol.get(&path("X.Next")), NO);
        assert_eq!(pol.get(&path("X.Flag")), RW, "incomparable path untouched");
    }

    #[test]
    fn meet_and_dominance() {
        let e = env(&[("B", list())]);
        let rw = AccessPolicy::uniform(e.clone(), RW);
        let mut w = rw.clone();
        w.set(&path("B"), W);
        assert_eq!(rw.meet(&w).get(&path("B")), W);
        assert!(rw.meet(&rw).same_as(&rw));
        let r = AccessPolicy::uniform(e.clone(), R);
        let wu = AccessPolicy::uniform(e.clone(), W);
        let m = r.meet(&wu);
        assert_eq!(m.root("B"), Some(&PolicyTree::uniform(NO)));

        assert!(rw.dominates(&rw).is_ok());
        let no = AccessPolicy::uniform(e, NO);
        assert!(rw.dominates(&no).is_ok());
        assert_eq!(no.dominates(&rw), Err(path("B")));
    }

    #[test]
    fn dominance_witness_is_shortest() {
        let e = env(&[("A", list()), ("B", list())]);
        let before = AccessPolicy::uniform(e, RW);
        let mut after = before.clone();
        after.fresh(&path("B.Next.all.Key.all"), NO);
        after.fresh(&path("A.Key.all"), W);
        assert_eq!(after.dominates(&before), Err(path("A.Key.all")));
    }

    #[test]
    fn mixed_frontiers_meet_pointwise() {
        let e = env(&[("B", list())]);
        let mut cut = AccessPolicy::uniform(e.clone(), RW);
        cut.cut(&path("B"));
        let r = AccessPolicy::uniform(e, R);
        let m = cut.meet(&r);
        assert_eq!(m.get(&path("B")), NO);
        assert_eq!(m.get(&path("B.Flag")), R);
        assert_eq!(m.get(&path("B.Next")), NO);
        assert_eq!(m.get(&path("B.Next.all.Flag")), NO);
        assert!(m.dominates(&cut).is_err());
        assert!(cut.dominates(&m).is_ok());
    }

    #[test]
    fn normalization_collapses_uniform_subtrees() {
        let mut pol = rw_policy(&[("X", list())]);
        pol.set(&path("X.Next.all.Flag"), W);
        pol.fresh(&path("X.Next"), RW);
        assert_eq!(pol.root("X"), Some(&PolicyTree::uniform(RW)));
    }

    #[test]
    fn consistency_checker_flags_violations() {
        let mut pol = rw_policy(&[("X", list())]);
        assert!(pol.check_consistency(6).is_ok());
        pol.set(&path("X.Flag"), W);
        assert!(pol.check_consistency(6).is_err());
    }

    #[test]
    fn path_orders_permute() {
        let paths: Vec<Path> = (0..6).map(|i| Path::var(format!("V{i}"))).collect();
        let mut shuffled = PathOrder::Shuffled(7).arrange(paths.clone());
        assert_eq!(PathOrder::Reversed.arrange(paths.clone())[0], paths[5]);
        shuffled.sort();
        assert_eq!(shuffled, paths);
    }
}
