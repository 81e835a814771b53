//! Explicit access policies over all paths up to a fixed length, with every transformer
//! written directly from its textual definition. Used as an oracle for the lazy trees.

use std::collections::BTreeMap;

use muspark::permission::Permission::{self, *};
use muspark::syntax::{Path, RecordDecl, Segment, Type};

pub struct Types<'a> {
    pub records: &'a [RecordDecl],
}

impl Types<'_> {
    pub fn children(&self, ty: &Type) -> Vec<(Segment, Type)> {
        match ty {
            Type::Scalar(_) => vec![],
            Type::Access(inner) => vec![(Segment::Deref, (**inner).clone())],
            Type::Named(n) => {
                let r = self.records.iter().find(|r| &r.name == n).unwrap();
                r.fields.iter().map(|f| (Segment::Field(f.name.clone()), f.ty.clone())).collect()
            }
        }
    }

    /// Brute force: the type or some extension within a generous bound is an access type.
    pub fn is_deep(&self, ty: &Type) -> bool {
        if matches!(ty, Type::Access(_)) {
            return true;
        }
        let mut frontier = vec![ty.clone()];
        for _ in 0..=self.records.len() + 1 {
            let mut next = Vec::new();
            for t in &frontier {
                for (_, c) in self.children(t) {
                    if matches!(c, Type::Access(_)) {
                        return true;
                    }
                    next.push(c);
                }
            }
            frontier = next;
        }
        false
    }
}

#[derive(Clone, Debug)]
pub struct Eager {
    pub perms: BTreeMap<Path, Permission>,
    pub types: BTreeMap<Path, Type>,
    pub deep: BTreeMap<Path, bool>,
    pub vars: Vec<String>,
}

#[derive(Debug, PartialEq, Eq)]
pub struct ReadOnly;

impl Eager {
    pub fn new(types: &Types, vars: &[(String, Type)], depth: usize) -> Eager {
        let mut e = Eager { perms: BTreeMap::new(), types: BTreeMap::new(), deep: BTreeMap::new(), vars: vec![] };
        for (name, ty) in vars {
            e.vars.push(name.clone());
            let mut stack = vec![(Path::var(name), ty.clone())];
            while let Some((p, t)) = stack.pop() {
                if p.len() < depth {
                    for (seg, ct) in types.children(&t) {
                        stack.push((p.child(seg), ct));
                    }
                }
                e.perms.insert(p.clone(), NO);
                e.deep.insert(p.clone(), types.is_deep(&t));
                e.types.insert(p, t);
            }
        }
        e
    }

    pub fn get(&self, p: &Path) -> Permission {
        self.perms[p]
    }

    fn set(&mut self, p: &Path, perm: Permission) {
        *self.perms.get_mut(p).unwrap() = perm;
    }

    fn extensions(&self, p: &Path) -> Vec<Path> {
        self.perms.keys().filter(|q| p.is_strict_prefix_of(q)).cloned().collect()
    }

    fn comparable(&self, p: &Path) -> Vec<Path> {
        self.perms.keys().filter(|q| q.is_prefix_of(p) || p.is_prefix_of(q)).cloned().collect()
    }

    pub fn fresh(&mut self, p: &Path, perm: Permission) {
        self.set(p, perm);
        for q in self.extensions(p) {
            self.set(&q, perm);
        }
    }

    pub fn cut(&mut self, p: &Path) {
        self.set(p, W);
        let d = p.deref_count();
        for q in self.extensions(p) {
            if q.deref_count() > d {
                self.set(&q, NO);
            } else if self.deep[&q] {
                self.set(&q, W);
            }
        }
    }

    pub fn block(&mut self, p: &Path) -> Result<(), ReadOnly> {
        let Some((prefix, seg)) = p.split_last() else { return Ok(()) };
        match seg {
            Segment::Deref => {
                self.set(&prefix, W);
                self.block(&prefix)
            }
            Segment::Field(_) => match self.get(&prefix) {
                NO => Ok(()),
                R => Err(ReadOnly),
                _ => {
                    self.set(&prefix, W);
                    self.block(&prefix)
                }
            },
        }
    }

    pub fn drop(&mut self, p: &Path) -> Result<(), ReadOnly> {
        let Some((prefix, seg)) = p.split_last() else { return Ok(()) };
        match seg {
            Segment::Deref => {
                self.set(&prefix, W);
                self.block(&prefix)
            }
            Segment::Field(_) => {
                self.set(&prefix, NO);
                self.drop(&prefix)
            }
        }
    }

    pub fn lift(&mut self, p: &Path) {
        let Some((prefix, seg)) = p.split_last() else { return };
        if let Segment::Field(_) = seg {
            if self.extensions(&prefix).iter().any(|q| self.get(q) != RW) {
                return;
            }
        }
        self.set(&prefix, RW);
        self.lift(&prefix);
    }

    pub fn borrow(&mut self, p: &Path) {
        for q in self.comparable(p) {
            self.set(&q, NO);
        }
    }

    pub fn freeze(&mut self, p: &Path) {
        for q in self.comparable(p) {
            let v = self.get(&q).meet(R);
            self.set(&q, v);
        }
    }

    pub fn meet(&self, other: &Eager) -> Eager {
        let mut out = self.clone();
        for (p, v) in out.perms.iter_mut() {
            *v = v.meet(other.perms[p]);
        }
        out
    }

    /// Shortest path (within `depth`) where `self` is not above `other`.
    pub fn shortest_failure(&self, other: &Eager, depth: usize) -> Option<usize> {
        self.perms
            .iter()
            .filter(|(p, v)| p.len() <= depth && !v.geq(other.perms[*p]))
            .map(|(p, _)| p.len())
            .min()
    }
}
