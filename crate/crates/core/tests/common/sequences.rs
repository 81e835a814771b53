//! Random transformer sequences replayed on both the lazy and the eager representation.

use std::sync::Arc;

use muspark::permission::{AccessPolicy, Permission};
use muspark::syntax::{FieldDecl, Path, RecordDecl, ScalarKind, Span, Type};
use muspark::typecheck::{RecordTable, TypeEnv};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::eager::{Eager, Types};

pub const TRUNCATE: usize = 8;
pub const QUERY: usize = 6;
pub const OP_PATH: usize = 3;

fn scalar(rng: &mut ChaCha8Rng) -> Type {
    Type::Scalar([ScalarKind::Integer, ScalarKind::Real, ScalarKind::Boolean][rng.gen_range(0..3)])
}

fn accesses(mut t: Type, n: usize) -> Type {
    for _ in 0..n {
        t = Type::access(t);
    }
    t
}

fn records(rng: &mut ChaCha8Rng) -> Vec<RecordDecl> {
    let mut out = Vec::new();
    let mut next_field = 0;
    for i in 0..rng.gen_range(0..=3usize) {
        let mut fields = Vec::new();
        for _ in 0..rng.gen_range(1..=3) {
            next_field += 1;
            let ty = match rng.gen_range(0..4) {
                0 if i > 0 => Type::named(format!("T{}", rng.gen_range(0..i))),
                1 | 2 => accesses(Type::named(format!("T{}", rng.gen_range(0..=i))), rng.gen_range(1..=2)),
                _ => {
                    let s = scalar(rng);
                    let n = rng.gen_range(0..=4);
                    accesses(s, n)
                }
            };
            fields.push(FieldDecl { name: format!("G{next_field}"), ty, span: Span::default() });
        }
        out.push(RecordDecl { name: format!("T{i}"), fields, span: Span::default() });
    }
    out
}

fn var_type(rng: &mut ChaCha8Rng, records: &[RecordDecl]) -> Type {
    let base = if !records.is_empty() && rng.gen_bool(0.7) {
        Type::named(records[rng.gen_range(0..records.len())].name.clone())
    } else {
        scalar(rng)
    };
    let n = rng.gen_range(0..=2);
    accesses(base, n)
}

fn perm(rng: &mut ChaCha8Rng) -> Permission {
    Permission::ALL[rng.gen_range(0..4)]
}

pub struct Pair {
    pub lazy: AccessPolicy,
    pub eager: Eager,
}

/// Outcome of one sequence: `Err` carries a description of the first disagreement.
pub fn run_sequence(seed: u64, ops: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let decls = records(&mut rng);
    let types = Types { records: &decls };
    let mut env = TypeEnv::new("Seq", Arc::new(RecordTable::new(&decls)));
    let vars: Vec<(String, Type)> = (0..rng.gen_range(1..=3)).map(|i| (format!("V{i}"), var_type(&mut rng, &decls))).collect();
    for (n, t) in &vars {
        env.declare(n, t.clone(), None);
    }
    let env = Arc::new(env);
    let mut pair = Pair { lazy: AccessPolicy::new(env.clone()), eager: Eager::new(&types, &vars, TRUNCATE) };
    for (n, _) in &vars {
        let p = perm(&mut rng);
        pair.lazy.fresh(&Path::var(n), p);
        pair.eager.fresh(&Path::var(n), p);
    }
    let op_paths: Vec<Path> = pair.eager.perms.keys().filter(|p| p.len() <= OP_PATH).cloned().collect();
    let mut log = Vec::new();
    let mut queries = 0;
    for _ in 0..ops {
        if rng.gen_bool(0.15) {
            let mut fork = Pair { lazy: pair.lazy.clone(), eager: pair.eager.clone() };
            for _ in 0..3 {
                apply(&mut rng, &mut fork, &op_paths, &mut log);
            }
            if rng.gen_bool(0.5) {
                log.push("meet".to_string());
                pair = Pair { lazy: pair.lazy.meet(&fork.lazy), eager: pair.eager.meet(&fork.eager) };
            } else {
                log.push("dominates".to_string());
                compare_dominance(&pair, &fork).map_err(|e| format!("{e} after {log:?}"))?;
                compare_dominance(&fork, &pair).map_err(|e| format!("{e} after {log:?}"))?;
            }
        } else {
            apply(&mut rng, &mut pair, &op_paths, &mut log);
        }
        queries += compare(&pair).map_err(|e| format!("{e} after {log:?} on {vars:?} with {decls:?}"))?;
    }
    Ok(queries)
}

fn apply(rng: &mut ChaCha8Rng, pair: &mut Pair, paths: &[Path], log: &mut Vec<String>) {
    let p = &paths[rng.gen_range(0..paths.len())];
    match rng.gen_range(0..7) {
        0 => {
            let v = perm(rng);
            log.push(format!("fresh {p} {v}"));
            pair.lazy.fresh(p, v);
            pair.eager.fresh(p, v);
        }
        1 => {
            log.push(format!("cut {p}"));
            pair.lazy.cut(p);
            pair.eager.cut(p);
        }
        2 => {
            log.push(format!("block {p}"));
            let a = pair.lazy.block(p).is_ok();
            let b = pair.eager.block(p).is_ok();
            assert_eq!(a, b, "block outcome differs at {p} after {log:?}");
        }
        3 => {
            log.push(format!("drop {p}"));
            let a = pair.lazy.drop(p).is_ok();
            let b = pair.eager.drop(p).is_ok();
            assert_eq!(a, b, "drop outcome differs at {p} after {log:?}");
        }
        4 => {
            log.push(format!("lift {p}"));
            pair.lazy.lift(p);
            pair.eager.lift(p);
        }
        5 => {
            log.push(format!("borrow {p}"));
            pair.lazy.borrow(p);
            pair.eager.borrow(p);
        }
        _ => {
            log.push(format!("freeze {p}"));
            pair.lazy.freeze(p);
            pair.eager.freeze(p);
        }
    }
}

fn compare(pair: &Pair) -> Result<usize, String> {
    let mut n = 0;
    for (p, v) in pair.eager.perms.iter().filter(|(p, _)| p.len() <= QUERY) {
        let got = pair.lazy.get(p);
        if got != *v {
            return Err(format!("`{p}`: lazy {got}, eager {v}"));
        }
        n += 1;
    }
    Ok(n)
}

fn compare_dominance(hi: &Pair, lo: &Pair) -> Result<(), String> {
    let eager = hi.eager.shortest_failure(&lo.eager, QUERY);
    match (hi.lazy.dominates(&lo.lazy), eager) {
        (Ok(()), None) => Ok(()),
        (Err(w), Some(len)) if w.len() == len => Ok(()),
        (Err(w), None) if w.len() > QUERY => Ok(()),
        (lazy, eager) => Err(format!("dominance: lazy {lazy:?}, eager shortest {eager:?}")),
    }
}
