//! Acceptance suite. Prints one `criterion N: PASS|FAIL` line per criterion with its wall
//! time and exits nonzero if any fails. Runs without the libtest harness so the lines always show.

mod common;

use std::time::{Duration, Instant};

use muspark::alias::{analyze_program, AliasReport, CheckOptions, Mutation, Rule};
use muspark::corpus;
use muspark::fuzz::{generate_program, program_seed, run_campaign, CampaignOptions, FailureKind, GenConfig};
use muspark::interp::{run_program, ExecOutcome, Monitor, RunOptions};
use muspark::parser::{parse, pretty_print};
use muspark::permission::{PathOrder, Permission::{self, *}};
use muspark::syntax::{Path, Program, SeqPoint};
use muspark::typecheck::{check_program, ProgramEnv};

fn report(n: u32, what: &str, limit: Option<Duration>, f: impl FnOnce() -> Result<String, String>) -> bool {
    let start = Instant::now();
    let result = f();
    let took = start.elapsed();
    let result = match (result, limit) {
        (Ok(_), Some(l)) if took > l => Err(format!("took {took:.2?}, limit {l:?}")),
        (r, _) => r,
    };
    match &result {
        Ok(info) => println!("criterion {n}: PASS {what} ({info}; {took:.2?})"),
        Err(e) => println!("criterion {n}: FAIL {what} ({e}; {took:.2?})"),
    }
    result.is_ok()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn load(src: &str) -> (Program, ProgramEnv, AliasReport) {
    let prog = parse(src).unwrap();
    let env = check_program(&prog).unwrap();
    let report = analyze_program(&prog, &env, CheckOptions::default());
    (prog, env, report)
}

fn path(s: &str) -> Path {
    let mut parts = s.split('.');
    let mut p = Path::var(parts.next().unwrap());
    for seg in parts {
        p = if seg == "all" { p.deref() } else { p.field(seg) };
    }
    p
}

fn perms_at(r: &AliasReport, point: &str, paths: &[&str]) -> Result<Vec<Permission>, String> {
    let pol = r.map.get(&SeqPoint::parse(point).unwrap()).ok_or(format!("no snapshot at {point}"))?;
    Ok(paths.iter().map(|p| pol.get(&path(p))).collect())
}

fn single_diagnostic(name: &str, r: &AliasReport, rule: Rule, p: &str, req: Permission, act: Permission) -> Result<(), String> {
    let [d] = r.diagnostics.as_slice() else {
        return Err(format!("{name}: expected one diagnostic, got {}", r.diagnostics.len()));
    };
    ensure((d.rule, d.path.to_string().as_str(), d.required, d.actual) == (rule, p, req, act), || {
        format!("{name}: got {} at {} ({} vs {})", d.rule.as_str(), d.path, d.required, d.actual)
    })
}

fn criterion_1_corpus_verdicts() -> bool {
    report(1, "corpus verdicts", Some(Duration::from_secs(1)), || {
        let (_, _, p1) = load(corpus::P1);
        single_diagnostic("P1", &p1, Rule::Assign, "B.Key.all", W, NO)?;
        ensure(p1.diagnostics[0].span.start.line == 11, || "P1: diagnostic not at the third assignment".into())?;

        let (_, _, p2) = load(corpus::P2);
        single_diagnostic("P2", &p2, Rule::While, "B", RW, W)?;

        let (_, _, swap) = load(corpus::SWAP);
        ensure(swap.accepted(), || format!("Swap rejected: {:?}", swap.diagnostics))?;
        let roots = ["X", "Y", "Temp"];
        for (point, want) in [("Swap#1:after", [RW, W, RW]), ("Swap#2:after", [W, RW, RW]), ("Swap#3:after", [RW, RW, W])] {
            let got = perms_at(&swap, point, &roots)?;
            ensure(got == want, || format!("Swap at {point}: {got:?}"))?;
        }

        let (_, _, incr) = load(corpus::ASSIGN_INCR);
        ensure(incr.accepted(), || "Assign_Incr rejected".into())?;

        let (_, _, cycle) = load(corpus::CYCLE);
        single_diagnostic("cycle", &cycle, Rule::Assign, "A.Next", W, NO)?;

        let (_, _, alloc) = load(corpus::ALLOC);
        ensure(alloc.accepted(), || "alloc rejected".into())?;
        let near = perms_at(&alloc, "Main#1:after", &["P", "P.all", "P.all.Flag", "P.all.Key", "P.all.Next"])?;
        let far = perms_at(&alloc, "Main#1:after", &["P.all.Key.all", "P.all.Next.all", "P.all.Next.all.Flag"])?;
        ensure(near == [W; 5] && far == [NO; 3], || format!("alloc: near {near:?}, far {far:?}"))?;
        Ok("6 fixtures".into())
    })
}

fn criterion_2_consistency() -> bool {
    report(2, "policy consistency at depth 6", Some(Duration::from_secs(120)), || {
        let mut points = 0;
        for (name, src) in corpus::ALL {
            let (_, _, r) = load(src);
            for (point, pol) in r.map.iter() {
                pol.check_consistency(6).map_err(|v| format!("{name} at {point}: {v}"))?;
                points += 1;
            }
        }
        let opts = CampaignOptions { check_orders: false, fuel: 0, shrink: false, ..CampaignOptions::default() };
        let r = run_campaign(&GenConfig { seed: 2, ..GenConfig::default() }, 2200, &opts);
        if let Some(f) = r.failures.iter().find(|f| f.kind == FailureKind::Consistency) {
            return Err(format!("program {}: {}", f.index, f.detail));
        }
        ensure(r.accepted >= 1000, || format!("only {} accepted programs", r.accepted))?;
        Ok(format!("{points} corpus points, {} accepted fuzzed programs", r.accepted))
    })
}

fn criterion_3_soundness() -> bool {
    report(3, "monitored runs of accepted programs", Some(Duration::from_secs(300)), || {
        let opts = CampaignOptions { check_orders: false, consistency_depth: 0, shrink: false, ..CampaignOptions::default() };
        let r = run_campaign(&GenConfig { seed: 3, ..GenConfig::default() }, 1200, &opts);
        if let Some(f) = r.failures.first() {
            return Err(format!("program {}: {} {}", f.index, f.kind, f.detail));
        }
        let ran = r.completed + r.blocked + r.fuel_exhausted + r.violations;
        ensure(ran >= 500 && r.violations == 0, || format!("{ran} runs, {} violations", r.violations))?;
        Ok(format!("{ran} runs: {} completed, {} blocked, {} out of fuel", r.completed, r.blocked, r.fuel_exhausted))
    })
}

fn criterion_4_negative_control() -> bool {
    report(4, "negative control", None, || {
        let (prog, env, r) = load(corpus::UNCHECKED_ALIAS);
        let monitor = Monitor { fallback: Some(RW), ..Monitor::new(&r.map) };
        let run = run_program(&prog, &env, RunOptions { monitor: Some(monitor), ..RunOptions::default() });
        let ExecOutcome::CrewViolation(v) = &run.outcome else {
            return Err(format!("unchecked fixture ended with {:?}", run.outcome));
        };
        let mut caught = Vec::new();
        for m in [Mutation::WeakCut, Mutation::WeakBlock, Mutation::WeakBorrow] {
            let opts = CampaignOptions { mutation: Some(m), shrink: false, ..CampaignOptions::default() };
            let r = run_campaign(&GenConfig { seed: 4, ..GenConfig::default() }, 1000, &opts);
            if !r.passed() {
                caught.push(format!("{} ({} failures)", m.as_str(), r.failures.len()));
            }
        }
        ensure(!caught.is_empty(), || "no mutation caught".into())?;
        Ok(format!("fixture violation at {}; caught {}", v.point, caught.join(", ")))
    })
}

fn criterion_5_lazy_eager_oracle() -> bool {
    report(5, "lazy and eager policies agree", Some(Duration::from_secs(60)), || {
        let mut queries = 0;
        for seed in 0..200 {
            queries += common::sequences::run_sequence(seed, 12).map_err(|e| format!("seed {seed}: {e}"))?;
        }
        Ok(format!("200 sequences, {queries} path queries"))
    })
}

fn round_trips(prog: &Program) -> Result<(), String> {
    let text = pretty_print(prog);
    let back = parse(&text).map_err(|e| e.to_string())?;
    ensure(back.without_spans() == prog.without_spans() && pretty_print(&back) == text, || "structure differs".into())
}

fn criterion_6_round_trip() -> bool {
    report(6, "parse and print round trip", None, || {
        for (name, src) in corpus::ALL {
            round_trips(&parse(src).unwrap()).map_err(|e| format!("{name}: {e}"))?;
        }
        for i in 0..1000 {
            let prog = generate_program(&GenConfig { seed: program_seed(6, i), ..GenConfig::default() });
            round_trips(&prog).map_err(|e| format!("fuzzed program {i}: {e}"))?;
        }
        Ok(format!("{} corpus files, 1000 fuzzed programs", corpus::ALL.len()))
    })
}

fn criterion_7_order_independence() -> bool {
    report(7, "path order independence", None, || {
        let orders = [PathOrder::Textual, PathOrder::Reversed, PathOrder::Shuffled(1), PathOrder::Shuffled(2)];
        let verdicts = |prog: &Program, env: &ProgramEnv| -> Vec<bool> {
            orders.iter().map(|&path_order| analyze_program(prog, env, CheckOptions { path_order, mutation: None }).accepted()).collect()
        };
        for (name, src) in corpus::ALL {
            let (prog, env, _) = load(src);
            let v = verdicts(&prog, &env);
            ensure(v.iter().all(|&a| a == v[0]), || format!("{name}: {v:?}"))?;
        }
        let mut accepted = 0;
        for i in 0..1000 {
            let prog = generate_program(&GenConfig { seed: program_seed(7, i), ..GenConfig::default() });
            let env = check_program(&prog).unwrap();
            let v = verdicts(&prog, &env);
            ensure(v.iter().all(|&a| a == v[0]), || format!("fuzzed program {i}: {v:?}"))?;
            accepted += v[0] as usize;
        }
        Ok(format!("1000 fuzzed programs, {accepted} accepted, 4 orders each"))
    })
}

fn main() {
    let results = [
        criterion_1_corpus_verdicts(),
        criterion_2_consistency(),
        criterion_3_soundness(),
        criterion_4_negative_control(),
        criterion_5_lazy_eager_oracle(),
        criterion_6_round_trip(),
        criterion_7_order_independence(),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
