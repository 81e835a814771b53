use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use muspark::alias::{analyze_program, AliasReport, CheckOptions, Diagnostic, Mutation};
use muspark::fuzz::{run_campaign, CampaignOptions, GenConfig};
use muspark::interp::{run_program, ExecOutcome, Monitor, RunOptions, RunResult, DEFAULT_FUEL};
use muspark::parser::{parse, SyntaxError};
use muspark::permission::Permission;
use muspark::syntax::{Program, SeqPoint, Span};
use muspark::typecheck::{check_program, ProgramEnv, TypeError};
use serde_json::json;

const OK: u8 = 0;
const DIAGNOSTICS: u8 = 1;
const BLOCKED: u8 = 2;
const CREW: u8 = 3;
const USAGE: u8 = 4;
const FUEL: u8 = 5;

#[derive(Parser)]
#[command(name = "muspark", version, about = "Alias checker and interpreter for a small pointer language")]
struct Cli {
    /// Output style for diagnostics and results.
    #[arg(long, value_enum, default_value_t = Format::Human, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Human,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Type-check and alias-check a program. Silent on success.
    Check { file: PathBuf },
    /// Execute `Main`.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Check the CREW property at every sequence point of the active frame.
        #[arg(long)]
        monitor: bool,
        /// Run even if alias checking fails; points without a policy are monitored as all `RW`.
        #[arg(long)]
        unchecked: bool,
        /// Block on integer overflow instead of wrapping.
        #[arg(long)]
        trap_overflow: bool,
        /// Print one line per sequence point to stderr.
        #[arg(long)]
        verbose: bool,
    },
    /// Print the access policy at one sequence point, or at all of them.
    Trace {
        file: PathBuf,
        /// Point key such as `Swap#1:after`.
        #[arg(long)]
        point: Option<String>,
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Generate random programs and check them against the analysis and the monitor.
    Fuzz {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        count: u64,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// TOML file with generator settings; `--seed` takes precedence over its `seed`.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for reproducer files.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, hide = true, value_parser = parse_mutation)]
        inject: Option<Mutation>,
        #[arg(long, hide = true)]
        unchecked: bool,
    },
}

fn parse_mutation(s: &str) -> Result<Mutation, String> {
    Mutation::parse(s).ok_or_else(|| format!("unknown mutation `{s}` (weak-cut, weak-block, weak-borrow)"))
}

struct Reporter {
    file: String,
    format: Format,
}

impl Reporter {
    fn error(&self, span: Span, code: &str, message: &str, extra: Option<&Diagnostic>) {
        match self.format {
            Format::Human => {
                let tail = extra
                    .map(|d| format!(" (path {} requires {}, has {})", d.path, d.required, d.actual))
                    .unwrap_or_default();
                eprintln!("{}:{}:{}: error[{code}]: {message}{tail}", self.file, span.start.line, span.start.col);
            }
            Format::Json => {
                let obj = json!({
                    "file": self.file,
                    "line": span.start.line,
                    "col": span.start.col,
                    "code": code,
                    "rule": extra.map(|d| d.rule.as_str()),
                    "path": extra.map(|d| d.path.to_string()),
                    "required": extra.map(|d| d.required.as_str()),
                    "actual": extra.map(|d| d.actual.as_str()),
                    "message": message,
                });
                println!("{obj}");
            }
        }
    }

    fn syntax(&self, e: &SyntaxError) {
        self.error(e.span(), e.code(), &e.to_string(), None);
    }

    fn types(&self, errs: &[TypeError]) {
        for e in errs {
            self.error(e.span, e.code.as_str(), &e.message, None);
        }
    }

    fn alias(&self, diags: &[Diagnostic]) {
        for d in diags {
            let message = format!("{}: {}", d.rule, d.message);
            self.error(d.span, d.code, &message, Some(d));
        }
    }

    fn usage(&self, message: &str) {
        match self.format {
            Format::Human => eprintln!("muspark: {message}"),
            Format::Json => println!("{}", json!({ "error": "usage", "message": message })),
        }
    }
}

/// Reads, parses and type-checks `file`, reporting failures.
fn load(rep: &Reporter, file: &FsPath) -> Result<(Program, ProgramEnv), u8> {
    let source = fs::read_to_string(file).map_err(|e| {
        rep.usage(&format!("cannot read {}: {e}", file.display()));
        USAGE
    })?;
    let program = parse(&source).map_err(|e| {
        rep.syntax(&e);
        DIAGNOSTICS
    })?;
    let env = check_program(&program).map_err(|errs| {
        rep.types(&errs);
        DIAGNOSTICS
    })?;
    Ok((program, env))
}

fn analyze(program: &Program, env: &ProgramEnv) -> AliasReport {
    analyze_program(program, env, CheckOptions::default())
}

fn cmd_check(rep: &Reporter, file: &FsPath) -> u8 {
    let (program, env) = match load(rep, file) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let report = analyze(&program, &env);
    rep.alias(&report.diagnostics);
    if report.accepted() {
        OK
    } else {
        DIAGNOSTICS
    }
}

struct RunFlags {
    fuel: u64,
    monitor: bool,
    unchecked: bool,
    trap_overflow: bool,
    verbose: bool,
}

fn cmd_run(rep: &Reporter, file: &FsPath, flags: RunFlags) -> u8 {
    let (program, env) = match load(rep, file) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let report = analyze(&program, &env);
    if !report.accepted() && !flags.unchecked {
        rep.alias(&report.diagnostics);
        return DIAGNOSTICS;
    }
    let monitor = flags
        .monitor
        .then(|| Monitor { fallback: flags.unchecked.then_some(Permission::RW), ..Monitor::new(&report.map) });
    let opts = RunOptions { fuel: flags.fuel, trap_overflow: flags.trap_overflow, monitor, verbose: flags.verbose };
    let result = run_program(&program, &env, opts);
    for event in &result.trace {
        eprintln!("{event}");
    }
    print_outcome(rep, &env, &result)
}

fn print_outcome(rep: &Reporter, env: &ProgramEnv, result: &RunResult) -> u8 {
    let (status, code) = match &result.outcome {
        ExecOutcome::Completed(_) => ("completed", OK),
        ExecOutcome::Blocked { .. } => ("blocked", BLOCKED),
        ExecOutcome::CrewViolation(_) => ("crew-violation", CREW),
        ExecOutcome::FuelExhausted => ("fuel-exhausted", FUEL),
    };
    let vars: Vec<(String, String)> = match &result.outcome {
        ExecOutcome::Completed(store) => env.procs["Main"]
            .vars()
            .map(|(name, _)| (name.to_string(), store.read(&result.main_binding[name]).to_string()))
            .collect(),
        _ => vec![],
    };
    match rep.format {
        Format::Human => {
            match &result.outcome {
                ExecOutcome::Blocked { reason, span } => {
                    println!("blocked: {reason} at {}:{}:{}", rep.file, span.start.line, span.start.col)
                }
                ExecOutcome::CrewViolation(v) => println!("crew violation {v}"),
                _ => println!("{status} after {} steps", result.steps),
            }
            for (name, value) in &vars {
                println!("  {name} = {value}");
            }
        }
        Format::Json => {
            let mut obj = json!({ "file": rep.file, "outcome": status, "steps": result.steps });
            match &result.outcome {
                ExecOutcome::Blocked { reason, span } => {
                    obj["reason"] = json!(reason.as_str());
                    obj["line"] = json!(span.start.line);
                    obj["col"] = json!(span.start.col);
                }
                ExecOutcome::CrewViolation(v) => {
                    obj["point"] = json!(v.point.to_string());
                    obj["paths"] = json!([v.conflict.p.to_string(), v.conflict.q.to_string()]);
                    obj["perms"] = json!([v.conflict.perm_p.as_str(), v.conflict.perm_q.as_str()]);
                    obj["address"] = json!(v.conflict.address.to_string());
                }
                _ => {}
            }
            if !vars.is_empty() {
                obj["vars"] = vars.iter().map(|(n, v)| (n.clone(), json!(v))).collect();
            }
            println!("{obj}");
        }
    }
    code
}

fn cmd_trace(rep: &Reporter, file: &FsPath, point: Option<&str>, depth: usize) -> u8 {
    let (program, env) = match load(rep, file) {
        Ok(x) => x,
        Err(code) => return code,
    };
    let report = analyze(&program, &env);
    if !report.accepted() {
        rep.alias(&report.diagnostics);
        return DIAGNOSTICS;
    }
    let points: Vec<(&SeqPoint, _)> = match point {
        Some(key) => {
            let found = SeqPoint::parse(key).and_then(|p| report.map.iter().find(|(q, _)| **q == p));
            match found {
                Some(entry) => vec![entry],
                None => {
                    rep.usage(&format!("no sequence point `{key}`"));
                    return USAGE;
                }
            }
        }
        None => report.map.iter().collect(),
    };
    let single = point.is_some();
    for (p, policy) in points {
        let mut lines: Vec<(String, Permission)> =
            policy.entries(depth).into_iter().map(|(path, perm)| (path.to_string(), perm)).collect();
        lines.sort();
        match rep.format {
            Format::Human => {
                if !single {
                    println!("{p}");
                }
                for (path, perm) in lines {
                    println!("{path}\t{perm}");
                }
            }
            Format::Json => {
                for (path, perm) in lines {
                    println!("{}", json!({ "point": p.to_string(), "path": path, "perm": perm.as_str() }));
                }
            }
        }
    }
    OK
}

struct FuzzFlags {
    seed: u64,
    count: u64,
    fuel: u64,
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    inject: Option<Mutation>,
    unchecked: bool,
}

fn cmd_fuzz(rep: &Reporter, flags: FuzzFlags) -> u8 {
    let mut config = match &flags.config {
        Some(path) => {
            let parsed = fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))
                .and_then(|text| GenConfig::from_toml(&text));
            match parsed {
                Ok(c) => c,
                Err(e) => {
                    rep.usage(&e);
                    return USAGE;
                }
            }
        }
        None => GenConfig::default(),
    };
    config.seed = flags.seed;
    let opts = CampaignOptions { fuel: flags.fuel, mutation: flags.inject, unchecked: flags.unchecked, ..CampaignOptions::default() };
    let report = run_campaign(&config, flags.count, &opts);

    let mut written = Vec::new();
    if let Some(dir) = &flags.out {
        if let Err(e) = fs::create_dir_all(dir) {
            rep.usage(&format!("cannot create {}: {e}", dir.display()));
            return USAGE;
        }
        for f in &report.failures {
            let path = dir.join(format!("repro-{}-{}.mus", report.seed, f.index));
            if let Err(e) = fs::write(&path, &f.reproducer) {
                rep.usage(&format!("cannot write {}: {e}", path.display()));
                return USAGE;
            }
            written.push(path);
        }
    }
    match rep.format {
        Format::Human => {
            println!("{report}");
            for path in &written {
                println!("reproducer written to {}", path.display());
            }
            if flags.out.is_none() {
                if let Some(f) = report.failures.first() {
                    println!();
                    print!("{}", f.reproducer);
                }
            }
        }
        Format::Json => {
            let mut obj = serde_json::to_value(&report).expect("report serializes");
            obj["reproducer_files"] = json!(written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>());
            println!("{obj}");
        }
    }
    if report.passed() {
        OK
    } else {
        DIAGNOSTICS
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { OK });
        }
    };
    let file_name = |f: &FsPath| f.display().to_string();
    let code = match cli.command {
        Command::Check { file } => cmd_check(&Reporter { file: file_name(&file), format: cli.format }, &file),
        Command::Run { file, fuel, monitor, unchecked, trap_overflow, verbose } => {
            let rep = Reporter { file: file_name(&file), format: cli.format };
            cmd_run(&rep, &file, RunFlags { fuel, monitor, unchecked, trap_overflow, verbose })
        }
        Command::Trace { file, point, depth } => {
            cmd_trace(&Reporter { file: file_name(&file), format: cli.format }, &file, point.as_deref(), depth)
        }
        Command::Fuzz { seed, count, fuel, config, out, inject, unchecked } => {
            let rep = Reporter { file: String::new(), format: cli.format };
            cmd_fuzz(&rep, FuzzFlags { seed, count, fuel, config, out, inject, unchecked })
        }
    };
    ExitCode::from(code)
}
