//! Batch front end: `check`, `run`, and `trace` over `.sfmj` files.
//!
//! Exit codes are a total function of the outcome category:
//! 0 success, 1 type/well-formedness failure, 2 parse failure, 3 I/O
//! failure, 4 stuck or dispatch failure, 5 fuel exhausted, 64 usage error.

use std::io::{Read, Write};

use crate::ast::Expr;
use crate::diag::Diagnostic;
use crate::dispatch::DispatchStrategy;
use crate::eval::{evaluate_with, EvalError, Outcome};
use crate::parser::{parse_program, ParsedProgram};
use crate::table::{bind_class_table, ClassTable};
use crate::typecheck::{check_program_spanned, fj_precheck, promote_warnings};

pub mod exit_code {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const PARSE_FAILED: i32 = 2;
    pub const IO_FAILED: i32 = 3;
    pub const STUCK: i32 = 4;
    pub const FUEL_EXHAUSTED: i32 = 5;
    pub const USAGE: i32 = 64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Run,
    Trace,
}

/// One invocation's configuration.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub command: Command,
    /// File path, or `-` for standard input.
    pub input: String,
    pub mode: DispatchStrategy,
    pub strict_casts: bool,
    pub fuel: u64,
    pub json: bool,
}

pub const USAGE: &str = "\
usage: sfmj <check|run|trace> [options] <file.sfmj | ->

options:
  --mode <sfmj|fj>      dispatch strategy (default sfmj)
  --fuel <N>            step budget for run/trace (default 100000, N >= 1)
  --deny-stupid-casts   treat stupid-cast warnings as errors
  --json                emit JSON lines instead of human-readable text
";

/// Parses command-line arguments (program name excluded).
pub fn parse_args(args: &[String]) -> Result<CliConfig, String> {
    let mut it = args.iter();
    let command = match it.next().map(String::as_str) {
        Some("check") => Command::Check,
        Some("run") => Command::Run,
        Some("trace") => Command::Trace,
        Some(other) => return Err(format!("unknown command `{other}`")),
        None => return Err("missing command".to_string()),
    };
    let mut cfg = CliConfig {
        command,
        input: String::new(),
        mode: DispatchStrategy::Sfmj,
        strict_casts: false,
        fuel: 100_000,
        json: false,
    };
    let mut input: Option<String> = None;
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--mode" => {
                let value = it.next().ok_or("--mode needs a value")?;
                cfg.mode = value.parse()?;
            }
            "--fuel" => {
                let value = it.next().ok_or("--fuel needs a value")?;
                cfg.fuel = value
                    .parse::<u64>()
                    .map_err(|_| format!("invalid fuel `{value}`"))?;
                if cfg.fuel == 0 {
                    return Err("fuel must be at least 1".to_string());
                }
            }
            "--deny-stupid-casts" => cfg.strict_casts = true,
            "--json" => cfg.json = true,
            other if other.starts_with("--") => return Err(format!("unknown flag `{other}`")),
            other => {
                if input.replace(other.to_string()).is_some() {
                    return Err("more than one input file".to_string());
                }
            }
        }
    }
    cfg.input = input.ok_or("missing input file (use `-` for stdin)")?;
    Ok(cfg)
}

/// Runs a parsed configuration against the given output streams, returning
/// the exit code.
pub fn execute(cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match cfg.command {
        Command::Check => cmd_check(cfg, out, err),
        Command::Run => cmd_run(cfg, out, err),
        Command::Trace => cmd_trace(cfg, out, err),
    }
}

struct Loaded {
    table: ClassTable,
    main: Expr,
    main_type: crate::ast::ClassName,
}

/// Shared front half: read, parse, bind, check under the symmetric rules
/// (the dispatch strategy only affects execution, so FJ-mode programs are
/// additionally vetted per call site when `precheck_fj` is set). Emits
/// diagnostics and returns the exit code on failure.
fn load_and_check(
    cfg: &CliConfig,
    precheck_fj: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<Loaded, i32> {
    let source = match read_input(&cfg.input) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read `{}`: {e}", cfg.input);
            return Err(exit_code::IO_FAILED);
        }
    };
    let ParsedProgram { decls, main, spans } = match parse_program(&source) {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "parse error: {e}");
            return Err(exit_code::PARSE_FAILED);
        }
    };
    let table = match bind_class_table(decls) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error[InvalidClassTable] table: {e}");
            return Err(exit_code::CHECK_FAILED);
        }
    };
    let typed = match check_program_spanned(&table, &main, Some(&spans)) {
        Ok(typed) => typed,
        Err(diags) => {
            emit_diagnostics(cfg, &diags, err);
            return Err(exit_code::CHECK_FAILED);
        }
    };
    let mut warnings = typed.warnings;
    if cfg.strict_casts && !warnings.is_empty() {
        promote_warnings(&mut warnings);
        emit_diagnostics(cfg, &warnings, err);
        return Err(exit_code::CHECK_FAILED);
    }
    emit_diagnostics(cfg, &warnings, err);

    if precheck_fj && cfg.mode == DispatchStrategy::Fj {
        let failures = fj_precheck(&table, &main);
        if !failures.is_empty() {
            emit_diagnostics(cfg, &failures, err);
            let _ = writeln!(
                out,
                "{}",
                report_line(cfg, "fj-dispatch-failure", &failures[0].message)
            );
            return Err(exit_code::STUCK);
        }
    }
    Ok(Loaded {
        table,
        main,
        main_type: typed.main_type,
    })
}

fn cmd_check(cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match load_and_check(cfg, false, out, err) {
        Ok(loaded) => {
            if cfg.json {
                let _ = writeln!(
                    out,
                    "{}",
                    serde_json::json!({"type": loaded.main_type.as_str()})
                );
            } else {
                let _ = writeln!(out, "{}", loaded.main_type);
            }
            exit_code::OK
        }
        Err(code) => code,
    }
}

fn cmd_run(cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let loaded = match load_and_check(cfg, true, out, err) {
        Ok(l) => l,
        Err(code) => return code,
    };
    match evaluate_with(&loaded.table, cfg.mode, &loaded.main, cfg.fuel) {
        Ok(trace) => emit_outcome(cfg, &trace.outcome, trace.steps.len(), out),
        Err(e) => emit_eval_error(cfg, &e, out, err),
    }
}

fn cmd_trace(cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let loaded = match load_and_check(cfg, true, out, err) {
        Ok(l) => l,
        Err(code) => return code,
    };
    match evaluate_with(&loaded.table, cfg.mode, &loaded.main, cfg.fuel) {
        Ok(trace) => {
            for (idx, (expr, rule)) in trace.steps.iter().enumerate() {
                if cfg.json {
                    let mut record = serde_json::json!({
                        "step": idx + 1,
                        "rule": rule.name(),
                        "expr": expr.to_string(),
                    });
                    if let Some(branch) = rule.branch_label() {
                        record["branch"] = serde_json::Value::String(branch);
                    }
                    let _ = writeln!(out, "{record}");
                } else {
                    let _ = writeln!(out, "{} {} {}", idx + 1, rule, expr);
                }
            }
            emit_outcome(cfg, &trace.outcome, trace.steps.len(), out)
        }
        Err(e) => emit_eval_error(cfg, &e, out, err),
    }
}

fn emit_outcome(cfg: &CliConfig, outcome: &Outcome, steps: usize, out: &mut dyn Write) -> i32 {
    match outcome {
        Outcome::Value(v) => {
            if cfg.json {
                let _ = writeln!(
                    out,
                    "{}",
                    serde_json::json!({"outcome": "value", "expr": v.to_string()})
                );
            } else {
                let _ = writeln!(out, "{v}");
            }
            exit_code::OK
        }
        Outcome::StuckCast(e) => {
            if cfg.json {
                let _ = writeln!(
                    out,
                    "{}",
                    serde_json::json!({"outcome": "stuck", "expr": e.to_string()})
                );
            } else {
                let _ = writeln!(out, "stuck: {e}");
            }
            exit_code::STUCK
        }
        Outcome::FuelExhausted => {
            if cfg.json {
                let _ = writeln!(
                    out,
                    "{}",
                    serde_json::json!({"outcome": "fuel-exhausted", "steps": steps})
                );
            } else {
                let _ = writeln!(out, "fuel exhausted after {steps} step(s)");
            }
            exit_code::FUEL_EXHAUSTED
        }
    }
}

fn emit_eval_error(
    cfg: &CliConfig,
    e: &EvalError,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    match e {
        EvalError::FjDispatchFailure { .. } => {
            let _ = writeln!(
                out,
                "{}",
                report_line(cfg, "fj-dispatch-failure", &e.to_string())
            );
            exit_code::STUCK
        }
        other => {
            // Internal failures on checked programs falsify soundness; keep
            // them loud and distinct.
            let _ = writeln!(err, "internal error: {other}");
            exit_code::STUCK
        }
    }
}

fn report_line(cfg: &CliConfig, kind: &str, message: &str) -> String {
    if cfg.json {
        serde_json::json!({"outcome": kind, "message": message}).to_string()
    } else {
        format!("{kind}: {message}")
    }
}

fn emit_diagnostics(cfg: &CliConfig, diags: &[Diagnostic], err: &mut dyn Write) {
    for d in diags {
        if cfg.json {
            let _ = writeln!(err, "{}", d.to_json(&cfg.input));
        } else {
            let _ = writeln!(err, "{d}");
        }
    }
}

fn read_input(input: &str) -> std::io::Result<String> {
    if input == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        std::fs::read_to_string(input)
    }
}
