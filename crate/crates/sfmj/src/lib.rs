//! SFMJ: a Featherweight-Java-style core calculus with symmetric
//! encapsulated multi-methods.
//!
//! Methods list all their parameters explicitly and may be declared in the
//! class of *any* of their parameters; calls are written `m(e1, ..., en)`
//! with no receiver, and branch selection uses the run-time classes of all
//! arguments. Client code therefore never encodes where a method body
//! lives, and a subclass in one hierarchy can override a method declared in
//! an unrelated one. The price is a global well-formedness check: every
//! pair of branches whose parameter types share a lower bound needs a
//! branch at exactly that meet, and specializing branches must narrow their
//! return types.
//!
//! The crate provides, module by module:
//!
//! - [`ast`] / [`table`]: syntax, validated class tables, nominal
//!   subtyping, field collection, pointwise meets.
//! - [`parser`] / [`pretty`]: concrete syntax for `.sfmj` files and a
//!   round-tripping printer.
//! - [`dispatch`]: symmetric lookup/selection, plus a first-argument
//!   compatibility strategy for differential testing.
//! - [`typecheck`]: expression/method/class/program typing and the global
//!   branch constraints.
//! - [`eval`]: small-step call-by-value evaluation with rule-level traces
//!   and stuck-state classification.
//! - [`gen`]: deterministic random program generation and brute-force
//!   oracles that validate the soundness properties empirically.
//! - [`cli`]: the `check` / `run` / `trace` batch front end.
//!
//! The `examples/` directory shows one runnable program per capability;
//! start with `cargo run --example check_program`.

pub mod ast;
pub mod cli;
pub mod diag;
pub mod dispatch;
pub mod eval;
pub mod gen;
pub mod parser;
pub mod pretty;
pub mod span;
pub mod table;
pub mod typecheck;

#[cfg(test)]
pub(crate) mod testutil;

pub use ast::{ClassDecl, ClassName, ConstructorDecl, Expr, MethodBranch};
pub use diag::{DiagCode, Diagnostic, Severity};
pub use dispatch::{fj_lookup, lookup, lookup1, select, DispatchStrategy};
pub use eval::{
    evaluate, evaluate_with, step, step_with, substitute, EvalError, NormalForm, Outcome,
    StepResult, Trace,
};
pub use gen::{
    gen_expr, gen_fj_program, gen_program, gen_table, gen_wellformed_table, oracle_ambiguity,
    ConflictReport, GenConfig, Verdict,
};
pub use parser::{parse_expr, parse_program, ParseError, ParsedProgram};
pub use pretty::pretty_program;
pub use span::{Span, SpanMap};
pub use table::{bind_class_table, ClassTable, TableError};
pub use typecheck::{
    check_class, check_method, check_program, check_program_spanned, check_table_wellformed,
    check_wellformed, fj_precheck, overloaded_set, type_expr, OverloadedSet, TypeEnv, TypedProgram,
};
