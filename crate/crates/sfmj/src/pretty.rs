//! Pretty-printing. Output reparses to a structurally identical AST.
//!
//! The only position that ever needs grouping parentheses is a cast whose
//! operand is a field access: casts bind tighter than field access, so
//! `(A) x.f` means `((A) x).f` and the looser tree prints as `(A) (x.f)`.

use std::fmt;

use crate::ast::{ClassDecl, ConstructorDecl, Expr, MethodBranch};

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Var(x) => f.write_str(x),
            Expr::FieldAccess(target, field) => write!(f, "{target}.{field}"),
            Expr::Invoke(m, args) => {
                write!(f, "{m}(")?;
                write_args(f, args)?;
                f.write_str(")")
            }
            Expr::New(c, args) => {
                write!(f, "new {c}(")?;
                write_args(f, args)?;
                f.write_str(")")
            }
            Expr::Cast(c, inner) => {
                if matches!(inner.as_ref(), Expr::FieldAccess(..)) {
                    write!(f, "({c}) ({inner})")
                } else {
                    write!(f, "({c}) {inner}")
                }
            }
        }
    }
}

fn write_args(f: &mut fmt::Formatter<'_>, args: &[Expr]) -> fmt::Result {
    for (i, a) in args.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

impl fmt::Display for MethodBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}(", self.return_type, self.name)?;
        for (i, (ty, name)) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{ty} {name}")?;
        }
        write!(f, ") {{ return {}; }}", self.body)
    }
}

impl fmt::Display for ConstructorDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, (ty, name)) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{ty} {name}")?;
        }
        write!(f, ") {{ super(")?;
        for (i, arg) in self.super_args.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(arg)?;
        }
        f.write_str(");")?;
        for (field, param) in &self.inits {
            write!(f, " this.{field} = {param};")?;
        }
        f.write_str(" }")
    }
}

impl fmt::Display for ClassDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "class {} extends {} {{", self.name, self.parent)?;
        for (ty, name) in &self.fields {
            writeln!(f, "  {ty} {name};")?;
        }
        writeln!(f, "  {}", self.ctor)?;
        for m in &self.methods {
            writeln!(f, "  {m}")?;
        }
        f.write_str("}")
    }
}

/// Prints a whole program: declarations in order, then the main expression.
pub fn pretty_program(decls: &[ClassDecl], main: &Expr) -> String {
    let mut out = String::new();
    for decl in decls {
        out.push_str(&decl.to_string());
        out.push_str("\n\n");
    }
    out.push_str(&main.to_string());
    out.push('\n');
    out
}
