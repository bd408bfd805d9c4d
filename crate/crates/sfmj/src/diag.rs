//! Structured diagnostics for type checking and well-formedness analysis.

use std::fmt;

use crate::ast::ClassName;
use crate::span::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Severity::Error => f.write_str("error"),
            Severity::Warning => f.write_str("warning"),
        }
    }
}

/// Machine-matchable diagnostic category. `MissingMeetBranch` carries the
/// uncovered meet so callers can assert on it structurally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagCode {
    UnboundVariable,
    UnknownField,
    UnknownClass,
    NoApplicableMethod,
    StaticAmbiguity,
    ArityMismatch,
    ArgumentNotSubtype,
    ReturnTypeNotSubtype,
    OwnerNotAParameterType,
    DuplicateParameter,
    MalformedConstructor,
    ArityClash,
    DuplicateSignature,
    MissingMeetBranch { meet: Vec<ClassName> },
    CovariantReturnViolation,
    StupidCast,
    FjUnresolvable,
    InvalidClassTable,
}

impl DiagCode {
    pub fn name(&self) -> &'static str {
        match self {
            DiagCode::UnboundVariable => "UnboundVariable",
            DiagCode::UnknownField => "UnknownField",
            DiagCode::UnknownClass => "UnknownClass",
            DiagCode::NoApplicableMethod => "NoApplicableMethod",
            DiagCode::StaticAmbiguity => "StaticAmbiguity",
            DiagCode::ArityMismatch => "ArityMismatch",
            DiagCode::ArgumentNotSubtype => "ArgumentNotSubtype",
            DiagCode::ReturnTypeNotSubtype => "ReturnTypeNotSubtype",
            DiagCode::OwnerNotAParameterType => "OwnerNotAParameterType",
            DiagCode::DuplicateParameter => "DuplicateParameter",
            DiagCode::MalformedConstructor => "MalformedConstructor",
            DiagCode::ArityClash => "ArityClash",
            DiagCode::DuplicateSignature => "DuplicateSignature",
            DiagCode::MissingMeetBranch { .. } => "MissingMeetBranch",
            DiagCode::CovariantReturnViolation => "CovariantReturnViolation",
            DiagCode::StupidCast => "StupidCast",
            DiagCode::FjUnresolvable => "FjUnresolvable",
            DiagCode::InvalidClassTable => "InvalidClassTable",
        }
    }
}

/// One type or well-formedness finding, tagged with the judgment it came
/// from. Warnings never block acceptance unless the caller opts into strict
/// mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Judgment name, e.g. `T-Invk`, `T-Meth`, `wellformed`.
    pub rule: &'static str,
    pub code: DiagCode,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn error(rule: &'static str, code: DiagCode, message: String, span: Span) -> Diagnostic {
        Diagnostic {
            severity: Severity::Error,
            rule,
            code,
            message,
            span,
        }
    }

    pub fn warning(rule: &'static str, code: DiagCode, message: String, span: Span) -> Diagnostic {
        Diagnostic {
            severity: Severity::Warning,
            rule,
            code,
            message,
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// JSON record with the fixed field set
    /// `{severity, rule, code, message, file, line, col}`.
    pub fn to_json(&self, file: &str) -> serde_json::Value {
        serde_json::json!({
            "severity": self.severity.to_string(),
            "rule": self.rule,
            "code": self.code.name(),
            "message": self.message,
            "file": file,
            "line": self.span.line,
            "col": self.span.col,
        })
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{}] {}: {}",
            self.severity,
            self.code.name(),
            self.rule,
            self.message
        )?;
        if self.span.is_known() {
            write!(f, " (at {})", self.span)?;
        }
        Ok(())
    }
}
