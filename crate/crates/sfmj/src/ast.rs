//! Abstract syntax for SFMJ programs.
//!
//! A program is a set of class declarations plus one main expression. The
//! expression language has exactly five forms: variables, field access,
//! symmetric method invocation `m(e1, ..., en)` (no receiver position),
//! object creation, and casts. Values are `new C(v1, ..., vn)` terms whose
//! arguments are all values, so every object carries its run-time class.

use std::fmt;

/// Name of a class. `Object` is the implicit root and is never declared.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassName(String);

impl ClassName {
    pub const OBJECT: &'static str = "Object";

    pub fn new(name: impl Into<String>) -> Self {
        ClassName(name.into())
    }

    pub fn object() -> Self {
        ClassName(Self::OBJECT.to_string())
    }

    pub fn is_object(&self) -> bool {
        self.0 == Self::OBJECT
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ClassName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for ClassName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClassName({})", self.0)
    }
}

impl From<&str> for ClassName {
    fn from(s: &str) -> Self {
        ClassName::new(s)
    }
}

impl From<String> for ClassName {
    fn from(s: String) -> Self {
        ClassName(s)
    }
}

/// One class declaration: parent, fields, the stylized constructor, and the
/// method branches the class owns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: ClassName,
    pub parent: ClassName,
    /// Declared (non-inherited) fields, in declaration order.
    pub fields: Vec<(ClassName, String)>,
    pub ctor: ConstructorDecl,
    pub methods: Vec<MethodBranch>,
}

/// Constructor in the stylized form
/// `C(D g1, ..., C f1, ...) { super(g1, ...); this.f1 = f1; ... }`.
///
/// The shape (params = inherited fields then declared fields, super
/// arguments covering exactly the inherited fields, inits covering exactly
/// the declared fields) is enforced when the class table is bound, not here.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructorDecl {
    pub name: ClassName,
    pub params: Vec<(ClassName, String)>,
    pub super_args: Vec<String>,
    /// `this.<field> = <param>;` assignments, as (field, param) pairs.
    pub inits: Vec<(String, String)>,
}

/// One declared body of an overloaded method.
///
/// `owner` is the class the branch is declared in; method typing requires it
/// to equal the declared type of at least one parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MethodBranch {
    pub owner: ClassName,
    pub name: String,
    pub params: Vec<(ClassName, String)>,
    pub return_type: ClassName,
    pub body: Expr,
}

impl MethodBranch {
    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn param_types(&self) -> Vec<ClassName> {
        self.params.iter().map(|(t, _)| t.clone()).collect()
    }

    pub fn param_names(&self) -> Vec<String> {
        self.params.iter().map(|(_, x)| x.clone()).collect()
    }

    /// Human-readable signature, e.g. `A1.m(A1, B)`.
    pub fn signature(&self) -> String {
        let params: Vec<&str> = self.params.iter().map(|(t, _)| t.as_str()).collect();
        format!("{}.{}({})", self.owner, self.name, params.join(", "))
    }
}

/// The five expression forms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Var(String),
    FieldAccess(Box<Expr>, String),
    /// Symmetric invocation `m(e1, ..., en)`; at least one argument.
    Invoke(String, Vec<Expr>),
    New(ClassName, Vec<Expr>),
    Cast(ClassName, Box<Expr>),
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn field(target: Expr, name: impl Into<String>) -> Expr {
        Expr::FieldAccess(Box::new(target), name.into())
    }

    pub fn invoke(name: impl Into<String>, args: Vec<Expr>) -> Expr {
        Expr::Invoke(name.into(), args)
    }

    pub fn new_object(class: impl Into<ClassName>, args: Vec<Expr>) -> Expr {
        Expr::New(class.into(), args)
    }

    pub fn cast(class: impl Into<ClassName>, inner: Expr) -> Expr {
        Expr::Cast(class.into(), Box::new(inner))
    }

    /// True for `new C(v1, ..., vn)` with all arguments values.
    pub fn is_value(&self) -> bool {
        match self {
            Expr::New(_, args) => args.iter().all(Expr::is_value),
            _ => false,
        }
    }

    /// Run-time class of a value; `None` when `self` is not a value.
    pub fn value_class(&self) -> Option<&ClassName> {
        match self {
            Expr::New(c, args) if args.iter().all(Expr::is_value) => Some(c),
            _ => None,
        }
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Expr::Var(_) => 1,
            Expr::FieldAccess(e, _) | Expr::Cast(_, e) => 1 + e.size(),
            Expr::Invoke(_, args) | Expr::New(_, args) => {
                1 + args.iter().map(Expr::size).sum::<usize>()
            }
        }
    }

    /// Free variables, in first-occurrence order.
    pub fn free_vars(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_free_vars(&mut out);
        out
    }

    fn collect_free_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Expr::Var(x) => {
                if !out.contains(&x.as_str()) {
                    out.push(x);
                }
            }
            Expr::FieldAccess(e, _) | Expr::Cast(_, e) => e.collect_free_vars(out),
            Expr::Invoke(_, args) | Expr::New(_, args) => {
                for a in args {
                    a.collect_free_vars(out);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_are_fully_evaluated_news() {
        let v = Expr::new_object("Pair", vec![Expr::new_object("A", vec![])]);
        assert!(v.is_value());
        assert_eq!(v.value_class().unwrap().as_str(), "Pair");

        let not_v = Expr::new_object("Pair", vec![Expr::var("x")]);
        assert!(!not_v.is_value());
        assert!(not_v.value_class().is_none());

        assert!(!Expr::var("x").is_value());
        assert!(!Expr::cast("A", Expr::new_object("A", vec![])).is_value());
    }

    #[test]
    fn free_vars_in_first_occurrence_order() {
        let e = Expr::invoke(
            "m",
            vec![
                Expr::field(Expr::var("b"), "fst"),
                Expr::var("a"),
                Expr::var("b"),
            ],
        );
        assert_eq!(e.free_vars(), vec!["b", "a"]);
    }

    #[test]
    fn object_is_reserved_root() {
        assert!(ClassName::object().is_object());
        assert!(!ClassName::new("A").is_object());
    }
}
