//! Expression, method, class, and program typing, including the global
//! well-formedness constraints on overloaded method branches.
//!
//! The well-formedness constraints are the classic pair: every two branches
//! whose parameter types have a pointwise meet need a branch at exactly that
//! meet, and pointwise-smaller parameters must come with a subtype return
//! type. Both are global properties — a branch in one hierarchy can collide
//! with a branch in an unrelated one, so no class can be checked in
//! isolation.

use std::collections::BTreeMap;

use crate::ast::{ClassName, Expr, MethodBranch};
use crate::diag::{DiagCode, Diagnostic, Severity};
use crate::dispatch::{fj_lookup, lookup, select, DispatchError};
use crate::span::{Span, SpanMap};
use crate::table::ClassTable;

/// Finite map from variable name to class name (the typing context).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeEnv {
    bindings: Vec<(String, ClassName)>,
}

impl TypeEnv {
    pub fn empty() -> TypeEnv {
        TypeEnv::default()
    }

    /// Builds an environment from parameter declarations; duplicate names
    /// are reported by value.
    pub fn from_params(params: &[(ClassName, String)]) -> Result<TypeEnv, String> {
        let mut env = TypeEnv::empty();
        for (ty, name) in params {
            if env.lookup(name).is_some() {
                return Err(name.clone());
            }
            env.bindings.push((name.clone(), ty.clone()));
        }
        Ok(env)
    }

    pub fn lookup(&self, name: &str) -> Option<&ClassName> {
        self.bindings
            .iter()
            .find(|(x, _)| x == name)
            .map(|(_, ty)| ty)
    }
}

/// A program that passed every check: the table, the main expression and
/// its static type, plus any stupid-cast warnings collected along the way.
#[derive(Debug, Clone)]
pub struct TypedProgram {
    pub table: ClassTable,
    pub main: Expr,
    pub main_type: ClassName,
    pub warnings: Vec<Diagnostic>,
}

/// All branches of one overloaded method: the set related to a seed branch
/// by the reflexive-transitive closure of "shares a generalizing branch".
#[derive(Debug, Clone)]
pub struct OverloadedSet<'a> {
    pub branches: Vec<&'a MethodBranch>,
    /// True when the set is closed under the shares-a-generalization
    /// relation (always the case for sets produced here).
    pub closed: bool,
}

// ---------------------------------------------------------------------------
// Expression typing
// ---------------------------------------------------------------------------

/// Pre-order span supply for diagnostic positions; empty when the
/// expression did not come from source.
struct SpanCursor<'a> {
    spans: &'a [Span],
    next: usize,
}

impl<'a> SpanCursor<'a> {
    fn none() -> SpanCursor<'static> {
        SpanCursor {
            spans: &[],
            next: 0,
        }
    }

    fn advance(&mut self) -> Span {
        let span = self.spans.get(self.next).copied().unwrap_or_default();
        self.next += 1;
        span
    }
}

struct ExprChecker<'a, 'w> {
    ct: &'a ClassTable,
    warnings: &'w mut Vec<Diagnostic>,
}

impl<'a, 'w> ExprChecker<'a, 'w> {
    fn check(
        &mut self,
        env: &TypeEnv,
        e: &Expr,
        cursor: &mut SpanCursor<'_>,
    ) -> Result<ClassName, Diagnostic> {
        let span = cursor.advance();
        match e {
            Expr::Var(x) => env.lookup(x).cloned().ok_or_else(|| {
                Diagnostic::error(
                    "T-Var",
                    DiagCode::UnboundVariable,
                    format!("variable `{x}` is not in scope"),
                    span,
                )
            }),
            Expr::FieldAccess(target, field) => {
                let target_ty = self.check(env, target, cursor)?;
                let fields = self.ct.fields(&target_ty).map_err(|_| {
                    Diagnostic::error(
                        "T-Field",
                        DiagCode::UnknownClass,
                        format!("unknown class `{target_ty}`"),
                        span,
                    )
                })?;
                fields
                    .into_iter()
                    .find(|(_, f)| f == field)
                    .map(|(ty, _)| ty)
                    .ok_or_else(|| {
                        Diagnostic::error(
                            "T-Field",
                            DiagCode::UnknownField,
                            format!("class `{target_ty}` has no field `{field}`"),
                            span,
                        )
                    })
            }
            Expr::Invoke(method, args) => {
                let mut arg_types = Vec::with_capacity(args.len());
                for arg in args {
                    arg_types.push(self.check(env, arg, cursor)?);
                }
                let types: Vec<&str> = arg_types.iter().map(ClassName::as_str).collect();
                let branches = lookup(self.ct, method, &arg_types);
                if branches.is_empty() {
                    return Err(Diagnostic::error(
                        "T-Invk",
                        DiagCode::NoApplicableMethod,
                        format!(
                            "no applicable branch for `{}({})`",
                            method,
                            types.join(", ")
                        ),
                        span,
                    ));
                }
                match select(self.ct, &branches) {
                    Ok(branch) => Ok(branch.return_type.clone()),
                    Err(DispatchError::AmbiguousDispatch { candidates, .. }) => {
                        Err(Diagnostic::error(
                            "T-Invk",
                            DiagCode::StaticAmbiguity,
                            format!(
                                "ambiguous invocation `{}({})`: no most specific branch among {}",
                                method,
                                types.join(", "),
                                candidates.join(", ")
                            ),
                            span,
                        ))
                    }
                    Err(DispatchError::EmptyBranchSet) => unreachable!("branch set is nonempty"),
                }
            }
            Expr::New(class, args) => {
                let fields = self.ct.fields(class).map_err(|_| {
                    Diagnostic::error(
                        "T-New",
                        DiagCode::UnknownClass,
                        format!("unknown class `{class}`"),
                        span,
                    )
                })?;
                if fields.len() != args.len() {
                    return Err(Diagnostic::error(
                        "T-New",
                        DiagCode::ArityMismatch,
                        format!(
                            "`new {class}(...)` takes {} argument(s), found {}",
                            fields.len(),
                            args.len()
                        ),
                        span,
                    ));
                }
                for (i, (arg, (field_ty, field))) in args.iter().zip(fields.iter()).enumerate() {
                    let arg_ty = self.check(env, arg, cursor)?;
                    if !self.ct.subtype(&arg_ty, field_ty) {
                        return Err(Diagnostic::error(
                            "T-New",
                            DiagCode::ArgumentNotSubtype,
                            format!(
                                "argument {} of `new {class}(...)`: `{arg_ty}` is not a subtype \
                                 of `{field_ty}` (field `{field}`)",
                                i + 1
                            ),
                            span,
                        ));
                    }
                }
                Ok(class.clone())
            }
            Expr::Cast(class, inner) => {
                if !self.ct.is_defined(class) {
                    return Err(Diagnostic::error(
                        "T-Cast",
                        DiagCode::UnknownClass,
                        format!("unknown class `{class}`"),
                        span,
                    ));
                }
                let inner_ty = self.check(env, inner, cursor)?;
                if self.ct.subtype(&inner_ty, class) {
                    // T-UCast (covers the reflexive cast)
                    Ok(class.clone())
                } else if self.ct.subtype(class, &inner_ty) {
                    // T-DCast: strictly below, may fail at run time
                    Ok(class.clone())
                } else {
                    self.warnings.push(Diagnostic::warning(
                        "T-SCast",
                        DiagCode::StupidCast,
                        format!("stupid cast: `{class}` is unrelated to `{inner_ty}`"),
                        span,
                    ));
                    Ok(class.clone())
                }
            }
        }
    }
}

/// Types an expression under `env`, discarding warnings.
pub fn type_expr(ct: &ClassTable, env: &TypeEnv, e: &Expr) -> Result<ClassName, Diagnostic> {
    let mut warnings = Vec::new();
    type_expr_with_warnings(ct, env, e, &mut warnings)
}

/// Types an expression, appending stupid-cast warnings to `warnings`.
pub fn type_expr_with_warnings(
    ct: &ClassTable,
    env: &TypeEnv,
    e: &Expr,
    warnings: &mut Vec<Diagnostic>,
) -> Result<ClassName, Diagnostic> {
    let mut checker = ExprChecker { ct, warnings };
    checker.check(env, e, &mut SpanCursor::none())
}

// ---------------------------------------------------------------------------
// Method and class typing
// ---------------------------------------------------------------------------

/// Checks one branch against its owning class: the body must type under the
/// parameters alone (there is no implicit `this`), the body type must be a
/// subtype of the declared return type, and the owner must be one of the
/// declared parameter types. Returns errors and any body warnings.
pub fn check_method(ct: &ClassTable, owner: &ClassName, branch: &MethodBranch) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    check_method_at(ct, owner, branch, Span::default(), &[], &mut diags);
    diags
}

fn check_method_at(
    ct: &ClassTable,
    owner: &ClassName,
    branch: &MethodBranch,
    span: Span,
    body_spans: &[Span],
    diags: &mut Vec<Diagnostic>,
) {
    let env = match TypeEnv::from_params(&branch.params) {
        Ok(env) => env,
        Err(dup) => {
            diags.push(Diagnostic::error(
                "T-Meth",
                DiagCode::DuplicateParameter,
                format!("`{}` declares parameter `{dup}` twice", branch.signature()),
                span,
            ));
            return;
        }
    };
    let mut warnings = Vec::new();
    let mut checker = ExprChecker {
        ct,
        warnings: &mut warnings,
    };
    let mut cursor = SpanCursor {
        spans: body_spans,
        next: 0,
    };
    match checker.check(&env, &branch.body, &mut cursor) {
        Ok(body_ty) => {
            if !ct.subtype(&body_ty, &branch.return_type) {
                diags.push(Diagnostic::error(
                    "T-Meth",
                    DiagCode::ReturnTypeNotSubtype,
                    format!(
                        "body of `{}` has type `{body_ty}`, not a subtype of the declared \
                         return type `{}`",
                        branch.signature(),
                        branch.return_type
                    ),
                    span,
                ));
            }
        }
        Err(diag) => diags.push(diag),
    }
    diags.extend(warnings);
    if !branch.params.iter().any(|(ty, _)| ty == owner) {
        diags.push(Diagnostic::error(
            "T-Meth",
            DiagCode::OwnerNotAParameterType,
            format!(
                "`{}` must be declared in the class of one of its parameters, but `{owner}` \
                 is not among them",
                branch.signature()
            ),
            span,
        ));
    }
}

/// Checks a class declaration: the stylized constructor shape plus every
/// method branch.
pub fn check_class(ct: &ClassTable, class: &ClassName) -> Vec<Diagnostic> {
    let Some(decl) = ct.get(class) else {
        return vec![Diagnostic::error(
            "class",
            DiagCode::UnknownClass,
            format!("unknown class `{class}`"),
            Span::default(),
        )];
    };
    let mut diags = Vec::new();
    check_class_at(ct, decl, None, usize::MAX, &mut diags);
    diags
}

fn check_class_at(
    ct: &ClassTable,
    decl: &crate::ast::ClassDecl,
    spans: Option<&SpanMap>,
    class_idx: usize,
    diags: &mut Vec<Diagnostic>,
) {
    let class_span = spans.map(|s| s.class_span(class_idx)).unwrap_or_default();
    if let Err(err) = ct.validate_constructor(decl) {
        diags.push(Diagnostic::error(
            "class",
            DiagCode::MalformedConstructor,
            err.to_string(),
            class_span,
        ));
    }
    for (m_idx, branch) in decl.methods.iter().enumerate() {
        let span = spans
            .map(|s| s.method_span(class_idx, m_idx))
            .unwrap_or_default();
        let body_spans = spans.map(|s| s.body_spans(class_idx, m_idx)).unwrap_or(&[]);
        check_method_at(ct, &decl.name, branch, span, body_spans, diags);
    }
}

// ---------------------------------------------------------------------------
// Overloaded sets and well-formedness
// ---------------------------------------------------------------------------

/// All maximal overloaded sets in the table: same-named, same-arity
/// branches grouped by the reflexive-transitive closure of sharing a
/// generalizing branch.
pub fn overloaded_components(ct: &ClassTable) -> Vec<OverloadedSet<'_>> {
    let mut by_key: BTreeMap<(String, usize), Vec<&MethodBranch>> = BTreeMap::new();
    for branch in ct.all_branches() {
        by_key
            .entry((branch.name.clone(), branch.arity()))
            .or_default()
            .push(branch);
    }
    let mut out = Vec::new();
    for group in by_key.values() {
        let n = group.len();
        let mut component: Vec<usize> = (0..n).collect();
        fn root(component: &mut [usize], mut i: usize) -> usize {
            while component[i] != i {
                component[i] = component[component[i]];
                i = component[i];
            }
            i
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let related = group.iter().any(|d| {
                    let d_params = d.param_types();
                    ct.subtype_seq(&group[i].param_types(), &d_params)
                        && ct.subtype_seq(&group[j].param_types(), &d_params)
                });
                if related {
                    let (ri, rj) = (root(&mut component, i), root(&mut component, j));
                    component[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        let mut sets: BTreeMap<usize, Vec<&MethodBranch>> = BTreeMap::new();
        for (i, branch) in group.iter().enumerate() {
            let r = root(&mut component, i);
            sets.entry(r).or_default().push(branch);
        }
        for (_, branches) in sets {
            out.push(OverloadedSet {
                branches,
                closed: true,
            });
        }
    }
    out
}

/// The overloaded set containing `branch` (a singleton when nothing else
/// specializes a common generalization).
pub fn overloaded_set<'a>(ct: &'a ClassTable, branch: &MethodBranch) -> OverloadedSet<'a> {
    overloaded_components(ct)
        .into_iter()
        .find(|set| {
            set.branches.iter().any(|b| {
                b.owner == branch.owner
                    && b.name == branch.name
                    && b.param_types() == branch.param_types()
            })
        })
        .unwrap_or(OverloadedSet {
            branches: Vec::new(),
            closed: true,
        })
}

/// Checks one overloaded set against the branch constraints:
/// equal arities, no duplicate signatures, every pairwise meet implemented
/// inside the set, and covariant return types along pointwise-smaller
/// parameter sequences.
pub fn check_wellformed(ct: &ClassTable, set: &OverloadedSet<'_>) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    wellformedness_of_group(ct, &set.branches, &|_| Span::default(), &mut diags);
    diags
}

/// Pairwise constraint check over a same-named group of branches. The
/// membership scope for meet witnesses is the whole group: a branch sitting
/// at the meet of two others always shares a generalizer with both, so this
/// coincides with the per-set reading wherever both apply, and additionally
/// catches collisions between branches that share no generalization at all.
fn wellformedness_of_group(
    ct: &ClassTable,
    branches: &[&MethodBranch],
    span_of: &dyn Fn(&MethodBranch) -> Span,
    diags: &mut Vec<Diagnostic>,
) {
    let arities: Vec<usize> = {
        let mut a: Vec<usize> = branches.iter().map(|b| b.arity()).collect();
        a.sort_unstable();
        a.dedup();
        a
    };
    if arities.len() > 1 {
        let names: Vec<String> = branches.iter().map(|b| b.signature()).collect();
        diags.push(Diagnostic::error(
            "wellformed",
            DiagCode::ArityClash,
            format!(
                "branches of one overloaded method must agree on arity: {}",
                names.join(", ")
            ),
            branches.first().map(|b| span_of(b)).unwrap_or_default(),
        ));
    }
    for (i, left) in branches.iter().enumerate() {
        for right in &branches[i + 1..] {
            if left.arity() != right.arity() {
                continue;
            }
            let lp = left.param_types();
            let rp = right.param_types();
            if lp == rp {
                diags.push(Diagnostic::error(
                    "wellformed",
                    DiagCode::DuplicateSignature,
                    format!(
                        "`{}` and `{}` declare identical parameter types",
                        left.signature(),
                        right.signature()
                    ),
                    span_of(right),
                ));
                continue;
            }
            if let Some(meet) = ct.pointwise_meet(&lp, &rp).expect("equal arities") {
                let covered = branches
                    .iter()
                    .any(|b| b.arity() == meet.len() && b.param_types() == meet);
                if !covered {
                    let meet_str: Vec<&str> = meet.iter().map(ClassName::as_str).collect();
                    diags.push(Diagnostic::error(
                        "wellformed",
                        DiagCode::MissingMeetBranch { meet: meet.clone() },
                        format!(
                            "no branch of `{}` covers the meet ({}) of `{}` and `{}`; a call \
                             with those argument classes would be ambiguous",
                            left.name,
                            meet_str.join(", "),
                            left.signature(),
                            right.signature()
                        ),
                        span_of(right),
                    ));
                }
            }
            for (small, large) in [(left, right), (right, left)] {
                if ct.subtype_seq(&small.param_types(), &large.param_types())
                    && !ct.subtype(&small.return_type, &large.return_type)
                {
                    diags.push(Diagnostic::error(
                        "wellformed",
                        DiagCode::CovariantReturnViolation,
                        format!(
                            "`{}` specializes `{}` but returns `{}`, not a subtype of `{}`",
                            small.signature(),
                            large.signature(),
                            small.return_type,
                            large.return_type
                        ),
                        span_of(small),
                    ));
                }
            }
        }
    }
}

/// Runs the branch constraints over the whole table, grouped by method name
/// and arity. This is the well-formedness half of program checking, exposed
/// for callers that only care about the table verdict.
pub fn check_table_wellformed(ct: &ClassTable) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let mut by_key: BTreeMap<(String, usize), Vec<&MethodBranch>> = BTreeMap::new();
    for branch in ct.all_branches() {
        by_key
            .entry((branch.name.clone(), branch.arity()))
            .or_default()
            .push(branch);
    }
    for group in by_key.values() {
        wellformedness_of_group(ct, group, &|_| Span::default(), &mut diags);
    }
    diags
}

// ---------------------------------------------------------------------------
// Program typing
// ---------------------------------------------------------------------------

/// Checks the whole program: every class, the global branch constraints per
/// method name and arity, and the main expression under the empty
/// environment. Any error-severity diagnostic fails the check with the full
/// list (warnings included for context).
pub fn check_program(ct: &ClassTable, main: &Expr) -> Result<TypedProgram, Vec<Diagnostic>> {
    check_program_spanned(ct, main, None)
}

/// [`check_program`] with source spans attached to diagnostics. The span
/// map must come from the parse that produced `ct`'s declarations.
pub fn check_program_spanned(
    ct: &ClassTable,
    main: &Expr,
    spans: Option<&SpanMap>,
) -> Result<TypedProgram, Vec<Diagnostic>> {
    let mut diags = Vec::new();

    for (class_idx, decl) in ct.decls_in_order().enumerate() {
        check_class_at(ct, decl, spans, class_idx, &mut diags);
    }

    let span_of = |branch: &MethodBranch| -> Span {
        let Some(spans) = spans else {
            return Span::default();
        };
        for (class_idx, decl) in ct.decls_in_order().enumerate() {
            if decl.name == branch.owner {
                for (m_idx, m) in decl.methods.iter().enumerate() {
                    if m.name == branch.name && m.param_types() == branch.param_types() {
                        return spans.method_span(class_idx, m_idx);
                    }
                }
            }
        }
        Span::default()
    };
    let mut by_key: BTreeMap<(String, usize), Vec<&MethodBranch>> = BTreeMap::new();
    for branch in ct.all_branches() {
        by_key
            .entry((branch.name.clone(), branch.arity()))
            .or_default()
            .push(branch);
    }
    for group in by_key.values() {
        wellformedness_of_group(ct, group, &span_of, &mut diags);
    }

    let mut warnings: Vec<Diagnostic> = diags.iter().filter(|d| !d.is_error()).cloned().collect();
    let mut main_cursor = SpanCursor {
        spans: spans.map(|s| s.main.as_slice()).unwrap_or(&[]),
        next: 0,
    };
    let mut main_warnings = Vec::new();
    let mut checker = ExprChecker {
        ct,
        warnings: &mut main_warnings,
    };
    let main_type = match checker.check(&TypeEnv::empty(), main, &mut main_cursor) {
        Ok(ty) => Some(ty),
        Err(diag) => {
            diags.push(diag);
            None
        }
    };
    diags.extend(main_warnings.iter().cloned());
    warnings.extend(main_warnings);

    if diags.iter().any(Diagnostic::is_error) {
        return Err(diags);
    }
    Ok(TypedProgram {
        table: ct.clone(),
        main: main.clone(),
        main_type: main_type.expect("no errors implies main typed"),
        warnings,
    })
}

/// Static applicability check for the first-argument dispatch strategy:
/// walks every call site (main expression and all method bodies) and
/// reports the sites the strategy cannot resolve. Run after the program has
/// passed [`check_program`].
pub fn fj_precheck(ct: &ClassTable, main: &Expr) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let empty = TypeEnv::empty();
    fj_walk(ct, &empty, main, &mut diags);
    for decl in ct.decls_in_order() {
        for branch in &decl.methods {
            if let Ok(env) = TypeEnv::from_params(&branch.params) {
                fj_walk(ct, &env, &branch.body, &mut diags);
            }
        }
    }
    diags
}

fn fj_walk(ct: &ClassTable, env: &TypeEnv, e: &Expr, diags: &mut Vec<Diagnostic>) {
    match e {
        Expr::Var(_) => {}
        Expr::FieldAccess(inner, _) | Expr::Cast(_, inner) => fj_walk(ct, env, inner, diags),
        Expr::New(_, args) => args.iter().for_each(|a| fj_walk(ct, env, a, diags)),
        Expr::Invoke(method, args) => {
            args.iter().for_each(|a| fj_walk(ct, env, a, diags));
            let mut arg_types = Vec::with_capacity(args.len());
            for arg in args {
                match type_expr(ct, env, arg) {
                    Ok(ty) => arg_types.push(ty),
                    Err(_) => return, // unreachable on checked programs
                }
            }
            let types: Vec<&str> = arg_types.iter().map(ClassName::as_str).collect();
            let found = fj_lookup(ct, method, &arg_types);
            match found.first() {
                None => diags.push(Diagnostic::error(
                    "fj-lookup",
                    DiagCode::FjUnresolvable,
                    format!(
                        "first-argument dispatch cannot resolve `{}({})`: no branch named \
                         `{}` on the superclass chain of `{}`",
                        method,
                        types.join(", "),
                        method,
                        arg_types[0]
                    ),
                    Span::default(),
                )),
                Some(branch) if !crate::dispatch::applicable(ct, branch, &arg_types) => {
                    diags.push(Diagnostic::error(
                        "fj-lookup",
                        DiagCode::FjUnresolvable,
                        format!(
                            "first-argument dispatch resolves `{}({})` to `{}`, which is not \
                             applicable to those arguments",
                            method,
                            types.join(", "),
                            branch.signature()
                        ),
                        Span::default(),
                    ));
                }
                Some(_) => {}
            }
        }
    }
}

/// Convenience used by strict mode: promotes warnings to errors.
pub fn promote_warnings(diags: &mut [Diagnostic]) {
    for d in diags {
        d.severity = Severity::Error;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_expr;
    use crate::testutil::{cn, ct1, ct1_with_meet, ct2, program, shop_in_item, table};

    fn codes(diags: &[Diagnostic]) -> Vec<&'static str> {
        diags.iter().map(|d| d.code.name()).collect()
    }

    #[test]
    fn types_the_oblivious_transaction_call() {
        let ct = shop_in_item();
        let main = parse_expr("transaction(new Shop(), new Item(), new Customer())").unwrap();
        let ty = type_expr(&ct, &TypeEnv::empty(), &main).unwrap();
        assert_eq!(ty, cn("Item"));
    }

    #[test]
    fn reflexive_upcast_types_at_the_target() {
        let ct = ClassTable::default();
        let e = parse_expr("(Object) new Object()").unwrap();
        assert_eq!(type_expr(&ct, &TypeEnv::empty(), &e).unwrap(), cn("Object"));
    }

    #[test]
    fn unrelated_cast_warns_and_types_at_the_target() {
        let ct = ct1();
        let e = parse_expr("(B) (new A())").unwrap();
        let mut warnings = Vec::new();
        let ty = type_expr_with_warnings(&ct, &TypeEnv::empty(), &e, &mut warnings).unwrap();
        assert_eq!(ty, cn("B"));
        assert_eq!(codes(&warnings), vec!["StupidCast"]);
        assert_eq!(warnings[0].rule, "T-SCast");
    }

    #[test]
    fn downcast_types_without_warning() {
        let ct = ct1();
        let e = parse_expr("(A1) new A()").unwrap();
        let mut warnings = Vec::new();
        let ty = type_expr_with_warnings(&ct, &TypeEnv::empty(), &e, &mut warnings).unwrap();
        assert_eq!(ty, cn("A1"));
        assert!(warnings.is_empty());
    }

    #[test]
    fn unbound_variable_is_reported() {
        let ct = ct1();
        let err = type_expr(&ct, &TypeEnv::empty(), &Expr::var("ghost")).unwrap_err();
        assert_eq!(err.code.name(), "UnboundVariable");
    }

    #[test]
    fn unknown_field_is_reported() {
        let ct = ct1();
        let e = parse_expr("new A().missing").unwrap();
        let err = type_expr(&ct, &TypeEnv::empty(), &e).unwrap_err();
        assert_eq!(err.code.name(), "UnknownField");
    }

    #[test]
    fn new_with_wrong_arity_is_reported() {
        let ct = ct1();
        let e = parse_expr("new A(new B())").unwrap();
        let err = type_expr(&ct, &TypeEnv::empty(), &e).unwrap_err();
        assert_eq!(err.code.name(), "ArityMismatch");
    }

    #[test]
    fn invocation_without_applicable_branch_is_reported() {
        let ct = ct1();
        let e = parse_expr("m(new B(), new B())").unwrap();
        let err = type_expr(&ct, &TypeEnv::empty(), &e).unwrap_err();
        assert_eq!(err.code.name(), "NoApplicableMethod");
    }

    #[test]
    fn ambiguous_invocation_is_reported_on_the_unchecked_table() {
        let ct = ct1();
        let e = parse_expr("m(new A1(), new B1())").unwrap();
        let err = type_expr(&ct, &TypeEnv::empty(), &e).unwrap_err();
        assert_eq!(err.code.name(), "StaticAmbiguity");
    }

    #[test]
    fn check_method_accepts_the_transaction_branch() {
        let ct = shop_in_item();
        let branch = ct
            .get(&cn("Item"))
            .unwrap()
            .methods
            .first()
            .unwrap()
            .clone();
        assert!(check_method(&ct, &cn("Item"), &branch).is_empty());
    }

    #[test]
    fn check_method_rejects_foreign_owners() {
        let ct = ct1();
        let branch = MethodBranch {
            owner: cn("B"),
            name: "m".into(),
            params: vec![(cn("A"), "a".into()), (cn("A"), "b".into())],
            return_type: cn("A"),
            body: Expr::var("a"),
        };
        let diags = check_method(&ct, &cn("B"), &branch);
        assert_eq!(codes(&diags), vec!["OwnerNotAParameterType"]);
    }

    #[test]
    fn check_method_rejects_body_not_below_return_type() {
        let ct = table(
            "class A extends Object { A() { super(); } }
             class A1 extends A { A1() { super(); } }
             new Object()",
        );
        let branch = MethodBranch {
            owner: cn("A"),
            name: "m".into(),
            params: vec![(cn("A"), "x".into())],
            return_type: cn("A1"),
            body: Expr::var("x"),
        };
        let diags = check_method(&ct, &cn("A"), &branch);
        assert_eq!(codes(&diags), vec!["ReturnTypeNotSubtype"]);
    }

    #[test]
    fn check_class_accepts_fieldless_shop() {
        let ct = ct2();
        assert!(check_class(&ct, &cn("Shop")).is_empty());
    }

    #[test]
    fn check_class_propagates_method_diagnostics() {
        // Placement is a typing rule, not a binding rule, so the table
        // binds and the class check reports it.
        let ct = table(
            "class A extends Object { A() { super(); } }
             class B extends Object {
               B() { super(); }
               Object m(A a, A b) { return a; }
             }
             new Object()",
        );
        let diags = check_class(&ct, &cn("B"));
        assert_eq!(codes(&diags), vec!["OwnerNotAParameterType"]);
    }

    #[test]
    fn overloaded_set_collects_the_crossing_branches() {
        let ct = ct1();
        let seed = ct.get(&cn("A1")).unwrap().methods.first().unwrap();
        let set = overloaded_set(&ct, seed);
        let mut got: Vec<String> = set.branches.iter().map(|b| b.signature()).collect();
        got.sort();
        assert_eq!(got, vec!["A.m(A, B)", "A1.m(A1, B)", "B1.m(A, B1)"]);
        assert!(set.closed);
    }

    #[test]
    fn overloaded_set_of_a_lone_branch_is_a_singleton() {
        let ct = shop_in_item();
        let seed = ct.get(&cn("Item")).unwrap().methods.first().unwrap();
        let set = overloaded_set(&ct, seed);
        assert_eq!(set.branches.len(), 1);
    }

    #[test]
    fn unrelated_same_name_branches_form_disjoint_singletons() {
        let ct = table(
            "class X extends Object {
               X() { super(); }
               Object m(X x) { return new Object(); }
             }
             class Y extends Object {
               Y() { super(); }
               Object m(Y y) { return new Object(); }
             }
             new Object()",
        );
        let sets = overloaded_components(&ct);
        assert_eq!(sets.len(), 2);
        assert!(sets.iter().all(|s| s.branches.len() == 1));
    }

    #[test]
    fn ct1_is_missing_the_crossing_meet() {
        let ct = ct1();
        let seed = ct.get(&cn("A1")).unwrap().methods.first().unwrap();
        let set = overloaded_set(&ct, seed);
        let diags = check_wellformed(&ct, &set);
        assert_eq!(codes(&diags), vec!["MissingMeetBranch"]);
        match &diags[0].code {
            DiagCode::MissingMeetBranch { meet } => {
                assert_eq!(meet, &vec![cn("A1"), cn("B1")]);
            }
            other => panic!("unexpected code {other:?}"),
        }
    }

    #[test]
    fn adding_the_meet_branch_makes_ct1_wellformed() {
        let ct = ct1_with_meet();
        let seed = ct.get(&cn("A1")).unwrap().methods.first().unwrap();
        let set = overloaded_set(&ct, seed);
        assert!(check_wellformed(&ct, &set).is_empty());
        // Cross-check against the independent enumeration oracle.
        assert!(crate::gen::oracle_ambiguity(&ct).is_empty());
    }

    #[test]
    fn covariant_return_violation_is_reported() {
        let ct = table(
            "class B extends Object { B() { super(); } }
             class A extends Object {
               A() { super(); }
               A m(A a, B b) { return a; }
             }
             class A1 extends A {
               A1() { super(); }
               Object m(A1 a, B b) { return new Object(); }
             }
             new Object()",
        );
        let seed = ct.get(&cn("A")).unwrap().methods.first().unwrap();
        let set = overloaded_set(&ct, seed);
        let diags = check_wellformed(&ct, &set);
        assert_eq!(codes(&diags), vec!["CovariantReturnViolation"]);
    }

    #[test]
    fn arity_clash_is_reported_on_hand_built_sets() {
        let ct = ct1();
        let a = ct.get(&cn("A")).unwrap().methods.first().unwrap();
        let extra = MethodBranch {
            owner: cn("A"),
            name: "m".into(),
            params: vec![(cn("A"), "a".into())],
            return_type: cn("Object"),
            body: Expr::new_object("Object", vec![]),
        };
        let set = OverloadedSet {
            branches: vec![a, &extra],
            closed: false,
        };
        let diags = check_wellformed(&ct, &set);
        assert!(codes(&diags).contains(&"ArityClash"));
    }

    #[test]
    fn check_program_accepts_the_charity_program() {
        let (ct, main, _) = program(
            "class Shop extends Object { Shop() { super(); } }
             class CharityShop extends Shop {
               CharityShop() { super(); }
               Object transaction(CharityShop cs, Item i, Customer c) { return new Object(); }
             }
             class Item extends Object {
               Item() { super(); }
               Object transaction(Shop s, Item i, Customer c) { return new Object(); }
             }
             class Customer extends Object { Customer() { super(); } }
             transaction(new CharityShop(), new Item(), new Customer())",
        );
        let typed = check_program(&ct, &main).unwrap();
        assert_eq!(typed.main_type, cn("Object"));
        assert!(typed.warnings.is_empty());
    }

    #[test]
    fn check_program_accepts_the_empty_table() {
        let ct = ClassTable::default();
        let typed = check_program(&ct, &parse_expr("new Object()").unwrap()).unwrap();
        assert_eq!(typed.main_type, cn("Object"));
    }

    #[test]
    fn check_program_rejects_ct1_with_the_meet_witness() {
        let ct = ct1();
        let main = parse_expr("m(new A1(), new B1())").unwrap();
        let diags = check_program(&ct, &main).unwrap_err();
        assert!(diags.iter().any(|d| matches!(
            &d.code,
            DiagCode::MissingMeetBranch { meet } if meet == &vec![cn("A1"), cn("B1")]
        )));
    }

    #[test]
    fn check_program_is_idempotent() {
        let ct = ct1_with_meet();
        let main = parse_expr("m(new A1(), new B1())").unwrap();
        let first = check_program(&ct, &main).unwrap();
        let second = check_program(&ct, &main).unwrap();
        assert_eq!(first.main_type, second.main_type);
        assert_eq!(first.warnings, second.warnings);
    }

    #[test]
    fn removing_the_unrelated_class_flips_the_verdict() {
        // The non-modularity witness: the four-class table is rejected, the
        // same table without B1 is accepted, yet no other declaration
        // mentions B1.
        let with_b1 = ct1();
        let without_b1 = table(
            "class A extends Object {
               A() { super(); }
               Object m(A a, B b) { return new Object(); }
             }
             class B extends Object { B() { super(); } }
             class A1 extends A {
               A1() { super(); }
               A m(A1 a, B b) { return a; }
             }
             new Object()",
        );
        let main = parse_expr("m(new A1(), new B())").unwrap();
        assert!(check_program(&with_b1, &main).is_err());
        assert!(check_program(&without_b1, &main).is_ok());
    }

    #[test]
    fn fj_precheck_reports_the_breakage_site() {
        let ct = shop_in_item();
        let main = parse_expr("transaction(new Shop(), new Item(), new Customer())").unwrap();
        assert!(check_program(&ct, &main).is_ok());
        let diags = fj_precheck(&ct, &main);
        assert_eq!(codes(&diags), vec!["FjUnresolvable"]);
    }

    #[test]
    fn fj_precheck_accepts_first_owner_programs() {
        let ct = ct2();
        let main =
            parse_expr("transaction(new CharityShop(), new Item(), new Customer())").unwrap();
        assert!(check_program(&ct, &main).is_ok());
        assert!(fj_precheck(&ct, &main).is_empty());
    }

    #[test]
    fn crossing_branches_without_a_common_generalizer_are_still_rejected() {
        // No branch generalizes both, so they sit in different overloaded
        // sets, yet a call at the meet would be ambiguous. The program-level
        // check closes this hole; the enumeration oracle agrees.
        let ct = table(
            "class X extends Object {
               X() { super(); }
               Object m(X a, Y1 b) { return new Object(); }
             }
             class X1 extends X {
               X1() { super(); }
               Object m(X1 a, Y b) { return new Object(); }
             }
             class Y extends Object { Y() { super(); } }
             class Y1 extends Y { Y1() { super(); } }
             new Object()",
        );
        let main = parse_expr("new Object()").unwrap();
        let diags = check_program(&ct, &main).unwrap_err();
        assert!(diags.iter().any(|d| matches!(
            &d.code,
            DiagCode::MissingMeetBranch { meet } if meet == &vec![cn("X1"), cn("Y1")]
        )));
        assert_eq!(crate::gen::oracle_ambiguity(&ct).len(), 1);
    }
}
