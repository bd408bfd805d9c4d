//! Method lookup and selection.
//!
//! The symmetric strategy walks the superclass chain of *every* argument
//! class, collects all applicable branches (a branch is applicable when the
//! argument classes are pointwise subtypes of its parameter types), and
//! selects the unique pointwise-minimal one. The compatibility strategy
//! walks only the first argument's chain and stops at the first class that
//! declares the method name at all; it exists for differential testing.

use thiserror::Error;

use crate::ast::{ClassName, MethodBranch};
use crate::table::ClassTable;

/// Which lookup discipline drives `R-Invk`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DispatchStrategy {
    /// Symmetric multiple dispatch over all argument positions.
    #[default]
    Sfmj,
    /// First-argument, first-hit lookup (single dispatch).
    Fj,
}

impl DispatchStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            DispatchStrategy::Sfmj => "sfmj",
            DispatchStrategy::Fj => "fj",
        }
    }
}

impl std::str::FromStr for DispatchStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sfmj" => Ok(DispatchStrategy::Sfmj),
            "fj" => Ok(DispatchStrategy::Fj),
            other => Err(format!(
                "unknown dispatch mode `{other}` (expected sfmj or fj)"
            )),
        }
    }
}

/// Applicable branches for one call, most-derived first within each
/// argument's chain, duplicates collapsed.
pub type BranchSet<'a> = Vec<&'a MethodBranch>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DispatchError {
    #[error("no branch to select from")]
    EmptyBranchSet,
    #[error(
        "ambiguous dispatch of `{method}`: no unique most specific branch among {candidates:?}"
    )]
    AmbiguousDispatch {
        method: String,
        candidates: Vec<String>,
    },
}

/// Applicability: the argument classes are pointwise subtypes of the
/// branch's parameter types.
pub fn applicable(ct: &ClassTable, branch: &MethodBranch, args: &[ClassName]) -> bool {
    branch.arity() == args.len()
        && args
            .iter()
            .zip(branch.params.iter())
            .all(|(arg, (param, _))| ct.subtype(arg, param))
}

/// Pointwise comparison of two branches' parameter sequences.
fn params_below(ct: &ClassTable, small: &MethodBranch, large: &MethodBranch) -> bool {
    small.arity() == large.arity()
        && small
            .params
            .iter()
            .zip(large.params.iter())
            .all(|((s, _), (l, _))| ct.subtype(s, l))
}

/// All branches of `method` applicable to argument classes `args`:
/// the concatenation of [`lookup1`] over each argument's class, with
/// branches reachable through several argument positions listed once.
///
/// Argument names are expected to be bound; unbound names simply contribute
/// no branches. An empty result is legal (callers report it as their own
/// no-applicable-method condition).
pub fn lookup<'a>(ct: &'a ClassTable, method: &str, args: &[ClassName]) -> BranchSet<'a> {
    let mut out: BranchSet<'a> = Vec::new();
    for arg in args {
        for branch in lookup1(ct, method, args, arg) {
            if !out.iter().any(|b| std::ptr::eq(*b, branch)) {
                out.push(branch);
            }
        }
    }
    out
}

/// Walks `class` and its superclasses, collecting every branch named
/// `method` whose parameter types the argument classes satisfy pointwise.
/// Recursion continues past declaring classes and stops at `Object`.
pub fn lookup1<'a>(
    ct: &'a ClassTable,
    method: &str,
    args: &[ClassName],
    class: &ClassName,
) -> BranchSet<'a> {
    let mut out = Vec::new();
    for cls in ct.chain(class) {
        let decl = ct.get(cls).expect("chain yields declared classes");
        for branch in &decl.methods {
            if branch.name == method && applicable(ct, branch, args) {
                out.push(branch);
            }
        }
    }
    out
}

/// Picks the branch whose parameter types are pointwise subtypes of every
/// other branch's. Unique whenever the table passed the well-formedness
/// check; failure on other tables doubles as an internal-consistency alarm.
pub fn select<'a>(
    ct: &ClassTable,
    branches: &BranchSet<'a>,
) -> Result<&'a MethodBranch, DispatchError> {
    if branches.is_empty() {
        return Err(DispatchError::EmptyBranchSet);
    }
    let minimal: Vec<&MethodBranch> = branches
        .iter()
        .filter(|b| branches.iter().all(|other| params_below(ct, b, other)))
        .copied()
        .collect();
    match minimal.as_slice() {
        [unique] => Ok(unique),
        // Two minimal branches can only have identical parameter types
        // (pointwise antisymmetry); zero means no branch is below all others.
        _ => Err(DispatchError::AmbiguousDispatch {
            method: branches[0].name.clone(),
            candidates: branches.iter().map(|b| b.signature()).collect(),
        }),
    }
}

/// One-step resolution: `select(lookup(method, args))`.
pub fn resolve<'a>(
    ct: &'a ClassTable,
    method: &str,
    args: &[ClassName],
) -> Result<&'a MethodBranch, DispatchError> {
    select(ct, &lookup(ct, method, args))
}

/// First-argument lookup: walks only `args[0]`'s superclass chain and
/// returns the first declaration of `method` found, stopping at the first
/// class that declares the name at all. Applicability is not consulted, so
/// the result has at most one element and selection takes the head.
pub fn fj_lookup<'a>(ct: &'a ClassTable, method: &str, args: &[ClassName]) -> BranchSet<'a> {
    let Some(first) = args.first() else {
        return Vec::new();
    };
    for cls in ct.chain(first) {
        let decl = ct.get(cls).expect("chain yields declared classes");
        if let Some(branch) = decl.methods.iter().find(|m| m.name == method) {
            return vec![branch];
        }
    }
    Vec::new()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{cn, ct1, ct1_with_meet, ct2, shop_in_item};

    fn sigs(bs: &BranchSet<'_>) -> Vec<String> {
        bs.iter().map(|b| b.signature()).collect()
    }

    #[test]
    fn lookup_collects_all_applicable_branches_across_hierarchies() {
        let ct = ct1();
        let bs = lookup(&ct, "m", &[cn("A1"), cn("B1")]);
        let mut got = sigs(&bs);
        got.sort();
        assert_eq!(got, vec!["A.m(A, B)", "A1.m(A1, B)", "B1.m(A, B1)"]);
    }

    #[test]
    fn lookup_respects_applicability() {
        let ct = ct1();
        let bs = lookup(&ct, "m", &[cn("A"), cn("B")]);
        assert_eq!(sigs(&bs), vec!["A.m(A, B)"]);
    }

    #[test]
    fn lookup_on_object_arguments_is_empty() {
        let ct = ct1();
        assert!(lookup(&ct, "m", &[cn("Object")]).is_empty());
        assert!(lookup(&ct, "m", &[cn("Object"), cn("Object")]).is_empty());
    }

    #[test]
    fn lookup1_walks_the_chain_most_derived_first() {
        let ct = ct1();
        let bs = lookup1(&ct, "m", &[cn("A1"), cn("B1")], &cn("A1"));
        assert_eq!(sigs(&bs), vec!["A1.m(A1, B)", "A.m(A, B)"]);
    }

    #[test]
    fn lookup1_filters_inapplicable_branches() {
        let ct = ct1();
        // A1's own branch needs an A1 first argument.
        let bs = lookup1(&ct, "m", &[cn("A"), cn("B")], &cn("A1"));
        assert_eq!(sigs(&bs), vec!["A.m(A, B)"]);
    }

    #[test]
    fn lookup1_base_case_is_object() {
        let ct = ct1();
        assert!(lookup1(&ct, "m", &[cn("A1"), cn("B1")], &cn("Object")).is_empty());
    }

    #[test]
    fn duplicate_branches_from_shared_chains_collapse() {
        let ct = crate::testutil::table(
            "class A extends Object {
               A() { super(); }
               Object both(A x, A y) { return new Object(); }
             }
             new Object()",
        );
        let bs = lookup(&ct, "both", &[cn("A"), cn("A")]);
        assert_eq!(sigs(&bs), vec!["A.both(A, A)"]);
    }

    #[test]
    fn select_singleton() {
        let ct = ct1();
        let bs = lookup(&ct, "m", &[cn("A"), cn("B")]);
        assert_eq!(select(&ct, &bs).unwrap().signature(), "A.m(A, B)");
    }

    #[test]
    fn select_prefers_the_pointwise_smaller_signature() {
        let ct = ct1();
        let bs = lookup(&ct, "m", &[cn("A1"), cn("B")]);
        let mut got = sigs(&bs);
        got.sort();
        assert_eq!(got, vec!["A.m(A, B)", "A1.m(A1, B)"]);
        assert_eq!(select(&ct, &bs).unwrap().signature(), "A1.m(A1, B)");
    }

    #[test]
    fn select_reports_the_crossing_ambiguity() {
        let ct = ct1();
        let bs = lookup(&ct, "m", &[cn("A1"), cn("B1")]);
        let err = select(&ct, &bs).unwrap_err();
        assert!(matches!(err, DispatchError::AmbiguousDispatch { .. }));
    }

    #[test]
    fn select_of_empty_set_fails() {
        let ct = ct1();
        assert_eq!(
            select(&ct, &Vec::new()).unwrap_err(),
            DispatchError::EmptyBranchSet
        );
    }

    #[test]
    fn adding_the_meet_branch_resolves_the_ambiguity() {
        let ct = ct1_with_meet();
        let picked = resolve(&ct, "m", &[cn("A1"), cn("B1")]).unwrap();
        assert_eq!(picked.signature(), "A1.m(A1, B1)");
    }

    #[test]
    fn fj_lookup_finds_the_override_through_the_first_argument() {
        let ct = ct2();
        let bs = fj_lookup(
            &ct,
            "transaction",
            &[cn("CharityShop"), cn("Item"), cn("Customer")],
        );
        assert_eq!(
            sigs(&bs),
            vec!["CharityShop.transaction(CharityShop, Item, Customer)"]
        );
    }

    #[test]
    fn fj_lookup_misses_branches_owned_by_other_parameters() {
        // The breakage scenario: `transaction` lives in Item, invisible from
        // the Shop chain.
        let ct = shop_in_item();
        let bs = fj_lookup(
            &ct,
            "transaction",
            &[cn("Shop"), cn("Item"), cn("Customer")],
        );
        assert!(bs.is_empty());
    }

    #[test]
    fn fj_lookup_base_case_is_object() {
        let ct = ct1();
        assert!(fj_lookup(&ct, "m", &[cn("Object"), cn("Object")]).is_empty());
    }

    #[test]
    fn lookup_is_monotone_under_argument_specialization() {
        // More specific argument tuples see a superset of branches.
        for seed in 0..60u64 {
            let cfg = crate::gen::GenConfig {
                seed,
                max_classes: 8,
                ..Default::default()
            };
            let ct = crate::gen::gen_table(&cfg);
            let mut universe: Vec<ClassName> = ct.names_in_order().to_vec();
            universe.push(ClassName::object());
            let methods: Vec<(String, usize)> = {
                let mut out: Vec<(String, usize)> = ct
                    .all_branches()
                    .map(|b| (b.name.clone(), b.arity()))
                    .collect();
                out.sort();
                out.dedup();
                out
            };
            for (name, arity) in methods.iter().filter(|(_, a)| *a <= 2) {
                for args in tuples(&universe, *arity) {
                    let base = lookup(&ct, name, &args);
                    for refined in refinements(&ct, &universe, &args) {
                        let more = lookup(&ct, name, &refined);
                        for b in &base {
                            assert!(
                                more.iter().any(|x| std::ptr::eq(*x, *b)),
                                "lookup({name}, {refined:?}) lost a branch visible at {args:?}"
                            );
                        }
                    }
                }
            }
        }
    }

    fn tuples(universe: &[ClassName], arity: usize) -> Vec<Vec<ClassName>> {
        let mut out = vec![Vec::new()];
        for _ in 0..arity {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    universe.iter().map(move |c| {
                        let mut next = prefix.clone();
                        next.push(c.clone());
                        next
                    })
                })
                .collect();
        }
        out
    }

    fn refinements(
        ct: &ClassTable,
        universe: &[ClassName],
        args: &[ClassName],
    ) -> Vec<Vec<ClassName>> {
        // One-position refinements are enough for the monotonicity check:
        // deeper refinements compose.
        let mut out = Vec::new();
        for (i, arg) in args.iter().enumerate() {
            for sub in universe.iter().filter(|s| ct.subtype(s, arg) && *s != arg) {
                let mut next = args.to_vec();
                next[i] = sub.clone();
                out.push(next);
            }
        }
        out
    }

    #[test]
    fn select_is_total_and_unique_on_wellformed_tables() {
        // On tables passing the well-formedness check, no argument tuple
        // can make selection ambiguous, and every branch lookup returns is
        // applicable.
        for seed in 0..60u64 {
            let cfg = crate::gen::GenConfig {
                seed,
                max_classes: 6,
                ..Default::default()
            };
            let ct = crate::gen::gen_wellformed_table(&cfg);
            let mut universe: Vec<ClassName> = ct.names_in_order().to_vec();
            universe.push(ClassName::object());
            let mut keys: Vec<(String, usize)> = ct
                .all_branches()
                .map(|b| (b.name.clone(), b.arity()))
                .collect();
            keys.sort();
            keys.dedup();
            for (name, arity) in &keys {
                for args in tuples(&universe, *arity) {
                    let bs = lookup(&ct, name, &args);
                    for b in &bs {
                        assert!(applicable(&ct, b, &args), "inapplicable branch in lookup");
                    }
                    if !bs.is_empty() {
                        assert!(
                            select(&ct, &bs).is_ok(),
                            "seed {seed}: ambiguous dispatch of {name}({args:?}) on a \
                             well-formed table"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn tables_are_safely_shared_across_threads() {
        let ct = ct1_with_meet();
        std::thread::scope(|scope| {
            for _ in 0..4 {
                scope.spawn(|| {
                    let picked = resolve(&ct, "m", &[cn("A1"), cn("B1")]).unwrap();
                    assert_eq!(picked.signature(), "A1.m(A1, B1)");
                });
            }
        });
    }
}
