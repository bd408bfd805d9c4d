//! Small-step, call-by-value evaluation.
//!
//! `step` applies the unique applicable rule under deterministic
//! leftmost-innermost order: congruence rules reduce the leftmost non-value
//! subterm, computation rules fire only on fully evaluated redexes. A trace
//! records, for every step, the successor expression and the rule applied
//! at the root of the derivation (so argument evaluation inside a call shows
//! up as `RC-Invk`, and the final dispatch as `R-Invk` with the selected
//! branch).

use thiserror::Error;

use crate::ast::{ClassName, Expr};
use crate::dispatch::{fj_lookup, lookup, select, DispatchError, DispatchStrategy};
use crate::table::ClassTable;

/// The rule applied at the root of one reduction step. `R-Invk` carries the
/// selected branch so traces show which body fired.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    RField,
    RInvk { owner: ClassName, method: String },
    RCast,
    RcField,
    RcInvk,
    RcNewArg,
    RcCast,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::RField => "R-Field",
            Rule::RInvk { .. } => "R-Invk",
            Rule::RCast => "R-Cast",
            Rule::RcField => "RC-Field",
            Rule::RcInvk => "RC-Invk",
            Rule::RcNewArg => "RC-New-Arg",
            Rule::RcCast => "RC-Cast",
        }
    }

    /// `Owner.method` for `R-Invk`, `None` otherwise.
    pub fn branch_label(&self) -> Option<String> {
        match self {
            Rule::RInvk { owner, method } => Some(format!("{owner}.{method}")),
            _ => None,
        }
    }
}

impl std::fmt::Display for Rule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.branch_label() {
            Some(label) => write!(f, "{}[{label}]", self.name()),
            None => f.write_str(self.name()),
        }
    }
}

/// Result of attempting one step.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    Stepped(Expr, Rule),
    Normal(NormalForm),
}

/// The two normal forms: a value, or an expression blocked on a failed
/// downcast. `StuckCast` carries the innermost offending cast in evaluation
/// order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalForm {
    Value(Expr),
    StuckCast(Expr),
}

/// Where a bounded evaluation ended.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Value(Expr),
    StuckCast(Expr),
    FuelExhausted,
}

impl From<NormalForm> for Outcome {
    fn from(nf: NormalForm) -> Outcome {
        match nf {
            NormalForm::Value(v) => Outcome::Value(v),
            NormalForm::StuckCast(e) => Outcome::StuckCast(e),
        }
    }
}

/// A bounded reduction sequence: each entry pairs the expression after the
/// step with the rule that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub steps: Vec<(Expr, Rule)>,
    pub fuel: u64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    #[error("substitution arity mismatch: {params} parameter(s), {args} argument(s)")]
    LengthMismatch { params: usize, args: usize },
    #[error("free variable `{0}` escapes its binding parameters")]
    FreeVariableEscape(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    /// Dispatch failed on a program that was supposed to be checked. Never
    /// expected; its presence falsifies the soundness properties.
    #[error("internal dispatch failure for `{method}({})`: {reason}", classes.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", "))]
    InternalDispatchFailure {
        method: String,
        classes: Vec<ClassName>,
        reason: String,
    },
    #[error("class `{class}` has no field `{field}` to project")]
    FieldIndexFailure { class: ClassName, field: String },
    #[error("cannot step the free variable `{0}`")]
    FreeVariable(String),
    #[error("unknown class `{0}` at run time")]
    UnknownClass(ClassName),
    /// First-argument dispatch could not resolve a call. Expected in FJ
    /// mode on programs that rely on symmetric lookup.
    #[error("first-argument dispatch failed for `{method}({})`: {reason}", classes.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", "))]
    FjDispatchFailure {
        method: String,
        classes: Vec<ClassName>,
        reason: String,
    },
    #[error(transparent)]
    Substitution(#[from] SubstError),
}

/// Capture-free simultaneous substitution of `args` for `params` in `body`.
/// The expression language has no binders, so capture cannot occur.
pub fn substitute(body: &Expr, params: &[String], args: &[Expr]) -> Result<Expr, SubstError> {
    if params.len() != args.len() {
        return Err(SubstError::LengthMismatch {
            params: params.len(),
            args: args.len(),
        });
    }
    fn go(e: &Expr, params: &[String], args: &[Expr]) -> Result<Expr, SubstError> {
        match e {
            Expr::Var(x) => params
                .iter()
                .position(|p| p == x)
                .map(|i| args[i].clone())
                .ok_or_else(|| SubstError::FreeVariableEscape(x.clone())),
            Expr::FieldAccess(inner, f) => Ok(Expr::FieldAccess(
                Box::new(go(inner, params, args)?),
                f.clone(),
            )),
            Expr::Invoke(m, inner) => Ok(Expr::Invoke(
                m.clone(),
                inner
                    .iter()
                    .map(|a| go(a, params, args))
                    .collect::<Result<_, _>>()?,
            )),
            Expr::New(c, inner) => Ok(Expr::New(
                c.clone(),
                inner
                    .iter()
                    .map(|a| go(a, params, args))
                    .collect::<Result<_, _>>()?,
            )),
            Expr::Cast(c, inner) => Ok(Expr::Cast(c.clone(), Box::new(go(inner, params, args)?))),
        }
    }
    go(body, params, args)
}

/// One step under the symmetric dispatch strategy.
pub fn step(ct: &ClassTable, e: &Expr) -> Result<StepResult, EvalError> {
    step_with(ct, DispatchStrategy::Sfmj, e)
}

/// One step under an explicit dispatch strategy.
pub fn step_with(
    ct: &ClassTable,
    strategy: DispatchStrategy,
    e: &Expr,
) -> Result<StepResult, EvalError> {
    let mut scratch = e.clone();
    Ok(match step_in_place(ct, strategy, &mut scratch)? {
        Inner::IsValue => StepResult::Normal(NormalForm::Value(scratch)),
        Inner::Stepped(rule) => StepResult::Stepped(scratch, rule),
        Inner::Stuck(sub) => StepResult::Normal(NormalForm::StuckCast(sub)),
    })
}

/// Internal step result. The redex is rewritten in place, so one step costs
/// the walk to the redex plus the redex itself — the surrounding context is
/// never rebuilt or cloned. On an error nothing has been mutated.
pub(crate) enum Inner {
    IsValue,
    Stepped(Rule),
    Stuck(Expr),
}

fn placeholder() -> Expr {
    Expr::Var(String::new())
}

pub(crate) fn step_in_place(
    ct: &ClassTable,
    strategy: DispatchStrategy,
    e: &mut Expr,
) -> Result<Inner, EvalError> {
    match e {
        Expr::Var(x) => Err(EvalError::FreeVariable(x.clone())),
        Expr::New(_, args) => Ok(match step_args(ct, strategy, args)? {
            ArgsStep::AllValues => Inner::IsValue,
            ArgsStep::Stepped => Inner::Stepped(Rule::RcNewArg),
            ArgsStep::Stuck(sub) => Inner::Stuck(sub),
        }),
        Expr::FieldAccess(target, field) => match step_in_place(ct, strategy, target)? {
            Inner::Stepped(_) => Ok(Inner::Stepped(Rule::RcField)),
            Inner::Stuck(sub) => Ok(Inner::Stuck(sub)),
            Inner::IsValue => {
                let Expr::New(class, values) = target.as_mut() else {
                    unreachable!("values are object creations");
                };
                let fields = ct
                    .fields(class)
                    .map_err(|_| EvalError::UnknownClass(class.clone()))?;
                let idx = fields.iter().position(|(_, f)| f == field).ok_or_else(|| {
                    EvalError::FieldIndexFailure {
                        class: class.clone(),
                        field: field.clone(),
                    }
                })?;
                let slot = values
                    .get_mut(idx)
                    .ok_or_else(|| EvalError::FieldIndexFailure {
                        class: class.clone(),
                        field: field.clone(),
                    })?;
                let value = std::mem::replace(slot, placeholder());
                *e = value;
                Ok(Inner::Stepped(Rule::RField))
            }
        },
        Expr::Invoke(method, args) => match step_args(ct, strategy, args)? {
            ArgsStep::Stepped => Ok(Inner::Stepped(Rule::RcInvk)),
            ArgsStep::Stuck(sub) => Ok(Inner::Stuck(sub)),
            ArgsStep::AllValues => {
                let mut classes = Vec::with_capacity(args.len());
                for arg in args.iter() {
                    let Expr::New(class, _) = arg else {
                        unreachable!("values are object creations");
                    };
                    if !ct.is_defined(class) {
                        return Err(EvalError::UnknownClass(class.clone()));
                    }
                    classes.push(class.clone());
                }
                let branch = resolve_branch(ct, strategy, method, &classes)?;
                let param_names = branch.param_names();
                let body = substitute(&branch.body, &param_names, args)?;
                let rule = Rule::RInvk {
                    owner: branch.owner.clone(),
                    method: branch.name.clone(),
                };
                *e = body;
                Ok(Inner::Stepped(rule))
            }
        },
        Expr::Cast(target, inner) => match step_in_place(ct, strategy, inner)? {
            Inner::Stepped(_) => Ok(Inner::Stepped(Rule::RcCast)),
            Inner::Stuck(sub) => Ok(Inner::Stuck(sub)),
            Inner::IsValue => {
                let Expr::New(class, _) = inner.as_ref() else {
                    unreachable!("values are object creations");
                };
                if !ct.is_defined(target) {
                    return Err(EvalError::UnknownClass(target.clone()));
                }
                if ct.subtype(class, target) {
                    let value = std::mem::replace(inner.as_mut(), placeholder());
                    *e = value;
                    Ok(Inner::Stepped(Rule::RCast))
                } else {
                    Ok(Inner::Stuck(e.clone()))
                }
            }
        },
    }
}

fn resolve_branch<'a>(
    ct: &'a ClassTable,
    strategy: DispatchStrategy,
    method: &str,
    classes: &[ClassName],
) -> Result<&'a crate::ast::MethodBranch, EvalError> {
    match strategy {
        DispatchStrategy::Sfmj => {
            let branches = lookup(ct, method, classes);
            select(ct, &branches).map_err(|err| {
                let reason = match err {
                    DispatchError::EmptyBranchSet => "no applicable branch".to_string(),
                    DispatchError::AmbiguousDispatch { candidates, .. } => {
                        format!("ambiguous among {}", candidates.join(", "))
                    }
                };
                EvalError::InternalDispatchFailure {
                    method: method.to_string(),
                    classes: classes.to_vec(),
                    reason,
                }
            })
        }
        DispatchStrategy::Fj => {
            let branches = fj_lookup(ct, method, classes);
            let branch = branches
                .first()
                .ok_or_else(|| EvalError::FjDispatchFailure {
                    method: method.to_string(),
                    classes: classes.to_vec(),
                    reason: format!(
                        "no branch named `{method}` on the superclass chain of `{}`",
                        classes
                            .first()
                            .map(|c| c.as_str())
                            .unwrap_or(ClassName::OBJECT)
                    ),
                })?;
            if !crate::dispatch::applicable(ct, branch, classes) {
                return Err(EvalError::FjDispatchFailure {
                    method: method.to_string(),
                    classes: classes.to_vec(),
                    reason: format!("found `{}` but it is not applicable", branch.signature()),
                });
            }
            Ok(branch)
        }
    }
}

enum ArgsStep {
    AllValues,
    Stepped,
    Stuck(Expr),
}

/// Steps the leftmost non-value argument in place, fixing left-to-right
/// evaluation order.
fn step_args(
    ct: &ClassTable,
    strategy: DispatchStrategy,
    args: &mut [Expr],
) -> Result<ArgsStep, EvalError> {
    for arg in args.iter_mut() {
        match step_in_place(ct, strategy, arg)? {
            Inner::IsValue => continue,
            Inner::Stepped(_) => return Ok(ArgsStep::Stepped),
            Inner::Stuck(sub) => return Ok(ArgsStep::Stuck(sub)),
        }
    }
    Ok(ArgsStep::AllValues)
}

/// Runs `step` until a normal form or the step budget runs out, under the
/// symmetric strategy.
pub fn evaluate(ct: &ClassTable, e: &Expr, fuel: u64) -> Result<Trace, EvalError> {
    evaluate_with(ct, DispatchStrategy::Sfmj, e, fuel)
}

/// Bounded evaluation under an explicit dispatch strategy, recording every
/// intermediate expression and rule.
pub fn evaluate_with(
    ct: &ClassTable,
    strategy: DispatchStrategy,
    e: &Expr,
    fuel: u64,
) -> Result<Trace, EvalError> {
    let mut current = e.clone();
    let mut steps: Vec<(Expr, Rule)> = Vec::new();
    loop {
        match step_in_place(ct, strategy, &mut current)? {
            Inner::IsValue => {
                return Ok(Trace {
                    steps,
                    fuel,
                    outcome: Outcome::Value(current),
                });
            }
            Inner::Stuck(sub) => {
                return Ok(Trace {
                    steps,
                    fuel,
                    outcome: Outcome::StuckCast(sub),
                });
            }
            Inner::Stepped(rule) => {
                if steps.len() as u64 >= fuel {
                    return Ok(Trace {
                        steps,
                        fuel,
                        outcome: Outcome::FuelExhausted,
                    });
                }
                steps.push((current.clone(), rule));
            }
        }
    }
}
