//! Random program generation and independent brute-force oracles.
//!
//! `gen_table` produces valid but not necessarily well-formed tables (the
//! interesting conflicts come from crossing specializations of a shared
//! branch, which the generator samples deliberately). `gen_wellformed_table`
//! repairs a random table by implementing every uncovered meet, which is
//! exactly the fix the well-formedness diagnostics ask for. The oracles
//! re-derive applicability and minimality by definition unfolding, without
//! going through the dispatch module, so the two routes genuinely
//! cross-check each other.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ast::{ClassDecl, ClassName, ConstructorDecl, Expr, MethodBranch};
use crate::dispatch::resolve;
use crate::eval::{evaluate, Outcome, Rule};
use crate::table::{bind_class_table, ClassTable};
use crate::typecheck::{check_table_wellformed, type_expr, TypeEnv};

/// Generation bounds. Defaults stay well inside the limits that keep the
/// exhaustive oracles fast (12 classes, arity 3, 10 branches).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub seed: u64,
    pub max_classes: usize,
    pub max_fields_per_class: usize,
    pub max_branches: usize,
    pub max_arity: usize,
    pub max_expr_depth: usize,
    pub allow_downcasts: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            max_classes: 8,
            max_fields_per_class: 2,
            max_branches: 8,
            max_arity: 3,
            max_expr_depth: 5,
            allow_downcasts: false,
        }
    }
}

impl GenConfig {
    fn clamped(&self) -> GenConfig {
        GenConfig {
            seed: self.seed,
            max_classes: self.max_classes.min(12),
            max_fields_per_class: self.max_fields_per_class.min(3),
            max_branches: self.max_branches.min(10),
            max_arity: self.max_arity.clamp(1, 3),
            max_expr_depth: self.max_expr_depth.clamp(1, 6),
            allow_downcasts: self.allow_downcasts,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("unknown target class `{0}`")]
    UnknownClass(ClassName),
    #[error("no well-typed expression of type `{0}` exists within the depth budget")]
    GenerationExhausted(ClassName),
}

/// An argument tuple on which dispatch has no unique most specific branch.
/// Replaying `select(lookup(method, witness_args))` reproduces the
/// ambiguity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictReport {
    pub method: String,
    pub witness_args: Vec<ClassName>,
    pub candidates: Vec<MethodBranch>,
}

/// Property verdict; violations are data, not errors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail(String),
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }

    fn fail(msg: impl Into<String>) -> Verdict {
        Verdict::Fail(msg.into())
    }
}

// ---------------------------------------------------------------------------
// Deterministic RNG (splitmix64)
// ---------------------------------------------------------------------------

struct Rng(u64);

impl Rng {
    fn new(seed: u64) -> Rng {
        Rng(seed)
    }

    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    fn range(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        (self.next() % n as u64) as usize
    }

    fn chance(&mut self, percent: u64) -> bool {
        self.next() % 100 < percent
    }

    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.range(xs.len())]
    }
}

// ---------------------------------------------------------------------------
// Table generation
// ---------------------------------------------------------------------------

const CLASS_POOL: [&str; 12] = ["A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L"];

/// How branches of one method name pick return types. Both schemes keep
/// constraint-2 (covariant returns) satisfiable by construction.
#[derive(Clone, Copy)]
enum ReturnScheme {
    FixedObject,
    FirstParam,
}

/// Generates a valid (bindable) class table: a single-inheritance forest
/// with random fields, plus method branches placed in a random parameter
/// class. Not guaranteed well-formed — roughly a third of the branch budget
/// goes to crossing specializations of a shared branch, the pattern whose
/// uncovered meet makes dispatch ambiguous.
pub fn gen_table(cfg: &GenConfig) -> ClassTable {
    let cfg = cfg.clamped();
    let mut rng = Rng::new(cfg.seed);
    gen_table_with(&cfg, &mut rng, false)
}

fn gen_table_with(cfg: &GenConfig, rng: &mut Rng, fj_compatible: bool) -> ClassTable {
    let n_classes = if cfg.max_classes == 0 {
        0
    } else {
        1 + rng.range(cfg.max_classes)
    };
    let names: Vec<ClassName> = CLASS_POOL[..n_classes]
        .iter()
        .map(|n| ClassName::new(*n))
        .collect();

    // Hierarchy: each class extends Object or an earlier class.
    let mut parents: Vec<ClassName> = Vec::with_capacity(n_classes);
    for i in 0..n_classes {
        if i == 0 || rng.chance(40) {
            parents.push(ClassName::object());
        } else {
            parents.push(names[rng.range(i)].clone());
        }
    }

    // Fields reference Object or earlier classes only, so every class is
    // constructible and field names never shadow.
    let mut own_fields: Vec<Vec<(ClassName, String)>> = Vec::with_capacity(n_classes);
    for i in 0..n_classes {
        let count = rng.range(cfg.max_fields_per_class + 1);
        let mut fields = Vec::with_capacity(count);
        for k in 0..count {
            let ty = if i == 0 || rng.chance(40) {
                ClassName::object()
            } else {
                names[rng.range(i)].clone()
            };
            fields.push((ty, format!("f{i}_{k}")));
        }
        own_fields.push(fields);
    }

    let subtype = |sub: &ClassName, sup: &ClassName| -> bool {
        if sub == sup || sup.is_object() {
            return true;
        }
        let mut cur = sub.clone();
        while let Some(i) = names.iter().position(|n| *n == cur) {
            cur = parents[i].clone();
            if &cur == sup {
                return true;
            }
        }
        false
    };
    let strict_subs = |sup: &ClassName| -> Vec<ClassName> {
        names
            .iter()
            .filter(|n| *n != sup && subtype(n, sup))
            .cloned()
            .collect()
    };

    // Method signatures. Bodies come later, once the signature skeleton can
    // be bound into a table the expression generator can query.
    struct Sig {
        name: String,
        params: Vec<ClassName>,
        owner: ClassName,
        ret: ClassName,
    }
    let mut sigs: Vec<Sig> = Vec::new();
    let mut sig_keys: BTreeSet<(String, Vec<ClassName>)> = BTreeSet::new();
    let mut schemes: BTreeMap<String, ReturnScheme> = BTreeMap::new();
    let mut name_counter = 0usize;

    if !names.is_empty() {
        let budget = rng.range(cfg.max_branches + 1);
        let mut scheme_of = |name: &str, rng: &mut Rng| -> ReturnScheme {
            *schemes.entry(name.to_string()).or_insert_with(|| {
                if rng.chance(50) {
                    ReturnScheme::FixedObject
                } else {
                    ReturnScheme::FirstParam
                }
            })
        };
        let ret_for = |scheme: ReturnScheme, params: &[ClassName]| -> ClassName {
            match scheme {
                ReturnScheme::FixedObject => ClassName::object(),
                ReturnScheme::FirstParam => params[0].clone(),
            }
        };

        while sigs.len() < budget {
            if fj_compatible {
                // One branch per method name, owned by its first parameter's
                // class: the shape on which first-argument dispatch agrees
                // with symmetric dispatch.
                let arity = 1 + rng.range(cfg.max_arity);
                let mut params = vec![names[rng.range(names.len())].clone()];
                for _ in 1..arity {
                    params.push(if rng.chance(30) {
                        ClassName::object()
                    } else {
                        names[rng.range(names.len())].clone()
                    });
                }
                let name = format!("m{name_counter}");
                name_counter += 1;
                let scheme = scheme_of(&name, rng);
                sig_keys.insert((name.clone(), params.clone()));
                sigs.push(Sig {
                    owner: params[0].clone(),
                    ret: ret_for(scheme, &params),
                    name,
                    params,
                });
                continue;
            }

            let crossing_bases: Vec<usize> = sigs
                .iter()
                .enumerate()
                .filter(|(_, s)| {
                    s.params.len() >= 2
                        && s.params
                            .iter()
                            .filter(|p| !strict_subs(p).is_empty())
                            .count()
                            >= 2
                })
                .map(|(i, _)| i)
                .collect();
            if rng.chance(30) && !crossing_bases.is_empty() {
                // Crossing pattern: specialize two different positions of a
                // shared base signature, leaving their meet uncovered.
                let base = *rng.pick(&crossing_bases);
                let (base_name, base_params) = (sigs[base].name.clone(), sigs[base].params.clone());
                let refinable: Vec<usize> = (0..base_params.len())
                    .filter(|&p| !strict_subs(&base_params[p]).is_empty())
                    .collect();
                let i = *rng.pick(&refinable);
                let j_candidates: Vec<usize> =
                    refinable.iter().copied().filter(|&p| p != i).collect();
                let j = *rng.pick(&j_candidates);
                let scheme = scheme_of(&base_name, rng);
                for pos in [i, j] {
                    let subs = strict_subs(&base_params[pos]);
                    let sub = rng.pick(&subs).clone();
                    let mut params = base_params.clone();
                    params[pos] = sub.clone();
                    if sig_keys.insert((base_name.clone(), params.clone())) {
                        sigs.push(Sig {
                            name: base_name.clone(),
                            owner: sub,
                            ret: ret_for(scheme, &params),
                            params,
                        });
                    }
                }
                continue;
            }

            if rng.chance(45) && !sigs.is_empty() {
                // Specialize one position of an existing signature.
                let base = rng.range(sigs.len());
                let (base_name, base_params) = (sigs[base].name.clone(), sigs[base].params.clone());
                let refinable: Vec<usize> = (0..base_params.len())
                    .filter(|&p| !strict_subs(&base_params[p]).is_empty())
                    .collect();
                if !refinable.is_empty() {
                    let pos = *rng.pick(&refinable);
                    let subs = strict_subs(&base_params[pos]);
                    let sub = rng.pick(&subs).clone();
                    let mut params = base_params.clone();
                    params[pos] = sub;
                    let owners: Vec<ClassName> =
                        params.iter().filter(|p| !p.is_object()).cloned().collect();
                    if !owners.is_empty() && sig_keys.insert((base_name.clone(), params.clone())) {
                        let scheme = scheme_of(&base_name, rng);
                        sigs.push(Sig {
                            name: base_name.clone(),
                            owner: rng.pick(&owners).clone(),
                            ret: ret_for(scheme, &params),
                            params,
                        });
                    }
                    continue;
                }
            }

            // Fresh method name.
            let arity = 1 + rng.range(cfg.max_arity);
            let mut params: Vec<ClassName> = (0..arity)
                .map(|_| {
                    if rng.chance(30) {
                        ClassName::object()
                    } else {
                        names[rng.range(names.len())].clone()
                    }
                })
                .collect();
            // Placement needs at least one declared parameter class.
            let forced = rng.range(arity);
            params[forced] = names[rng.range(names.len())].clone();
            let name = format!("m{name_counter}");
            name_counter += 1;
            let owners: Vec<ClassName> =
                params.iter().filter(|p| !p.is_object()).cloned().collect();
            let scheme = scheme_of(&name, rng);
            sig_keys.insert((name.clone(), params.clone()));
            sigs.push(Sig {
                owner: rng.pick(&owners).clone(),
                ret: ret_for(scheme, &params),
                name,
                params,
            });
        }
    }

    // Bind a skeleton (placeholder bodies) so body generation can query
    // subtyping, fields, and the other branches' signatures.
    let build_decls = |bodies: Option<&BTreeMap<usize, Expr>>| -> Vec<ClassDecl> {
        let mut decls = Vec::with_capacity(n_classes);
        for i in 0..n_classes {
            decls.push(ClassDecl {
                name: names[i].clone(),
                parent: parents[i].clone(),
                fields: own_fields[i].clone(),
                ctor: ConstructorDecl {
                    name: names[i].clone(),
                    params: Vec::new(),
                    super_args: Vec::new(),
                    inits: Vec::new(),
                },
                methods: Vec::new(),
            });
        }
        for (sig_idx, sig) in sigs.iter().enumerate() {
            let body = bodies
                .and_then(|b| b.get(&sig_idx).cloned())
                .unwrap_or_else(|| Expr::new_object(ClassName::object(), vec![]));
            let class_idx = names.iter().position(|n| n == &sig.owner).expect("owner");
            decls[class_idx].methods.push(MethodBranch {
                owner: sig.owner.clone(),
                name: sig.name.clone(),
                params: sig
                    .params
                    .iter()
                    .enumerate()
                    .map(|(k, ty)| (ty.clone(), format!("x{k}")))
                    .collect(),
                return_type: sig.ret.clone(),
                body,
            });
        }
        // Stylized constructors derived from the field layout.
        let mut full_fields: BTreeMap<ClassName, Vec<(ClassName, String)>> = BTreeMap::new();
        full_fields.insert(ClassName::object(), Vec::new());
        for i in 0..n_classes {
            let mut fields = full_fields[&parents[i]].clone();
            fields.extend(own_fields[i].iter().cloned());
            full_fields.insert(names[i].clone(), fields);
        }
        for (i, decl) in decls.iter_mut().enumerate() {
            let inherited = &full_fields[&parents[i]];
            decl.ctor.params = inherited
                .iter()
                .cloned()
                .chain(decl.fields.iter().cloned())
                .collect();
            decl.ctor.super_args = inherited.iter().map(|(_, f)| f.clone()).collect();
            decl.ctor.inits = decl
                .fields
                .iter()
                .map(|(_, f)| (f.clone(), f.clone()))
                .collect();
        }
        decls
    };

    let skeleton = bind_class_table(build_decls(None)).expect("generated skeleton binds");

    let mut bodies: BTreeMap<usize, Expr> = BTreeMap::new();
    for (sig_idx, sig) in sigs.iter().enumerate() {
        let params: Vec<(ClassName, String)> = sig
            .params
            .iter()
            .enumerate()
            .map(|(k, ty)| (ty.clone(), format!("x{k}")))
            .collect();
        let depth = cfg.max_expr_depth.min(3);
        let ceiling = name_rank(&sig.name).unwrap_or(0);
        let body = gen_expr_in_env(cfg, &skeleton, &params, &sig.ret, depth, Some(ceiling), rng)
            .expect("generated classes are constructible");
        bodies.insert(sig_idx, body.0);
    }

    bind_class_table(build_decls(Some(&bodies))).expect("generated table binds")
}

// ---------------------------------------------------------------------------
// Expression generation
// ---------------------------------------------------------------------------

/// Node-count of the cheapest value of each constructible class.
fn construction_costs(ct: &ClassTable) -> BTreeMap<ClassName, usize> {
    let mut costs: BTreeMap<ClassName, usize> = BTreeMap::new();
    costs.insert(ClassName::object(), 1);
    loop {
        let mut changed = false;
        for decl in ct.decls_in_order() {
            if costs.contains_key(&decl.name) {
                continue;
            }
            let fields = ct.fields(&decl.name).expect("declared class");
            if let Some(total) = fields
                .iter()
                .map(|(ty, _)| costs.get(ty).copied())
                .try_fold(1usize, |acc, c| c.map(|c| acc + c))
            {
                costs.insert(decl.name.clone(), total);
                changed = true;
            }
        }
        if !changed {
            return costs;
        }
    }
}

fn minimal_value(
    ct: &ClassTable,
    costs: &BTreeMap<ClassName, usize>,
    class: &ClassName,
) -> Option<Expr> {
    costs.get(class)?;
    let args = ct
        .fields(class)
        .ok()?
        .iter()
        .map(|(ty, _)| minimal_value(ct, costs, ty))
        .collect::<Option<Vec<_>>>()?;
    Some(Expr::New(class.clone(), args))
}

/// Generates a closed expression whose static type is a subtype of
/// `target`. Downcasts (which may stick at run time) appear only when the
/// config allows them.
pub fn gen_expr(cfg: &GenConfig, ct: &ClassTable, target: &ClassName) -> Result<Expr, GenError> {
    let cfg = cfg.clamped();
    let mut rng = Rng::new(cfg.seed ^ 0xE5F1_93C1_BAD5_EED5);
    gen_expr_in_env(&cfg, ct, &[], target, cfg.max_expr_depth, None, &mut rng).map(|(e, _)| e)
}

/// Method names carry a creation rank (`m0`, `m1`, ...); a generated body
/// may only invoke strictly lower-ranked names, which keeps the call graph
/// well-founded and every generated program terminating. Divergence is
/// covered by handwritten fixtures instead, where the step budget matters.
fn name_rank(name: &str) -> Option<usize> {
    name.strip_prefix('m')?.parse().ok()
}

/// Environment-aware generation; returns the expression and its exact
/// static type. Each environment variable is used at most once per
/// generated expression, which keeps substitution growth linear during
/// evaluation. `call_ceiling` restricts invocable method names to ranks
/// strictly below it; `None` allows all.
fn gen_expr_in_env(
    cfg: &GenConfig,
    ct: &ClassTable,
    env: &[(ClassName, String)],
    target: &ClassName,
    depth: usize,
    call_ceiling: Option<usize>,
    rng: &mut Rng,
) -> Result<(Expr, ClassName), GenError> {
    if !ct.is_defined(target) {
        return Err(GenError::UnknownClass(target.clone()));
    }
    let costs = construction_costs(ct);
    let mut used: BTreeSet<String> = BTreeSet::new();
    gen_at(
        cfg,
        ct,
        &costs,
        env,
        &mut used,
        target,
        depth,
        call_ceiling,
        rng,
    )
}

#[allow(clippy::too_many_arguments)]
fn gen_at(
    cfg: &GenConfig,
    ct: &ClassTable,
    costs: &BTreeMap<ClassName, usize>,
    env: &[(ClassName, String)],
    used: &mut BTreeSet<String>,
    target: &ClassName,
    depth: usize,
    call_ceiling: Option<usize>,
    rng: &mut Rng,
) -> Result<(Expr, ClassName), GenError> {
    let constructible_subs: Vec<ClassName> = std::iter::once(ClassName::object())
        .chain(ct.names_in_order().iter().cloned())
        .filter(|c| ct.subtype(c, target) && costs.contains_key(c))
        .collect();

    let fallback = || -> Result<(Expr, ClassName), GenError> {
        constructible_subs
            .first()
            .map(|c| {
                let class = if constructible_subs.contains(target) {
                    target.clone()
                } else {
                    c.clone()
                };
                (
                    minimal_value(ct, costs, &class).expect("class is constructible"),
                    class,
                )
            })
            .ok_or_else(|| GenError::GenerationExhausted(target.clone()))
    };

    if depth == 0 {
        // Prefer an unused variable before falling back to construction.
        let vars: Vec<&(ClassName, String)> = env
            .iter()
            .filter(|(ty, name)| ct.subtype(ty, target) && !used.contains(name))
            .collect();
        if !vars.is_empty() {
            let (ty, name) = rng.pick(&vars);
            used.insert(name.clone());
            return Ok((Expr::var(name), ty.clone()));
        }
        return fallback();
    }

    let roll = rng.range(100);

    // Variables.
    if roll < 25 {
        let vars: Vec<(ClassName, String)> = env
            .iter()
            .filter(|(ty, name)| ct.subtype(ty, target) && !used.contains(name))
            .cloned()
            .collect();
        if !vars.is_empty() {
            let (ty, name) = rng.pick(&vars).clone();
            used.insert(name.clone());
            return Ok((Expr::var(name), ty));
        }
    }

    // Invocation of a branch whose return type fits and whose parameter
    // types are all constructible. Arguments are pinned to the exact
    // parameter types with upcasts so static selection is the branch itself.
    if roll < 45 {
        let candidates: Vec<&MethodBranch> = ct
            .all_branches()
            .filter(|b| {
                let callable = match call_ceiling {
                    None => true,
                    Some(ceiling) => name_rank(&b.name).is_some_and(|r| r < ceiling),
                };
                callable
                    && ct.subtype(&b.return_type, target)
                    && b.params.iter().all(|(ty, _)| costs.contains_key(ty))
            })
            .collect();
        if !candidates.is_empty() {
            let branch = *rng.pick(&candidates);
            let mut args = Vec::with_capacity(branch.arity());
            for (ty, _) in &branch.params {
                let (arg, static_ty) =
                    gen_at(cfg, ct, costs, env, used, ty, depth - 1, call_ceiling, rng)?;
                args.push(if &static_ty == ty {
                    arg
                } else {
                    Expr::cast(ty.clone(), arg)
                });
            }
            return Ok((
                Expr::invoke(branch.name.clone(), args),
                branch.return_type.clone(),
            ));
        }
    }

    // Field projection from a constructible class with a fitting field.
    if roll < 60 {
        let mut choices: Vec<(ClassName, String, ClassName)> = Vec::new();
        for decl in ct.decls_in_order() {
            if !costs.contains_key(&decl.name) {
                continue;
            }
            for (fty, fname) in ct.fields(&decl.name).expect("declared class") {
                if ct.subtype(&fty, target) {
                    choices.push((decl.name.clone(), fname, fty));
                }
            }
        }
        if !choices.is_empty() {
            let (class, field, fty) = rng.pick(&choices).clone();
            let (inner, _) = gen_at(
                cfg,
                ct,
                costs,
                env,
                used,
                &class,
                depth - 1,
                call_ceiling,
                rng,
            )?;
            return Ok((Expr::field(inner, field), fty));
        }
    }

    // Downcast through Object; sticks at run time unless the operand
    // happens to be of the target class, so half the operands are.
    if roll < 68 && cfg.allow_downcasts {
        let downs: Vec<&ClassName> = constructible_subs
            .iter()
            .filter(|c| !c.is_object())
            .collect();
        if !downs.is_empty() {
            let down = (*rng.pick(&downs)).clone();
            let inner_target = if rng.chance(50) {
                down.clone()
            } else {
                ClassName::object()
            };
            let (inner, _) = gen_at(
                cfg,
                ct,
                costs,
                env,
                used,
                &inner_target,
                depth - 1,
                call_ceiling,
                rng,
            )?;
            let widened = Expr::cast(ClassName::object(), inner);
            return Ok((Expr::cast(down.clone(), widened), down));
        }
    }

    // Object creation.
    if constructible_subs.is_empty() {
        return fallback();
    }
    let class = rng.pick(&constructible_subs).clone();
    let fields = ct.fields(&class).expect("constructible class");
    let mut args = Vec::with_capacity(fields.len());
    for (fty, _) in &fields {
        let (arg, _) = gen_at(
            cfg,
            ct,
            costs,
            env,
            used,
            fty,
            depth.saturating_sub(1),
            call_ceiling,
            rng,
        )?;
        args.push(arg);
    }
    Ok((Expr::New(class.clone(), args), class))
}

// ---------------------------------------------------------------------------
// Well-formed table generation (repair loop)
// ---------------------------------------------------------------------------

/// Uncovered meets per method, derived the same way the checker derives
/// them but reported as raw data for the repair loop.
fn missing_meets(ct: &ClassTable) -> Vec<(String, Vec<ClassName>)> {
    let mut by_key: BTreeMap<(String, usize), Vec<&MethodBranch>> = BTreeMap::new();
    for branch in ct.all_branches() {
        by_key
            .entry((branch.name.clone(), branch.arity()))
            .or_default()
            .push(branch);
    }
    let mut out = Vec::new();
    for ((name, _), group) in &by_key {
        for (i, left) in group.iter().enumerate() {
            for right in &group[i + 1..] {
                if let Some(meet) = ct
                    .pointwise_meet(&left.param_types(), &right.param_types())
                    .expect("same arity")
                {
                    let covered = group.iter().any(|b| b.param_types() == meet);
                    if !covered && !out.contains(&(name.clone(), meet.clone())) {
                        out.push((name.clone(), meet));
                    }
                }
            }
        }
    }
    out
}

/// Generates a table that passes the well-formedness check, by repairing a
/// random table: every uncovered meet gets a branch at exactly that meet.
/// Deterministic per seed.
pub fn gen_wellformed_table(cfg: &GenConfig) -> ClassTable {
    let cfg = cfg.clamped();
    let mut attempt_seed = cfg.seed;
    for _ in 0..16 {
        let mut rng = Rng::new(attempt_seed);
        let mut ct = gen_table_with(&cfg, &mut rng, false);
        let mut ok = true;
        for _ in 0..24 {
            if check_table_wellformed(&ct).iter().all(|d| !d.is_error()) {
                break;
            }
            match repair_once(&ct) {
                Some(repaired) => ct = repaired,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && check_table_wellformed(&ct).iter().all(|d| !d.is_error()) {
            return ct;
        }
        attempt_seed = Rng::new(attempt_seed).next();
    }
    // A methodless table is vacuously well-formed.
    let mut rng = Rng::new(cfg.seed);
    let stripped = GenConfig {
        max_branches: 0,
        ..cfg
    };
    gen_table_with(&stripped, &mut rng, false)
}

fn repair_once(ct: &ClassTable) -> Option<ClassTable> {
    let missing = missing_meets(ct);
    if missing.is_empty() {
        return Some(ct.clone());
    }
    let mut decls: Vec<ClassDecl> = ct.decls_in_order().cloned().collect();
    for (name, meet) in missing {
        let already = ct
            .all_branches()
            .any(|b| b.name == name && b.param_types() == meet);
        if already {
            continue;
        }
        let owner = meet.iter().find(|c| !c.is_object())?.clone();
        let ret = repair_return_type(ct, &name, &meet)?;
        let costs = construction_costs(ct);
        let params: Vec<(ClassName, String)> = meet
            .iter()
            .enumerate()
            .map(|(k, ty)| (ty.clone(), format!("x{k}")))
            .collect();
        let body = params
            .iter()
            .find(|(ty, _)| ct.subtype(ty, &ret))
            .map(|(_, x)| Expr::var(x.clone()))
            .or_else(|| minimal_value(ct, &costs, &ret))?;
        let decl = decls.iter_mut().find(|d| d.name == owner)?;
        if decl
            .methods
            .iter()
            .any(|m| m.name == name && m.param_types() == meet)
        {
            continue;
        }
        decl.methods.push(MethodBranch {
            owner: owner.clone(),
            name,
            params,
            return_type: ret,
            body,
        });
    }
    bind_class_table(decls).ok()
}

/// A return type for a branch at `meet` that keeps every covariance pair
/// satisfied: below every generalizing branch's return, above every more
/// specific branch's.
fn repair_return_type(ct: &ClassTable, name: &str, meet: &[ClassName]) -> Option<ClassName> {
    let group: Vec<&MethodBranch> = ct
        .all_branches()
        .filter(|b| b.name == name && b.arity() == meet.len())
        .collect();
    let uppers: Vec<&ClassName> = group
        .iter()
        .filter(|b| ct.subtype_seq(meet, &b.param_types()))
        .map(|b| &b.return_type)
        .collect();
    let lowers: Vec<&ClassName> = group
        .iter()
        .filter(|b| ct.subtype_seq(&b.param_types(), meet))
        .map(|b| &b.return_type)
        .collect();
    let candidates: Vec<ClassName> = std::iter::once(ClassName::object())
        .chain(ct.names_in_order().iter().cloned())
        .collect();
    let mut ordered: Vec<ClassName> = Vec::new();
    if let Some(first) = meet.first() {
        ordered.push(first.clone());
    }
    ordered.push(ClassName::object());
    ordered.extend(candidates);
    ordered.into_iter().find(|ret| {
        uppers.iter().all(|u| ct.subtype(ret, u)) && lowers.iter().all(|l| ct.subtype(l, ret))
    })
}

/// A well-formed program: repaired table plus a closed main expression.
pub fn gen_program(cfg: &GenConfig) -> (ClassTable, Expr) {
    let cfg = cfg.clamped();
    let ct = gen_wellformed_table(&cfg);
    let mut rng = Rng::new(cfg.seed ^ 0x00D1_5EED_0FAA_17A1);
    let (main, _) = gen_expr_in_env(
        &cfg,
        &ct,
        &[],
        &ClassName::object(),
        cfg.max_expr_depth,
        None,
        &mut rng,
    )
    .expect("Object is always constructible");
    (ct, main)
}

/// A program on which first-argument dispatch and symmetric dispatch agree:
/// every branch is owned by its first parameter's class and no method name
/// has more than one branch.
pub fn gen_fj_program(cfg: &GenConfig) -> (ClassTable, Expr) {
    let cfg = cfg.clamped();
    let mut rng = Rng::new(cfg.seed);
    let ct = gen_table_with(&cfg, &mut rng, true);
    let (main, _) = gen_expr_in_env(
        &cfg,
        &ct,
        &[],
        &ClassName::object(),
        cfg.max_expr_depth,
        None,
        &mut rng,
    )
    .expect("Object is always constructible");
    (ct, main)
}

// ---------------------------------------------------------------------------
// Brute-force oracles
// ---------------------------------------------------------------------------

/// Chain-walking subtype check independent of `ClassTable::subtype`.
fn oracle_subtype(ct: &ClassTable, sub: &ClassName, sup: &ClassName) -> bool {
    if sup.is_object() {
        return true;
    }
    let mut cur = sub.clone();
    loop {
        if &cur == sup {
            return true;
        }
        match ct.get(&cur) {
            Some(decl) => cur = decl.parent.clone(),
            None => return false,
        }
    }
}

fn oracle_subtype_seq(ct: &ClassTable, subs: &[ClassName], sups: &[ClassName]) -> bool {
    subs.len() == sups.len() && subs.iter().zip(sups).all(|(a, b)| oracle_subtype(ct, a, b))
}

fn class_universe(ct: &ClassTable) -> Vec<ClassName> {
    let mut out: Vec<ClassName> = ct.names_in_order().to_vec();
    out.push(ClassName::object());
    out
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

/// Enumerates every method name and every argument tuple over the bound
/// classes, recomputes the applicable branch set by scanning all class
/// declarations directly, and reports each tuple without a unique
/// pointwise-minimal branch. Independent of the dispatch module.
pub fn oracle_ambiguity(ct: &ClassTable) -> Vec<ConflictReport> {
    let universe = class_universe(ct);
    let mut by_key: BTreeMap<(String, usize), Vec<&MethodBranch>> = BTreeMap::new();
    for branch in ct.all_branches() {
        by_key
            .entry((branch.name.clone(), branch.arity()))
            .or_default()
            .push(branch);
    }
    let mut reports = Vec::new();
    for ((name, arity), group) in &by_key {
        for args in tuples(&universe, *arity) {
            let applicable: Vec<&&MethodBranch> = group
                .iter()
                .filter(|b| oracle_subtype_seq(ct, &args, &b.param_types()))
                .collect();
            if applicable.is_empty() {
                continue;
            }
            let minima: Vec<&&&MethodBranch> = applicable
                .iter()
                .filter(|b| {
                    applicable
                        .iter()
                        .all(|o| oracle_subtype_seq(ct, &b.param_types(), &o.param_types()))
                })
                .collect();
            if minima.len() != 1 {
                reports.push(ConflictReport {
                    method: name.clone(),
                    witness_args: args,
                    candidates: applicable.iter().map(|b| (**b).clone()).collect(),
                });
            }
        }
    }
    reports
}

/// Brute-force covariant-return check over all comparable same-name pairs.
pub fn oracle_return_violations(ct: &ClassTable) -> Vec<String> {
    let mut out = Vec::new();
    let branches: Vec<&MethodBranch> = ct.all_branches().collect();
    for left in &branches {
        for right in &branches {
            if std::ptr::eq(*left, *right)
                || left.name != right.name
                || left.arity() != right.arity()
            {
                continue;
            }
            if oracle_subtype_seq(ct, &left.param_types(), &right.param_types())
                && left.param_types() != right.param_types()
                && !oracle_subtype(ct, &left.return_type, &right.return_type)
            {
                out.push(format!(
                    "{} specializes {} with non-covariant return",
                    left.signature(),
                    right.signature()
                ));
            }
        }
    }
    out
}

/// Accept/reject verdict by definition unfolding alone.
pub fn oracle_accepts(ct: &ClassTable) -> bool {
    oracle_ambiguity(ct).is_empty() && oracle_return_violations(ct).is_empty()
}

/// Accept/reject verdict through the checker.
pub fn checker_accepts(ct: &ClassTable) -> bool {
    check_table_wellformed(ct).iter().all(|d| !d.is_error())
}

// ---------------------------------------------------------------------------
// Property drivers
// ---------------------------------------------------------------------------

/// Subject reduction: along the whole trace, every successor expression
/// types to a subtype of its predecessor's type.
pub fn prop_subject_reduction(ct: &ClassTable, e: &Expr, fuel: u64) -> Verdict {
    let env = TypeEnv::empty();
    let mut prev_ty = match type_expr(ct, &env, e) {
        Ok(ty) => ty,
        Err(d) => return Verdict::fail(format!("initial expression does not type: {d}")),
    };
    let mut current = e.clone();
    for step_idx in 0..fuel {
        match crate::eval::step_in_place(ct, crate::dispatch::DispatchStrategy::Sfmj, &mut current)
        {
            Ok(crate::eval::Inner::IsValue) | Ok(crate::eval::Inner::Stuck(_)) => {
                return Verdict::Pass
            }
            Ok(crate::eval::Inner::Stepped(rule)) => {
                let next_ty = match type_expr(ct, &env, &current) {
                    Ok(ty) => ty,
                    Err(d) => {
                        return Verdict::fail(format!(
                            "step {step_idx} ({rule}) produced an untypeable expression: {d}"
                        ))
                    }
                };
                if !ct.subtype(&next_ty, &prev_ty) {
                    return Verdict::fail(format!(
                        "step {step_idx} ({rule}) changed the type from `{prev_ty}` to \
                         non-subtype `{next_ty}`"
                    ));
                }
                prev_ty = next_ty;
            }
            Err(err) => return Verdict::fail(format!("step {step_idx} failed: {err}")),
        }
    }
    Verdict::Pass
}

/// Progress: evaluation only ever ends in a value, a stuck downcast, or
/// fuel exhaustion, and every invocation finds a unique branch whose arity
/// matches its arguments (enforced inside `step`; any violation surfaces as
/// an evaluation error here). Final values must type below the static type.
pub fn prop_progress(ct: &ClassTable, e: &Expr, fuel: u64) -> Verdict {
    let static_ty = match type_expr(ct, &TypeEnv::empty(), e) {
        Ok(ty) => ty,
        Err(d) => return Verdict::fail(format!("initial expression does not type: {d}")),
    };
    match evaluate(ct, e, fuel) {
        Err(err) => Verdict::fail(format!("evaluation failed: {err}")),
        Ok(trace) => match trace.outcome {
            Outcome::FuelExhausted | Outcome::StuckCast(_) => Verdict::Pass,
            Outcome::Value(v) => match type_expr(ct, &TypeEnv::empty(), &v) {
                Ok(value_ty) if ct.subtype(&value_ty, &static_ty) => Verdict::Pass,
                Ok(value_ty) => Verdict::fail(format!(
                    "final value has type `{value_ty}`, not a subtype of static `{static_ty}`"
                )),
                Err(d) => Verdict::fail(format!("final value does not type: {d}")),
            },
        },
    }
}

/// Specificity: wherever selection succeeds, refining the argument tuple
/// pointwise keeps selection succeeding, with pointwise-smaller parameter
/// types and a subtype return type.
pub fn prop_specificity(ct: &ClassTable) -> Verdict {
    let universe = class_universe(ct);
    let subs_of: BTreeMap<ClassName, Vec<ClassName>> = universe
        .iter()
        .map(|c| {
            (
                c.clone(),
                universe
                    .iter()
                    .filter(|s| ct.subtype(s, c))
                    .cloned()
                    .collect(),
            )
        })
        .collect();
    let mut keys: Vec<(String, usize)> = ct
        .all_branches()
        .map(|b| (b.name.clone(), b.arity()))
        .collect();
    keys.sort();
    keys.dedup();
    for (name, arity) in keys {
        let mut resolved: BTreeMap<Vec<ClassName>, Option<(Vec<ClassName>, ClassName)>> =
            BTreeMap::new();
        for args in tuples(&universe, arity) {
            let outcome = resolve(ct, &name, &args)
                .ok()
                .map(|b| (b.param_types(), b.return_type.clone()));
            resolved.insert(args, outcome);
        }
        for (args, outcome) in &resolved {
            let Some((base_params, base_ret)) = outcome else {
                continue;
            };
            let refinement_sets: Vec<&Vec<ClassName>> = args.iter().map(|c| &subs_of[c]).collect();
            for refined in cartesian(&refinement_sets) {
                if &refined == args {
                    continue;
                }
                match resolved.get(&refined).and_then(|o| o.as_ref()) {
                    None => {
                        return Verdict::fail(format!(
                            "select(lookup({name}, {args:?})) succeeds but fails on the \
                             refinement {refined:?}"
                        ));
                    }
                    Some((params, ret)) => {
                        if !ct.subtype_seq(params, base_params) || !ct.subtype(ret, base_ret) {
                            return Verdict::fail(format!(
                                "refining {args:?} to {refined:?} selected a branch with \
                                 parameters {params:?} and return `{ret}`, not below \
                                 {base_params:?} -> `{base_ret}`"
                            ));
                        }
                    }
                }
            }
        }
    }
    Verdict::Pass
}

fn cartesian(sets: &[&Vec<ClassName>]) -> Vec<Vec<ClassName>> {
    let mut out = vec![Vec::new()];
    for set in sets {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                set.iter().map(move |c| {
                    let mut next = prefix.clone();
                    next.push(c.clone());
                    next
                })
            })
            .collect();
    }
    out
}

/// Trace equality probe used by the dispatch-strategy differential: the
/// step lists must match rule-for-rule and expression-for-expression.
pub fn traces_identical(
    ct: &ClassTable,
    e: &Expr,
    fuel: u64,
) -> Result<bool, crate::eval::EvalError> {
    let sfmj = crate::eval::evaluate_with(ct, crate::dispatch::DispatchStrategy::Sfmj, e, fuel)?;
    let fj = crate::eval::evaluate_with(ct, crate::dispatch::DispatchStrategy::Fj, e, fuel)?;
    Ok(sfmj == fj)
}

/// Count of `R-Invk` steps in a trace (the arity clause holds at each; a
/// mismatch would have failed the step).
pub fn invocation_count(trace: &crate::eval::Trace) -> usize {
    trace
        .steps
        .iter()
        .filter(|(_, r)| matches!(r, Rule::RInvk { .. }))
        .count()
}
