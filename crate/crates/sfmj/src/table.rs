//! Class tables: validated, immutable maps from class name to declaration.
//!
//! A table is the fixed global context of every other judgment. Binding
//! validates the structural invariants up front (acyclic `extends`, all
//! referenced names bound, no field shadowing, stylized constructors) so the
//! subtyping, field-collection, and meet operations below are total on bound
//! names.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::ast::{ClassDecl, ClassName, Expr, MethodBranch};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableError {
    #[error("class `{0}` is declared more than once")]
    DuplicateClass(ClassName),
    #[error("`Object` is built in and cannot be redeclared")]
    ReservedName,
    #[error("inheritance cycle through class `{0}`")]
    CycleInExtends(ClassName),
    #[error("unknown class `{name}` referenced {context}")]
    UnknownClassReference { name: ClassName, context: String },
    #[error("field `{field}` in class `{class}` duplicates or shadows another field")]
    FieldShadowing { class: ClassName, field: String },
    #[error("class `{class}` declares method `{method}` twice with identical parameter types")]
    DuplicateMethod { class: ClassName, method: String },
    #[error("malformed constructor in class `{class}`: {detail}")]
    MalformedConstructor { class: ClassName, detail: String },
    #[error("unknown class `{0}`")]
    UnknownClass(ClassName),
    #[error("sequence length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

/// Validated class table. Immutable after construction; safe to share
/// across threads.
///
/// Subtyping and field collection are queried on every dispatch and typing
/// step, so both are precomputed at bind time.
#[derive(Debug, Clone, Default)]
pub struct ClassTable {
    decls: BTreeMap<ClassName, ClassDecl>,
    order: Vec<ClassName>,
    ancestors: BTreeMap<ClassName, BTreeSet<ClassName>>,
    all_fields: BTreeMap<ClassName, Vec<(ClassName, String)>>,
}

impl PartialEq for ClassTable {
    fn eq(&self, other: &Self) -> bool {
        // The caches are functions of the declarations.
        self.decls == other.decls && self.order == other.order
    }
}

impl Eq for ClassTable {}

/// Builds a [`ClassTable`] from declarations, failing on the first violated
/// invariant.
pub fn bind_class_table(decls: Vec<ClassDecl>) -> Result<ClassTable, TableError> {
    ClassTable::bind(decls)
}

impl ClassTable {
    pub fn bind(decls: Vec<ClassDecl>) -> Result<ClassTable, TableError> {
        let mut table = ClassTable::default();
        for decl in decls {
            if decl.name.is_object() {
                return Err(TableError::ReservedName);
            }
            if table.decls.contains_key(&decl.name) {
                return Err(TableError::DuplicateClass(decl.name));
            }
            table.order.push(decl.name.clone());
            table.decls.insert(decl.name.clone(), decl);
        }
        table.check_acyclic()?;
        table.build_caches();
        table.check_references()?;
        table.check_field_shadowing()?;
        table.check_method_duplicates()?;
        table.check_constructors()?;
        Ok(table)
    }

    /// Precomputes ancestor sets and full field lists; requires acyclicity.
    fn build_caches(&mut self) {
        for name in &self.order {
            let mut ancestors = BTreeSet::new();
            let mut cur = name;
            while let Some(decl) = self.decls.get(cur) {
                ancestors.insert(cur.clone());
                cur = &decl.parent;
            }
            ancestors.insert(ClassName::object());
            self.ancestors.insert(name.clone(), ancestors);
        }
        for name in self.order.clone() {
            self.cache_fields(&name);
        }
    }

    fn cache_fields(&mut self, name: &ClassName) -> Vec<(ClassName, String)> {
        if name.is_object() {
            return Vec::new();
        }
        if let Some(cached) = self.all_fields.get(name) {
            return cached.clone();
        }
        // An unbound parent contributes nothing; the reference check
        // rejects such tables immediately afterwards.
        let Some(decl) = self.decls.get(name) else {
            return Vec::new();
        };
        let parent = decl.parent.clone();
        let own = decl.fields.clone();
        let mut fields = self.cache_fields(&parent);
        fields.extend(own);
        self.all_fields.insert(name.clone(), fields.clone());
        fields
    }

    pub fn is_empty(&self) -> bool {
        self.decls.is_empty()
    }

    pub fn len(&self) -> usize {
        self.decls.len()
    }

    pub fn get(&self, name: &ClassName) -> Option<&ClassDecl> {
        self.decls.get(name)
    }

    /// True when `name` is `Object` or a declared class.
    pub fn is_defined(&self, name: &ClassName) -> bool {
        name.is_object() || self.decls.contains_key(name)
    }

    /// Declared class names, in declaration order (excludes `Object`).
    pub fn names_in_order(&self) -> &[ClassName] {
        &self.order
    }

    pub fn decls_in_order(&self) -> impl Iterator<Item = &ClassDecl> {
        self.order.iter().map(|n| &self.decls[n])
    }

    /// Every method branch in the table, in (class declaration, method
    /// declaration) order.
    pub fn all_branches(&self) -> impl Iterator<Item = &MethodBranch> {
        self.decls_in_order().flat_map(|d| d.methods.iter())
    }

    pub fn parent(&self, name: &ClassName) -> Option<&ClassName> {
        self.decls.get(name).map(|d| &d.parent)
    }

    /// Superclass chain starting at `name` (inclusive), excluding `Object`.
    pub fn chain<'a>(&'a self, name: &'a ClassName) -> Vec<&'a ClassName> {
        let mut out = Vec::new();
        let mut cur = name;
        while !cur.is_object() {
            match self.decls.get(cur) {
                Some(decl) => {
                    out.push(cur);
                    cur = &decl.parent;
                }
                None => break,
            }
        }
        out
    }

    /// Nominal subtyping: true iff `sup` is reachable from `sub` by zero or
    /// more parent steps. Errors when either name is unbound.
    pub fn is_subtype(&self, sub: &ClassName, sup: &ClassName) -> Result<bool, TableError> {
        if !self.is_defined(sub) {
            return Err(TableError::UnknownClass(sub.clone()));
        }
        if !self.is_defined(sup) {
            return Err(TableError::UnknownClass(sup.clone()));
        }
        Ok(self.subtype(sub, sup))
    }

    /// Total subtyping check used internally once names are known bound:
    /// reflexive, and every class is below `Object`. Unbound names are only
    /// subtypes of themselves and `Object`.
    pub fn subtype(&self, sub: &ClassName, sup: &ClassName) -> bool {
        if sub == sup || sup.is_object() {
            return true;
        }
        self.ancestors
            .get(sub)
            .is_some_and(|ancestors| ancestors.contains(sup))
    }

    /// Pointwise subtyping over equal-length sequences.
    pub fn subtype_seq(&self, subs: &[ClassName], sups: &[ClassName]) -> bool {
        subs.len() == sups.len()
            && subs
                .iter()
                .zip(sups.iter())
                .all(|(a, b)| self.subtype(a, b))
    }

    /// All fields of `name`, superclass fields first.
    pub fn fields(&self, name: &ClassName) -> Result<Vec<(ClassName, String)>, TableError> {
        self.fields_ref(name)
            .map(<[_]>::to_vec)
            .ok_or_else(|| TableError::UnknownClass(name.clone()))
    }

    /// Borrowing variant of [`ClassTable::fields`]; `None` for unbound
    /// names.
    pub fn fields_ref(&self, name: &ClassName) -> Option<&[(ClassName, String)]> {
        if name.is_object() {
            return Some(&[]);
        }
        self.all_fields.get(name).map(Vec::as_slice)
    }

    /// Pointwise maximal lower bound of two class sequences.
    ///
    /// Under single inheritance, two classes have a lower bound only when
    /// one is a subclass of the other, so each position picks the smaller
    /// class. Returns `None` when any position is incomparable.
    pub fn pointwise_meet(
        &self,
        left: &[ClassName],
        right: &[ClassName],
    ) -> Result<Option<Vec<ClassName>>, TableError> {
        if left.len() != right.len() {
            return Err(TableError::LengthMismatch {
                left: left.len(),
                right: right.len(),
            });
        }
        let mut out = Vec::with_capacity(left.len());
        for (c, d) in left.iter().zip(right.iter()) {
            if self.subtype(c, d) {
                out.push(c.clone());
            } else if self.subtype(d, c) {
                out.push(d.clone());
            } else {
                return Ok(None);
            }
        }
        Ok(Some(out))
    }

    fn check_acyclic(&self) -> Result<(), TableError> {
        for start in &self.order {
            let mut cur = start;
            let mut steps = 0usize;
            while let Some(decl) = self.decls.get(cur) {
                cur = &decl.parent;
                steps += 1;
                if steps > self.decls.len() {
                    return Err(TableError::CycleInExtends(start.clone()));
                }
            }
        }
        Ok(())
    }

    fn check_references(&self) -> Result<(), TableError> {
        let check = |name: &ClassName, context: String| -> Result<(), TableError> {
            if self.is_defined(name) {
                Ok(())
            } else {
                Err(TableError::UnknownClassReference {
                    name: name.clone(),
                    context,
                })
            }
        };
        for decl in self.decls_in_order() {
            check(&decl.parent, format!("as parent of `{}`", decl.name))?;
            for (ty, field) in &decl.fields {
                check(ty, format!("as type of field `{}.{}`", decl.name, field))?;
            }
            for (ty, _) in &decl.ctor.params {
                check(ty, format!("in constructor of `{}`", decl.name))?;
            }
            for m in &decl.methods {
                for (ty, _) in &m.params {
                    check(ty, format!("as parameter type of `{}`", m.signature()))?;
                }
                check(
                    &m.return_type,
                    format!("as return type of `{}`", m.signature()),
                )?;
                self.check_expr_references(&m.body, &m.signature())?;
            }
        }
        Ok(())
    }

    fn check_expr_references(&self, e: &Expr, context: &str) -> Result<(), TableError> {
        match e {
            Expr::Var(_) => Ok(()),
            Expr::FieldAccess(inner, _) => self.check_expr_references(inner, context),
            Expr::Cast(ty, inner) => {
                if !self.is_defined(ty) {
                    return Err(TableError::UnknownClassReference {
                        name: ty.clone(),
                        context: format!("in a cast inside `{context}`"),
                    });
                }
                self.check_expr_references(inner, context)
            }
            Expr::New(ty, args) => {
                if !self.is_defined(ty) {
                    return Err(TableError::UnknownClassReference {
                        name: ty.clone(),
                        context: format!("in `new` inside `{context}`"),
                    });
                }
                args.iter()
                    .try_for_each(|a| self.check_expr_references(a, context))
            }
            Expr::Invoke(_, args) => args
                .iter()
                .try_for_each(|a| self.check_expr_references(a, context)),
        }
    }

    fn check_field_shadowing(&self) -> Result<(), TableError> {
        for decl in self.decls_in_order() {
            let inherited: BTreeSet<String> = self
                .fields(&decl.parent)?
                .into_iter()
                .map(|(_, f)| f)
                .collect();
            let mut seen: BTreeSet<&str> = BTreeSet::new();
            for (_, field) in &decl.fields {
                if inherited.contains(field.as_str()) || !seen.insert(field.as_str()) {
                    return Err(TableError::FieldShadowing {
                        class: decl.name.clone(),
                        field: field.clone(),
                    });
                }
            }
        }
        Ok(())
    }

    fn check_method_duplicates(&self) -> Result<(), TableError> {
        for decl in self.decls_in_order() {
            for (i, m) in decl.methods.iter().enumerate() {
                for other in &decl.methods[i + 1..] {
                    if m.name == other.name && m.param_types() == other.param_types() {
                        return Err(TableError::DuplicateMethod {
                            class: decl.name.clone(),
                            method: m.name.clone(),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn check_constructors(&self) -> Result<(), TableError> {
        for decl in self.decls_in_order() {
            self.validate_constructor(decl)?;
        }
        Ok(())
    }

    /// Checks the stylized constructor shape of one declaration against
    /// this table: parameters are the inherited fields followed by the
    /// declared fields, `super(...)` passes exactly the inherited fields,
    /// and the initializers assign exactly the declared fields.
    pub fn validate_constructor(&self, decl: &ClassDecl) -> Result<(), TableError> {
        let fail = |detail: String| TableError::MalformedConstructor {
            class: decl.name.clone(),
            detail,
        };
        let ctor = &decl.ctor;
        if ctor.name != decl.name {
            return Err(fail(format!(
                "constructor is named `{}`, expected `{}`",
                ctor.name, decl.name
            )));
        }
        let inherited = self.fields(&decl.parent)?;
        let expected: Vec<(ClassName, String)> = inherited
            .iter()
            .cloned()
            .chain(decl.fields.iter().cloned())
            .collect();
        if ctor.params != expected {
            return Err(fail(format!(
                "parameters must be the inherited fields followed by the declared fields \
                 (expected {} parameters, found {})",
                expected.len(),
                ctor.params.len()
            )));
        }
        let super_expected: Vec<&String> = inherited.iter().map(|(_, f)| f).collect();
        if ctor.super_args.iter().collect::<Vec<_>>() != super_expected {
            return Err(fail(
                "super(...) must pass exactly the inherited fields in order".to_string(),
            ));
        }
        if ctor.inits.len() != decl.fields.len()
            || ctor
                .inits
                .iter()
                .zip(decl.fields.iter())
                .any(|((lhs, rhs), (_, f))| lhs != f || rhs != f)
        {
            return Err(fail(
                "initializers must be `this.f = f;` for exactly the declared fields in order"
                    .to_string(),
            ));
        }
        Ok(())
    }
}
