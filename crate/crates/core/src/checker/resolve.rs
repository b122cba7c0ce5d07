//! Name resolution: binds every variable use to the statement that defined it.

use std::collections::BTreeMap;

use super::suggest::suggest_fix;
use crate::apispec::{ApiSpec, EntityKind, EntitySpec, Literal};
use crate::diagnostic::{codes, Diagnostic};
use crate::dsl::{Arg, Ident, Pipeline, StmtKind};

pub type BindingId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DatasetRole {
    Raw,
    Train,
    Val,
    Test,
}

impl DatasetRole {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetRole::Raw => "raw",
            DatasetRole::Train => "train",
            DatasetRole::Val => "validation",
            DatasetRole::Test => "test",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BindingKind {
    Dataset {
        role: DatasetRole,
        /// Transforms applied so far, oldest first.
        provenance: Vec<BindingId>,
        /// Index of the `load` statement the data descends from.
        origin: Option<usize>,
    },
    Transform { entity: String, args: Vec<(String, Literal)>, fitted_on: Option<BindingId> },
    Model { entity: String, args: Vec<(String, Literal)> },
    /// Result of `call` or `evaluate`.
    Output,
    /// The defining statement failed to resolve; uses are not reported again.
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Binding {
    pub var: String,
    pub stmt: usize,
    pub kind: BindingKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedProgram {
    pub ast: Pipeline,
    /// Every binding ever made, in program order.
    pub bindings: Vec<Binding>,
    /// Per statement, the binding each entry of `Stmt::uses()` resolved to.
    pub refs: Vec<Vec<Option<BindingId>>>,
    /// Variable name to its binding at the end of the program.
    pub scope: BTreeMap<String, BindingId>,
}

impl ResolvedProgram {
    /// The binding of the `k`-th use of statement `stmt`.
    pub fn use_of(&self, stmt: usize, k: usize) -> Option<BindingId> {
        self.refs.get(stmt)?.get(k).copied().flatten()
    }

    pub fn binding(&self, id: BindingId) -> &Binding {
        &self.bindings[id]
    }

    /// The binding a statement created for the named variable.
    pub fn defined_by(&self, stmt: usize, var: &str) -> Option<BindingId> {
        self.bindings.iter().position(|b| b.stmt == stmt && b.var == var)
    }

    /// Entity spec behind a model or transform binding.
    pub fn entity<'s>(&self, spec: &'s ApiSpec, id: BindingId) -> Option<&'s EntitySpec> {
        match &self.bindings[id].kind {
            BindingKind::Model { entity, .. } | BindingKind::Transform { entity, .. } => spec.entities.get(entity),
            _ => None,
        }
    }

    pub fn dataset(&self, id: BindingId) -> Option<(DatasetRole, &[BindingId], Option<usize>)> {
        match &self.bindings[id].kind {
            BindingKind::Dataset { role, provenance, origin } => Some((*role, provenance, *origin)),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Want {
    Dataset,
    Model,
    Transform,
}

impl Want {
    fn noun(self) -> &'static str {
        match self {
            Want::Dataset => "a dataset",
            Want::Model => "a model",
            Want::Transform => "a fitted transform",
        }
    }
}

fn kind_noun(kind: &BindingKind) -> &'static str {
    match kind {
        BindingKind::Dataset { .. } => "a dataset",
        BindingKind::Transform { .. } => "a transform",
        BindingKind::Model { .. } => "a model",
        BindingKind::Output => "a result value",
        BindingKind::Unknown => "an unresolved value",
    }
}

struct Resolver<'a> {
    spec: &'a ApiSpec,
    bindings: Vec<Binding>,
    scope: BTreeMap<String, BindingId>,
    diags: Vec<Diagnostic>,
}

impl<'a> Resolver<'a> {
    fn bind(&mut self, var: &Ident, stmt: usize, kind: BindingKind) -> BindingId {
        let id = self.bindings.len();
        self.bindings.push(Binding { var: var.name.clone(), stmt, kind });
        self.scope.insert(var.name.clone(), id);
        id
    }

    fn lookup(&mut self, ident: &Ident, want: Want) -> Option<BindingId> {
        let Some(&id) = self.scope.get(&ident.name) else {
            let names: Vec<&String> = self.scope.keys().collect();
            let mut d = Diagnostic::new(
                codes::UNBOUND_VAR,
                ident.span.clone(),
                format!("variable `{}` is used before it is bound", ident.name),
            );
            for s in suggest_fix(&ident.name, &names) {
                d = d.with_fix(ident.span.clone(), s.clone(), format!("did you mean `{s}`?"));
            }
            self.diags.push(d);
            return None;
        };
        let kind = &self.bindings[id].kind;
        let ok = matches!(
            (want, kind),
            (_, BindingKind::Unknown)
                | (Want::Dataset, BindingKind::Dataset { .. })
                | (Want::Model, BindingKind::Model { .. })
                | (Want::Transform, BindingKind::Transform { .. })
        );
        if !ok {
            let msg = format!("`{}` is {}, but {} is expected here", ident.name, kind_noun(kind), want.noun());
            self.diags.push(Diagnostic::new(codes::WRONG_BINDING, ident.span.clone(), msg));
        }
        Some(id)
    }

    fn entity(&mut self, ident: &Ident, want: EntityKind) -> Option<&'a EntitySpec> {
        let Some(e) = self.spec.entities.get(&ident.name) else {
            let names: Vec<&String> = self.spec.entities.keys().collect();
            let mut d = Diagnostic::new(codes::UNKNOWN_ENTITY, ident.span.clone(), format!("unknown entity `{}`", ident.name));
            for s in suggest_fix(&ident.name, &names) {
                d = d.with_fix(ident.span.clone(), s.clone(), format!("did you mean `{s}`?"));
            }
            self.diags.push(d);
            return None;
        };
        if e.kind != want {
            let msg = match want {
                EntityKind::Model => format!("`{}` is a transform; declare it with `fit on <dataset>`", e.name),
                EntityKind::Transform => format!("`{}` is a model; models are declared without `fit on`", e.name),
            };
            self.diags.push(Diagnostic::new(codes::WRONG_BINDING, ident.span.clone(), msg));
            return None;
        }
        Some(e)
    }

    fn param_name(&mut self, entity: &EntitySpec, ident: &Ident) -> bool {
        if entity.param(&ident.name).is_some() {
            return true;
        }
        let names: Vec<&String> = entity.params.iter().map(|p| &p.name).collect();
        let mut d = Diagnostic::new(
            codes::UNKNOWN_PARAM,
            ident.span.clone(),
            format!("`{}` has no parameter `{}`", entity.name, ident.name),
        );
        for s in suggest_fix(&ident.name, &names) {
            d = d.with_fix(ident.span.clone(), s.clone(), format!("did you mean `{s}`?"));
        }
        self.diags.push(d);
        false
    }

    fn args(&mut self, entity: Option<&EntitySpec>, args: &[Arg]) -> Vec<(String, Literal)> {
        let mut seen: Vec<&str> = Vec::new();
        for a in args {
            if seen.contains(&a.name.name.as_str()) {
                self.diags.push(Diagnostic::new(
                    codes::DUPLICATE_ARG,
                    a.span.clone(),
                    format!("argument `{}` is given more than once", a.name.name),
                ));
            }
            seen.push(&a.name.name);
            if let Some(e) = entity {
                self.param_name(e, &a.name);
            }
        }
        args.iter().map(|a| (a.name.name.clone(), a.value.value.clone())).collect()
    }

    fn metric(&mut self, ident: &Ident) {
        if self.spec.metrics.contains_key(&ident.name) {
            return;
        }
        let names: Vec<&String> = self.spec.metrics.keys().collect();
        let mut d = Diagnostic::new(codes::UNKNOWN_METRIC, ident.span.clone(), format!("unknown metric `{}`", ident.name));
        for s in suggest_fix(&ident.name, &names) {
            d = d.with_fix(ident.span.clone(), s.clone(), format!("did you mean `{s}`?"));
        }
        self.diags.push(d);
    }

    fn dataset_info(&self, id: Option<BindingId>) -> (Vec<BindingId>, Option<usize>, Option<DatasetRole>) {
        match id.map(|i| &self.bindings[i].kind) {
            Some(BindingKind::Dataset { role, provenance, origin }) => (provenance.clone(), *origin, Some(*role)),
            _ => (Vec::new(), None, None),
        }
    }
}

/// Resolves every name in `ast` against `spec`. Resolution continues past
/// errors; a statement whose entity is unknown still binds its variable so
/// later uses are not reported as unbound.
pub fn resolve(ast: &Pipeline, spec: &ApiSpec) -> (ResolvedProgram, Vec<Diagnostic>) {
    let mut r = Resolver { spec, bindings: Vec::new(), scope: BTreeMap::new(), diags: Vec::new() };
    let mut refs = Vec::with_capacity(ast.statements.len());
    for (i, stmt) in ast.statements.iter().enumerate() {
        let mut used = Vec::new();
        match &stmt.kind {
            StmtKind::Load { var, .. } => {
                r.bind(var, i, BindingKind::Dataset { role: DatasetRole::Raw, provenance: vec![], origin: Some(i) });
            }
            StmtKind::Split { train, val, test, source, .. } => {
                let src = r.lookup(source, Want::Dataset);
                used.push(src);
                let (provenance, origin, _) = r.dataset_info(src);
                let unknown = src.is_none_or(|s| r.bindings[s].kind == BindingKind::Unknown);
                for (var, role) in [(train, DatasetRole::Train), (val, DatasetRole::Val), (test, DatasetRole::Test)] {
                    let kind = if unknown && src.is_some() {
                        BindingKind::Unknown
                    } else {
                        BindingKind::Dataset { role, provenance: provenance.clone(), origin }
                    };
                    r.bind(var, i, kind);
                }
            }
            StmtKind::TransformDecl { var, entity, args, fit_on } => {
                let e = r.entity(entity, EntityKind::Transform);
                let args = r.args(e, args);
                let fitted_on = r.lookup(fit_on, Want::Dataset);
                used.push(fitted_on);
                let kind = match e {
                    Some(e) => BindingKind::Transform { entity: e.name.clone(), args, fitted_on },
                    None => BindingKind::Unknown,
                };
                r.bind(var, i, kind);
            }
            StmtKind::Apply { var, transform, dataset } => {
                let t = r.lookup(transform, Want::Transform);
                let d = r.lookup(dataset, Want::Dataset);
                used.extend([t, d]);
                let (mut provenance, origin, role) = r.dataset_info(d);
                let kind = match role {
                    Some(role) => {
                        if let Some(t) = t {
                            provenance.push(t);
                        }
                        BindingKind::Dataset { role, provenance, origin }
                    }
                    None => BindingKind::Unknown,
                };
                r.bind(var, i, kind);
            }
            StmtKind::ModelDecl { var, entity, args } => {
                let e = r.entity(entity, EntityKind::Model);
                let args = r.args(e, args);
                let kind = match e {
                    Some(e) => BindingKind::Model { entity: e.name.clone(), args },
                    None => BindingKind::Unknown,
                };
                r.bind(var, i, kind);
            }
            StmtKind::SetParam { model, param, .. } => {
                let m = r.lookup(model, Want::Model);
                used.push(m);
                if let Some(BindingKind::Model { entity, .. }) = m.map(|m| r.bindings[m].kind.clone()) {
                    if let Some(e) = spec.entities.get(&entity) {
                        r.param_name(e, param);
                    }
                }
            }
            StmtKind::Fit { model, dataset, .. } => {
                used.push(r.lookup(model, Want::Model));
                used.push(r.lookup(dataset, Want::Dataset));
            }
            StmtKind::Call { var, model, method, dataset } => {
                let m = r.lookup(model, Want::Model);
                used.push(m);
                used.push(r.lookup(dataset, Want::Dataset));
                if let Some(BindingKind::Model { entity, .. }) = m.map(|m| r.bindings[m].kind.clone()) {
                    if let Some(e) = spec.entities.get(&entity) {
                        if e.method(&method.name).is_none() {
                            let names: Vec<&String> = e.methods.iter().map(|m| &m.name).collect();
                            let mut d = Diagnostic::new(
                                codes::UNKNOWN_METHOD,
                                method.span.clone(),
                                format!("`{}` has no method `{}`", e.name, method.name),
                            );
                            for s in suggest_fix(&method.name, &names) {
                                d = d.with_fix(method.span.clone(), s.clone(), format!("did you mean `{s}`?"));
                            }
                            r.diags.push(d);
                        }
                    }
                }
                if let Some(v) = var {
                    r.bind(v, i, BindingKind::Output);
                }
            }
            StmtKind::Evaluate { var, metric, model, dataset } => {
                r.metric(metric);
                used.push(r.lookup(model, Want::Model));
                used.push(r.lookup(dataset, Want::Dataset));
                r.bind(var, i, BindingKind::Output);
            }
            StmtKind::Require { metric, .. } => r.metric(metric),
        }
        debug_assert_eq!(used.len(), stmt.uses().len());
        refs.push(used);
    }
    let program = ResolvedProgram { ast: ast.clone(), bindings: r.bindings, refs, scope: r.scope };
    (program, r.diags)
}
