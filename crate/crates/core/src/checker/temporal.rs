//! Temporal constraints, checked by simulating each model's typestate over
//! the straight-line program.

use std::collections::BTreeMap;

use super::resolve::{BindingId, BindingKind, ResolvedProgram};
use crate::apispec::{ApiSpec, EntitySpec, Literal, TemporalRule};
use crate::diagnostic::{codes, Diagnostic};
use crate::dsl::StmtKind;
use crate::span::SourceSpan;

/// What has happened to one model or transform so far.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ModelTypestate {
    /// Explicit parameter values: constructor arguments, then `set` effects.
    pub params_set: BTreeMap<String, Literal>,
    pub methods_called: Vec<String>,
    /// Parameter values in force at the first `fit`.
    pub fitted_with: Option<BTreeMap<String, Literal>>,
    /// Line of the latest `set` of each parameter made after the first `fit`.
    pub set_after_fit: BTreeMap<String, usize>,
}

impl ModelTypestate {
    fn value<'a>(params: &'a BTreeMap<String, Literal>, entity: &'a EntitySpec, name: &str) -> Option<&'a Literal> {
        params.get(name).or_else(|| entity.param(name)?.default.as_ref())
    }

    fn called(&self, method: &str) -> bool {
        self.methods_called.iter().any(|m| m == method)
    }
}

/// The method an `evaluate` statement invokes on its model.
pub const EVALUATE_METHOD: &str = "predict";
/// The method an `apply` statement invokes on its transform.
pub const APPLY_METHOD: &str = "transform";

struct Sim<'a> {
    spec: &'a ApiSpec,
    states: BTreeMap<BindingId, ModelTypestate>,
    out: Vec<Diagnostic>,
}

impl<'a> Sim<'a> {
    fn invoke(&mut self, p: &ResolvedProgram, id: BindingId, method: &str, span: &SourceSpan) {
        let Some(entity) = p.entity(self.spec, id) else { return };
        if entity.method(method).is_none() {
            return;
        }
        let var = &p.binding(id).var;
        let state = self.states.entry(id).or_default();
        for rule in &entity.temporal {
            match rule {
                TemporalRule::MustPrecede { first, second } if second == method => {
                    if !state.called(first) {
                        self.out.push(Diagnostic::new(
                            codes::CALL_ORDER,
                            span.clone(),
                            format!("{first} must be called before {method} on `{var}`"),
                        ));
                    }
                }
                TemporalRule::RequireSetBefore { param, required_value, method: guarded } if guarded == method => {
                    let params = state.fitted_with.as_ref().unwrap_or(&state.params_set);
                    let ok = ModelTypestate::value(params, entity, param).is_some_and(|v| v.same_value(required_value));
                    if !ok {
                        let mut msg = format!("{param} must be set to {required_value} prior to the first call of fit");
                        if let Some(line) = state.set_after_fit.get(param) {
                            msg.push_str(&format!(" (it is set on line {line}, after fit)"));
                        }
                        msg.push_str(&format!(" to call {method} on `{var}`"));
                        self.out.push(Diagnostic::new(codes::SET_BEFORE_FIT, span.clone(), msg));
                    }
                }
                _ => {}
            }
        }
        if method == "fit" && state.fitted_with.is_none() {
            state.fitted_with = Some(state.params_set.clone());
        }
        state.methods_called.push(method.to_string());
    }
}

/// Replays the program in statement order and reports ordering violations
/// at the statement that performs the offending call.
pub fn check_temporal(p: &ResolvedProgram, spec: &ApiSpec) -> Vec<Diagnostic> {
    simulate(p, spec).1
}

/// Typestates at the end of the program, keyed by binding, plus the
/// diagnostics produced along the way.
pub fn simulate(p: &ResolvedProgram, spec: &ApiSpec) -> (BTreeMap<BindingId, ModelTypestate>, Vec<Diagnostic>) {
    let mut sim = Sim { spec, states: BTreeMap::new(), out: Vec::new() };
    for (i, stmt) in p.ast.statements.iter().enumerate() {
        match &stmt.kind {
            StmtKind::ModelDecl { var, args, .. } | StmtKind::TransformDecl { var, args, .. } => {
                let Some(id) = p.defined_by(i, &var.name) else { continue };
                if !matches!(p.binding(id).kind, BindingKind::Model { .. } | BindingKind::Transform { .. }) {
                    continue;
                }
                let mut state = ModelTypestate::default();
                for a in args {
                    state.params_set.insert(a.name.name.clone(), a.value.value.clone());
                }
                sim.states.insert(id, state);
                if matches!(stmt.kind, StmtKind::TransformDecl { .. }) {
                    sim.invoke(p, id, "fit", &stmt.span);
                }
            }
            StmtKind::SetParam { param, value, .. } => {
                let Some(id) = p.use_of(i, 0) else { continue };
                if let Some(state) = sim.states.get_mut(&id) {
                    state.params_set.insert(param.name.clone(), value.value.clone());
                    if state.fitted_with.is_some() {
                        state.set_after_fit.insert(param.name.clone(), stmt.span.start_line);
                    }
                }
            }
            StmtKind::Fit { .. } => {
                if let Some(id) = p.use_of(i, 0) {
                    sim.invoke(p, id, "fit", &stmt.span);
                }
            }
            StmtKind::Call { method, .. } => {
                if let Some(id) = p.use_of(i, 0) {
                    sim.invoke(p, id, &method.name, &stmt.span);
                }
            }
            StmtKind::Evaluate { .. } => {
                if let Some(id) = p.use_of(i, 0) {
                    sim.invoke(p, id, EVALUATE_METHOD, &stmt.span);
                }
            }
            StmtKind::Apply { .. } => {
                if let Some(id) = p.use_of(i, 0) {
                    sim.invoke(p, id, APPLY_METHOD, &stmt.span);
                }
            }
            StmtKind::Load { .. } | StmtKind::Split { .. } | StmtKind::Require { .. } => {}
        }
    }
    (sim.states, sim.out)
}
