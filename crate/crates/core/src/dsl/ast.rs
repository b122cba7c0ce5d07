use std::fmt;

use crate::apispec::Literal;
use crate::span::SourceSpan;

#[derive(Clone, Debug, PartialEq)]
pub struct Ident {
    pub name: String,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lit {
    pub value: Literal,
    pub span: SourceSpan,
}

impl Lit {
    pub fn as_text(&self) -> Option<&str> {
        match &self.value {
            Literal::Text(s) => Some(s),
            _ => None,
        }
    }
}

/// `name=value` in an entity instantiation.
#[derive(Clone, Debug, PartialEq)]
pub struct Arg {
    pub name: Ident,
    pub value: Lit,
    pub span: SourceSpan,
}

/// The parenthesised `(train, val, test)` fractions of a split.
#[derive(Clone, Debug, PartialEq)]
pub struct Ratios {
    pub values: [Lit; 3],
    pub span: SourceSpan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RequireOp {
    AtLeast,
    Above,
}

impl RequireOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RequireOp::AtLeast => ">=",
            RequireOp::Above => ">",
        }
    }
}

impl fmt::Display for RequireOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum StmtKind {
    /// `var = load "path" [schema "path"]`
    Load { var: Ident, path: Lit, schema: Option<Lit> },
    /// `train, val, test = split source ratios (a, b, c) [stratify "col"] [seed n]`
    Split {
        train: Ident,
        val: Ident,
        test: Ident,
        source: Ident,
        ratios: Ratios,
        stratify: Option<Lit>,
        seed: Option<Lit>,
    },
    /// `var = Entity(args) fit on dataset`
    TransformDecl { var: Ident, entity: Ident, args: Vec<Arg>, fit_on: Ident },
    /// `var = apply transform dataset`
    Apply { var: Ident, transform: Ident, dataset: Ident },
    /// `var = Entity(args)`
    ModelDecl { var: Ident, entity: Ident, args: Vec<Arg> },
    /// `set model.param = value`
    SetParam { model: Ident, param: Ident, value: Lit },
    /// `fit model on dataset label "col"`
    Fit { model: Ident, dataset: Ident, label: Lit },
    /// `[var =] call model.method dataset`
    Call { var: Option<Ident>, model: Ident, method: Ident, dataset: Ident },
    /// `var = evaluate metric model on dataset`
    Evaluate { var: Ident, metric: Ident, model: Ident, dataset: Ident },
    /// `require metric (>=|>) threshold`
    Require { metric: Ident, op: RequireOp, threshold: Lit },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: SourceSpan,
}

impl Stmt {
    /// Short construct name, also used as the backend template key.
    pub fn construct(&self) -> &'static str {
        match self.kind {
            StmtKind::Load { .. } => "load",
            StmtKind::Split { .. } => "split",
            StmtKind::TransformDecl { .. } => "transform",
            StmtKind::Apply { .. } => "apply",
            StmtKind::ModelDecl { .. } => "model",
            StmtKind::SetParam { .. } => "set",
            StmtKind::Fit { .. } => "fit",
            StmtKind::Call { .. } => "call",
            StmtKind::Evaluate { .. } => "evaluate",
            StmtKind::Require { .. } => "require",
        }
    }

    /// Variables this statement reads, in a fixed per-variant order.
    pub fn uses(&self) -> Vec<&Ident> {
        match &self.kind {
            StmtKind::Load { .. } | StmtKind::ModelDecl { .. } | StmtKind::Require { .. } => vec![],
            StmtKind::Split { source, .. } => vec![source],
            StmtKind::TransformDecl { fit_on, .. } => vec![fit_on],
            StmtKind::Apply { transform, dataset, .. } => vec![transform, dataset],
            StmtKind::SetParam { model, .. } => vec![model],
            StmtKind::Fit { model, dataset, .. }
            | StmtKind::Call { model, dataset, .. }
            | StmtKind::Evaluate { model, dataset, .. } => vec![model, dataset],
        }
    }

    /// Variables this statement binds.
    pub fn defines(&self) -> Vec<&Ident> {
        match &self.kind {
            StmtKind::Load { var, .. }
            | StmtKind::TransformDecl { var, .. }
            | StmtKind::Apply { var, .. }
            | StmtKind::ModelDecl { var, .. }
            | StmtKind::Evaluate { var, .. } => vec![var],
            StmtKind::Call { var, .. } => var.iter().collect(),
            StmtKind::Split { train, val, test, .. } => vec![train, val, test],
            StmtKind::SetParam { .. } | StmtKind::Fit { .. } | StmtKind::Require { .. } => vec![],
        }
    }

    fn visit_spans(&mut self, f: &mut dyn FnMut(&mut SourceSpan)) {
        f(&mut self.span);
        let mut idents: Vec<&mut Ident> = Vec::new();
        let mut lits: Vec<&mut Lit> = Vec::new();
        match &mut self.kind {
            StmtKind::Load { var, path, schema } => {
                idents.push(var);
                lits.push(path);
                lits.extend(schema.as_mut());
            }
            StmtKind::Split { train, val, test, source, ratios, stratify, seed } => {
                idents.extend([train, val, test, source]);
                f(&mut ratios.span);
                lits.extend(ratios.values.iter_mut());
                lits.extend(stratify.as_mut());
                lits.extend(seed.as_mut());
            }
            StmtKind::TransformDecl { var, entity, args, fit_on } => {
                idents.extend([var, entity, fit_on]);
                for a in args {
                    f(&mut a.span);
                    idents.push(&mut a.name);
                    lits.push(&mut a.value);
                }
            }
            StmtKind::ModelDecl { var, entity, args } => {
                idents.extend([var, entity]);
                for a in args {
                    f(&mut a.span);
                    idents.push(&mut a.name);
                    lits.push(&mut a.value);
                }
            }
            StmtKind::Apply { var, transform, dataset } => idents.extend([var, transform, dataset]),
            StmtKind::SetParam { model, param, value } => {
                idents.extend([model, param]);
                lits.push(value);
            }
            StmtKind::Fit { model, dataset, label } => {
                idents.extend([model, dataset]);
                lits.push(label);
            }
            StmtKind::Call { var, model, method, dataset } => {
                idents.extend(var.as_mut());
                idents.extend([model, method, dataset]);
            }
            StmtKind::Evaluate { var, metric, model, dataset } => idents.extend([var, metric, model, dataset]),
            StmtKind::Require { metric, threshold, .. } => {
                idents.push(metric);
                lits.push(threshold);
            }
        }
        for i in idents {
            f(&mut i.span);
        }
        for l in lits {
            f(&mut l.span);
        }
    }

    /// A copy with every span reset, for structural comparison.
    pub fn without_spans(&self) -> Stmt {
        let mut s = self.clone();
        s.visit_spans(&mut |sp| *sp = SourceSpan::default());
        s
    }

    /// Every span in the statement, including its own.
    pub fn spans(&self) -> Vec<SourceSpan> {
        let mut out = Vec::new();
        self.clone().visit_spans(&mut |sp| out.push(sp.clone()));
        out
    }
}

/// AST root.
#[derive(Clone, Debug, PartialEq)]
pub struct Pipeline {
    pub name: Ident,
    pub statements: Vec<Stmt>,
    pub span: SourceSpan,
}

impl Pipeline {
    pub fn without_spans(&self) -> Pipeline {
        Pipeline {
            name: Ident { name: self.name.name.clone(), span: SourceSpan::default() },
            statements: self.statements.iter().map(Stmt::without_spans).collect(),
            span: SourceSpan::default(),
        }
    }
}
