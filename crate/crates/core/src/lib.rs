//! Static checking and guidance for supervised-learning pipeline programs.
//!
//! The crate is organised along the toolchain's stages:
//!
//! * [`apispec`] loads declarative API constraint specs (`.mlspec`).
//! * [`dsl`] tokenizes, parses and formats pipeline programs (`.mlp`).
//! * [`checker`] resolves names and runs the analysis passes, producing
//!   [`diagnostic::Diagnostic`]s with quickfixes.
//! * [`profiler`] computes dataset statistics, audits splits and gives advice.
//! * [`codegen`] renders checked programs through backend templates and
//!   writes run manifests.

pub mod apispec;
pub mod bundled;
pub mod checker;
pub mod codegen;
pub mod diagnostic;
pub mod dsl;
pub mod lexer;
pub mod profiler;
pub mod span;
