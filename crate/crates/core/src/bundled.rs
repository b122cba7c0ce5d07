//! Data files shipped with the toolchain.

use crate::apispec::{merge_specs, parse_api_spec, ApiSpec};

pub const SVC_SPEC: &str = include_str!("../../../data/specs/svc.mlspec");
pub const PREPROCESSING_SPEC: &str = include_str!("../../../data/specs/preprocessing.mlspec");
pub const METRICS_SPEC: &str = include_str!("../../../data/specs/metrics.mlspec");
pub const REGISTRY: &str = include_str!("../../../data/diagnostics.registry");
pub const REFERENCE_BACKEND: &str = include_str!("../../../data/backends/reference.mlbackend");

/// The bundled specs, as `(file name, source)` pairs.
pub const SPECS: &[(&str, &str)] = &[
    ("svc.mlspec", SVC_SPEC),
    ("preprocessing.mlspec", PREPROCESSING_SPEC),
    ("metrics.mlspec", METRICS_SPEC),
];

/// All bundled specs merged into one.
pub fn spec() -> ApiSpec {
    let parsed: Vec<(&str, ApiSpec)> = SPECS
        .iter()
        .map(|(name, src)| (*name, parse_api_spec(src).unwrap_or_else(|e| panic!("bundled {name}: {e:?}"))))
        .collect();
    let refs: Vec<(&str, &ApiSpec)> = parsed.iter().map(|(n, s)| (*n, s)).collect();
    merge_specs(&refs).expect("bundled specs are disjoint")
}
