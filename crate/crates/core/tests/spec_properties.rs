use mlguard_core::apispec::{
    merge_specs, parse_api_spec, print_spec, validate_spec, ApiSpec, Capability, CondOp, Condition, ContextWarning,
    EntityKind, EntitySpec, EntityTask, Literal, MethodSpec, MetricSpec, NumKind, ParameterSpec, PrimKind,
    ProblemKind, RefinedType, TemporalRule,
};
use mlguard_core::bundled;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WORDS: &[&str] = &["alpha", "beta", "gamma", "delta", "eps", "zeta", "theta", "kappa"];
const TEXTS: &[&str] = &["a", "b c", "with \"quotes\"", "back\\slash", "x-y", "ünï"];

fn pick<'a>(rng: &mut ChaCha8Rng, from: &[&'a str], n: usize) -> Vec<&'a str> {
    let mut v = from.to_vec();
    v.shuffle(rng);
    v.truncate(n);
    v
}

fn random_type(rng: &mut ChaCha8Rng) -> (RefinedType, Option<Literal>) {
    let keep = rng.gen_bool(0.6);
    let maybe = |_: &mut ChaCha8Rng, l: Literal| keep.then_some(l);
    match rng.gen_range(0..7) {
        0 => {
            let b = rng.gen_bool(0.5);
            (RefinedType::Primitive(PrimKind::Bool), maybe(rng, Literal::Bool(b)))
        }
        1 => (RefinedType::Primitive(PrimKind::Text), { let t = TEXTS[rng.gen_range(0..TEXTS.len())]; maybe(rng, Literal::Text(t.into())) }),
        2 => (RefinedType::Primitive(PrimKind::Int), { let i = rng.gen_range(-50..50); maybe(rng, Literal::Int(i)) }),
        3 => (RefinedType::Primitive(PrimKind::Float), { let x = rng.gen_range(-40..40) as f64 + 0.25; maybe(rng, Literal::Float(x)) }),
        4 => {
            let n = rng.gen_range(1..=TEXTS.len());
            let lits: Vec<String> = pick(rng, TEXTS, n).into_iter().map(String::from).collect();
            let d = Literal::Text(lits[rng.gen_range(0..lits.len())].clone());
            (RefinedType::EnumLiterals(lits), maybe(rng, d))
        }
        5 => {
            let float = rng.gen_bool(0.5);
            let lo = rng.gen_range(-10..10) as f64 + if float && rng.gen_bool(0.5) { 0.5 } else { 0.0 };
            let hi = lo + rng.gen_range(2..20) as f64;
            let (min, max) = match rng.gen_range(0..3) {
                0 => (Some(lo), None),
                1 => (None, Some(hi)),
                _ => (Some(lo), Some(hi)),
            };
            let ty = RefinedType::NumericRange {
                kind: if float { NumKind::Float } else { NumKind::Int },
                min,
                max,
                min_inclusive: min.is_some() && rng.gen_bool(0.5),
                max_inclusive: max.is_some() && rng.gen_bool(0.5),
            };
            let default = match (float, min) {
                (true, Some(lo)) => Literal::Float(lo + 0.5),
                (false, Some(lo)) => Literal::Int(lo as i64 + 1),
                (true, None) => Literal::Float(hi - 0.5),
                (false, None) => Literal::Int(hi as i64 - 1),
            };
            (ty, maybe(rng, default))
        }
        _ => {
            let lits: Vec<String> = pick(rng, TEXTS, 2).into_iter().map(String::from).collect();
            let d = Literal::Text(lits[0].clone());
            let note = if rng.gen_bool(0.5) { String::new() } else { "note text".to_string() };
            let ty = RefinedType::Union(vec![
                RefinedType::EnumLiterals(lits),
                RefinedType::CallableSig { arity: rng.gen_range(0..4), note },
            ]);
            (ty, maybe(rng, d))
        }
    }
}

fn random_entity(rng: &mut ChaCha8Rng, name: String) -> EntitySpec {
    let kind = if rng.gen_bool(0.5) { EntityKind::Model } else { EntityKind::Transform };
    let task = *[EntityTask::Classification, EntityTask::Regression, EntityTask::Both, EntityTask::None]
        .choose(rng)
        .unwrap();
    let mut provides = Vec::new();
    for cap in [Capability::Imputation, Capability::Encoding, Capability::Scaling] {
        if kind == EntityKind::Transform && rng.gen_bool(0.4) {
            provides.push(cap);
        }
    }
    let n = rng.gen_range(0..5);
    let mut params: Vec<ParameterSpec> = Vec::new();
    for pname in pick(rng, WORDS, n) {
        let (ty, default) = random_type(rng);
        let relevant_when = params.iter().find(|p| p.ty == RefinedType::Primitive(PrimKind::Bool)).and_then(|ctrl| {
            rng.gen_bool(0.5).then(|| Condition {
                param: ctrl.name.clone(),
                op: if rng.gen_bool(0.5) { CondOp::Eq } else { CondOp::Ne },
                value: Literal::Bool(rng.gen_bool(0.5)),
            })
        });
        let context_warning = rng
            .gen_bool(0.2)
            .then(|| ContextWarning { tag: "multithreaded".into(), message: "careful \"here\"".into() });
        params.push(ParameterSpec { name: pname.to_string(), ty, default, relevant_when, context_warning });
    }
    let mut methods = vec![MethodSpec { name: "fit".into(), params: vec![PrimKind::Table], returns: None }];
    if rng.gen_bool(0.7) {
        methods.push(MethodSpec { name: "predict".into(), params: vec![PrimKind::Table], returns: Some(PrimKind::Column) });
    }
    let mut temporal = Vec::new();
    if methods.len() > 1 {
        temporal.push(TemporalRule::MustPrecede { first: "fit".into(), second: "predict".into() });
        if let Some(b) = params.iter().find(|p| p.ty == RefinedType::Primitive(PrimKind::Bool)) {
            temporal.push(TemporalRule::RequireSetBefore {
                param: b.name.clone(),
                required_value: Literal::Bool(true),
                method: "predict".into(),
            });
        }
    }
    EntitySpec { name, kind, task, provides, params, methods, temporal }
}

/// A valid spec whose entity and metric names carry `prefix`.
fn random_spec(seed: u64, prefix: &str) -> ApiSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = ApiSpec { version: "1.0".into(), ..ApiSpec::default() };
    for i in 0..rng.gen_range(0..4) {
        let name = format!("{prefix}Entity{i}");
        spec.entities.insert(name.clone(), random_entity(&mut rng, name));
    }
    for i in 0..rng.gen_range(0..3) {
        let name = format!("{prefix}metric{i}");
        let task = if rng.gen_bool(0.5) { ProblemKind::Classification } else { ProblemKind::Regression };
        spec.metrics.insert(name.clone(), MetricSpec { name, task });
    }
    spec
}

#[test]
fn bundled_specs_round_trip() {
    for (name, src) in bundled::SPECS {
        let spec = parse_api_spec(src).unwrap();
        assert_eq!(validate_spec(&spec), vec![], "{name}");
        assert_eq!(parse_api_spec(&print_spec(&spec)).unwrap(), spec, "{name}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn print_then_parse_is_identity(seed in any::<u64>()) {
        let spec = random_spec(seed, "");
        prop_assert_eq!(validate_spec(&spec), vec![]);
        let printed = print_spec(&spec);
        let parsed = parse_api_spec(&printed).map_err(|e| TestCaseError::fail(format!("{e:?}\n{printed}")))?;
        prop_assert_eq!(parsed, spec);
    }

    #[test]
    fn parsed_specs_validate(seed in any::<u64>()) {
        let printed = print_spec(&random_spec(seed, ""));
        let parsed = parse_api_spec(&printed).unwrap();
        prop_assert_eq!(validate_spec(&parsed), vec![]);
    }

    #[test]
    fn merge_is_associative_with_empty_identity(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (a, b, c) = (random_spec(a, "A"), random_spec(b, "B"), random_spec(c, "C"));
        let empty = ApiSpec::default();
        prop_assert_eq!(&merge_specs(&[("e", &empty), ("a", &a)]).unwrap(), &a);
        prop_assert_eq!(&merge_specs(&[("a", &a), ("e", &empty)]).unwrap(), &a);
        let ab = merge_specs(&[("a", &a), ("b", &b)]).unwrap();
        let bc = merge_specs(&[("b", &b), ("c", &c)]).unwrap();
        let left = merge_specs(&[("ab", &ab), ("c", &c)]).unwrap();
        let right = merge_specs(&[("a", &a), ("bc", &bc)]).unwrap();
        prop_assert_eq!(&left, &right);
        prop_assert_eq!(left, merge_specs(&[("a", &a), ("b", &b), ("c", &c)]).unwrap());
    }
}

#[test]
fn merge_rejects_collisions() {
    let a = random_spec(7, "");
    if let Some(name) = a.entities.keys().next() {
        let err = merge_specs(&[("x.mlspec", &a), ("y.mlspec", &a)]).unwrap_err();
        assert!(err.to_string().contains(name.as_str()));
    }
}
