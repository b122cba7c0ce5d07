//! Compares the typestate pass with a naive interpreter that keeps the full
//! event history of every model and answers each rule by scanning it.

use std::collections::BTreeMap;

use mlguard_core::apispec::ApiSpec;
use mlguard_core::checker::{check_temporal, resolve};
use mlguard_core::dsl::parse_source;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
enum Event {
    Set { param: String, value: String, line: usize },
    Call(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Finding {
    pub code: &'static str,
    pub line: usize,
    pub message: String,
}

/// Generated statement: its text and what the interpreter should do.
pub enum Op {
    Plain,
    Declare { var: String, probability: Option<bool> },
    Set { var: String, param: &'static str, value: String },
    Call { var: String, method: &'static str },
}

const MODELS: [&str; 2] = ["m0", "m1"];

pub fn random_program(rng: &mut ChaCha8Rng) -> Vec<(String, Op)> {
    let mut stmts = vec![
        ("data = load \"d.csv\"".to_string(), Op::Plain),
        ("train, val, test = split data ratios (0.6, 0.2, 0.2) stratify \"y\" seed 1".to_string(), Op::Plain),
    ];
    let len = rng.gen_range(5..=15);
    let mut declared: Vec<&str> = Vec::new();
    while stmts.len() < len {
        if declared.is_empty() || rng.gen_bool(0.15) {
            let var = MODELS[rng.gen_range(0..MODELS.len())];
            let probability = match rng.gen_range(0..3) {
                0 => None,
                1 => Some(true),
                _ => Some(false),
            };
            let args = probability.map_or(String::new(), |b| format!("probability={b}"));
            stmts.push((format!("{var} = SVC({args})"), Op::Declare { var: var.to_string(), probability }));
            if !declared.contains(&var) {
                declared.push(var);
            }
            continue;
        }
        let var = declared[rng.gen_range(0..declared.len())].to_string();
        let stmt = match rng.gen_range(0..7) {
            0 | 1 => {
                let b = rng.gen_bool(0.5);
                (format!("set {var}.probability = {b}"), Op::Set { var, param: "probability", value: b.to_string() })
            }
            2 => (format!("set {var}.degree = 2"), Op::Set { var, param: "degree", value: "2".to_string() }),
            3 => (format!("fit {var} on train label \"y\""), Op::Call { var, method: "fit" }),
            4 => (format!("call {var}.predict val"), Op::Call { var, method: "predict" }),
            5 => (format!("p = call {var}.predict_proba val"), Op::Call { var, method: "predict_proba" }),
            _ => (format!("s = evaluate accuracy {var} on val"), Op::Call { var, method: "predict" }),
        };
        stmts.push(stmt);
    }
    stmts
}

pub fn render(stmts: &[(String, Op)]) -> String {
    let mut src = String::from("pipeline r {\n");
    for (text, _) in stmts {
        src.push_str("  ");
        src.push_str(text);
        src.push('\n');
    }
    src.push_str("}\n");
    src
}

/// The probability value that was in force when `fit` first ran, else the
/// current value; `false` when never set.
fn probability_at_first_fit(history: &[Event]) -> bool {
    let first_fit = history.iter().position(|e| matches!(e, Event::Call("fit"))).unwrap_or(history.len());
    history[..first_fit]
        .iter()
        .rev()
        .find_map(|e| match e {
            Event::Set { param, value, .. } if param == "probability" => Some(value == "true"),
            _ => None,
        })
        .unwrap_or(false)
}

fn late_probability_set(history: &[Event]) -> Option<usize> {
    let first_fit = history.iter().position(|e| matches!(e, Event::Call("fit")))?;
    history[first_fit..].iter().rev().find_map(|e| match e {
        Event::Set { param, line, .. } if param == "probability" => Some(*line),
        _ => None,
    })
}

pub fn replay(stmts: &[(String, Op)]) -> Vec<Finding> {
    let mut histories: BTreeMap<String, Vec<Event>> = BTreeMap::new();
    let mut out = Vec::new();
    for (i, (_, op)) in stmts.iter().enumerate() {
        let line = i + 2;
        match op {
            Op::Plain => {}
            Op::Declare { var, probability } => {
                let mut h = Vec::new();
                if let Some(b) = probability {
                    h.push(Event::Set { param: "probability".into(), value: b.to_string(), line });
                }
                histories.insert(var.clone(), h);
            }
            Op::Set { var, param, value } => {
                histories.get_mut(var).unwrap().push(Event::Set { param: param.to_string(), value: value.clone(), line });
            }
            Op::Call { var, method } => {
                let h = histories.get_mut(var).unwrap();
                let fitted = h.iter().any(|e| matches!(e, Event::Call("fit")));
                if matches!(*method, "predict" | "predict_proba") && !fitted {
                    out.push(Finding {
                        code: "E-TEMP-001",
                        line,
                        message: format!("fit must be called before {method} on `{var}`"),
                    });
                }
                if *method == "predict_proba" && !probability_at_first_fit(h) {
                    let mut message = "probability must be set to true prior to the first call of fit".to_string();
                    if let Some(l) = late_probability_set(h) {
                        message.push_str(&format!(" (it is set on line {l}, after fit)"));
                    }
                    message.push_str(&format!(" to call predict_proba on `{var}`"));
                    out.push(Finding { code: "E-TEMP-002", line, message });
                }
                h.push(Event::Call(method));
            }
        }
    }
    out.sort();
    out
}

/// Checks `cases` random programs drawn from `seed`. Returns the number of
/// findings both sides agreed on, or the first disagreement.
pub fn compare(spec: &ApiSpec, seed: u64, cases: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0;
    for case in 0..cases {
        let stmts = random_program(&mut rng);
        if !(5..=15).contains(&stmts.len()) {
            return Err(format!("case {case}: {} statements", stmts.len()));
        }
        let src = render(&stmts);
        let (ast, syntax) = parse_source(&src, "r.mlp");
        let (program, names) = resolve(&ast, spec);
        if !syntax.is_empty() || !names.is_empty() {
            return Err(format!("case {case}: generated program does not resolve:\n{src}"));
        }
        let mut got: Vec<Finding> = check_temporal(&program, spec)
            .into_iter()
            .map(|d| Finding { code: d.code, line: d.span.start_line, message: d.message })
            .collect();
        got.sort();
        let expected = replay(&stmts);
        if got != expected {
            return Err(format!("case {case}: pass {got:?} vs replay {expected:?}\n{src}"));
        }
        total += expected.len();
    }
    Ok(total)
}
