#[path = "support/typestate_replay.rs"]
mod replay;

use mlguard_core::bundled;

#[test]
fn typestate_pass_agrees_with_replay_interpreter() {
    let total = replay::compare(&bundled::spec(), 0x5eed, 500).unwrap_or_else(|e| panic!("{e}"));
    assert!(total > 100, "generator too tame: {total}");
}

#[test]
fn agreement_holds_for_other_seeds() {
    for seed in 1..=4 {
        replay::compare(&bundled::spec(), seed, 100).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
    }
}
