//! Verification of the bundled corpus and its failure modes.

use latproof::corpus::load_corpus;
use latproof::script::{parse_script, verify_script, Mode, StepStatus};
use latproof::RuleId;

#[test]
fn all_corpus_proofs_accept_in_lenient_mode() {
    let corpus = load_corpus().unwrap();
    for script in &corpus {
        let report = verify_script(script, Mode::Lenient);
        assert!(
            report.accepted(),
            "{} rejected:\n{}",
            script.name,
            report.render()
        );
    }
}

#[test]
fn corpus_m_family_firings_are_4_3_4() {
    let corpus = load_corpus().unwrap();
    let firings: Vec<usize> = corpus
        .iter()
        .map(|s| verify_script(s, Mode::Lenient).m_family_firings())
        .collect();
    assert_eq!(firings, vec![4, 3, 4]);
}

#[test]
fn every_m_family_firing_carries_a_derivation() {
    let corpus = load_corpus().unwrap();
    for script in &corpus {
        let report = verify_script(script, Mode::Lenient);
        for step in &report.steps {
            for firing in &step.fired {
                if firing.rule.is_m_family() && !firing.absorbed_ac {
                    assert!(
                        firing.side_condition.is_some(),
                        "{} step {}: {} lacks a side-condition derivation",
                        script.name,
                        step.index,
                        firing.detail
                    );
                }
            }
        }
    }
}

#[test]
fn order_firings_carry_derivations() {
    let corpus = load_corpus().unwrap();
    for script in &corpus {
        let report = verify_script(script, Mode::Lenient);
        for step in &report.steps {
            for firing in &step.fired {
                if firing.rule == RuleId::Order {
                    assert!(firing.side_condition.is_some());
                }
            }
        }
    }
}

#[test]
fn tampered_step_is_rejected_with_residual_difference() {
    // corrupt the third displayed step of the first proof
    let tampered = latproof::corpus::PROOF1.replace(
        "step ((q /\\ (e \\/ p)) /\\ (d /\\ q)) \\/ p",
        "step ((q /\\ (e /\\ p)) /\\ (d /\\ q)) \\/ p",
    );
    assert_ne!(tampered, latproof::corpus::PROOF1);
    let script = parse_script(&tampered).unwrap();
    let report = verify_script(&script, Mode::Lenient);
    assert!(!report.accepted());
    let step3 = &report.steps[2];
    assert!(
        matches!(step3.status, StepStatus::ResidualDifference(_)),
        "unexpected status {:?}",
        step3.status
    );
}

#[test]
fn strict_mode_rejects_compound_corpus_steps() {
    let corpus = load_corpus().unwrap();
    let report = verify_script(&corpus[0], Mode::Strict);
    assert!(!report.accepted());
}

#[test]
fn missing_goal_is_a_parse_error() {
    let err = parse_script("proof x\nstep p by L1\nqed\n").unwrap_err();
    let msg = err.to_string();
    assert!(msg.contains("goal"), "{msg}");
}

#[test]
fn unknown_rule_id_is_a_parse_error() {
    let err = parse_script("proof x\ngoal u /\\ v = p\nstep p by L9\nqed\n").unwrap_err();
    assert!(err.to_string().contains("L9"));
}
