//! Decomposition of the bundled corpus into single-rule chains.

use latproof::corpus::load_corpus;
use latproof::decompose::{build_poset, decompose_proof, emit_script};
use latproof::metrics::poset_metrics;
use latproof::script::{parse_script, verify_script, Mode};

#[test]
fn corpus_decomposes_within_budget_8() {
    let corpus = load_corpus().unwrap();
    for script in &corpus {
        let d = decompose_proof(script, 8).unwrap_or_else(|e| {
            panic!("{} failed to decompose: {e}", script.name);
        });
        let poset = build_poset(&d);
        let report = poset_metrics(&poset);
        println!(
            "{}: vertices={} edges={} m_family={} histogram={:?}",
            script.name,
            poset.len(),
            d.edges.len(),
            report.m_family_total(),
            report.histogram
        );
        assert_eq!(d.statements.len(), d.edges.len() + 1);
        assert_eq!(*d.statements.last().unwrap(), script.goal.1);
    }
}

#[test]
fn decomposed_scripts_reverify_strictly() {
    let corpus = load_corpus().unwrap();
    for script in &corpus {
        let d = decompose_proof(script, 8).unwrap();
        let emitted = emit_script(&d, script);
        let reparsed = parse_script(&emitted)
            .unwrap_or_else(|e| panic!("{} emission does not parse: {e}\n{emitted}", script.name));
        let report = verify_script(&reparsed, Mode::Strict);
        assert!(
            report.accepted(),
            "{} decomposition fails strict verification:\n{}\n{}",
            script.name,
            report.render(),
            emitted
        );
    }
}
