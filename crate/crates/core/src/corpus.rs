//! The bundled corpus: three proofs of `u /\ v = p` over the shared
//! definitions of p, q, u, v, w and the hypothesis `p < q`, plus a few
//! small lattice files. Each bundled text is checksummed; a mismatch means
//! the embedded transcription was altered.

use sha2::{Digest, Sha256};

use crate::script::{parse_script, ProofScript, ScriptError};

pub const PROOF1: &str = include_str!("../corpus/proof1.lproof");
pub const PROOF2: &str = include_str!("../corpus/proof2.lproof");
pub const PROOF3: &str = include_str!("../corpus/proof3.lproof");

pub const M3_LAT: &str = include_str!("../corpus/m3.lat");
pub const N5_LAT: &str = include_str!("../corpus/n5.lat");
pub const CHAIN2_LAT: &str = include_str!("../corpus/chain2.lat");
pub const CHAIN3_LAT: &str = include_str!("../corpus/chain3.lat");

const CHECKSUMS: [(&str, &str, &str); 7] = [
    (
        "proof1.lproof",
        "5c72f384a9637052067b636ada2d22b9afe62862c0fa1eeba2d04f020dc9574c",
        PROOF1,
    ),
    (
        "proof2.lproof",
        "8719e1dd2ed2660fc1d211867f49dfbc23d7d8ae71342316417770cc79e8f4f7",
        PROOF2,
    ),
    (
        "proof3.lproof",
        "adf1e799a3ed458317d3eda9ca58631a3ca6dac2e8ecff15eedcb230ac60a434",
        PROOF3,
    ),
    (
        "m3.lat",
        "8ad39e61efed86733a341a6289837c810a1058596203c9480661366d7c180517",
        M3_LAT,
    ),
    (
        "n5.lat",
        "8179f39665c154f74b5fe6541b2c0fad5d936c2917a3232e0481d31f212de1cc",
        N5_LAT,
    ),
    (
        "chain2.lat",
        "b7d3ecfc21039f0d08f22d64a7de3e6bef21a256c66686e6ed3b1440a0b1361c",
        CHAIN2_LAT,
    ),
    (
        "chain3.lat",
        "870b640536156ac427198c0dc552b2dbe948632556400c39018ce2405009f146",
        CHAIN3_LAT,
    ),
];

fn sha256_hex(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Verify the integrity of every bundled file.
pub fn check_integrity() -> Result<(), ScriptError> {
    for (file, expected, text) in CHECKSUMS {
        if sha256_hex(text) != expected {
            return Err(ScriptError::CorpusIntegrity { file: file.to_string() });
        }
    }
    Ok(())
}

/// The three bundled proof scripts, in order.
pub fn load_corpus() -> Result<Vec<ProofScript>, ScriptError> {
    check_integrity()?;
    Ok(vec![
        parse_script(PROOF1)?,
        parse_script(PROOF2)?,
        parse_script(PROOF3)?,
    ])
}

/// The bundled lattice files as `(name, text)` pairs.
pub fn lattice_files() -> Vec<(&'static str, &'static str)> {
    vec![
        ("m3.lat", M3_LAT),
        ("n5.lat", N5_LAT),
        ("chain2.lat", CHAIN2_LAT),
        ("chain3.lat", CHAIN3_LAT),
    ]
}

/// The bundled proof files as `(name, text)` pairs.
pub fn proof_files() -> Vec<(&'static str, &'static str)> {
    vec![
        ("proof1.lproof", PROOF1),
        ("proof2.lproof", PROOF2),
        ("proof3.lproof", PROOF3),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_loads_and_checksums_hold() {
        let corpus = load_corpus().unwrap();
        assert_eq!(corpus.len(), 3);
        assert_eq!(corpus[0].steps.len(), 9);
        assert_eq!(corpus[1].steps.len(), 6);
        assert_eq!(corpus[2].steps.len(), 7);
        for script in &corpus {
            assert_eq!(script.goal.0, crate::term::parse_term("u /\\ v").unwrap());
            assert_eq!(script.goal.1, crate::term::parse_term("p").unwrap());
        }
    }
}
