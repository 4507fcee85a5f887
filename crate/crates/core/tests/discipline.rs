//! The algorithm modules may only reach algebras through the oracle contract.

use std::fs;
use std::path::Path;

const ALGORITHM_SOURCES: [&str; 3] = ["src/generation.rs", "src/ideal.rs", "src/variety.rs"];

const FORBIDDEN: [&str; 7] = [
    "decode_for_test",
    "decode_all",
    "CayleyAlgebra",
    "OracleSession",
    "Encoding",
    "raw_bits",
    "truth::",
];

/// Source text before the unit-test module.
fn production_code(path: &Path) -> String {
    let text = fs::read_to_string(path).unwrap();
    match text.find("#[cfg(test)]") {
        Some(i) => text[..i].to_string(),
        None => text,
    }
}

#[test]
fn algorithm_modules_use_only_the_oracle_contract() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    for file in ALGORITHM_SOURCES {
        let code = production_code(&root.join(file));
        assert!(
            code.contains("Oracle"),
            "{file} should be written against the oracle trait"
        );
        for word in FORBIDDEN {
            let hits: Vec<(usize, &str)> = code
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim_start().starts_with("//") && l.contains(word))
                .collect();
            assert!(hits.is_empty(), "{file} mentions `{word}`: {hits:?}");
        }
    }
}

#[test]
fn handles_cannot_be_compared_directly() {
    // only the oracle decides equality; this would fail to compile:
    // let _ = expgroup::blackbox::Handle::eq;
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let blackbox = fs::read_to_string(root.join("src/blackbox.rs")).unwrap();
    let decl = blackbox.find("pub struct Handle").unwrap();
    let derive = &blackbox[..decl].lines().last().unwrap_or("").to_string();
    assert!(
        !derive.contains("PartialEq"),
        "Handle must not implement PartialEq: {derive}"
    );
}
