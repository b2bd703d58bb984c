//! Tokenizer and tagger output on a fixed review sample, pinned by golden files.
//!
//! Set `ASEM_BLESS=1` to rewrite the golden files after a reviewed change.

use std::fs;
use std::path::PathBuf;

use asem::corpus::{pos_tag, tokenize, TaggerRegistry, LEXICON_BACKEND};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn check_golden(name: &str, actual: &str) {
    let path = fixture(name);
    if std::env::var_os("ASEM_BLESS").is_some() {
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(&path).unwrap();
    for (i, (e, a)) in expected.lines().zip(actual.lines()).enumerate() {
        assert_eq!(e, a, "{name} line {}", i + 1);
    }
    assert_eq!(expected, actual, "{name}");
}

fn reviews() -> Vec<String> {
    fs::read_to_string(fixture("reviews.txt"))
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect()
}

#[test]
fn tokenizer_matches_golden() {
    let reviews = reviews();
    assert_eq!(reviews.len(), 10);
    let out: String = reviews
        .iter()
        .map(|line| {
            let toks: Vec<String> = tokenize(line).into_iter().map(|t| t.surface).collect();
            toks.join(" ") + "\n"
        })
        .collect();
    check_golden("reviews.tokens", &out);
}

#[test]
fn tagger_matches_golden() {
    let registry = TaggerRegistry::default();
    let out: String = reviews()
        .iter()
        .map(|line| {
            let tagged = pos_tag(&tokenize(line), &registry, LEXICON_BACKEND).unwrap();
            let pairs: Vec<String> = tagged.iter().map(|t| format!("{}/{}", t.surface, t.pos.as_str())).collect();
            pairs.join(" ") + "\n"
        })
        .collect();
    check_golden("reviews.tags", &out);
}
