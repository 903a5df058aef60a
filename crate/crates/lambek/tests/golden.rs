//! The golden derivation files shipped in `fixtures/derivations/` check in
//! their stated calculi and stay in sync with the in-code transcriptions.

use lambek::derivation::{from_json, to_json};
use lambek::fixtures;
use lambek::{check, CalculusId};
use std::fs;
use std::path::PathBuf;

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

#[test]
fn golden_files_check_in_their_calculi() {
    for (name, calculus, _) in fixtures::all_golden() {
        let text = fs::read_to_string(fixture_path(&format!("derivations/{name}.json")))
            .unwrap_or_else(|e| panic!("{name}: {e}"));
        let d = from_json(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        check(&calculus, &d).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn golden_files_match_the_transcriptions() {
    for (name, _, built) in fixtures::all_golden() {
        let text = fs::read_to_string(fixture_path(&format!("derivations/{name}.json"))).unwrap();
        let on_disk = from_json(&text).unwrap();
        assert_eq!(on_disk, built, "fixture {name} drifted from its transcription");
    }
}

#[test]
fn golden_files_reserialize_and_recheck() {
    for (name, calculus, _) in fixtures::all_golden() {
        let text = fs::read_to_string(fixture_path(&format!("derivations/{name}.json"))).unwrap();
        let d = from_json(&text).unwrap();
        let again = from_json(&to_json(&d)).unwrap();
        assert_eq!(d, again, "{name}");
        check(&calculus, &again).unwrap();
    }
}

#[test]
fn bundled_lexicons_parse() {
    for name in ["extraction.lex", "brackets.lex"] {
        let text = fs::read_to_string(fixture_path(&format!("lexicons/{name}"))).unwrap();
        lambek::grammar::Lexicon::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
    for name in ["ab.txt", "anbn.txt"] {
        let text = fs::read_to_string(fixture_path(&format!("grammars/{name}"))).unwrap();
        lambek::encode::Type0Grammar::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn fig4_is_rejected_under_the_restriction() {
    let lr = CalculusId::by_name("b2018st-prime-lr").unwrap();
    let text = fs::read_to_string(fixture_path("derivations/fig4.json")).unwrap();
    let d = from_json(&text).unwrap();
    assert!(check(&lr, &d).is_err());
}
