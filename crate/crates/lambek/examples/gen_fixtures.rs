//! Writes the bundled fixture files (golden derivations, lexicons, grammars).
use lambek::derivation::to_json;
use lambek::fixtures;
use std::fs;
use std::path::Path;

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    for (name, _, d) in fixtures::all_golden() {
        let path = root.join("derivations").join(format!("{name}.json"));
        fs::write(&path, to_json(&d)).unwrap();
        println!("wrote {}", path.display());
    }
    fs::write(root.join("lexicons/extraction.lex"), fixtures::section2_lexicon().render()).unwrap();
    fs::write(root.join("lexicons/brackets.lex"), fixtures::section3_lexicon().render()).unwrap();
    fs::write(
        root.join("grammars/ab.txt"),
        "start: s\nterminals: a b\ns -> a b\n",
    )
    .unwrap();
    fs::write(
        root.join("grammars/anbn.txt"),
        "start: s\nterminals: a b\ns -> a s b\ns -> a b\n",
    )
    .unwrap();
    println!("wrote lexicons and grammars");
}
