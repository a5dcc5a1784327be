//! The fuzz corpus seeds go through the same parsers as the fuzz targets.

use std::path::PathBuf;

use anticyc::formats::{parse_character_spec, parse_eigenform};

fn seeds(target: &str) -> Vec<(String, String)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read_to_string(&path).unwrap())
        })
        .collect();
    out.sort();
    out
}

#[test]
fn eigenform_seeds() {
    let seeds = seeds("eigenform_json");
    assert!(!seeds.is_empty());
    for (name, text) in seeds {
        let parsed = parse_eigenform(&text);
        assert_eq!(parsed.is_ok(), !name.starts_with("bad_"), "{name}: {:?}", parsed.err());
    }
}

#[test]
fn character_spec_seeds() {
    let seeds = seeds("character_spec");
    assert!(!seeds.is_empty());
    for (name, text) in seeds {
        let spec = parse_character_spec(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        spec.character().unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}
