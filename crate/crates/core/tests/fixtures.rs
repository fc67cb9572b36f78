use std::path::Path;

use fsgrowth::io::{parse_rule, serialize_rule};
use fsgrowth::rules::builtin;

fn fixture(name: &str) -> String {
    std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("fixtures")
            .join(name),
    )
    .unwrap()
}

#[test]
fn fixtures_are_the_builtins() {
    for (file, name) in [
        ("pentagonal.rule", "pentagonal"),
        ("r1.rule", "R1"),
        ("r2.rule", "R2"),
    ] {
        let parsed = parse_rule(&fixture(file)).unwrap();
        assert_eq!(parsed, builtin(name).unwrap(), "{file}");
    }
}

#[test]
fn normalizing_is_idempotent() {
    for file in ["pentagonal.rule", "r1.rule", "r2.rule"] {
        let once = serialize_rule(&parse_rule(&fixture(file)).unwrap());
        let twice = serialize_rule(&parse_rule(&once).unwrap());
        assert_eq!(once, twice);
    }
}
