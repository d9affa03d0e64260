use std::path::Path;

use ontolab_cli::fixtures::{expected, FIXTURES};
use ontolab_cli::{load_model, run};
use ontolab_core::io::{parse_model_file, to_file_string};
use ontolab_core::zoo;

/// Set to regenerate crates/cli/zoo from the constructors.
const BLESS: &str = "ONTOLAB_BLESS";

#[test]
fn shipped_fixtures_match_constructors() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("zoo");
    let bless = std::env::var_os(BLESS).is_some();
    for (name, shipped) in FIXTURES {
        let built = to_file_string(&zoo::model(name, None).unwrap());
        if bless {
            std::fs::write(dir.join(format!("{name}.json")), &built).unwrap();
        } else {
            assert_eq!(*shipped, built, "{name} is stale; rerun with {BLESS}=1");
        }
    }
}

#[test]
fn every_entry_has_a_fixture_and_expectations() {
    let exp = expected();
    let names: Vec<&str> = FIXTURES.iter().map(|(n, _)| *n).collect();
    for (name, _) in zoo::entries() {
        assert!(names.contains(&name.as_str()), "{name} has no fixture");
        assert!(exp.contains_key(&name), "{name} has no expected verdicts");
    }
    assert_eq!(exp.len(), FIXTURES.len());
}

#[test]
fn fixtures_round_trip() {
    for (name, text) in FIXTURES {
        let m = parse_model_file(text.as_bytes()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(to_file_string(&m), *text, "{name}");
        assert_eq!(load_model(&format!("zoo:{name}")).unwrap(), m);
    }
}

#[test]
fn expected_verdicts_are_reproduced() {
    for (name, cmds) in expected() {
        for (cmd, code) in cmds {
            let input = format!("zoo:{name}");
            let out = run(["ontolab", cmd.as_str(), input.as_str()]);
            assert_eq!(out.code, code, "{cmd} {input}\n{}{}", out.stdout, out.stderr);
        }
    }
}

#[test]
fn prbox_alias() {
    assert_eq!(load_model("zoo:prbox").unwrap(), load_model("zoo:prbox-0").unwrap());
}
