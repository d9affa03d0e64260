//! Zoo files compiled into the binary, plus the verdicts each is expected to
//! produce.

use std::collections::BTreeMap;
use std::path::PathBuf;

pub const ZOO_DIR_VAR: &str = "ONTOLAB_ZOO_DIR";

macro_rules! embed {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../zoo/", $name, ".json")))),*]
    };
}

pub const FIXTURES: &[(&str, &str)] = embed!(
    "prbox-0",
    "prbox-1",
    "prbox-2",
    "prbox-3",
    "prbox-4",
    "prbox-5",
    "prbox-6",
    "prbox-7",
    "chsh-quantum",
    "hardy",
    "specker-triangle",
    "deterministic-222-0",
    "deterministic-222-1",
    "deterministic-222-2",
    "deterministic-222-3",
    "deterministic-222-4",
    "deterministic-222-5",
    "deterministic-222-6",
    "deterministic-222-7",
    "deterministic-222-8",
    "deterministic-222-9",
    "deterministic-222-10",
    "deterministic-222-11",
    "deterministic-222-12",
    "deterministic-222-13",
    "deterministic-222-14",
    "deterministic-222-15",
    "fuzzy-coin-property",
    "psi-complete-chsh",
    "pbr-q",
);

const EXPECTED: &str = include_str!("../zoo/expected.json");

/// Entry name to subcommand to exit code.
pub fn expected() -> BTreeMap<String, BTreeMap<String, i32>> {
    serde_json::from_str(EXPECTED).expect("shipped expected.json is valid")
}

fn canonical(name: &str) -> &str {
    if name == "prbox" {
        "prbox-0"
    } else {
        name
    }
}

/// Contents of the named zoo file. `ONTOLAB_ZOO_DIR`, when set, replaces the
/// embedded copies with `$ONTOLAB_ZOO_DIR/NAME.json`.
pub fn load(name: &str) -> Result<Vec<u8>, String> {
    let name = canonical(name);
    if let Some(dir) = std::env::var_os(ZOO_DIR_VAR) {
        let path = PathBuf::from(dir).join(format!("{name}.json"));
        return std::fs::read(&path).map_err(|e| format!("cannot read {}: {e}", path.display()));
    }
    FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, s)| s.as_bytes().to_vec())
        .ok_or_else(|| format!("unknown zoo entry {name:?} (try `zoo list`)"))
}
