//! Bundled input files, addressable by name.

use std::path::Path;

use crate::error::CliError;

/// `(name, file contents)`, in listing order.
pub const BUNDLED: &[(&str, &str)] = &[
    ("ada_byron", include_str!("../scenarios/ada_byron.json")),
    ("prog_a_n3", include_str!("../scenarios/prog_a_n3.json")),
    (
        "randomized_response",
        include_str!("../scenarios/randomized_response.json"),
    ),
    (
        "prop7_counterexample",
        include_str!("../scenarios/prop7_counterexample.json"),
    ),
    (
        "appendixA_counterexample",
        include_str!("../scenarios/appendixA_counterexample.json"),
    ),
    (
        "composition_demo",
        include_str!("../scenarios/composition_demo.json"),
    ),
    (
        "geometric_n3_r1-2",
        include_str!("../scenarios/geometric_n3_r1-2.json"),
    ),
    ("constant_n2", include_str!("../scenarios/constant_n2.json")),
    ("hide2", include_str!("../scenarios/hide2.json")),
    (
        "correlated_pos_neg",
        include_str!("../scenarios/correlated_pos_neg.json"),
    ),
    (
        "uniform_prior_012",
        include_str!("../scenarios/uniform_prior_012.json"),
    ),
];

const ALIASES: &[(&str, &str)] = &[
    ("prop7", "prop7_counterexample"),
    ("appendixA", "appendixA_counterexample"),
    ("constant", "constant_n2"),
];

pub fn bundled(name: &str) -> Option<&'static str> {
    let name = name.strip_prefix("scenarios/").unwrap_or(name);
    let name = name.strip_suffix(".json").unwrap_or(name);
    let name = ALIASES
        .iter()
        .find(|(a, _)| *a == name)
        .map_or(name, |(_, n)| n);
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

/// Reads `arg` as a path, then as a path with `.json` appended, then as a
/// bundled name.
pub fn load(arg: &str) -> Result<String, CliError> {
    for candidate in [arg.to_string(), format!("{arg}.json")] {
        let path = Path::new(&candidate);
        if path.is_file() {
            return std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            });
        }
    }
    bundled(arg)
        .map(str::to_string)
        .ok_or_else(|| CliError::UnknownInput(arg.to_string()))
}
