//! Scenarios shipped with the crate, addressable by name.

const BUILTIN: &[(&str, &str)] = &[
    ("chain-50", include_str!("../../scenarios/chain-50.json")),
    ("branch-150", include_str!("../../scenarios/branch-150.json")),
    ("table-30x30", include_str!("../../scenarios/table-30x30.json")),
    ("grasp-8", include_str!("../../scenarios/grasp-8.json")),
];

/// Source text of the shipped scenario called `name`.
pub fn builtin(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(n, _)| *n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::parse_scenario;

    #[test]
    fn every_builtin_parses_under_its_name() {
        for name in builtin_names() {
            let s = parse_scenario(builtin(name).unwrap()).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.name, name);
        }
        assert!(builtin("nope").is_none());
    }
}
