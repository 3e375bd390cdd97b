use super::config::{Config, Scenario};
use crate::Result;
use serde::Serialize;

const BUILTIN: &[(&str, &str)] = &[
    ("sanov", include_str!("../../../../configs/sanov.toml")),
    ("dense", include_str!("../../../../configs/dense.toml")),
    ("lifted-2", include_str!("../../../../configs/lifted-2.toml")),
    ("lifted-3", include_str!("../../../../configs/lifted-3.toml")),
    ("rotations", include_str!("../../../../configs/rotations.toml")),
    ("schottky", include_str!("../../../../configs/schottky.toml")),
];

#[derive(Clone, Debug, Serialize)]
pub struct BuiltinExample {
    pub name: String,
    pub scenario: Scenario,
    pub description: String,
    pub generators: Vec<String>,
    /// `q_max` of the boundary section.
    pub q_max: u32,
}

/// Source text of a bundled config.
pub fn builtin_config(name: &str) -> Option<&'static str> {
    BUILTIN.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn list_builtin_examples() -> Result<Vec<BuiltinExample>> {
    BUILTIN
        .iter()
        .map(|(_, text)| {
            let c = Config::parse(text)?.config;
            Ok(BuiltinExample {
                name: c.name,
                scenario: c.scenario,
                description: c.description,
                generators: c.generators.iter().map(|g| g.name.clone()).collect(),
                q_max: c.boundary.q_max,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_parses() {
        let list = list_builtin_examples().unwrap();
        assert!(list.len() >= 4);
        for (name, text) in BUILTIN {
            let c = Config::parse(text).unwrap().config;
            assert_eq!(&c.name, name);
            c.step_distribution().unwrap();
        }
        let lifted = list.iter().find(|e| e.name == "lifted-2").unwrap();
        assert!(lifted.q_max >= 2);
    }
}
