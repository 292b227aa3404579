//! Built-in scenarios, stored as config text so they go through the same
//! validation as user files.

use crate::config::{load_config, ScenarioConfig};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub config: &'static str,
}

const PRESETS: &[Preset] = &[
    Preset {
        name: "k3-q10",
        description: "K3 surface with H^2 = 10; P-twist along O composed with tensoring by O(-H)",
        config: r#"
schema_version = 1
name = "k3-q10"
kind = "hk"
m_max = 10

[model]
n = 1
q = 10
"#,
    },
    Preset {
        name: "k3n-hilb",
        description: "Hilbert scheme of 3 points on the k3-q10 surface",
        config: r#"
schema_version = 1
name = "k3n-hilb"
kind = "hilb"
m_max = 10
points = 3

[model]
n = 1
q = 10
"#,
    },
    Preset {
        name: "hk-2n",
        description: "hyperkahler fourfold of K3^[2]-type with q(H) = 2",
        config: r#"
schema_version = 1
name = "hk-2n"
kind = "hk"
m_max = 10

[model]
n = 2
q = 2
"#,
    },
    Preset {
        name: "enriques-over-hk",
        description: "order-2 quotient of the hk-2n fourfold; the deck swaps two classes orthogonal to H",
        config: r#"
schema_version = 1
name = "enriques-over-hk"
kind = "enriques"
m_max = 10

[model]
n = 2
q = 2

[deck]
order = 2
extra_gram = [[-2, 0], [0, -2]]
matrix = [
    [1, 0, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 1, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 1],
    [0, 0, 0, 0, 0, 1, 0],
]
"#,
    },
    Preset {
        name: "k3-spherical",
        description: "spherical twist along O composed with tensoring by O(-H) on the k3-q10 surface",
        config: r#"
schema_version = 1
name = "k3-spherical"
kind = "surface_twist"
m_max = 6
k = 1
l = 1

[model]
n = 1
q = 10
"#,
    },
];

pub fn list_builtin_models() -> &'static [Preset] {
    PRESETS
}

pub fn preset(name: &str) -> Result<ScenarioConfig, CliError> {
    let p = PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        CliError::Usage(format!("unknown preset \"{name}\"; known presets: {}", known.join(", ")))
    })?;
    load_config(p.config)
}
