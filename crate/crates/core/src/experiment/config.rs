use crate::circle::{Alphabet, Generator, GeneratorSpec};
use crate::walk::StepDistribution;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Stationary,
    Lyapunov,
    EntropyGap,
    Boundary,
    Distortion,
    NearIdentity,
    Schwarzian,
    FullTheoremSuite,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Scenario::Stationary => "stationary",
            Scenario::Lyapunov => "lyapunov",
            Scenario::EntropyGap => "entropy-gap",
            Scenario::Boundary => "boundary",
            Scenario::Distortion => "distortion",
            Scenario::NearIdentity => "near-identity",
            Scenario::Schwarzian => "schwarzian",
            Scenario::FullTheoremSuite => "full-theorem-suite",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorEntry {
    pub name: String,
    /// Row-major `[a, b, c, d]`.
    pub matrix: [f64; 4],
    #[serde(default)]
    pub conjugator: Vec<[f64; 2]>,
    #[serde(default = "one")]
    pub cover: u32,
    #[serde(default)]
    pub deck: u32,
}

fn one() -> u32 {
    1
}

/// `"uniform"` or a table from words to weights.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Weights {
    Named(String),
    Table(BTreeMap<String, f64>),
}

macro_rules! section {
    ($(#[$m:meta])* $name:ident { $($(#[$fm:meta])* $field:ident : $ty:ty = $default:expr),* $(,)? }) => {
        $(#[$m])*
        #[derive(Clone, Debug, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $name {
            $($(#[$fm])* pub $field: $ty,)*
        }

        impl Default for $name {
            fn default() -> Self {
                Self { $($field: $default,)* }
            }
        }
    };
}

section!(StationarySection {
    grid_size: usize = 8192,
    tolerance: f64 = 1e-10,
    max_iterations: usize = 1000,
    residual_limit: f64 = 1e-3,
    /// Also run the Monte Carlo estimator and report its Kolmogorov distance.
    monte_carlo: bool = false,
    mc_samples: usize = 100_000,
    mc_burn_in: usize = 200,
});

section!(LyapunovSection {
    samples: usize = 100_000,
    trajectories: usize = 100,
    steps: usize = 10_000,
    /// Extra seeds for the reproducibility spread.
    repeat_seeds: usize = 0,
});

section!(EntropySection {
    n_max: usize = 14,
    samples: usize = 100_000,
    delta_cells: usize = 8,
    sbm_samples: usize = 2000,
    tolerance: f64 = 0.2,
});

section!(BoundarySection {
    q_max: u32 = 4,
    /// Cells below this fraction of the uniform mass are thin.
    thin_fraction: f64 = 0.05,
    /// Orbit depth for the limit points that rule out thin arcs as gaps.
    gap_word_length: usize = 8,
    proximal_epsilon: f64 = 1e-3,
    word_length_cap: usize = 200,
    dirac_horizon: usize = 40,
    dirac_trials: usize = 20,
    dirac_grid: usize = 1024,
    /// Samples for the base and quotient boundary entropies; 0 skips them.
    entropy_samples: usize = 20_000,
    expect_degree: Option<u32> = None,
    expect_cantor: Option<bool> = None,
    expect_proximal: Option<bool> = None,
});

section!(DistortionSection {
    seeds: usize = 100,
    horizon_real: usize = 200,
    horizon_complex: usize = 100,
    kappa: f64 = 0.5,
    tau: f64 = 1.0,
    epsilon: f64 = 0.1,
    grid: usize = 64,
    /// Uses these instead of estimating them.
    lambda: Option<f64> = None,
    h_nu: Option<f64> = None,
});

section!(NearIdentitySection {
    /// Word for the hyperbolic element `l`.
    chart: String = "A".into(),
    eta: f64 = 0.005,
    m_min: u32 = 5,
    m_max: u32 = 20,
    walk_length_factor: f64 = 2.0,
    n_min: usize = 10,
    samples: usize = 20_000,
    pilot_samples: usize = 1000,
    epsilon: f64 = 0.1,
    tau: f64 = 1.0,
    grid: usize = 201,
    endgame: bool = true,
    lambda: Option<f64> = None,
    h_nu: Option<f64> = None,
    /// Require a pair for every `m` in range.
    expect_all_found: bool = false,
    /// Lower bound on the C¹ distance of every emitted pair.
    min_c1: Option<f64> = None,
});

section!(SchwarzianSection {
    grid: usize = 200,
    /// Constant-coefficient check `S ≡ 2ω²` on `[-1, 1]`.
    omega: f64 = 0.3,
    step: f64 = 1e-3,
});

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub scenario: Scenario,
    #[serde(default)]
    pub seed: u64,
    pub generators: Vec<GeneratorEntry>,
    pub weights: Weights,
    #[serde(default)]
    pub symmetric: bool,
    #[serde(default)]
    pub stationary: StationarySection,
    #[serde(default)]
    pub lyapunov: LyapunovSection,
    #[serde(default)]
    pub entropy: EntropySection,
    #[serde(default)]
    pub boundary: BoundarySection,
    #[serde(default)]
    pub distortion: DistortionSection,
    /// Needed by the near-identity and schwarzian scenarios; the suite skips them without it.
    #[serde(default)]
    pub near_identity: Option<NearIdentitySection>,
    #[serde(default)]
    pub schwarzian: SchwarzianSection,
}

/// A parsed config together with the hash of its source text.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: Config,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Config {
    /// Parses TOML; errors carry the line and column of the offending key.
    pub fn parse(text: &str) -> Result<LoadedConfig> {
        let config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().to_string()))?;
        config.alphabet()?;
        Ok(LoadedConfig {
            config,
            sha256: sha256_hex(text.as_bytes()),
        })
    }

    pub fn alphabet(&self) -> Result<Arc<Alphabet>> {
        if self.generators.is_empty() {
            return Err(Error::Config("`generators` is empty".into()));
        }
        let named = self
            .generators
            .iter()
            .map(|g| {
                let spec = GeneratorSpec {
                    matrix: g.matrix,
                    conjugator: g.conjugator.clone(),
                    cover: g.cover,
                    deck: g.deck,
                };
                Generator::new(&spec)
                    .map(|gen| (g.name.clone(), gen))
                    .map_err(|e| Error::Config(format!("generator `{}`: {e}", g.name)))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Arc::new(Alphabet::new(named).map_err(|e| Error::Config(e.to_string()))?))
    }

    pub fn step_distribution(&self) -> Result<StepDistribution> {
        let alphabet = self.alphabet()?;
        match &self.weights {
            Weights::Named(s) if s == "uniform" => StepDistribution::uniform_symmetric(alphabet),
            Weights::Named(s) => Err(Error::Config(format!("`weights`: unknown preset `{s}`, expected \"uniform\" or a table"))),
            Weights::Table(t) => {
                let atoms = t
                    .iter()
                    .map(|(w, &p)| {
                        let word = alphabet
                            .parse_word(w)
                            .map_err(|e| Error::Config(format!("`weights`: word `{w}`: {e}")))?;
                        Ok((word, p))
                    })
                    .collect::<Result<Vec<_>>>()?;
                StepDistribution::new(alphabet, atoms, self.symmetric).map_err(|e| Error::Config(format!("`weights`: {e}")))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = "name = \"t\"\nscenario = \"stationary\"\n";
    const GENS: &str = r#"
[[generators]]
name = "A"
matrix = [1.0, 2.0, 0.0, 1.0]

[[generators]]
name = "B"
matrix = [1.0, 0.0, 2.0, 1.0]
"#;

    #[test]
    fn uniform_and_table_weights() {
        let c = Config::parse(&format!("{HEAD}weights = \"uniform\"\n{GENS}")).unwrap();
        assert_eq!(c.config.step_distribution().unwrap().len(), 4);
        let text = format!("{HEAD}symmetric = true\n{GENS}\n[weights]\n\"A\" = 1\n\"A^-1\" = 1\n\"B\" = 2\n\"B^-1\" = 2\n");
        let mu = Config::parse(&text).unwrap().config.step_distribution().unwrap();
        assert!((mu.probabilities()[2] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(c.sha256.len(), 64);
    }

    #[test]
    fn missing_weights_names_the_key() {
        let e = Config::parse(&format!("{HEAD}{GENS}")).unwrap_err().to_string();
        assert!(e.contains("weights"), "{e}");
        assert!(e.contains("line"), "{e}");
    }

    #[test]
    fn unknown_scenario_is_line_anchored() {
        let text = format!("{HEAD}weights = \"uniform\"\n{GENS}").replace("stationary", "teleport");
        let e = Config::parse(&text).unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
    }

    #[test]
    fn unknown_section_key_is_rejected() {
        let text = format!("{HEAD}weights = \"uniform\"\n{GENS}\n[stationary]\ngrid = 5\n");
        let e = Config::parse(&text).unwrap_err().to_string();
        assert!(e.contains("grid") && e.contains("line 14"), "{e}");
    }
}
