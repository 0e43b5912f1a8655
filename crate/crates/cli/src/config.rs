//! JSON experiment configuration shared by every subcommand.

use std::path::{Path, PathBuf};

use bellsim_core::circuits::MAX_PARTY_QUBITS;
use bellsim_core::{default_noise_model, Implementation, NoiseModel, Party};
use serde::{Deserialize, Serialize, Serializer};

use crate::CliError;

/// Which corrections are applied to the sampled counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MitigationMode {
    #[serde(rename = "none")]
    None,
    /// Readout-confusion unfolding of the measured distribution.
    #[serde(rename = "em")]
    ReadoutUnfolding,
    /// Dynamical decoupling during scheduled idle windows.
    #[serde(rename = "dd")]
    DynamicalDecoupling,
    #[serde(rename = "em+dd")]
    Both,
}

impl MitigationMode {
    pub fn uses_em(self) -> bool {
        matches!(self, MitigationMode::ReadoutUnfolding | MitigationMode::Both)
    }

    pub fn uses_dd(self) -> bool {
        matches!(self, MitigationMode::DynamicalDecoupling | MitigationMode::Both)
    }

    pub fn label(self) -> &'static str {
        match self {
            MitigationMode::None => "none",
            MitigationMode::ReadoutUnfolding => "em",
            MitigationMode::DynamicalDecoupling => "dd",
            MitigationMode::Both => "em+dd",
        }
    }
}

/// Noise selection: the keyword `"ideal"`, the keyword `"default"` (the
/// built-in hardware-flavored model), or a full noise-model object.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(try_from = "RawNoiseConfig")]
pub enum NoiseConfig {
    #[default]
    Ideal,
    Model(NoiseModel),
}

impl NoiseConfig {
    pub fn is_ideal(&self) -> bool {
        matches!(self, NoiseConfig::Ideal)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawNoiseConfig {
    Word(String),
    Model(NoiseModel),
}

impl TryFrom<RawNoiseConfig> for NoiseConfig {
    type Error = String;

    fn try_from(raw: RawNoiseConfig) -> Result<Self, String> {
        match raw {
            RawNoiseConfig::Word(w) if w == "ideal" => Ok(NoiseConfig::Ideal),
            RawNoiseConfig::Word(w) if w == "default" => {
                Ok(NoiseConfig::Model(default_noise_model()))
            }
            RawNoiseConfig::Word(w) => Err(format!(
                "unknown noise keyword {w:?}; use \"ideal\", \"default\", or a noise-model object"
            )),
            RawNoiseConfig::Model(m) => Ok(NoiseConfig::Model(m)),
        }
    }
}

impl Serialize for NoiseConfig {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            NoiseConfig::Ideal => serializer.serialize_str("ideal"),
            NoiseConfig::Model(m) => m.serialize(serializer),
        }
    }
}

/// Sweep of a coherent post-preparation tilt across qubits of one party.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TiltScanConfig {
    pub party: Party,
    /// 1-based qubit indices within the party; empty means every qubit.
    #[serde(default)]
    pub qubits: Vec<usize>,
    /// Tilt angles in radians; omitted means nine even points spanning
    /// [0, pi].
    #[serde(default)]
    pub angles: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Qubits per party; the outcome dimension is d = 2^n.
    pub n_list: Vec<usize>,
    #[serde(default = "default_implementations")]
    pub implementations: Vec<Implementation>,
    #[serde(default = "default_mitigation")]
    pub mitigation: Vec<MitigationMode>,
    /// Shots per measurement setting; omitted means 2 * n * 1024.
    #[serde(default)]
    pub shots_per_setting: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default)]
    pub tilt_scan: Option<TiltScanConfig>,
    #[serde(default)]
    pub pairwise: bool,
    #[serde(default)]
    pub pvalues: bool,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_implementations() -> Vec<Implementation> {
    vec![Implementation::Unitary, Implementation::Dynamic]
}

fn default_mitigation() -> Vec<MitigationMode> {
    vec![MitigationMode::None]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("bellsim-out")
}

impl Default for ExperimentConfig {
    /// Full noiseless sweep, used when no configuration file is given.
    fn default() -> Self {
        ExperimentConfig {
            n_list: (1..=MAX_PARTY_QUBITS).collect(),
            implementations: default_implementations(),
            mitigation: default_mitigation(),
            shots_per_setting: None,
            seed: 0,
            noise: NoiseConfig::Ideal,
            tilt_scan: None,
            pairwise: false,
            pvalues: false,
            output_dir: default_output_dir(),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("parsing {}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    /// Shots per measurement setting for one combination: explicit override,
    /// or 2 * n * 1024 so the total grows with the register size.
    pub fn shots_for(&self, n: usize) -> u64 {
        self.shots_per_setting.unwrap_or(2 * n as u64 * 1024)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.n_list.is_empty() {
            return bad("n_list must not be empty".into());
        }
        for &n in &self.n_list {
            if n == 0 || n > MAX_PARTY_QUBITS {
                return bad(format!("n_list entry {n} outside 1..={MAX_PARTY_QUBITS}"));
            }
        }
        if has_duplicates(&self.n_list) {
            return bad("n_list contains a duplicate entry".into());
        }
        if self.implementations.is_empty() {
            return bad("implementations must not be empty".into());
        }
        if has_duplicates(&self.implementations) {
            return bad("implementations contains a duplicate entry".into());
        }
        if self.mitigation.is_empty() {
            return bad("mitigation must not be empty".into());
        }
        if has_duplicates(&self.mitigation) {
            return bad("mitigation contains a duplicate entry".into());
        }
        if self.shots_per_setting == Some(0) {
            return bad("shots_per_setting must be positive when given".into());
        }
        if let NoiseConfig::Model(model) = &self.noise {
            model
                .validate()
                .map_err(|e| CliError::Config(format!("noise model: {e}")))?;
        }
        if let Some(scan) = &self.tilt_scan {
            if has_duplicates(&scan.qubits) {
                return bad("tilt_scan.qubits contains a duplicate entry".into());
            }
            for &q in &scan.qubits {
                if q == 0 {
                    return bad("tilt_scan.qubits entries are 1-based".into());
                }
                if let Some(&n) = self.n_list.iter().find(|&&n| q > n) {
                    return bad(format!("tilt_scan qubit {q} does not exist at n = {n}"));
                }
            }
            if let Some(angles) = &scan.angles {
                if angles.is_empty() {
                    return bad("tilt_scan.angles must not be empty when given".into());
                }
                if angles.iter().any(|a| !a.is_finite()) {
                    return bad("tilt_scan.angles must all be finite".into());
                }
            }
        }
        Ok(())
    }
}

fn has_duplicates<T: PartialEq>(items: &[T]) -> bool {
    items
        .iter()
        .enumerate()
        .any(|(i, x)| items[..i].contains(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_keywords_and_objects_round_trip() {
        let ideal: NoiseConfig = serde_json::from_str("\"ideal\"").unwrap();
        assert_eq!(ideal, NoiseConfig::Ideal);
        assert_eq!(serde_json::to_string(&ideal).unwrap(), "\"ideal\"");

        let default: NoiseConfig = serde_json::from_str("\"default\"").unwrap();
        assert_eq!(default, NoiseConfig::Model(default_noise_model()));

        let json = serde_json::to_string(&default).unwrap();
        let back: NoiseConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, default);

        assert!(serde_json::from_str::<NoiseConfig>("\"loud\"").is_err());
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let config: ExperimentConfig = serde_json::from_str(r#"{"n_list": [2, 3]}"#).unwrap();
        config.validate().unwrap();
        assert_eq!(
            config.implementations,
            vec![Implementation::Unitary, Implementation::Dynamic]
        );
        assert_eq!(config.mitigation, vec![MitigationMode::None]);
        assert_eq!(config.shots_for(3), 6144);
        assert!(config.noise.is_ideal());
        assert!(!config.pairwise);
    }

    #[test]
    fn mitigation_tokens_parse() {
        let config: ExperimentConfig = serde_json::from_str(
            r#"{"n_list": [2], "mitigation": ["none", "em", "dd", "em+dd"]}"#,
        )
        .unwrap();
        assert_eq!(config.mitigation.len(), 4);
        assert!(config.mitigation[3].uses_em() && config.mitigation[3].uses_dd());
        assert!(!config.mitigation[1].uses_dd());
        assert_eq!(config.mitigation[2].label(), "dd");
    }

    #[test]
    fn validation_rejects_bad_values() {
        let reject = |json: &str| {
            let parsed = serde_json::from_str::<ExperimentConfig>(json)
                .map_err(|e| CliError::Config(e.to_string()))
                .and_then(|c| c.validate());
            assert!(parsed.is_err(), "accepted: {json}");
        };
        reject(r#"{"n_list": []}"#);
        reject(r#"{"n_list": [9]}"#);
        reject(r#"{"n_list": [2, 2]}"#);
        reject(r#"{"n_list": [2], "shots_per_setting": 0}"#);
        reject(r#"{"n_list": [2], "implementations": []}"#);
        reject(r#"{"n_list": [2], "mitigation": ["em", "em"]}"#);
        reject(r#"{"n_list": [2], "unknown_knob": 1}"#);
        // Tilt qubit 3 does not exist on the two-qubit register.
        reject(
            r#"{"n_list": [3, 2], "tilt_scan": {"party": "Alice", "qubits": [3]}}"#,
        );
        reject(r#"{"n_list": [2], "tilt_scan": {"party": "Bob", "angles": []}}"#);
    }
}
