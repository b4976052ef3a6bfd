//! Experiment configuration and its validation.

use crate::error::{Error, Result};
use crate::limits::ScenarioSpec;
use crate::SCHEMA_VERSION;
use serde::{Deserialize, Serialize};

/// Master seed used when a configuration or command line does not give one.
pub const DEFAULT_SEED: u64 = 20_240_601;

const DEFAULT_REPS: usize = 1000;
const DEFAULT_DELTA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Sup distance between the FCP curve and `I_n`.
    FcpSup,
    /// `FCP(alpha)` at each configured alpha.
    FcpPointwise,
    /// BH on plain conformal p-values.
    BhFdp,
    /// FCP with weighted p-values.
    WeightedFcp,
    /// BH on weighted p-values.
    WeightedBh,
}

impl Mode {
    pub fn is_weighted(self) -> bool {
        matches!(self, Mode::WeightedFcp | Mode::WeightedBh)
    }

    pub fn is_bh(self) -> bool {
        matches!(self, Mode::BhFdp | Mode::WeightedBh)
    }
}

fn default_schema_version() -> u32 {
    SCHEMA_VERSION
}

fn default_reps() -> usize {
    DEFAULT_REPS
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema_version")]
    pub schema_version: u32,
    pub mode: Mode,
    pub scenario: ScenarioSpec,
    pub n: usize,
    pub m: usize,
    pub alphas: Vec<f64>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
}

impl ExperimentConfig {
    /// Parses and validates a JSON document. Schema errors name the offending
    /// field as a JSON pointer.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let pointer = json_pointer(&e.path().to_string());
            Error::Configuration(format!("{pointer}: {}", e.inner()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Lists every violated constraint as `(json pointer, message)`.
    pub fn violations(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut bad = |path: &str, msg: String| out.push((path.to_string(), msg));
        if self.schema_version != SCHEMA_VERSION {
            bad(
                "/schema_version",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema_version
                ),
            );
        }
        if self.n == 0 {
            bad("/n", "must be at least 1".into());
        }
        if self.m == 0 {
            bad("/m", "must be at least 1".into());
        }
        if self.reps == 0 {
            bad("/reps", "must be at least 1".into());
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            bad("/delta", format!("{} is not in (0, 1)", self.delta));
        }
        if self.alphas.is_empty() {
            bad("/alphas", "must list at least one level".into());
        }
        for (i, a) in self.alphas.iter().enumerate() {
            if !(*a > 0.0 && *a < 1.0) {
                bad(&format!("/alphas/{i}"), format!("{a} is not in (0, 1)"));
            }
        }
        let sc = &self.scenario;
        if self.mode.is_bh() {
            if sc.null_dist.is_none() {
                bad(
                    "/scenario/null_dist",
                    format!("required by mode {:?}", self.mode),
                );
            }
            if sc.pi0.is_none() {
                bad("/scenario/pi0", format!("required by mode {:?}", self.mode));
            }
        }
        if self.mode.is_weighted() && sc.weight.is_none() {
            bad(
                "/scenario/weight",
                format!("required by mode {:?}", self.mode),
            );
        }
        if let Err(e) = sc.validate() {
            bad("/scenario", e.to_string());
        }
        out
    }

    /// Fails with every violation listed. An unbounded weight is reported as
    /// an assumption violation, everything else as a configuration error.
    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            return Ok(());
        }
        let msg = v
            .iter()
            .map(|(p, m)| format!("{p}: {m}"))
            .collect::<Vec<_>>()
            .join("; ");
        if v.len() == 1 && matches!(self.scenario.validate(), Err(Error::AssumptionViolation(_))) {
            return Err(Error::AssumptionViolation(msg));
        }
        Err(Error::Configuration(msg))
    }
}

/// Turns a serde_path_to_error path (`scenario.cal.rate`, `alphas[2]`) into a
/// JSON pointer (`/scenario/cal/rate`, `/alphas/2`).
fn json_pointer(path: &str) -> String {
    if path == "." || path.is_empty() {
        return String::new();
    }
    let mut out = String::new();
    for seg in path.split('.') {
        let mut rest = seg;
        while !rest.is_empty() {
            let (head, tail) = match rest.find('[') {
                Some(0) => {
                    let close = rest.find(']').unwrap_or(rest.len() - 1);
                    (&rest[1..close], &rest[close + 1..])
                }
                Some(k) => (&rest[..k], &rest[k..]),
                None => (rest, ""),
            };
            out.push('/');
            out.push_str(&head.replace('~', "~0").replace('/', "~1"));
            rest = tail;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{
        "mode": "fcp_sup",
        "scenario": {"cal": {"kind": "uniform01"}, "test": {"kind": "uniform01"}},
        "n": 100, "m": 100, "alphas": [0.1]
    }"#;

    #[test]
    fn defaults_fill_in() {
        let cfg = ExperimentConfig::from_json_str(GOOD).unwrap();
        assert_eq!(cfg.reps, 1000);
        assert_eq!(cfg.master_seed, DEFAULT_SEED);
        assert_eq!(cfg.schema_version, SCHEMA_VERSION);
    }

    #[test]
    fn pointer_conversion() {
        assert_eq!(json_pointer("scenario.cal.rate"), "/scenario/cal/rate");
        assert_eq!(json_pointer("alphas[2]"), "/alphas/2");
        assert_eq!(json_pointer("."), "");
    }

    #[test]
    fn schema_errors_carry_a_pointer() {
        let text = GOOD.replace("\"n\": 100", "\"n\": \"many\"");
        let err = ExperimentConfig::from_json_str(&text)
            .unwrap_err()
            .to_string();
        assert!(err.contains("/n:"), "{err}");
        let text = GOOD.replace("\"alphas\": [0.1]", "\"alphas\": [0.1, \"x\"]");
        let err = ExperimentConfig::from_json_str(&text)
            .unwrap_err()
            .to_string();
        assert!(err.contains("/alphas/1"), "{err}");
    }

    #[test]
    fn all_violations_are_listed() {
        let text = GOOD
            .replace("\"n\": 100", "\"n\": 0")
            .replace("[0.1]", "[0.1, 1.5]")
            .replace("fcp_sup", "bh_fdp");
        let err = ExperimentConfig::from_json_str(&text)
            .unwrap_err()
            .to_string();
        for p in [
            "/n:",
            "/alphas/1:",
            "/scenario/null_dist:",
            "/scenario/pi0:",
        ] {
            assert!(err.contains(p), "{p} missing from {err}");
        }
    }
}
