use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{argmax, FeatureConfig, QNetwork, State};
use crate::error::{Error, Result};
use crate::measures::{Measure, MeasureKind};

pub const POLICY_VERSION: u32 = 1;
pub const SIMILARITY_TAG: &str = "inv1p_q32";

/// A trained Q-network together with the MDP configuration it was trained on.
///
/// Stored as JSON; floats are written in shortest round-trip form, so a
/// save/load cycle reproduces every parameter exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub version: u32,
    pub measure: MeasureKind,
    pub similarity: String,
    pub features: FeatureConfig,
    pub k: usize,
    pub network: QNetwork,
    /// Free-form provenance (CLI run configuration).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run_config: Option<serde_json::Value>,
}

impl Policy {
    pub fn new(measure: Measure, features: FeatureConfig, k: usize, network: QNetwork) -> Result<Self> {
        let policy = Policy {
            version: POLICY_VERSION,
            measure: measure.kind(),
            similarity: SIMILARITY_TAG.to_string(),
            features,
            k,
            network,
            run_config: None,
        };
        policy.validate()?;
        Ok(policy)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != POLICY_VERSION {
            return Err(Error::PolicyMismatch(format!(
                "policy version {} unsupported (expected {POLICY_VERSION})",
                self.version
            )));
        }
        if self.similarity != SIMILARITY_TAG {
            return Err(Error::PolicyMismatch(format!("unknown similarity map {:?}", self.similarity)));
        }
        let net = &self.network;
        if net.input != self.features.dim() {
            return Err(Error::DimMismatch { expected: self.features.dim(), got: net.input });
        }
        if net.output != 2 + self.k {
            return Err(Error::DimMismatch { expected: 2 + self.k, got: net.output });
        }
        let expected = QNetwork::param_count(net.input, net.hidden, net.output);
        if net.params.len() != expected {
            return Err(Error::DimMismatch { expected, got: net.params.len() });
        }
        Ok(())
    }

    pub fn q_values(&self, s: &State) -> Result<Vec<f64>> {
        self.network.forward(s.as_slice())
    }

    /// Greedy action; lowest index on ties.
    pub fn act(&self, s: &State) -> Result<usize> {
        Ok(argmax(&self.q_values(s)?))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("policy serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let policy: Policy = serde_json::from_str(s).map_err(|e| Error::Format(format!("policy: {e}")))?;
        policy.validate()?;
        Ok(policy)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn rejects_shape_and_version_mismatch() {
        let net = QNetwork::zeros(3, 20, 2);
        assert!(Policy::new(Measure::Dtw, FeatureConfig::WithSuffix, 1, net.clone()).is_err());
        assert!(Policy::new(Measure::Dtw, FeatureConfig::PrefixOnly, 0, net.clone()).is_err());
        let mut p = Policy::new(Measure::Dtw, FeatureConfig::WithSuffix, 0, net).unwrap();
        p.version = 99;
        assert!(matches!(Policy::from_json(&p.to_json()), Err(Error::PolicyMismatch(_))));
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let net = QNetwork::init(3, 20, 5, &mut seeded(8));
        let p = Policy::new(Measure::Frechet, FeatureConfig::WithSuffix, 3, net).unwrap();
        let back = Policy::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
    }
}
