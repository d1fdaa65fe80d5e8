//! The normalised record of one command invocation, embedded in every analysis artifact.

use std::collections::BTreeMap;
use std::path::Path;

use hcmeta_core::exponent::Alpha;
use hcmeta_core::graph::{BipartiteGraph, GraphSpec};
use hcmeta_core::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    /// A graph spec such as `torus:6x6`, or `@path` to a graph JSON file.
    pub graph: String,
    pub alpha: Option<String>,
    #[serde(default)]
    pub lambda: Vec<f64>,
    pub samples: Option<usize>,
    pub seed: u64,
    #[serde(default)]
    pub options: BTreeMap<String, String>,
    pub output: Option<String>,
}

impl ExperimentConfig {
    /// Parse a JSON config and normalise it.
    #[cfg_attr(not(test), allow(dead_code))]
    pub fn parse(s: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(s)?;
        c.normalize()
    }

    #[cfg_attr(not(test), allow(dead_code))]
    pub fn serialize(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Canonical graph spec and reduced alpha fraction; checks both parse.
    pub fn normalize(mut self) -> Result<Self> {
        if !self.graph.starts_with('@') {
            self.graph = self.graph.parse::<GraphSpec>()?.to_string();
        }
        if let Some(a) = &self.alpha {
            self.alpha = Some(a.parse::<Alpha>()?.to_string());
        }
        if let Some(l) = self.lambda.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidParameter(format!("lambda must be positive, got {l}")));
        }
        Ok(self)
    }

    pub fn alpha(&self) -> Result<Alpha> {
        self.alpha
            .as_deref()
            .unwrap_or("1/2")
            .parse::<Alpha>()
    }

    pub fn build_graph(&self) -> Result<BipartiteGraph> {
        load_graph(&self.graph)
    }
}

/// Build a graph from a spec string or from `@file.json`.
pub fn load_graph(arg: &str) -> Result<BipartiteGraph> {
    match arg.strip_prefix('@') {
        Some(path) => {
            let text = std::fs::read_to_string(Path::new(path))?;
            BipartiteGraph::from_json_str(&text)
        }
        None => arg.parse::<GraphSpec>()?.build(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ExperimentConfig {
        ExperimentConfig {
            command: "simulate".into(),
            graph: "doubled( cycle:6 )".into(),
            alpha: Some("14/20".into()),
            lambda: vec![1000.0],
            samples: Some(2000),
            seed: 42,
            options: BTreeMap::from([("ks_exponential".to_string(), "true".to_string())]),
            output: None,
        }
    }

    #[test]
    fn normalisation_reduces_alpha() {
        let n = sample().normalize().unwrap();
        assert_eq!(n.alpha.as_deref(), Some("7/10"));
    }

    #[test]
    fn round_trip_is_normalisation() {
        let raw = serde_json::to_string(&sample()).unwrap();
        let parsed = ExperimentConfig::parse(&raw).unwrap();
        assert_eq!(parsed.serialize(), sample().normalize().unwrap().serialize());
        assert_eq!(ExperimentConfig::parse(&parsed.serialize()).unwrap(), parsed);
    }

    #[test]
    fn bad_fields_are_rejected() {
        let mut c = sample();
        c.alpha = Some("3/2".into());
        assert!(c.normalize().is_err());
        let mut c = sample();
        c.lambda = vec![-1.0];
        assert!(c.normalize().is_err());
        assert!(ExperimentConfig::parse(r#"{"command":"x","graph":"cycle:6","seed":1,"bogus":2}"#).is_err());
    }
}
