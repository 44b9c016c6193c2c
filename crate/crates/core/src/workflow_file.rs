//! JSON workflow and configuration files.
//!
//! ```json
//! {
//!   "profiles": { "p": { "t0": 1, "cpu_work": 8, "parallel_cap": 4, "mem_floor": 128,
//!                        "mem_knee": 128, "mem_slowdown": 0, "noise_sigma": 0 } },
//!   "nodes": [ { "id": "a", "profile": "p", "cpu_init": 2.0, "mem_init": 1024 } ],
//!   "edges": [ { "from": "a", "to": "b" } ],
//!   "slo_seconds": 120,
//!   "pricing": { "mu0": 0.512, "mu1": 0.001, "mu2": 0 }
//! }
//! ```
//!
//! A config file maps node ids to `{ "cpu": .., "mem": .. }`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigMap, ResourceConfig};
use crate::cost::PricingParams;
use crate::graph::{Edge, FunctionNode, GraphError, SloSpec, WorkflowDag};
use crate::perf::{FunctionPerfProfile, PerfError};

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("profile `{name}`: {source}")]
    Profile { name: String, source: PerfError },
    #[error("node `{0}`: initial config out of bounds")]
    InitOutOfBounds(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: String,
    pub profile: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cpu_init: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mem_init: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkflowFile {
    pub profiles: BTreeMap<String, FunctionPerfProfile>,
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<Edge>,
    pub slo_seconds: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pricing: Option<PricingParams>,
}

impl WorkflowFile {
    pub fn from_json(text: &str) -> Result<Self, FileError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("workflow file serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FileError> {
        Self::from_json(&read(path.as_ref())?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), FileError> {
        write(path.as_ref(), &self.to_json())
    }

    /// Builds the DAG; structural validation is left to `validate_dag`.
    pub fn to_dag(&self) -> Result<WorkflowDag, FileError> {
        for (name, p) in &self.profiles {
            p.validate().map_err(|source| FileError::Profile { name: name.clone(), source })?;
        }
        let slo = SloSpec::new(self.slo_seconds)?;
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for spec in &self.nodes {
            let base = ResourceConfig::max();
            let cfg = ResourceConfig::new(spec.cpu_init.unwrap_or(base.cpu), spec.mem_init.unwrap_or(base.mem));
            if !cfg.in_bounds() {
                return Err(FileError::InitOutOfBounds(spec.id.clone()));
            }
            nodes.push(FunctionNode::new(&spec.id, &spec.profile).with_config(cfg));
        }
        Ok(WorkflowDag::new(nodes, self.edges.clone(), slo, self.profiles.clone()))
    }

    pub fn from_dag(dag: &WorkflowDag, pricing: Option<PricingParams>) -> Self {
        let base = ResourceConfig::max();
        Self {
            profiles: dag.profiles().clone(),
            nodes: dag
                .nodes()
                .iter()
                .map(|n| NodeSpec {
                    id: n.id.clone(),
                    profile: n.profile.clone(),
                    cpu_init: (n.config.cpu != base.cpu).then_some(n.config.cpu),
                    mem_init: (n.config.mem != base.mem).then_some(n.config.mem),
                })
                .collect(),
            edges: dag.edges().to_vec(),
            slo_seconds: dag.slo().seconds(),
            pricing,
        }
    }
}

fn read(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(|source| FileError::Io { path: path.display().to_string(), source })
}

fn write(path: &Path, text: &str) -> Result<(), FileError> {
    fs::write(path, text).map_err(|source| FileError::Io { path: path.display().to_string(), source })
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ConfigMap, FileError> {
    Ok(serde_json::from_str(&read(path.as_ref())?)?)
}

pub fn save_config(map: &ConfigMap, path: impl AsRef<Path>) -> Result<(), FileError> {
    write(path.as_ref(), &(serde_json::to_string_pretty(map)? + "\n"))
}
