//! Per-input-class configuration: one schedule per input size, looked up by
//! class label at request time.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ConfigMap;
use crate::cost::PricingParams;
use crate::graph::{SloSpec, WorkflowDag};
use crate::perf::{ExecutionBackend, FunctionPerfProfile};
use crate::scheduler::{schedule, ScheduleError, ScheduleParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InputError {
    #[error("bad input class `{0}` (expected label:scale with scale > 0)")]
    Parse(String),
    #[error("no input classes given")]
    NoClasses,
    #[error("duplicate input class `{0}`")]
    DuplicateClass(String),
    #[error("class `{label}`: {source}")]
    Class { label: String, source: ScheduleError },
    #[error("unknown input class `{0}`")]
    UnknownClass(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputClass {
    pub label: String,
    /// Multiplier on each node's compute work and memory knee.
    pub scale: f64,
}

impl InputClass {
    pub fn new(label: impl Into<String>, scale: f64) -> Result<Self, InputError> {
        let label = label.into();
        if label.is_empty() || !(scale.is_finite() && scale > 0.0) {
            return Err(InputError::Parse(format!("{label}:{scale}")));
        }
        Ok(Self { label, scale })
    }

    /// Parses `light:0.3,middle:1.0,heavy:3.0`.
    pub fn parse_list(s: &str) -> Result<Vec<Self>, InputError> {
        let classes =
            s.split(',').filter(|p| !p.trim().is_empty()).map(str::parse).collect::<Result<Vec<Self>, _>>()?;
        if classes.is_empty() {
            return Err(InputError::NoClasses);
        }
        Ok(classes)
    }
}

impl FromStr for InputClass {
    type Err = InputError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (label, scale) = s.trim().split_once(':').ok_or_else(|| InputError::Parse(s.to_string()))?;
        let scale: f64 = scale.trim().parse().map_err(|_| InputError::Parse(s.to_string()))?;
        Self::new(label.trim(), scale).map_err(|_| InputError::Parse(s.to_string()))
    }
}

impl fmt::Display for InputClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.label, self.scale)
    }
}

pub fn scale_profile(p: &FunctionPerfProfile, k: f64) -> FunctionPerfProfile {
    FunctionPerfProfile { cpu_work: p.cpu_work * k, mem_knee: (p.mem_knee * k).max(p.mem_floor), ..*p }
}

/// Copy of `dag` with every profile scaled by `k`.
pub fn scale_dag(dag: &WorkflowDag, k: f64) -> WorkflowDag {
    let mut out = dag.clone();
    for p in out.profiles_mut().values_mut() {
        *p = scale_profile(p, k);
    }
    out
}

/// Class label to configuration, ordered by scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassTable {
    pub entries: Vec<(InputClass, ConfigMap)>,
}

impl ClassTable {
    pub fn dispatch(&self, label: &str) -> Result<&ConfigMap, InputError> {
        self.entries
            .iter()
            .find(|(c, _)| c.label == label)
            .map(|(_, m)| m)
            .ok_or_else(|| InputError::UnknownClass(label.to_string()))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(c, _)| c.label.as_str())
    }
}

/// Schedules one scaled copy of `dag` per class against the same SLO.
pub fn input_aware_optimize(
    dag: &WorkflowDag,
    classes: &[InputClass],
    slo: SloSpec,
    backend: &dyn ExecutionBackend,
    pricing: &PricingParams,
    params: &ScheduleParams,
    seed: u64,
) -> Result<ClassTable, InputError> {
    if classes.is_empty() {
        return Err(InputError::NoClasses);
    }
    let mut sorted = classes.to_vec();
    sorted.sort_by(|a, b| a.scale.total_cmp(&b.scale));
    for (i, c) in sorted.iter().enumerate() {
        if sorted[..i].iter().any(|o| o.label == c.label) {
            return Err(InputError::DuplicateClass(c.label.clone()));
        }
    }
    let mut entries = Vec::with_capacity(sorted.len());
    for class in sorted {
        let mut scaled = scale_dag(dag, class.scale);
        scaled.set_slo(slo);
        let out = schedule(&mut scaled, slo, backend, pricing, params, seed)
            .map_err(|source| InputError::Class { label: class.label.clone(), source })?;
        entries.push((class, out.configs));
    }
    Ok(ClassTable { entries })
}
