//! Synthetic workflow templates.
//!
//! Profile constants live in `data/templates.json`. `chatbot` and
//! `videoanalysis` are scatter workflows (source, parallel stage, sink);
//! `mlpipeline` broadcasts into parallel stages that join before a tail
//! chain; `random` draws a layered DAG with random profiles.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ResourceConfig;
use crate::graph::{Edge, FunctionNode, SloSpec, WorkflowDag};
use crate::perf::FunctionPerfProfile;

const TEMPLATES: &str = include_str!("../data/templates.json");

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("unknown template `{0}`")]
    UnknownTemplate(String),
    #[error("template `{0}` is malformed: {1}")]
    Malformed(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Scatter,
    Broadcast,
    #[serde(rename = "random")]
    RandomDag,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Scatter => "scatter",
            Topology::Broadcast => "broadcast",
            Topology::RandomDag => "random-dag",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Role {
    pub name: String,
    pub profile: FunctionPerfProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileRanges {
    pub t0: (f64, f64),
    pub cpu_work: (f64, f64),
    pub parallel_cap: (f64, f64),
    pub mem_floor: (f64, f64),
    pub mem_knee_extra: (f64, f64),
    pub mem_slowdown: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadTemplate {
    #[serde(default)]
    pub name: String,
    pub topology: Topology,
    pub fan_out: usize,
    /// Length of the chain after the join (broadcast only).
    #[serde(default = "one")]
    pub tail: usize,
    pub slo_seconds: f64,
    /// When set, the SLO is this multiple of the base-config makespan.
    #[serde(default)]
    pub slo_factor: Option<f64>,
    /// Relative spread applied to each node's `cpu_work`.
    #[serde(default)]
    pub jitter: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub roles: BTreeMap<String, Role>,
    #[serde(default)]
    pub ranges: Option<ProfileRanges>,
}

fn one() -> usize {
    1
}

impl WorkloadTemplate {
    pub fn names() -> Vec<String> {
        let all: BTreeMap<String, serde_json::Value> =
            serde_json::from_str(TEMPLATES).expect("bundled templates parse");
        all.into_keys().collect()
    }

    pub fn builtin(name: &str) -> Result<Self, WorkloadError> {
        let mut all: BTreeMap<String, serde_json::Value> =
            serde_json::from_str(TEMPLATES).expect("bundled templates parse");
        let value = all.remove(name).ok_or_else(|| WorkloadError::UnknownTemplate(name.to_string()))?;
        let mut t: WorkloadTemplate =
            serde_json::from_value(value).map_err(|e| WorkloadError::Malformed(name.to_string(), e.to_string()))?;
        t.name = name.to_string();
        t.check()?;
        Ok(t)
    }

    pub fn with_fan_out(mut self, fan_out: usize) -> Self {
        self.fan_out = fan_out.max(1);
        self
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    fn role(&self, key: &str) -> Result<&Role, WorkloadError> {
        self.roles.get(key).ok_or_else(|| WorkloadError::Malformed(self.name.clone(), format!("missing role `{key}`")))
    }

    fn check(&self) -> Result<(), WorkloadError> {
        let needed: &[&str] = match self.topology {
            Topology::Scatter => &["source", "stage", "sink"],
            Topology::Broadcast => &["source", "stage", "join", "tail"],
            Topology::RandomDag => &[],
        };
        for key in needed {
            self.role(key)?;
        }
        if self.topology == Topology::RandomDag && self.ranges.is_none() {
            return Err(WorkloadError::Malformed(self.name.clone(), "random topology needs ranges".into()));
        }
        Ok(())
    }
}

impl FromStr for Topology {
    type Err = WorkloadError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scatter" => Ok(Topology::Scatter),
            "broadcast" => Ok(Topology::Broadcast),
            "random" | "random-dag" => Ok(Topology::RandomDag),
            other => Err(WorkloadError::UnknownTemplate(other.to_string())),
        }
    }
}

struct Builder<'t> {
    template: &'t WorkloadTemplate,
    rng: ChaCha8Rng,
    nodes: Vec<FunctionNode>,
    edges: Vec<Edge>,
    profiles: BTreeMap<String, FunctionPerfProfile>,
}

impl Builder<'_> {
    fn add(&mut self, id: String, mut profile: FunctionPerfProfile) -> String {
        if self.template.jitter > 0.0 {
            profile.cpu_work *= 1.0 + self.template.jitter * self.rng.random_range(-1.0..=1.0);
        }
        profile.noise_sigma = self.template.noise_sigma;
        self.profiles.insert(id.clone(), profile);
        self.nodes.push(FunctionNode::new(&id, &id));
        id
    }

    fn add_role(&mut self, id: String, role: &str) -> String {
        let profile = self.template.role(role).expect("checked at load").profile;
        self.add(id, profile)
    }

    fn edge(&mut self, a: &str, b: &str) {
        self.edges.push(Edge::new(a, b));
    }
}

/// Deterministic DAG for `template` and `seed`.
pub fn generate_workload(template: &WorkloadTemplate, seed: u64) -> WorkflowDag {
    let mut b = Builder {
        template,
        rng: ChaCha8Rng::seed_from_u64(seed),
        nodes: Vec::new(),
        edges: Vec::new(),
        profiles: BTreeMap::new(),
    };
    let name = |role: &str| template.role(role).expect("checked at load").name.clone();
    let k = template.fan_out.max(1);
    match template.topology {
        Topology::Scatter => {
            let src = b.add_role(name("source"), "source");
            let stages: Vec<String> = (1..=k).map(|i| b.add_role(format!("{}_{i}", name("stage")), "stage")).collect();
            let sink = b.add_role(name("sink"), "sink");
            for s in &stages {
                b.edge(&src, s);
            }
            for s in &stages {
                b.edge(s, &sink);
            }
        }
        Topology::Broadcast => {
            let src = b.add_role(name("source"), "source");
            let stages: Vec<String> = (1..=k).map(|i| b.add_role(format!("{}_{i}", name("stage")), "stage")).collect();
            let join = b.add_role(name("join"), "join");
            for s in &stages {
                b.edge(&src, s);
            }
            for s in &stages {
                b.edge(s, &join);
            }
            let tail_len = template.tail.max(1);
            let mut prev = join;
            for j in 1..=tail_len {
                let id = if tail_len == 1 { name("tail") } else { format!("{}_{j}", name("tail")) };
                let t = b.add_role(id, "tail");
                b.edge(&prev, &t);
                prev = t;
            }
        }
        Topology::RandomDag => random_dag(&mut b, template.ranges.expect("checked at load")),
    }

    let slo = match template.slo_factor {
        Some(f) => f * base_makespan(&b.nodes, &b.edges, &b.profiles),
        None => template.slo_seconds,
    };
    WorkflowDag::new(b.nodes, b.edges, SloSpec::new(slo).expect("template SLO is positive"), b.profiles)
}

fn random_profile(rng: &mut ChaCha8Rng, r: &ProfileRanges) -> FunctionPerfProfile {
    let mut draw = |(lo, hi): (f64, f64)| if hi > lo { rng.random_range(lo..hi) } else { lo };
    let t0 = draw(r.t0);
    let cpu_work = draw(r.cpu_work);
    let parallel_cap = draw(r.parallel_cap);
    let mem_floor = draw(r.mem_floor).round();
    let mem_knee = mem_floor + draw(r.mem_knee_extra).round();
    let mem_slowdown = draw(r.mem_slowdown);
    FunctionPerfProfile { t0, cpu_work, parallel_cap, mem_floor, mem_knee, mem_slowdown, noise_sigma: 0.0 }
}

fn random_dag(b: &mut Builder<'_>, ranges: ProfileRanges) {
    let src_profile = random_profile(&mut b.rng, &ranges);
    let src = b.add("src".to_string(), src_profile);
    let depth = b.rng.random_range(1..=4usize);
    let mut layers: Vec<Vec<String>> = Vec::new();
    let mut count = 0;
    for _ in 0..depth {
        let width = b.rng.random_range(1..=3usize).min(10 - count);
        if width == 0 {
            break;
        }
        let layer: Vec<String> = (0..width)
            .map(|_| {
                count += 1;
                let p = random_profile(&mut b.rng, &ranges);
                b.add(format!("f{count:02}"), p)
            })
            .collect();
        layers.push(layer);
    }
    let sink_profile = random_profile(&mut b.rng, &ranges);
    let sink = b.add("sink".to_string(), sink_profile);

    for (li, layer) in layers.iter().enumerate() {
        for node in layer {
            if li == 0 {
                b.edge(&src, node);
                continue;
            }
            let prev = &layers[li - 1];
            let p = prev[b.rng.random_range(0..prev.len())].clone();
            b.edge(&p, node);
            for earlier in layers[..li].iter().flatten() {
                if earlier != &p && b.rng.random_bool(0.25) {
                    b.edge(earlier, node);
                }
            }
            if b.rng.random_bool(0.15) {
                b.edge(&src, node);
            }
        }
    }
    let interior: Vec<String> = layers.iter().flatten().cloned().collect();
    for node in &interior {
        let has_succ = b.edges.iter().any(|e| &e.from == node);
        if !has_succ || b.rng.random_bool(0.15) {
            b.edge(node, &sink);
        }
    }
    b.edges.dedup();
}

/// Noiseless makespan of the freshly built graph at the base config.
fn base_makespan(nodes: &[FunctionNode], edges: &[Edge], profiles: &BTreeMap<String, FunctionPerfProfile>) -> f64 {
    let mut nodes = nodes.to_vec();
    let base = ResourceConfig::max();
    for n in &mut nodes {
        n.last_runtime = profiles.get(&n.profile).and_then(|p| p.base_runtime(&base));
    }
    let dag = WorkflowDag::new(nodes, edges.to_vec(), SloSpec::new(1.0).unwrap(), profiles.clone());
    dag.makespan().unwrap_or(1.0)
}
