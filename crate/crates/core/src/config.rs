//! Decoupled resource allocations and their global bounds.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Smallest allocatable vCPU share.
pub const CPU_MIN: f64 = 0.1;
/// Largest allocatable vCPU count.
pub const CPU_MAX: f64 = 10.0;
/// Smallest allocatable memory, MB.
pub const MEM_MIN: u32 = 128;
/// Largest allocatable memory, MB.
pub const MEM_MAX: u32 = 10240;
/// vCPU granularity of the discretized search grid.
pub const CPU_GRANULARITY: f64 = 0.1;
/// Memory granularity of the discretized search grid, MB.
pub const MEM_GRANULARITY: u32 = 64;

// Absorbs the rounding left over from repeated step subtraction.
const CPU_EPS: f64 = 1e-9;

/// The two independently tunable resources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceKind {
    Cpu,
    Mem,
}

impl ResourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ResourceKind::Cpu => "cpu",
            ResourceKind::Mem => "mem",
        }
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A (vCPU, memory MB) allocation for one function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResourceConfig {
    pub cpu: f64,
    pub mem: u32,
}

impl ResourceConfig {
    pub const fn new(cpu: f64, mem: u32) -> Self {
        Self { cpu, mem }
    }

    /// The over-provisioned grid maximum.
    pub const fn max() -> Self {
        Self::new(CPU_MAX, MEM_MAX)
    }

    pub fn in_bounds(&self) -> bool {
        self.cpu.is_finite()
            && self.cpu >= CPU_MIN - CPU_EPS
            && self.cpu <= CPU_MAX + CPU_EPS
            && (MEM_MIN..=MEM_MAX).contains(&self.mem)
    }

    pub fn mem_gb(&self) -> f64 {
        f64::from(self.mem) / 1024.0
    }

    /// The MAFF coupling rule: one vCPU per 1024 MB, clamped to the vCPU bounds.
    pub fn coupled(mem: u32) -> Self {
        let cpu = (f64::from(mem) / 1024.0).clamp(CPU_MIN, CPU_MAX);
        Self::new(cpu, mem)
    }
}

impl fmt::Display for ResourceConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} vCPU, {} MB)", self.cpu, self.mem)
    }
}

/// Final configuration per function, keyed by node id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfigMap(BTreeMap<String, ResourceConfig>);

impl ConfigMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, config: ResourceConfig) -> Option<ResourceConfig> {
        self.0.insert(id.into(), config)
    }

    pub fn get(&self, id: &str) -> Option<&ResourceConfig> {
        self.0.get(id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.0.contains_key(id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &ResourceConfig)> {
        self.0.iter()
    }

    /// Union; entries of `other` win on collision.
    pub fn merge(&mut self, other: ConfigMap) {
        self.0.extend(other.0);
    }

    pub fn total_cpu(&self) -> f64 {
        self.0.values().map(|c| c.cpu).sum()
    }

    pub fn total_mem(&self) -> u64 {
        self.0.values().map(|c| u64::from(c.mem)).sum()
    }
}

impl FromIterator<(String, ResourceConfig)> for ConfigMap {
    fn from_iter<T: IntoIterator<Item = (String, ResourceConfig)>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl IntoIterator for ConfigMap {
    type Item = (String, ResourceConfig);
    type IntoIter = std::collections::btree_map::IntoIter<String, ResourceConfig>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}
