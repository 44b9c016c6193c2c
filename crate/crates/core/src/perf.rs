//! Synthetic function execution.
//!
//! A function's runtime under a decoupled allocation is modeled as
//!
//! ```text
//! t(cpu, mem) = [t0 + cpu_work / min(cpu, parallel_cap) + mem_penalty(mem)] * noise
//! mem_penalty(mem) = mem_slowdown * max(0, (mem_knee - mem) / (mem_knee - mem_floor))
//! noise = max(0.01, 1 + noise_sigma * g)
//! ```
//!
//! where `g` is one standard-normal draw (`rand_distr::StandardNormal`) from a
//! `ChaCha8Rng` seeded with the invocation seed. Allocations below
//! `mem_floor` fail with an out-of-memory error after `t0` seconds.
//!
//! Backends sit behind [`ExecutionBackend`] so the optimizers never see
//! whether a runtime came from the model or from a real runner.

use std::path::PathBuf;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ResourceConfig, CPU_MIN};
use crate::graph::{GraphError, WorkflowDag};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerfError {
    #[error("configuration {0} is outside the allocatable bounds")]
    ConfigOutOfBounds(ResourceConfig),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("node `{0}` has no profile")]
    MissingProfile(String),
    #[error("backend failure: {0}")]
    Backend(String),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error("workflow execution failed at node `{0}`")]
    WorkflowExecutionFailed(String),
    #[error(transparent)]
    Perf(#[from] PerfError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Parametric runtime surface of one function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionPerfProfile {
    /// Fixed overhead, seconds.
    pub t0: f64,
    /// Divisible compute, vCPU-seconds.
    pub cpu_work: f64,
    /// vCPUs beyond which extra CPU gives no speedup.
    pub parallel_cap: f64,
    /// MB below which execution fails.
    pub mem_floor: f64,
    /// MB below which memory pressure slows execution.
    pub mem_knee: f64,
    /// Maximum added latency from memory pressure, seconds.
    pub mem_slowdown: f64,
    /// Relative runtime noise.
    #[serde(default)]
    pub noise_sigma: f64,
}

impl FunctionPerfProfile {
    /// Runtime `seconds` regardless of allocation.
    pub fn constant(seconds: f64) -> Self {
        Self {
            t0: seconds,
            cpu_work: 0.0,
            parallel_cap: 10.0,
            mem_floor: 128.0,
            mem_knee: 128.0,
            mem_slowdown: 0.0,
            noise_sigma: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), PerfError> {
        let fields = [
            ("t0", self.t0),
            ("cpu_work", self.cpu_work),
            ("parallel_cap", self.parallel_cap),
            ("mem_floor", self.mem_floor),
            ("mem_knee", self.mem_knee),
            ("mem_slowdown", self.mem_slowdown),
            ("noise_sigma", self.noise_sigma),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(PerfError::InvalidProfile(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if self.mem_floor > self.mem_knee {
            return Err(PerfError::InvalidProfile("mem_floor exceeds mem_knee".into()));
        }
        if self.parallel_cap < CPU_MIN {
            return Err(PerfError::InvalidProfile("parallel_cap below the vCPU minimum".into()));
        }
        Ok(())
    }

    /// Added latency from running below the memory knee.
    pub fn mem_penalty(&self, mem: f64) -> f64 {
        if self.mem_knee <= self.mem_floor || mem >= self.mem_knee {
            return 0.0;
        }
        self.mem_slowdown * ((self.mem_knee - mem) / (self.mem_knee - self.mem_floor)).max(0.0)
    }

    /// Noiseless runtime; `None` when the allocation is below the memory floor.
    pub fn base_runtime(&self, config: &ResourceConfig) -> Option<f64> {
        let mem = f64::from(config.mem);
        if mem < self.mem_floor {
            return None;
        }
        Some(self.t0 + self.cpu_work / config.cpu.min(self.parallel_cap) + self.mem_penalty(mem))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureKind {
    None,
    Oom,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExecutionResult {
    /// Seconds. For a failed run this is the time until the crash.
    pub runtime: f64,
    pub success: bool,
    pub failure_kind: FailureKind,
}

/// Multiplicative noise factor for one invocation.
pub fn noise_factor(sigma: f64, seed: u64) -> f64 {
    if sigma == 0.0 {
        return 1.0;
    }
    let g: f64 = ChaCha8Rng::seed_from_u64(seed).sample(StandardNormal);
    (1.0 + sigma * g).max(0.01)
}

pub fn simulate_runtime(
    profile: &FunctionPerfProfile,
    config: &ResourceConfig,
    seed: u64,
) -> Result<ExecutionResult, PerfError> {
    if !config.in_bounds() {
        return Err(PerfError::ConfigOutOfBounds(*config));
    }
    let noise = noise_factor(profile.noise_sigma, seed);
    Ok(match profile.base_runtime(config) {
        Some(t) => ExecutionResult { runtime: t * noise, success: true, failure_kind: FailureKind::None },
        None => ExecutionResult { runtime: profile.t0 * noise, success: false, failure_kind: FailureKind::Oom },
    })
}

/// Produces one function execution. Implementations must be deterministic
/// for a fixed `(profile, config, seed)`.
pub trait ExecutionBackend {
    fn execute(
        &self,
        node_id: &str,
        profile: &FunctionPerfProfile,
        config: &ResourceConfig,
        seed: u64,
    ) -> Result<ExecutionResult, PerfError>;
}

/// The parametric model above.
#[derive(Debug, Clone, Copy, Default)]
pub struct SyntheticBackend;

impl ExecutionBackend for SyntheticBackend {
    fn execute(
        &self,
        _node_id: &str,
        profile: &FunctionPerfProfile,
        config: &ResourceConfig,
        seed: u64,
    ) -> Result<ExecutionResult, PerfError> {
        simulate_runtime(profile, config, seed)
    }
}

/// Shells out to `program args.. <node_id> <cpu> <mem_mb> <seed>` and reads
/// the runtime in seconds as the first float on stdout. A non-zero exit is
/// reported as an out-of-memory failure.
#[derive(Debug, Clone)]
pub struct CommandBackend {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl CommandBackend {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        Self { program: program.into(), args: Vec::new() }
    }
}

impl ExecutionBackend for CommandBackend {
    fn execute(
        &self,
        node_id: &str,
        _profile: &FunctionPerfProfile,
        config: &ResourceConfig,
        seed: u64,
    ) -> Result<ExecutionResult, PerfError> {
        if !config.in_bounds() {
            return Err(PerfError::ConfigOutOfBounds(*config));
        }
        let out = Command::new(&self.program)
            .args(&self.args)
            .arg(node_id)
            .arg(config.cpu.to_string())
            .arg(config.mem.to_string())
            .arg(seed.to_string())
            .output()
            .map_err(|e| PerfError::Backend(format!("{}: {e}", self.program.display())))?;
        let stdout = String::from_utf8_lossy(&out.stdout);
        let runtime =
            stdout.split_whitespace().find_map(|tok| tok.parse::<f64>().ok()).filter(|t| t.is_finite() && *t >= 0.0);
        match (out.status.success(), runtime) {
            (true, Some(runtime)) => Ok(ExecutionResult { runtime, success: true, failure_kind: FailureKind::None }),
            (true, None) => Err(PerfError::Backend(format!("no runtime in output of {}", self.program.display()))),
            (false, r) => {
                Ok(ExecutionResult { runtime: r.unwrap_or(0.0), success: false, failure_kind: FailureKind::Oom })
            }
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
}

/// Stable seed for one node within one workflow or path execution.
pub fn node_seed(run_seed: u64, node_id: &str) -> u64 {
    splitmix64(run_seed ^ splitmix64(fnv1a(node_id.as_bytes())))
}

/// Stable seed for the `invocation`-th execution of a run.
pub fn invocation_seed(run_seed: u64, invocation: u64) -> u64 {
    splitmix64(splitmix64(run_seed) ^ invocation)
}

/// Outcome of one whole-workflow execution.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowRun {
    /// Heaviest source-to-sink path; nodes skipped after a failure weigh 0.
    pub makespan: f64,
    /// Every node that ran (including one that crashed), topological order.
    pub runtimes: Vec<(String, f64)>,
    pub failed: Option<String>,
}

/// Outcome of one sequential path execution.
#[derive(Debug, Clone, PartialEq)]
pub struct PathRun {
    pub runtime: f64,
    pub runtimes: Vec<(String, f64)>,
    pub failed: Option<String>,
}

fn run_node(
    dag: &WorkflowDag,
    id: &str,
    backend: &dyn ExecutionBackend,
    seed: u64,
) -> Result<ExecutionResult, ExecError> {
    let node = dag.node(id).ok_or_else(|| GraphError::UnknownNode(id.to_string()))?;
    let profile = dag.profile_of(id).ok_or_else(|| PerfError::MissingProfile(id.to_string()))?;
    Ok(backend.execute(id, profile, &node.config, node_seed(seed, id))?)
}

/// Runs every node once and records the weights. Nodes downstream of a
/// failed node are skipped and keep their previous weight.
pub fn run_workflow(
    dag: &mut WorkflowDag,
    backend: &dyn ExecutionBackend,
    seed: u64,
) -> Result<WorkflowRun, ExecError> {
    let order: Vec<String> = dag.topological_order()?.into_iter().map(String::from).collect();
    let mut finish: std::collections::HashMap<String, f64> = Default::default();
    let mut skipped: std::collections::HashSet<String> = Default::default();
    let mut runtimes = Vec::with_capacity(order.len());
    let mut failed = None;
    let mut makespan: f64 = 0.0;
    for id in &order {
        let preds: Vec<String> = dag.predecessors(id).into_iter().map(String::from).collect();
        let ready = preds.iter().map(|p| finish.get(p).copied().unwrap_or(0.0)).fold(0.0, f64::max);
        if preds.iter().any(|p| skipped.contains(p)) {
            skipped.insert(id.clone());
            finish.insert(id.clone(), ready);
            continue;
        }
        let res = run_node(dag, id, backend, seed)?;
        runtimes.push((id.clone(), res.runtime));
        if let Some(n) = dag.node_mut(id) {
            n.last_runtime = Some(res.runtime);
        }
        let end = ready + res.runtime;
        makespan = makespan.max(end);
        finish.insert(id.clone(), end);
        if !res.success {
            skipped.insert(id.clone());
            failed.get_or_insert_with(|| id.clone());
        }
    }
    Ok(WorkflowRun { makespan, runtimes, failed })
}

/// Executes the workflow and returns its end-to-end makespan.
pub fn execute_workflow(dag: &mut WorkflowDag, backend: &dyn ExecutionBackend, seed: u64) -> Result<f64, ExecError> {
    let run = run_workflow(dag, backend, seed)?;
    match run.failed {
        Some(node) => Err(ExecError::WorkflowExecutionFailed(node)),
        None => Ok(run.makespan),
    }
}

/// Runs `nodes` back to back, stopping at the first failure.
pub fn run_path(
    dag: &mut WorkflowDag,
    nodes: &[String],
    backend: &dyn ExecutionBackend,
    seed: u64,
) -> Result<PathRun, ExecError> {
    let mut runtimes = Vec::with_capacity(nodes.len());
    let mut total = 0.0;
    for id in nodes {
        let res = run_node(dag, id, backend, seed)?;
        total += res.runtime;
        runtimes.push((id.clone(), res.runtime));
        if let Some(n) = dag.node_mut(id) {
            n.last_runtime = Some(res.runtime);
        }
        if !res.success {
            return Ok(PathRun { runtime: total, runtimes, failed: Some(id.clone()) });
        }
    }
    Ok(PathRun { runtime: total, runtimes, failed: None })
}

/// Sequential runtime of `nodes` and each node's share.
pub fn execute_path(
    dag: &mut WorkflowDag,
    nodes: &[String],
    backend: &dyn ExecutionBackend,
    seed: u64,
) -> Result<(f64, Vec<(String, f64)>), ExecError> {
    let run = run_path(dag, nodes, backend, seed)?;
    match run.failed {
        Some(node) => Err(ExecError::WorkflowExecutionFailed(node)),
        None => Ok((run.runtime, run.runtimes)),
    }
}

/// Backend plus a run seed and invocation counter, so every execution in a
/// search draws a fresh but reproducible seed.
pub struct Runner<'a> {
    backend: &'a dyn ExecutionBackend,
    seed: u64,
    invocations: u64,
}

impl<'a> Runner<'a> {
    pub fn new(backend: &'a dyn ExecutionBackend, seed: u64) -> Self {
        Self { backend, seed, invocations: 0 }
    }

    pub fn invocations(&self) -> u64 {
        self.invocations
    }

    fn next_seed(&mut self) -> u64 {
        let s = invocation_seed(self.seed, self.invocations);
        self.invocations += 1;
        s
    }

    pub fn run_workflow(&mut self, dag: &mut WorkflowDag) -> Result<WorkflowRun, ExecError> {
        let seed = self.next_seed();
        run_workflow(dag, self.backend, seed)
    }

    pub fn run_path(&mut self, dag: &mut WorkflowDag, nodes: &[String]) -> Result<PathRun, ExecError> {
        let seed = self.next_seed();
        run_path(dag, nodes, self.backend, seed)
    }
}
