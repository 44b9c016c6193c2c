//! Priority-queue configuration of a sequential function path.
//!
//! Every function on the path gets one CPU and one memory deallocation op.
//! Ops are popped highest priority first: untried ops sit at +inf, ops that
//! saved money are ranked by the absolute cost they saved, and ops that were
//! just reverted wait at 0. A reverted op halves its step (down to the grid
//! granularity) and burns one retry; it leaves the queue when retries run out.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::config::{ConfigMap, ResourceConfig, ResourceKind, CPU_GRANULARITY, CPU_MIN, MEM_GRANULARITY, MEM_MIN};
use crate::cost::{function_cost, PricingParams};
use crate::graph::{GraphError, WorkflowDag};
use crate::perf::{ExecError, Runner};
use crate::trace::{OpType, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunerParams {
    /// Retries per op before it is dropped.
    pub func_trial: u32,
    /// Cap on backend executions per configuration call.
    pub max_trail: usize,
    pub step0_cpu: f64,
    pub step0_mem: u32,
    pub gran_cpu: f64,
    pub gran_mem: u32,
}

impl Default for TunerParams {
    fn default() -> Self {
        Self {
            func_trial: 3,
            max_trail: 100,
            step0_cpu: 1.0,
            step0_mem: 1024,
            gran_cpu: CPU_GRANULARITY,
            gran_mem: MEM_GRANULARITY,
        }
    }
}

impl TunerParams {
    pub fn is_valid(&self) -> bool {
        self.func_trial > 0
            && self.max_trail > 0
            && self.gran_cpu > 0.0
            && self.gran_mem > 0
            && self.step0_cpu >= self.gran_cpu
            && self.step0_mem >= self.gran_mem
    }

    fn step0(&self, kind: ResourceKind) -> f64 {
        match kind {
            ResourceKind::Cpu => self.step0_cpu,
            ResourceKind::Mem => f64::from(self.step0_mem),
        }
    }

    fn granularity(&self, kind: ResourceKind) -> f64 {
        match kind {
            ResourceKind::Cpu => self.gran_cpu,
            ResourceKind::Mem => f64::from(self.gran_mem),
        }
    }
}

/// A pending deallocation of `step` units of `rtype` from `func`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResourceOp {
    pub func: String,
    pub rtype: ResourceKind,
    /// vCPU for cpu ops, MB for mem ops.
    pub step: f64,
    /// Retries left.
    pub trail: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrioritizedOp {
    pub op: ResourceOp,
    pub priority: f64,
}

impl Eq for PrioritizedOp {}

impl Ord for PrioritizedOp {
    // Max-heap order: higher priority first, then smaller node id, then cpu
    // before mem.
    fn cmp(&self, other: &Self) -> Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then_with(|| other.op.func.cmp(&self.op.func))
            .then_with(|| other.op.rtype.cmp(&self.op.rtype))
    }
}

impl PartialOrd for PrioritizedOp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The config after removing `op.step` of `op.rtype`, clamped at the global
/// minimum; `None` when the resource already sits at the minimum and the op
/// should retire.
pub fn deallocate(op: &ResourceOp, config: &ResourceConfig) -> Option<ResourceConfig> {
    match op.rtype {
        ResourceKind::Cpu => {
            if config.cpu <= CPU_MIN {
                return None;
            }
            Some(ResourceConfig::new((config.cpu - op.step).max(CPU_MIN), config.mem))
        }
        ResourceKind::Mem => {
            if config.mem <= MEM_MIN {
                return None;
            }
            let step = op.step.round().max(1.0) as u32;
            Some(ResourceConfig::new(config.cpu, config.mem.saturating_sub(step).max(MEM_MIN)))
        }
    }
}

/// Backoff after a rejected deallocation: the step halves (never below the
/// granularity) and one retry is consumed. The caller restores the config.
pub fn allocate(op: &ResourceOp, params: &TunerParams) -> (f64, u32) {
    let gran = params.granularity(op.rtype);
    let half = match op.rtype {
        ResourceKind::Cpu => op.step / 2.0,
        ResourceKind::Mem => (op.step / 2.0).floor(),
    };
    (half.max(gran), op.trail.saturating_sub(1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigurationOutcome {
    pub configs: ConfigMap,
    /// Backend executions spent.
    pub samples: usize,
    /// Path cost at the last accepted state.
    pub cost: f64,
}

struct Snapshot(Vec<(String, ResourceConfig, Option<f64>)>);

impl Snapshot {
    fn take(dag: &WorkflowDag, nodes: &[String]) -> Self {
        Self(nodes.iter().filter_map(|id| dag.node(id).map(|n| (id.clone(), n.config, n.last_runtime))).collect())
    }

    fn restore(self, dag: &mut WorkflowDag) {
        for (id, cfg, rt) in self.0 {
            if let Some(n) = dag.node_mut(&id) {
                n.config = cfg;
                n.last_runtime = rt;
            }
        }
    }
}

fn path_cost(dag: &WorkflowDag, runtimes: &[(String, f64)], pricing: &PricingParams) -> f64 {
    runtimes.iter().filter_map(|(id, t)| dag.node(id).map(|n| function_cost(*t, &n.config, pricing))).sum()
}

/// Shrinks the allocations of `nodes` (executed back to back) while their
/// summed runtime stays within `slo` and the path cost keeps falling.
///
/// Nodes are expected to carry a measured runtime; if any does not, the
/// path is measured once first and that execution counts as a sample.
pub fn priority_configuration(
    dag: &mut WorkflowDag,
    nodes: &[String],
    slo: f64,
    runner: &mut Runner<'_>,
    pricing: &PricingParams,
    params: &TunerParams,
    trace: &mut Trace,
) -> Result<ConfigurationOutcome, ExecError> {
    for id in nodes {
        if dag.node(id).is_none() {
            return Err(GraphError::UnknownNode(id.clone()).into());
        }
    }
    if nodes.is_empty() {
        return Ok(ConfigurationOutcome { configs: ConfigMap::new(), samples: 0, cost: 0.0 });
    }

    let mut count = 0usize;
    let mut best_cost = if nodes.iter().all(|id| dag.node(id).is_some_and(|n| n.last_runtime.is_some())) {
        let measured: Vec<(String, f64)> =
            nodes.iter().map(|id| (id.clone(), dag.node(id).and_then(|n| n.last_runtime).unwrap_or(0.0))).collect();
        path_cost(dag, &measured, pricing)
    } else {
        count += 1;
        let run = runner.run_path(dag, nodes)?;
        let cost = path_cost(dag, &run.runtimes, pricing);
        let cfg = nodes
            .iter()
            .filter_map(|id| dag.node(id))
            .fold((0.0, 0u64), |(c, m), n| (c + n.config.cpu, m + u64::from(n.config.mem)));
        trace.push_joint(cfg.0, cfg.1, run.runtime, cost, run.failed.is_none());
        if run.failed.is_some() {
            f64::INFINITY
        } else {
            cost
        }
    };

    let mut pq = BinaryHeap::with_capacity(nodes.len() * 2);
    for id in nodes {
        for rtype in [ResourceKind::Cpu, ResourceKind::Mem] {
            pq.push(PrioritizedOp {
                op: ResourceOp { func: id.clone(), rtype, step: params.step0(rtype), trail: params.func_trial },
                priority: f64::INFINITY,
            });
        }
    }

    while count < params.max_trail {
        let Some(PrioritizedOp { mut op, .. }) = pq.pop() else { break };
        let current = dag.node(&op.func).map(|n| n.config).expect("path node exists");
        let Some(proposed) = deallocate(&op, &current) else {
            log::trace!("retiring {} {} at its floor", op.func, op.rtype);
            continue;
        };
        let snapshot = Snapshot::take(dag, nodes);
        dag.node_mut(&op.func).expect("path node exists").config = proposed;
        count += 1;
        let run = runner.run_path(dag, nodes)?;
        let cost = path_cost(dag, &run.runtimes, pricing);
        let accepted = run.failed.is_none() && run.runtime <= slo && cost < best_cost;
        trace.push_node(&op.func, OpType::from(op.rtype), proposed, run.runtime, cost, accepted);
        if accepted {
            let saved = best_cost - cost;
            best_cost = cost;
            pq.push(PrioritizedOp { op, priority: saved });
        } else {
            snapshot.restore(dag);
            let (step, trail) = allocate(&op, params);
            op.step = step;
            op.trail = trail;
            if op.trail > 0 {
                pq.push(PrioritizedOp { op, priority: 0.0 });
            }
        }
    }

    let configs = nodes.iter().filter_map(|id| dag.node(id).map(|n| (id.clone(), n.config))).collect();
    Ok(ConfigurationOutcome { configs, samples: count, cost: best_cost })
}
