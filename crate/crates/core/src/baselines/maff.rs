//! MAFF-style coupled descent: CPU follows memory at one vCPU per 1024 MB.
//!
//! Each round lowers every node's memory by `mem_step` in turn (one
//! workflow execution per candidate) and commits the candidate that saved
//! the most. The descent stops, keeping the previous step, as soon as the
//! best candidate misses the SLO or fails to lower the cost.

use serde::{Deserialize, Serialize};

use super::{run_cost, BaselineOutcome};
use crate::config::{ResourceConfig, MEM_MAX, MEM_MIN};
use crate::cost::PricingParams;
use crate::graph::{validate_dag, SloSpec, WorkflowDag};
use crate::perf::{ExecError, ExecutionBackend, Runner};
use crate::trace::{OpType, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaffParams {
    /// MB removed per descent step.
    pub mem_step: u32,
}

impl Default for MaffParams {
    fn default() -> Self {
        Self { mem_step: 1024 }
    }
}

pub fn maff_optimize(
    dag: &mut WorkflowDag,
    slo: SloSpec,
    backend: &dyn ExecutionBackend,
    pricing: &PricingParams,
    params: &MaffParams,
    seed: u64,
) -> Result<BaselineOutcome, ExecError> {
    validate_dag(dag)?;
    let step = params.mem_step.max(1);
    let mut runner = Runner::new(backend, seed);
    let mut trace = Trace::new("maff");
    let mut sampled = Vec::new();

    dag.set_all_configs(ResourceConfig::coupled(MEM_MAX));
    let run = runner.run_workflow(dag)?;
    let mut current_cost = run_cost(dag, &run, pricing);
    let base = dag.configs();
    let feasible = run.failed.is_none() && run.makespan <= slo.seconds();
    trace.push_joint(base.total_cpu(), base.total_mem(), run.makespan, current_cost, feasible);
    sampled.push(base.clone());
    if !feasible {
        return Ok(BaselineOutcome { configs: base, trace, sampled, cost: current_cost, feasible });
    }

    let ids: Vec<String> = {
        let mut v: Vec<String> = dag.nodes().iter().map(|n| n.id.clone()).collect();
        v.sort();
        v
    };
    loop {
        // (trace row, node, candidate, cost, feasible)
        let mut best: Option<(usize, String, ResourceConfig, f64, bool)> = None;
        for id in &ids {
            let prev = dag.node(id).expect("node exists").config;
            if prev.mem <= MEM_MIN {
                continue;
            }
            let cand = ResourceConfig::coupled(prev.mem.saturating_sub(step).max(MEM_MIN));
            dag.node_mut(id).expect("node exists").config = cand;
            let run = runner.run_workflow(dag)?;
            let cost = run_cost(dag, &run, pricing);
            sampled.push(dag.configs());
            dag.node_mut(id).expect("node exists").config = prev;
            let row = trace.push_node(id, OpType::Mem, cand, run.makespan, cost, false);
            if run.failed.is_some() {
                continue;
            }
            let ok = run.makespan <= slo.seconds();
            if best.as_ref().is_none_or(|b| cost < b.3) {
                best = Some((row, id.clone(), cand, cost, ok));
            }
        }
        match best {
            Some((row, id, cand, cost, true)) if cost < current_cost => {
                dag.node_mut(&id).expect("node exists").config = cand;
                trace.set_accepted(row, true);
                current_cost = cost;
            }
            _ => break,
        }
    }

    Ok(BaselineOutcome { configs: dag.configs(), trace, sampled, cost: current_cost, feasible: true })
}
