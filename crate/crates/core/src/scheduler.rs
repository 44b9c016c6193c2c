//! Critical-path scheduling of a whole workflow.
//!
//! The workflow is profiled once at an over-provisioned base config, the
//! heaviest path is configured against the end-to-end SLO, and every detour
//! off that path is then configured against the time the critical path
//! spends between the detour's endpoints. Each node is configured once; a
//! detour whose nodes were already configured through another detour only
//! gets what is left of its interval.
//!
//! Detours are taken tightest-first (least slack under the current
//! weights). With a noiseless, resource-monotone backend this keeps every
//! source-to-sink path within the SLO: configuring the tightest detour can
//! only slow a sharing detour by at most its own slack.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigMap, ResourceConfig};
use crate::configurator::{priority_configuration, TunerParams};
use crate::cost::{aggregate_cost, PricingParams};
use crate::graph::{
    find_critical_path, find_detour_subpaths, runtime_sum, validate_dag, GraphError, Path, SloSpec, SubPath,
    WorkflowDag,
};
use crate::perf::{ExecError, ExecutionBackend, Runner};
use crate::trace::Trace;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("base configuration already takes {makespan:.3}s, above the {slo}s SLO")]
    InfeasibleSlo { makespan: f64, slo: f64 },
    #[error("detour {start} -> {end} has no slack left ({budget:.3}s)")]
    DegenerateSubSlo { start: String, end: String, budget: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleParams {
    /// Over-provisioned starting point for every node.
    pub base: ResourceConfig,
    pub tuner: TunerParams,
}

impl Default for ScheduleParams {
    fn default() -> Self {
        Self { base: ResourceConfig::max(), tuner: TunerParams::default() }
    }
}

/// Budget of a detour after dropping already-configured interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SubSlo {
    pub budget: f64,
    /// Interior nodes still to configure, in path order.
    pub remaining: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleOutcome {
    pub configs: ConfigMap,
    pub trace: Trace,
    pub critical_path: Path,
    /// Detours with the sub-SLO they were configured against.
    pub subpaths: Vec<SubPath>,
    pub profiling_makespan: f64,
    /// Detours that were left unconfigured for lack of slack.
    pub degenerate: Vec<(String, String)>,
}

/// Interval between the detour's endpoints on the critical path, minus the
/// runtime of interior nodes that are already scheduled.
pub fn compute_sub_slo(dag: &WorkflowDag, critical: &Path, sp: &SubPath) -> Result<SubSlo, ScheduleError> {
    let mut budget = runtime_sum(dag, critical, &sp.start, &sp.end)?;
    let mut remaining = Vec::with_capacity(sp.interior.len());
    for id in &sp.interior {
        let node = dag.node(id).ok_or_else(|| GraphError::UnknownNode(id.clone()))?;
        if node.scheduled {
            budget -= node.last_runtime.ok_or_else(|| GraphError::MissingRuntime(id.clone()))?;
        } else {
            remaining.push(id.clone());
        }
    }
    if budget < 0.0 {
        return Err(ScheduleError::DegenerateSubSlo { start: sp.start.clone(), end: sp.end.clone(), budget });
    }
    Ok(SubSlo { budget, remaining })
}

fn slack(dag: &WorkflowDag, critical: &Path, sp: &SubPath) -> Result<f64, ScheduleError> {
    let interval = runtime_sum(dag, critical, &sp.start, &sp.end)?;
    let used: f64 = sp.interior.iter().map(|id| dag.node(id).and_then(|n| n.last_runtime).unwrap_or(0.0)).sum();
    Ok(interval - used)
}

/// Splits what is left of the sample budget in proportion to node counts.
fn share(remaining: usize, nodes: usize, unscheduled: usize) -> usize {
    if unscheduled == 0 {
        return remaining;
    }
    remaining.min((remaining * nodes).div_ceil(unscheduled))
}

/// Configures every node of `dag` for the given end-to-end SLO.
///
/// `params.tuner.max_trail` caps the total number of backend executions of
/// the run, the profiling execution included; it is split across the
/// critical path and the detours by node count, and whatever one call
/// leaves unused carries over.
pub fn schedule(
    dag: &mut WorkflowDag,
    slo: SloSpec,
    backend: &dyn ExecutionBackend,
    pricing: &PricingParams,
    params: &ScheduleParams,
    seed: u64,
) -> Result<ScheduleOutcome, ScheduleError> {
    validate_dag(dag)?;
    dag.reset_schedule_state();
    dag.set_all_configs(params.base);
    let mut runner = Runner::new(backend, seed);
    let mut trace = Trace::new("aarc");

    let run = runner.run_workflow(dag)?;
    let cost = aggregate_cost(run.runtimes.iter().filter_map(|(id, t)| dag.node(id).map(|n| (*t, &n.config))), pricing);
    let base = dag.configs();
    trace.push_joint(base.total_cpu(), base.total_mem(), run.makespan, cost, run.failed.is_none());
    if let Some(node) = run.failed {
        return Err(ExecError::WorkflowExecutionFailed(node).into());
    }
    if run.makespan > slo.seconds() {
        return Err(ScheduleError::InfeasibleSlo { makespan: run.makespan, slo: slo.seconds() });
    }
    let profiling_makespan = run.makespan;

    let mut budget = params.tuner.max_trail.saturating_sub(1);
    let mut unscheduled = dag.len();
    let critical = find_critical_path(dag)?;
    log::debug!("critical path {:?} ({:.3}s)", critical.node_ids, critical.total_runtime);

    let mut tuner = params.tuner;
    tuner.max_trail = share(budget, critical.len(), unscheduled);
    let out = priority_configuration(dag, &critical.node_ids, slo.seconds(), &mut runner, pricing, &tuner, &mut trace)?;
    budget -= out.samples.min(budget);
    for id in &critical.node_ids {
        dag.node_mut(id).expect("critical node exists").scheduled = true;
    }
    unscheduled -= critical.len();
    let frozen: Vec<ResourceConfig> = critical.node_ids.iter().map(|id| dag.node(id).unwrap().config).collect();

    let mut subpaths = find_detour_subpaths(dag, &critical);
    let mut pending: Vec<usize> = (0..subpaths.len()).collect();
    let mut degenerate = Vec::new();
    loop {
        pending.retain(|&i| subpaths[i].interior.iter().any(|id| !dag.node(id).unwrap().scheduled));
        // Tightest detour first; ties keep list order.
        let mut pick: Option<(usize, f64)> = None;
        for (k, &i) in pending.iter().enumerate() {
            let s = slack(dag, &critical, &subpaths[i])?;
            if pick.is_none_or(|(_, best)| s < best) {
                pick = Some((k, s));
            }
        }
        let Some((k, _)) = pick else { break };
        let i = pending.remove(k);
        let sp = &subpaths[i];
        match compute_sub_slo(dag, &critical, sp) {
            Ok(sub) => {
                subpaths[i].sub_slo = Some(sub.budget);
                tuner.max_trail = share(budget, sub.remaining.len(), unscheduled);
                let out = if tuner.max_trail > 0 {
                    priority_configuration(dag, &sub.remaining, sub.budget, &mut runner, pricing, &tuner, &mut trace)?
                        .samples
                } else {
                    0
                };
                budget -= out.min(budget);
                for id in &sub.remaining {
                    dag.node_mut(id).unwrap().scheduled = true;
                }
                unscheduled -= sub.remaining.len();
            }
            Err(ScheduleError::DegenerateSubSlo { start, end, budget: b }) => {
                log::warn!("detour {start} -> {end} has no slack ({b:.3}s); keeping current configs");
                subpaths[i].sub_slo = Some(0.0);
                for id in &subpaths[i].interior {
                    let n = dag.node_mut(id).unwrap();
                    if !n.scheduled {
                        n.scheduled = true;
                        unscheduled -= 1;
                    }
                }
                degenerate.push((start, end));
            }
            Err(e) => return Err(e),
        }
    }

    debug_assert!(critical.node_ids.iter().zip(&frozen).all(|(id, cfg)| dag.node(id).unwrap().config == *cfg));
    debug_assert!(dag.nodes().iter().all(|n| n.scheduled));

    Ok(ScheduleOutcome {
        configs: dag.configs(),
        trace,
        critical_path: critical,
        subpaths,
        profiling_makespan,
        degenerate,
    })
}
