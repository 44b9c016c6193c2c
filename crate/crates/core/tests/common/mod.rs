//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wfconf::perf::{ExecutionResult, PerfError};
use wfconf::{
    function_cost, Edge, ExecutionBackend, FunctionNode, FunctionPerfProfile, PricingParams, ResourceConfig, SloSpec,
    SyntheticBackend, WorkflowDag,
};

/// Synthetic backend that logs every execution.
#[derive(Default)]
pub struct Recorder {
    pub calls: RefCell<Vec<(String, ResourceConfig, ExecutionResult)>>,
}

impl ExecutionBackend for Recorder {
    fn execute(
        &self,
        node_id: &str,
        profile: &FunctionPerfProfile,
        config: &ResourceConfig,
        seed: u64,
    ) -> Result<ExecutionResult, PerfError> {
        let r = SyntheticBackend.execute(node_id, profile, config, seed)?;
        self.calls.borrow_mut().push((node_id.to_string(), *config, r));
        Ok(r)
    }
}

pub fn constant_profile(seconds: f64) -> FunctionPerfProfile {
    FunctionPerfProfile::constant(seconds)
}

pub fn profile(t0: f64, cpu_work: f64, cap: f64, floor: f64, knee: f64, slowdown: f64) -> FunctionPerfProfile {
    FunctionPerfProfile {
        t0,
        cpu_work,
        parallel_cap: cap,
        mem_floor: floor,
        mem_knee: knee,
        mem_slowdown: slowdown,
        noise_sigma: 0.0,
    }
}

/// DAG whose node `i` uses profile `profiles[i]`, keyed by the node id.
pub fn dag_from(ids: &[&str], edges: &[(&str, &str)], profiles: &[FunctionPerfProfile], slo: f64) -> WorkflowDag {
    let nodes = ids.iter().map(|id| FunctionNode::new(*id, *id)).collect();
    let edges = edges.iter().map(|(a, b)| Edge::new(*a, *b)).collect();
    let profiles: BTreeMap<String, FunctionPerfProfile> =
        ids.iter().zip(profiles).map(|(id, p)| (id.to_string(), *p)).collect();
    WorkflowDag::new(nodes, edges, SloSpec::new(slo).unwrap(), profiles)
}

/// Sets every node's weight to a random multiple of 2^-10 in [0.1, 10], so
/// all path sums are exact regardless of summation order.
pub fn dyadic_weights(dag: &mut WorkflowDag, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<String> = dag.nodes().iter().map(|n| n.id.clone()).collect();
    for id in ids {
        let k: u32 = rng.random_range(103..=10240);
        dag.node_mut(&id).unwrap().last_runtime = Some(f64::from(k) / 1024.0);
    }
}

pub fn weight(dag: &WorkflowDag, id: &str) -> f64 {
    dag.node(id).unwrap().last_runtime.unwrap()
}

/// Every source-to-sink path, by depth-first enumeration.
pub fn all_paths(dag: &WorkflowDag) -> Vec<Vec<String>> {
    fn walk(dag: &WorkflowDag, at: &str, stack: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        stack.push(at.to_string());
        let succ = dag.successors(at);
        if succ.is_empty() {
            out.push(stack.clone());
        }
        for s in succ {
            walk(dag, s, stack, out);
        }
        stack.pop();
    }
    let mut out = Vec::new();
    for s in dag.sources() {
        walk(dag, s, &mut Vec::new(), &mut out);
    }
    out
}

pub fn path_weight(dag: &WorkflowDag, path: &[String]) -> f64 {
    path.iter().map(|id| weight(dag, id)).sum()
}

/// All (start, interior, end) detours: paths leaving `critical` at one node
/// and rejoining at a later one with every interior node off `critical`.
pub fn all_detours(dag: &WorkflowDag, critical: &[String]) -> Vec<(String, Vec<String>, String)> {
    let pos = |id: &str| critical.iter().position(|c| c == id);
    let mut out = Vec::new();
    fn extend(
        dag: &WorkflowDag,
        critical: &[String],
        start: &str,
        at: &str,
        interior: &mut Vec<String>,
        out: &mut Vec<(String, Vec<String>, String)>,
    ) {
        for s in dag.successors(at) {
            if critical.iter().any(|c| c == s) {
                if !interior.is_empty() {
                    out.push((start.to_string(), interior.clone(), s.to_string()));
                }
            } else {
                interior.push(s.to_string());
                extend(dag, critical, start, s, interior, out);
                interior.pop();
            }
        }
    }
    for c in critical {
        extend(dag, critical, c, c, &mut Vec::new(), &mut out);
    }
    out.retain(|(s, _, e)| pos(s) < pos(e));
    out
}

/// Noiseless (runtime, cost) of one config; `None` below the memory floor.
pub fn eval_point(p: &FunctionPerfProfile, c: &ResourceConfig, pricing: &PricingParams) -> Option<(f64, f64)> {
    p.base_runtime(c).map(|t| (t, function_cost(t, c, pricing)))
}

/// Every point of the 0.1 vCPU x 64 MB search grid.
pub fn grid() -> Vec<ResourceConfig> {
    let mut v = Vec::with_capacity(100 * 159);
    for i in 1..=100u32 {
        for k in 0..159u32 {
            v.push(ResourceConfig::new(f64::from(i) / 10.0, 128 + 64 * k));
        }
    }
    v
}

/// Cheapest grid config of one function finishing within `slo`.
pub fn brute_force_single(p: &FunctionPerfProfile, slo: f64, pricing: &PricingParams) -> Option<f64> {
    grid()
        .iter()
        .filter_map(|c| eval_point(p, c, pricing))
        .filter(|(t, _)| *t <= slo)
        .map(|(_, cost)| cost)
        .min_by(f64::total_cmp)
}

/// Cheapest grid configs for two chained functions with summed runtime
/// within `slo`: sort the second function's points by runtime, keep a
/// prefix minimum of cost, and binary-search the remaining time for each
/// point of the first.
pub fn brute_force_chain(
    a: &FunctionPerfProfile,
    b: &FunctionPerfProfile,
    slo: f64,
    pricing: &PricingParams,
) -> Option<f64> {
    let g = grid();
    let mut pb: Vec<(f64, f64)> = g.iter().filter_map(|c| eval_point(b, c, pricing)).collect();
    pb.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut prefix = Vec::with_capacity(pb.len());
    let mut m = f64::INFINITY;
    for (_, c) in &pb {
        m = m.min(*c);
        prefix.push(m);
    }
    let mut best: Option<f64> = None;
    for (ta, ca) in g.iter().filter_map(|c| eval_point(a, c, pricing)) {
        let left = slo - ta;
        let n = pb.partition_point(|(t, _)| *t <= left);
        if n > 0 {
            let total = ca + prefix[n - 1];
            best = Some(best.map_or(total, |b| b.min(total)));
        }
    }
    best
}
