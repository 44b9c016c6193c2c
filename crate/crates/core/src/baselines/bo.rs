//! Bayesian optimization over the joint per-node (vCPU, memory) grid.
//!
//! Every node contributes two dimensions. The surrogate is a GP with fixed
//! hyperparameters over grid coordinates normalized to [0, 1]; each round
//! scores a fresh seeded batch of random grid points by expected improvement.
//! Samples that miss the SLO (or crash) are scored as cost + `slo_penalty`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gp::{expected_improvement, GaussianProcess};
use super::{run_cost, BaselineOutcome};
use crate::config::{ConfigMap, ResourceConfig, CPU_GRANULARITY, MEM_GRANULARITY, MEM_MIN};
use crate::cost::PricingParams;
use crate::graph::{validate_dag, SloSpec, WorkflowDag};
use crate::perf::{ExecError, ExecutionBackend, Runner};
use crate::trace::Trace;

/// Grid sizes: 0.1..=10.0 vCPU in 0.1 steps, 128..=10240 MB in 64 MB steps.
pub const CPU_LEVELS: usize = 100;
pub const MEM_LEVELS: usize = 159;

pub fn cpu_level(k: usize) -> f64 {
    (k + 1) as f64 / 10.0
}

pub fn mem_level(k: usize) -> u32 {
    MEM_MIN + MEM_GRANULARITY * k as u32
}

/// Whether `config` lies exactly on the search grid.
pub fn on_grid(config: &ResourceConfig) -> bool {
    let k = (config.cpu / CPU_GRANULARITY).round();
    (1.0..=CPU_LEVELS as f64).contains(&k)
        && cpu_level(k as usize - 1) == config.cpu
        && config.mem >= MEM_MIN
        && (config.mem - MEM_MIN).is_multiple_of(MEM_GRANULARITY)
        && ((config.mem - MEM_MIN) / MEM_GRANULARITY) < MEM_LEVELS as u32
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoParams {
    /// Total samples.
    pub budget: usize,
    /// Leading samples drawn uniformly from the grid.
    pub init_random: usize,
    /// Kernel lengthscale in normalized coordinates, every dimension.
    pub lengthscale: f64,
    /// Observation noise as a fraction of the observed objective variance.
    pub noise_variance: f64,
    /// Added to the cost of SLO-violating samples.
    pub slo_penalty: f64,
    /// Random grid points scored per acquisition round.
    pub candidates: usize,
}

impl Default for BoParams {
    fn default() -> Self {
        Self {
            budget: 100,
            init_random: 10,
            lengthscale: 0.2,
            noise_variance: 1e-4,
            slo_penalty: 1000.0,
            candidates: 1000,
        }
    }
}

type Point = Vec<(usize, usize)>;

fn random_point(rng: &mut ChaCha8Rng, nodes: usize) -> Point {
    (0..nodes).map(|_| (rng.random_range(0..CPU_LEVELS), rng.random_range(0..MEM_LEVELS))).collect()
}

fn normalize(p: &Point) -> Vec<f64> {
    p.iter().flat_map(|&(c, m)| [c as f64 / (CPU_LEVELS - 1) as f64, m as f64 / (MEM_LEVELS - 1) as f64]).collect()
}

pub fn bo_optimize(
    dag: &mut WorkflowDag,
    slo: SloSpec,
    backend: &dyn ExecutionBackend,
    pricing: &PricingParams,
    params: &BoParams,
    seed: u64,
) -> Result<BaselineOutcome, ExecError> {
    validate_dag(dag)?;
    let ids: Vec<String> = dag.nodes().iter().map(|n| n.id.clone()).collect();
    let dims = 2 * ids.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut runner = Runner::new(backend, seed);
    let mut trace = Trace::new("bo");

    let mut xs: Vec<Vec<f64>> = Vec::with_capacity(params.budget);
    let mut ys: Vec<f64> = Vec::with_capacity(params.budget);
    let mut sampled = Vec::with_capacity(params.budget);
    // (objective, cost, feasible, config)
    let mut best: Option<(f64, f64, bool, ConfigMap)> = None;

    for round in 0..params.budget {
        let point = if round < params.init_random || xs.is_empty() {
            random_point(&mut rng, ids.len())
        } else {
            let gp = GaussianProcess::fit(xs.clone(), &ys, vec![params.lengthscale; dims], params.noise_variance);
            let incumbent = ys.iter().copied().fold(f64::INFINITY, f64::min);
            let mut pick: Option<(f64, Point)> = None;
            for _ in 0..params.candidates.max(1) {
                let cand = random_point(&mut rng, ids.len());
                let score = match &gp {
                    Ok(gp) => {
                        let (m, s) = gp.predict(&normalize(&cand));
                        expected_improvement(m, s, incumbent)
                    }
                    Err(_) => 0.0,
                };
                if pick.as_ref().is_none_or(|(b, _)| score > *b) {
                    pick = Some((score, cand));
                }
            }
            pick.expect("at least one candidate").1
        };

        let configs: ConfigMap = ids
            .iter()
            .zip(&point)
            .map(|(id, &(c, m))| (id.clone(), ResourceConfig::new(cpu_level(c), mem_level(m))))
            .collect();
        dag.apply_configs(&configs);
        let run = runner.run_workflow(dag)?;
        let cost = run_cost(dag, &run, pricing);
        let feasible = run.failed.is_none() && run.makespan <= slo.seconds();
        let objective = if feasible { cost } else { cost + params.slo_penalty };
        let improves = match &best {
            None => true,
            Some((obj, _, best_feasible, _)) => {
                (feasible && !best_feasible) || (feasible == *best_feasible && objective < *obj)
            }
        };
        trace.push_joint(configs.total_cpu(), configs.total_mem(), run.makespan, cost, improves);
        if improves {
            best = Some((objective, cost, feasible, configs.clone()));
        }
        xs.push(normalize(&point));
        ys.push(objective);
        sampled.push(configs);
    }

    let (_, cost, feasible, configs) = best.unwrap_or_else(|| (f64::INFINITY, f64::INFINITY, false, dag.configs()));
    dag.apply_configs(&configs);
    Ok(BaselineOutcome { configs, trace, sampled, cost, feasible })
}
