//! Experiment runner and repeated-execution evaluation.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{bo_optimize, maff_optimize, BoParams, MaffParams};
use crate::config::ConfigMap;
use crate::cost::{aggregate_cost, PricingParams};
use crate::graph::{GraphError, SloSpec, WorkflowDag};
use crate::perf::{ExecError, ExecutionBackend, Runner};
use crate::scheduler::{schedule, ScheduleError, ScheduleParams};
use crate::trace::{Trace, TraceTotals};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Aarc,
    Bo,
    Maff,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Aarc, Method::Bo, Method::Maff];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Aarc => "aarc",
            Method::Bo => "bo",
            Method::Maff => "maff",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown method `{0}` (expected aarc, bo or maff)")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "aarc" => Ok(Method::Aarc),
            "bo" => Ok(Method::Bo),
            "maff" => Ok(Method::Maff),
            other => Err(UnknownMethod(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MethodParams {
    pub schedule: ScheduleParams,
    pub bo: BoParams,
    pub maff: MaffParams,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Exec(#[from] ExecError),
}

impl From<GraphError> for HarnessError {
    fn from(e: GraphError) -> Self {
        HarnessError::Exec(e.into())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub method: Method,
    pub configs: ConfigMap,
    pub trace: Trace,
}

/// Runs one search on a copy of `dag`.
pub fn optimize(
    dag: &WorkflowDag,
    slo: SloSpec,
    method: Method,
    backend: &dyn ExecutionBackend,
    pricing: &PricingParams,
    params: &MethodParams,
    seed: u64,
) -> Result<SearchResult, HarnessError> {
    let mut work = dag.clone();
    let (configs, trace) = match method {
        Method::Aarc => {
            let out = schedule(&mut work, slo, backend, pricing, &params.schedule, seed)?;
            (out.configs, out.trace)
        }
        Method::Bo => {
            let out = bo_optimize(&mut work, slo, backend, pricing, &params.bo, seed)?;
            (out.configs, out.trace)
        }
        Method::Maff => {
            let out = maff_optimize(&mut work, slo, backend, pricing, &params.maff, seed)?;
            (out.configs, out.trace)
        }
    };
    Ok(SearchResult { method, configs, trace })
}

/// Statistics over repeated executions of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub runs: usize,
    pub mean_runtime: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std_runtime: f64,
    pub mean_cost: f64,
    /// Fraction of runs that failed or exceeded the SLO.
    pub violation_rate: f64,
}

/// Executes `dag` under `config` `runs` times with distinct derived seeds.
pub fn evaluate_config(
    dag: &WorkflowDag,
    config: &ConfigMap,
    runs: usize,
    seed: u64,
    backend: &dyn ExecutionBackend,
    pricing: &PricingParams,
) -> Result<Evaluation, ExecError> {
    if let Some(n) = dag.nodes().iter().find(|n| !config.contains(&n.id)) {
        return Err(GraphError::UnknownNode(n.id.clone()).into());
    }
    let mut work = dag.clone();
    work.apply_configs(config);
    let slo = dag.slo().seconds();
    let mut runner = Runner::new(backend, seed);
    let mut times = Vec::with_capacity(runs);
    let mut cost_sum = 0.0;
    let mut violations = 0usize;
    for _ in 0..runs {
        let run = runner.run_workflow(&mut work)?;
        cost_sum +=
            aggregate_cost(run.runtimes.iter().filter_map(|(id, t)| work.node(id).map(|n| (*t, &n.config))), pricing);
        if run.failed.is_some() || run.makespan > slo {
            violations += 1;
        }
        times.push(run.makespan);
    }
    if runs == 0 {
        return Ok(Evaluation { runs, mean_runtime: 0.0, std_runtime: 0.0, mean_cost: 0.0, violation_rate: 0.0 });
    }
    let n = runs as f64;
    let mean = times.iter().sum::<f64>() / n;
    let std = if runs > 1 { (times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    Ok(Evaluation {
        runs,
        mean_runtime: mean,
        std_runtime: std,
        mean_cost: cost_sum / n,
        violation_rate: violations as f64 / n,
    })
}

/// Outcome of one (method, seed) search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub method: Method,
    pub seed: u64,
    #[serde(flatten)]
    pub totals: TraceTotals,
    /// Single evaluation of the returned configuration.
    pub final_runtime: Option<f64>,
    pub final_cost: Option<f64>,
    pub configs: Option<ConfigMap>,
    pub error: Option<String>,
    #[serde(skip)]
    pub trace: Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub slo_seconds: f64,
    pub runs: Vec<RunRecord>,
}

impl Report {
    pub fn for_method(&self, method: Method) -> impl Iterator<Item = &RunRecord> {
        self.runs.iter().filter(move |r| r.method == method)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-width table, one row per run.
    pub fn summary_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:<6} {:>6} {:>8} {:>14} {:>14} {:>12} {:>12}",
            "method", "seed", "samples", "sample_time_s", "sample_cost", "final_rt_s", "final_cost"
        );
        for r in &self.runs {
            let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.3}"));
            let _ = write!(
                s,
                "{:<6} {:>6} {:>8} {:>14.3} {:>14.3} {:>12} {:>12}",
                r.method.as_str(),
                r.seed,
                r.totals.samples,
                r.totals.sampling_time,
                r.totals.sampling_cost,
                opt(r.final_runtime),
                opt(r.final_cost),
            );
            if let Some(e) = &r.error {
                let _ = write!(s, "  error: {e}");
            }
            s.push('\n');
        }
        s
    }
}

/// Runs every method for every seed. A failed search is recorded in its
/// row and does not stop the batch.
pub fn run_experiment(
    dag: &WorkflowDag,
    slo: SloSpec,
    methods: &[Method],
    seeds: &[u64],
    backend: &dyn ExecutionBackend,
    pricing: &PricingParams,
    params: &MethodParams,
) -> Report {
    let mut runs = Vec::with_capacity(methods.len() * seeds.len());
    let mut graph = dag.clone();
    graph.set_slo(slo);
    for &method in methods {
        for &seed in seeds {
            let record = match optimize(&graph, slo, method, backend, pricing, params, seed) {
                Ok(res) => {
                    let eval = evaluate_config(&graph, &res.configs, 1, seed, backend, pricing).ok();
                    RunRecord {
                        method,
                        seed,
                        totals: res.trace.totals(),
                        final_runtime: eval.map(|e| e.mean_runtime),
                        final_cost: eval.map(|e| e.mean_cost),
                        configs: Some(res.configs),
                        error: None,
                        trace: res.trace,
                    }
                }
                Err(e) => RunRecord {
                    method,
                    seed,
                    totals: TraceTotals::default(),
                    final_runtime: None,
                    final_cost: None,
                    configs: None,
                    error: Some(e.to_string()),
                    trace: Trace::new(method.as_str()),
                },
            };
            runs.push(record);
        }
    }
    Report { slo_seconds: slo.seconds(), runs }
}
