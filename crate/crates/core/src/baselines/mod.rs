//! Comparison methods: Bayesian optimization over the decoupled grid and
//! MAFF-style coupled memory descent.

pub mod bo;
pub mod gp;
pub mod maff;

use crate::config::ConfigMap;
use crate::cost::{aggregate_cost, PricingParams};
use crate::graph::WorkflowDag;
use crate::perf::WorkflowRun;
use crate::trace::Trace;

pub use bo::{bo_optimize, BoParams};
pub use maff::{maff_optimize, MaffParams};

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineOutcome {
    pub configs: ConfigMap,
    pub trace: Trace,
    /// Every configuration that was executed, in sample order.
    pub sampled: Vec<ConfigMap>,
    /// Measured cost of the returned configuration.
    pub cost: f64,
    /// Whether the returned configuration met the SLO when measured.
    pub feasible: bool,
}

pub(crate) fn run_cost(dag: &WorkflowDag, run: &WorkflowRun, pricing: &PricingParams) -> f64 {
    aggregate_cost(run.runtimes.iter().filter_map(|(id, t)| dag.node(id).map(|n| (*t, &n.config))), pricing)
}
