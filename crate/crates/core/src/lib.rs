//! Decoupled CPU/memory configuration search for serverless workflows.
//!
//! A workflow is a DAG of functions, each with its own runtime profile. The
//! scheduler finds the critical path, shrinks each function's vCPU and
//! memory independently while the path stays inside the latency SLO, and
//! then gives every detour off the critical path the slack it leaves.
//! Bayesian optimization and coupled memory descent are provided as
//! comparison methods, along with a synthetic backend, workload templates
//! and an experiment harness.

pub mod baselines;
pub mod config;
pub mod configurator;
pub mod cost;
pub mod graph;
pub mod harness;
pub mod input_aware;
pub mod perf;
pub mod scheduler;
pub mod trace;
pub mod workflow_file;
pub mod workload;

pub use config::{ConfigMap, ResourceConfig, ResourceKind};
pub use configurator::{priority_configuration, TunerParams};
pub use cost::{aggregate_cost, function_cost, PricingParams};
pub use graph::{
    find_critical_path, find_detour_subpaths, runtime_sum, validate_dag, Edge, FunctionNode, GraphError, Path, SloSpec,
    SubPath, WorkflowDag,
};
pub use harness::{evaluate_config, optimize, run_experiment, Evaluation, Method, MethodParams};
pub use perf::{
    execute_path, execute_workflow, CommandBackend, ExecError, ExecutionBackend, FunctionPerfProfile, SyntheticBackend,
};
pub use scheduler::{schedule, ScheduleError, ScheduleOutcome, ScheduleParams};
pub use trace::{Trace, TraceRecord};
pub use workload::{generate_workload, WorkloadTemplate};
