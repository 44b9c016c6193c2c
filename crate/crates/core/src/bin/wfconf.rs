use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wfconf::baselines::{BoParams, MaffParams};
use wfconf::harness::{evaluate_config, optimize, run_experiment, HarnessError, Method, MethodParams};
use wfconf::input_aware::{input_aware_optimize, InputClass, InputError};
use wfconf::perf::{CommandBackend, ExecError, ExecutionBackend, SyntheticBackend};
use wfconf::scheduler::{ScheduleError, ScheduleParams};
use wfconf::workflow_file::{load_config, save_config, FileError, WorkflowFile};
use wfconf::workload::{generate_workload, WorkloadTemplate};
use wfconf::{validate_dag, PricingParams, SloSpec, TunerParams, WorkflowDag};

const EXIT_OTHER: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(name = "wfconf", version, about = "Configure vCPU and memory for serverless workflows under a latency SLO")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a workflow file from a built-in template.
    Gen(GenArgs),
    /// Search for a configuration with one method.
    Optimize(OptimizeArgs),
    /// Execute a configuration repeatedly and report statistics.
    Evaluate(EvaluateArgs),
    /// Run several methods over several seeds.
    Compare(CompareArgs),
    /// Configure one template per input class.
    InputAware(InputAwareArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    template: String,
    #[arg(long)]
    fan_out: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative runtime noise for every function.
    #[arg(long)]
    noise: Option<f64>,
    /// Override the template's SLO, seconds.
    #[arg(long)]
    slo: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BackendArgs {
    /// External program used instead of the synthetic model. It is called as
    /// `PROGRAM NODE CPU MEM SEED` and must print the runtime in seconds.
    #[arg(long)]
    backend_cmd: Option<PathBuf>,
}

impl BackendArgs {
    fn backend(&self) -> Box<dyn ExecutionBackend> {
        match &self.backend_cmd {
            Some(p) => Box::new(CommandBackend::new(p)),
            None => Box::new(SyntheticBackend),
        }
    }
}

#[derive(Args)]
struct PricingArgs {
    #[arg(long)]
    mu0: Option<f64>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    mu2: Option<f64>,
}

impl PricingArgs {
    fn resolve(&self, file: Option<PricingParams>) -> Result<PricingParams, CliError> {
        let mut p = file.unwrap_or_default();
        if let Some(v) = self.mu0 {
            p.mu0 = v;
        }
        if let Some(v) = self.mu1 {
            p.mu1 = v;
        }
        if let Some(v) = self.mu2 {
            p.mu2 = v;
        }
        if !p.is_valid() {
            return Err(CliError::Validation("pricing coefficients must be finite and >= 0".into()));
        }
        Ok(p)
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    func_trial: Option<u32>,
    #[arg(long)]
    max_trail: Option<usize>,
    #[arg(long)]
    step0_cpu: Option<f64>,
    #[arg(long)]
    step0_mem: Option<u32>,
    #[arg(long)]
    bo_budget: Option<usize>,
    #[arg(long)]
    maff_step: Option<u32>,
}

impl SearchArgs {
    fn resolve(&self) -> Result<MethodParams, CliError> {
        let mut tuner = TunerParams::default();
        if let Some(v) = self.func_trial {
            tuner.func_trial = v;
        }
        if let Some(v) = self.max_trail {
            tuner.max_trail = v;
        }
        if let Some(v) = self.step0_cpu {
            tuner.step0_cpu = v;
        }
        if let Some(v) = self.step0_mem {
            tuner.step0_mem = v;
        }
        if !tuner.is_valid() {
            return Err(CliError::Validation("invalid tuner parameters".into()));
        }
        let mut bo = BoParams::default();
        if let Some(v) = self.bo_budget {
            if v == 0 {
                return Err(CliError::Validation("--bo-budget must be positive".into()));
            }
            bo.budget = v;
            bo.init_random = bo.init_random.min(v);
        }
        let mut maff = MaffParams::default();
        if let Some(v) = self.maff_step {
            if v == 0 {
                return Err(CliError::Validation("--maff-step must be positive".into()));
            }
            maff.mem_step = v;
        }
        Ok(MethodParams { schedule: ScheduleParams { tuner, ..ScheduleParams::default() }, bo, maff })
    }
}

#[derive(Args)]
struct OptimizeArgs {
    #[arg(long)]
    workflow: PathBuf,
    /// Defaults to the workflow file's SLO.
    #[arg(long)]
    slo: Option<f64>,
    #[arg(long, default_value = "aarc")]
    method: Method,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    pricing: PricingArgs,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    workflow: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 100)]
    runs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    slo: Option<f64>,
    #[command(flatten)]
    pricing: PricingArgs,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    workflow: PathBuf,
    #[arg(long)]
    slo: Option<f64>,
    /// Comma-separated list of methods.
    #[arg(long, default_value = "aarc,bo,maff", value_delimiter = ',')]
    methods: Vec<Method>,
    /// `A..B` (inclusive) or a comma-separated list.
    #[arg(long, default_value = "1..10")]
    seeds: String,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for one trace file per run.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    pricing: PricingArgs,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Args)]
struct InputAwareArgs {
    #[arg(long)]
    template: String,
    #[arg(long, default_value = "light:0.3,middle:1.0,heavy:3.0")]
    classes: String,
    /// Defaults to the template's SLO.
    #[arg(long)]
    slo: Option<f64>,
    #[arg(long)]
    fan_out: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON output with one configuration per class.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    pricing: PricingArgs,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::Other(_) => EXIT_OTHER,
        }
    }
}

impl From<FileError> for CliError {
    fn from(e: FileError) -> Self {
        match e {
            FileError::Io { .. } => CliError::Other(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<ScheduleError> for CliError {
    fn from(e: ScheduleError) -> Self {
        match e {
            ScheduleError::InfeasibleSlo { .. } => CliError::Infeasible(e.to_string()),
            ScheduleError::Graph(_) => CliError::Validation(e.to_string()),
            ScheduleError::Exec(x) => x.into(),
            ScheduleError::DegenerateSubSlo { .. } => CliError::Other(e.to_string()),
        }
    }
}

impl From<ExecError> for CliError {
    fn from(e: ExecError) -> Self {
        match e {
            ExecError::Graph(_) | ExecError::Perf(_) => CliError::Validation(e.to_string()),
            ExecError::WorkflowExecutionFailed(_) => CliError::Other(e.to_string()),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Schedule(s) => s.into(),
            HarnessError::Exec(x) => x.into(),
        }
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Other(format!("{}: {e}", path.display()))
}

fn slo_of(dag: &WorkflowDag, flag: Option<f64>) -> Result<SloSpec, CliError> {
    match flag {
        Some(s) => SloSpec::new(s).map_err(|e| CliError::Validation(e.to_string())),
        None => Ok(dag.slo()),
    }
}

fn load_workflow(path: &Path) -> Result<(WorkflowDag, Option<PricingParams>), CliError> {
    let file = WorkflowFile::load(path)?;
    let dag = file.to_dag()?;
    validate_dag(&dag).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok((dag, file.pricing))
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    let bad = || CliError::Validation(format!("bad seed list `{s}`"));
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn template(name: &str, fan_out: Option<usize>) -> Result<WorkloadTemplate, CliError> {
    let t = WorkloadTemplate::builtin(name).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(match fan_out {
        Some(0) => return Err(CliError::Validation("--fan-out must be positive".into())),
        Some(n) => t.with_fan_out(n),
        None => t,
    })
}

fn cmd_gen(a: GenArgs) -> Result<(), CliError> {
    let mut t = template(&a.template, a.fan_out)?;
    if let Some(s) = a.noise {
        if !(s.is_finite() && s >= 0.0) {
            return Err(CliError::Validation("--noise must be >= 0".into()));
        }
        t = t.with_noise(s);
    }
    let mut dag = generate_workload(&t, a.seed);
    if let Some(s) = a.slo {
        dag.set_slo(SloSpec::new(s).map_err(|e| CliError::Validation(e.to_string()))?);
    }
    WorkflowFile::from_dag(&dag, None).save(&a.out)?;
    println!(
        "wrote {} ({} nodes, {} edges, slo {}s)",
        a.out.display(),
        dag.len(),
        dag.edges().len(),
        dag.slo().seconds()
    );
    Ok(())
}

fn cmd_optimize(a: OptimizeArgs) -> Result<(), CliError> {
    let (dag, file_pricing) = load_workflow(&a.workflow)?;
    let pricing = a.pricing.resolve(file_pricing)?;
    let params = a.search.resolve()?;
    let slo = slo_of(&dag, a.slo)?;
    let backend = a.backend.backend();
    let res = optimize(&dag, slo, a.method, backend.as_ref(), &pricing, &params, a.seed)?;
    if let Some(p) = &a.trace {
        let f = fs::File::create(p).map_err(|e| io_err(p, e))?;
        res.trace.write_csv(f).map_err(|e| io_err(p, e))?;
    }
    match &a.out {
        Some(p) => save_config(&res.configs, p)?,
        None => println!("{}", serde_json::to_string_pretty(&res.configs).expect("config serializes")),
    }
    let t = res.trace.totals();
    eprintln!(
        "{}: {} samples, sampling time {:.3}s, sampling cost {:.3}",
        a.method, t.samples, t.sampling_time, t.sampling_cost
    );
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs) -> Result<(), CliError> {
    let (mut dag, file_pricing) = load_workflow(&a.workflow)?;
    let pricing = a.pricing.resolve(file_pricing)?;
    let slo = slo_of(&dag, a.slo)?;
    dag.set_slo(slo);
    let config = load_config(&a.config)?;
    let backend = a.backend.backend();
    let e = evaluate_config(&dag, &config, a.runs, a.seed, backend.as_ref(), &pricing)?;
    println!("{}", serde_json::to_string_pretty(&e).expect("evaluation serializes"));
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<(), CliError> {
    let (dag, file_pricing) = load_workflow(&a.workflow)?;
    let pricing = a.pricing.resolve(file_pricing)?;
    let params = a.search.resolve()?;
    let slo = slo_of(&dag, a.slo)?;
    let seeds = parse_seeds(&a.seeds)?;
    let backend = a.backend.backend();
    let report = run_experiment(&dag, slo, &a.methods, &seeds, backend.as_ref(), &pricing, &params);
    print!("{}", report.summary_table());
    if let Some(p) = &a.out {
        fs::write(p, report.to_json() + "\n").map_err(|e| io_err(p, e))?;
    }
    if let Some(dir) = &a.trace_dir {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        for r in &report.runs {
            let p = dir.join(format!("{}_{}.csv", r.method, r.seed));
            let f = fs::File::create(&p).map_err(|e| io_err(&p, e))?;
            r.trace.write_csv(f).map_err(|e| io_err(&p, e))?;
        }
    }
    Ok(())
}

fn cmd_input_aware(a: InputAwareArgs) -> Result<(), CliError> {
    let t = template(&a.template, a.fan_out)?;
    let dag = generate_workload(&t, a.seed);
    let slo = slo_of(&dag, a.slo)?;
    let classes = InputClass::parse_list(&a.classes).map_err(|e| CliError::Validation(e.to_string()))?;
    let pricing = a.pricing.resolve(None)?;
    let params = a.search.resolve()?;
    let table = input_aware_optimize(&dag, &classes, slo, &SyntheticBackend, &pricing, &params.schedule, a.seed)
        .map_err(|e| match e {
            InputError::Class { label, source } => {
                let code = CliError::from(source.clone());
                let msg = format!("class `{label}`: {source}");
                match code {
                    CliError::Infeasible(_) => CliError::Infeasible(msg),
                    CliError::Validation(_) => CliError::Validation(msg),
                    CliError::Other(_) => CliError::Other(msg),
                }
            }
            other => CliError::Validation(other.to_string()),
        })?;
    let json = serde_json::to_string_pretty(
        &table.entries.iter().map(|(c, m)| (c.label.clone(), m)).collect::<std::collections::BTreeMap<_, _>>(),
    )
    .expect("table serializes");
    match &a.out {
        Some(p) => fs::write(p, json + "\n").map_err(|e| io_err(p, e))?,
        None => println!("{json}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_VALIDATION) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Optimize(a) => cmd_optimize(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::InputAware(a) => cmd_input_aware(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
