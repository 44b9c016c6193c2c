//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use wfconf::baselines::bo::on_grid;
use wfconf::baselines::{bo_optimize, maff_optimize, BoParams, MaffParams};
use wfconf::configurator::priority_configuration;
use wfconf::harness::{evaluate_config, optimize, Method, MethodParams};
use wfconf::input_aware::{input_aware_optimize, scale_dag, InputClass};
use wfconf::perf::Runner;
use wfconf::trace::{OpType, Trace};
use wfconf::{
    execute_workflow, find_critical_path, find_detour_subpaths, generate_workload, runtime_sum, schedule, validate_dag,
    ConfigMap, FunctionPerfProfile, PricingParams, ResourceConfig, ResourceKind, ScheduleParams, SloSpec,
    SyntheticBackend, TunerParams, WorkflowDag, WorkloadTemplate,
};

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn random_dags() -> Vec<WorkflowDag> {
    let t = WorkloadTemplate::builtin("random").unwrap();
    (0..100u64)
        .map(|seed| {
            let mut dag = generate_workload(&t, seed);
            dyadic_weights(&mut dag, 1000 + seed);
            dag
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Noiseless cost and makespan of `config` on `dag`.
fn measure(dag: &WorkflowDag, config: &ConfigMap) -> (f64, f64, f64) {
    let e = evaluate_config(dag, config, 1, 0, &SyntheticBackend, &PricingParams::default()).unwrap();
    (e.mean_runtime, e.mean_cost, e.violation_rate)
}

fn critical_path_oracle() -> Outcome {
    let start = Instant::now();
    let dags = random_dags();
    let mut max_nodes = 0;
    for (i, dag) in dags.iter().enumerate() {
        validate_dag(dag).map_err(|e| format!("dag {i}: {e}"))?;
        max_nodes = max_nodes.max(dag.len());
        let cp = find_critical_path(dag).map_err(|e| format!("dag {i}: {e}"))?;
        let best = all_paths(dag).iter().map(|p| path_weight(dag, p)).fold(f64::NEG_INFINITY, f64::max);
        check(cp.total_runtime == best, format!("dag {i}: critical {} vs exhaustive {best}", cp.total_runtime))?;
        check(all_paths(dag).contains(&cp.node_ids), format!("dag {i}: returned sequence is not a path"))?;
        check(path_weight(dag, &cp.node_ids) == best, format!("dag {i}: path weight mismatch"))?;
    }
    let elapsed = start.elapsed();
    check(max_nodes <= 12, format!("dag with {max_nodes} nodes"))?;
    check(elapsed < Duration::from_secs(5), format!("took {elapsed:?}"))?;
    Ok(format!("100 DAGs (max {max_nodes} nodes) match exhaustive enumeration exactly in {elapsed:.2?}"))
}

fn subpath_coverage() -> Outcome {
    let mut detours = 0;
    let mut identities = 0;
    for (i, dag) in random_dags().iter().enumerate() {
        let cp = find_critical_path(dag).unwrap();
        let subs = find_detour_subpaths(dag, &cp);
        let covered: BTreeSet<&str> = subs.iter().flat_map(|s| s.interior.iter().map(String::as_str)).collect();
        for n in dag.nodes() {
            if !cp.contains(&n.id) {
                check(covered.contains(n.id.as_str()), format!("dag {i}: `{}` in no detour", n.id))?;
            }
        }
        let mut got: Vec<(String, Vec<String>, String)> =
            subs.iter().map(|s| (s.start.clone(), s.interior.clone(), s.end.clone())).collect();
        let mut want = all_detours(dag, &cp.node_ids);
        got.sort();
        want.sort();
        check(got == want, format!("dag {i}: detour set differs from enumeration"))?;
        detours += subs.len();

        let ids = &cp.node_ids;
        for s in &subs {
            let (a, b) = (cp.position(&s.start).unwrap(), cp.position(&s.end).unwrap());
            let between: f64 = ids[a + 1..b].iter().map(|id| weight(dag, id)).sum();
            check(
                runtime_sum(dag, &cp, &s.start, &s.end).unwrap() == between,
                format!("dag {i}: interval {} -> {}", s.start, s.end),
            )?;
        }
        for a in 0..ids.len() {
            for b in a + 1..ids.len() {
                for c in b + 1..ids.len() {
                    let whole = runtime_sum(dag, &cp, &ids[a], &ids[c]).unwrap();
                    let parts = runtime_sum(dag, &cp, &ids[a], &ids[b]).unwrap()
                        + weight(dag, &ids[b])
                        + runtime_sum(dag, &cp, &ids[b], &ids[c]).unwrap();
                    check(whole == parts, format!("dag {i}: additivity fails at {a},{b},{c}"))?;
                    identities += 1;
                }
            }
        }
    }
    Ok(format!("{detours} detours cover every off-path node; {identities} additivity identities exact"))
}

struct TunerRun {
    dag: WorkflowDag,
    nodes: Vec<String>,
    base: ConfigMap,
    trace: Trace,
    /// Backend calls grouped per sample.
    calls: Vec<Vec<(String, ResourceConfig, f64)>>,
    outcome: wfconf::configurator::ConfigurationOutcome,
    params: TunerParams,
}

fn tuner_run(profiles: &[FunctionPerfProfile], slo: f64, params: TunerParams) -> TunerRun {
    let ids: Vec<String> = (0..profiles.len()).map(|i| format!("f{i}")).collect();
    let id_refs: Vec<&str> = ids.iter().map(String::as_str).collect();
    let edges: Vec<(&str, &str)> = id_refs.windows(2).map(|w| (w[0], w[1])).collect();
    let mut dag = dag_from(&id_refs, &edges, profiles, slo);
    dag.set_all_configs(ResourceConfig::max());
    let base = dag.configs();
    let rec = Recorder::default();
    let mut trace = Trace::new("aarc");
    let outcome = {
        let mut runner = Runner::new(&rec, 7);
        priority_configuration(&mut dag, &ids, slo, &mut runner, &PricingParams::default(), &params, &mut trace)
            .unwrap()
    };
    // A path run stops at the first failed node.
    let mut calls = Vec::new();
    let mut group = Vec::new();
    for (id, c, r) in rec.calls.into_inner() {
        group.push((id, c, r.runtime));
        if !r.success || group.len() == ids.len() {
            calls.push(std::mem::take(&mut group));
        }
    }
    assert!(group.is_empty());
    TunerRun { dag, nodes: ids, base, trace, calls, outcome, params }
}

fn tuner_fixtures() -> Vec<TunerRun> {
    let a = profile(1.0, 12.0, 6.0, 256.0, 2048.0, 4.0);
    let b = profile(2.0, 20.0, 4.0, 512.0, 1024.0, 8.0);
    let c = profile(0.5, 6.0, 2.0, 128.0, 128.0, 0.0);
    let flat = profile(0.0, 10.0, 10.0, 128.0, 128.0, 0.0);
    let mut runs = Vec::new();
    for max_trail in [7, 13, 40, 100] {
        runs.push(tuner_run(&[a, b, c], 20.0, TunerParams { max_trail, ..TunerParams::default() }));
    }
    runs.push(tuner_run(&[flat], 10.0 / 2.05, TunerParams::default()));
    runs.push(tuner_run(&[flat], 10.0 / 2.05, TunerParams { step0_cpu: 0.3, ..TunerParams::default() }));
    runs.push(tuner_run(&[a, c], 9.0, TunerParams { step0_mem: 960, func_trial: 4, ..TunerParams::default() }));
    runs
}

fn expected_tried(kind: ResourceKind, before: ResourceConfig, step: f64) -> ResourceConfig {
    match kind {
        ResourceKind::Cpu => ResourceConfig::new((before.cpu - step).max(0.1), before.mem),
        ResourceKind::Mem => ResourceConfig::new(before.cpu, before.mem.saturating_sub(step as u32).max(128)),
    }
}

fn configurator_mechanics() -> Outcome {
    let mut reverts_seen = 0;
    let mut retired = 0;
    for (fx, run) in tuner_fixtures().iter().enumerate() {
        let n = run.nodes.len();
        let p = &run.params;
        check(run.calls.len() == run.trace.len(), format!("fixture {fx}: executions out of step with trace"))?;
        // (e) sample cap.
        check(run.trace.len() <= p.max_trail, format!("fixture {fx}: {} samples > {}", run.trace.len(), p.max_trail))?;
        check(run.outcome.samples == run.trace.len(), format!("fixture {fx}: sample count mismatch"))?;

        let mut accepted = run.base.clone();
        let mut accepted_runtimes: BTreeMap<String, f64> = BTreeMap::new();
        let mut best_cost = f64::INFINITY;
        // Per-op replay state: (step, reverts).
        let mut ops: BTreeMap<(String, ResourceKind), (f64, u32)> = BTreeMap::new();
        let mut finished: BTreeSet<(String, ResourceKind)> = BTreeSet::new();
        for (s, row) in run.trace.records().iter().enumerate() {
            let calls = &run.calls[s];
            if row.op_type == OpType::Joint {
                check(s == 0, format!("fixture {fx}: joint row in the middle"))?;
                check(calls.iter().all(|(id, c, _)| accepted.get(id) == Some(c)), "profiling ran a modified config")?;
                best_cost = row.cost;
                accepted_runtimes = calls.iter().map(|(id, _, t)| (id.clone(), *t)).collect();
                continue;
            }
            let kind = if row.op_type == OpType::Cpu { ResourceKind::Cpu } else { ResourceKind::Mem };
            let key = (row.node_id.clone(), kind);
            // (c) an op never reappears once its retries are spent.
            check(!finished.contains(&key), format!("fixture {fx}: op {key:?} sampled after retiring"))?;
            let gran = if kind == ResourceKind::Cpu { p.gran_cpu } else { f64::from(p.gran_mem) };
            let step0 = if kind == ResourceKind::Cpu { p.step0_cpu } else { f64::from(p.step0_mem) };
            let (step, reverts) = *ops.entry(key.clone()).or_insert((step0, 0));
            // (a) every sample starts from the last accepted state and (b)
            // removes exactly the op's current step.
            let before = *accepted.get(&row.node_id).unwrap();
            let tried = expected_tried(kind, before, step);
            check(calls.len() == n || !row.accepted, format!("fixture {fx} sample {s}: failed run accepted"))?;
            for (id, c, _) in calls {
                let want = if *id == row.node_id { tried } else { *accepted.get(id).unwrap() };
                check(*c == want, format!("fixture {fx} sample {s}: `{id}` ran {c:?}, expected {want:?}"))?;
            }
            if row.accepted {
                // (d) strictly cheaper than every earlier accepted state.
                check(row.cost < best_cost, format!("fixture {fx} sample {s}: accepted cost did not drop"))?;
                best_cost = row.cost;
                accepted.insert(row.node_id.clone(), tried);
                accepted_runtimes = calls.iter().map(|(id, _, t)| (id.clone(), *t)).collect();
            } else {
                reverts_seen += 1;
                let half = if kind == ResourceKind::Cpu { step / 2.0 } else { (step / 2.0).floor() };
                ops.insert(key.clone(), (half.max(gran), reverts + 1));
                if reverts + 1 == p.func_trial {
                    finished.insert(key);
                    retired += 1;
                }
            }
        }
        check(run.outcome.configs == accepted, format!("fixture {fx}: final configs differ from replay"))?;
        check(run.dag.configs() == accepted, format!("fixture {fx}: graph not restored"))?;
        for id in &run.nodes {
            let rt = run.dag.node(id).unwrap().last_runtime.unwrap();
            check(rt == accepted_runtimes[id], format!("fixture {fx}: `{id}` runtime not restored"))?;
        }
    }
    check(reverts_seen > 0 && retired > 0, "fixtures never exercised backoff")?;
    Ok(format!("7 traced runs replayed exactly ({reverts_seen} reverts, {retired} ops retired)"))
}

fn template_for(seed: u64) -> WorkloadTemplate {
    let name = ["chatbot", "mlpipeline", "videoanalysis", "random"][(seed % 4) as usize];
    WorkloadTemplate::builtin(name).unwrap()
}

fn slo_safety() -> Outcome {
    let pricing = PricingParams::default();
    let params = ScheduleParams::default();
    let mut worst_noisy: f64 = 0.0;
    let mut mean_noisy = 0.0;
    let mut failures = Vec::new();
    for seed in 0..50u64 {
        let t = template_for(seed);
        let mut dag = generate_workload(&t, seed);
        let slo = dag.slo();
        let out = schedule(&mut dag, slo, &SyntheticBackend, &pricing, &params, seed)
            .map_err(|e| format!("{} seed {seed}: {e}", t.name))?;
        let mut check_dag = dag.clone();
        check_dag.apply_configs(&out.configs);
        let makespan = execute_workflow(&mut check_dag, &SyntheticBackend, seed + 1).map_err(|e| e.to_string())?;
        check(
            makespan <= slo.seconds(),
            format!("{} seed {seed}: noiseless makespan {makespan} > {}", t.name, slo.seconds()),
        )?;

        let noisy_t = t.clone().with_noise(0.03);
        let mut noisy = generate_workload(&noisy_t, seed);
        let out = schedule(&mut noisy, slo, &SyntheticBackend, &pricing, &params, seed)
            .map_err(|e| format!("{} seed {seed} (noisy): {e}", t.name))?;
        let e = evaluate_config(&noisy, &out.configs, 100, seed ^ 0xabcdef, &SyntheticBackend, &pricing).unwrap();
        worst_noisy = worst_noisy.max(e.violation_rate);
        mean_noisy += e.violation_rate / 50.0;
        if e.violation_rate > 0.05 {
            failures.push(format!("{}#{seed}={:.2}", t.name, e.violation_rate));
        }
    }
    let summary =
        format!("noiseless 50/50 within SLO; noisy violation rate mean {mean_noisy:.3}, max {worst_noisy:.2}");
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {} configs above 5%: {}", failures.len(), failures.join(" ")))
    }
}

fn random_profile(rng: &mut ChaCha8Rng) -> FunctionPerfProfile {
    let floor = f64::from(rng.random_range(128u32..=2048));
    profile(
        rng.random_range(0.5..5.0),
        rng.random_range(5.0..100.0),
        rng.random_range(1.0..8.0),
        floor,
        floor + f64::from(rng.random_range(0u32..=4096)),
        rng.random_range(0.0..30.0),
    )
}

fn near_optimality() -> Outcome {
    let start = Instant::now();
    let pricing = PricingParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut within = 0;
    let mut total = 0;
    let mut gaps = Vec::new();
    for i in 0..30 {
        let chain = i >= 20;
        let ps: Vec<FunctionPerfProfile> = (0..if chain { 2 } else { 1 }).map(|_| random_profile(&mut rng)).collect();
        let base: f64 = ps.iter().map(|p| p.base_runtime(&ResourceConfig::max()).unwrap()).sum();
        let slo = base * rng.random_range(1.5..4.0);
        let optimum = if chain {
            brute_force_chain(&ps[0], &ps[1], slo, &pricing)
        } else {
            brute_force_single(&ps[0], slo, &pricing)
        }
        .ok_or_else(|| format!("instance {i} has no feasible grid point"))?;
        let (ids, edges): (&[&str], &[(&str, &str)]) = if chain { (&["a", "b"], &[("a", "b")]) } else { (&["a"], &[]) };
        let mut dag = dag_from(ids, edges, &ps, slo);
        let out =
            schedule(&mut dag, SloSpec::new(slo).unwrap(), &SyntheticBackend, &pricing, &ScheduleParams::default(), i)
                .map_err(|e| format!("instance {i}: {e}"))?;
        let (rt, cost, _) = measure(&dag, &out.configs);
        check(rt <= slo, format!("instance {i}: infeasible result"))?;
        let gap = cost / optimum - 1.0;
        gaps.push(gap);
        total += 1;
        if gap <= 0.25 {
            within += 1;
        }
    }
    let elapsed = start.elapsed();
    let frac = within as f64 / total as f64;
    let msg = format!(
        "{within}/{total} within 25% of grid optimum (median gap {:.1}%, max {:.1}%) in {elapsed:.2?}",
        100.0 * median(gaps.clone()),
        100.0 * gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    );
    check(elapsed < Duration::from_secs(120), format!("{msg}: too slow"))?;
    check(frac >= 0.9, msg.clone())?;
    Ok(msg)
}

fn decoupling_advantage() -> Outcome {
    let start = Instant::now();
    let t = WorkloadTemplate::builtin("mlpipeline").unwrap();
    let pricing = PricingParams::default();
    let params = MethodParams::default();
    let mut savings = Vec::new();
    let mut mem_ratio: f64 = 0.0;
    for seed in 1..=10u64 {
        let dag = generate_workload(&t, seed);
        let slo = dag.slo();
        let a =
            optimize(&dag, slo, Method::Aarc, &SyntheticBackend, &pricing, &params, seed).map_err(|e| e.to_string())?;
        let m =
            optimize(&dag, slo, Method::Maff, &SyntheticBackend, &pricing, &params, seed).map_err(|e| e.to_string())?;
        let (_, ca, _) = measure(&dag, &a.configs);
        let (_, cm, _) = measure(&dag, &m.configs);
        check(ca <= cm, format!("seed {seed}: AARC cost {ca:.2} > MAFF {cm:.2}"))?;
        savings.push(1.0 - ca / cm);
        mem_ratio = mem_ratio.max(a.configs.total_mem() as f64 / m.configs.total_mem() as f64);
    }
    let elapsed = start.elapsed();
    let med = median(savings);
    let msg =
        format!("median saving {:.1}%, worst memory ratio {:.1}% in {elapsed:.2?}", 100.0 * med, 100.0 * mem_ratio);
    check(med >= 0.2 && mem_ratio <= 0.25 && elapsed < Duration::from_secs(60), msg.clone())?;
    Ok(msg)
}

fn sampling_efficiency() -> Outcome {
    let t = WorkloadTemplate::builtin("videoanalysis").unwrap();
    let pricing = PricingParams::default();
    let params = MethodParams::default();
    let mut time = BTreeMap::new();
    for seed in 1..=10u64 {
        let dag = generate_workload(&t, seed);
        for m in Method::ALL {
            let r =
                optimize(&dag, dag.slo(), m, &SyntheticBackend, &pricing, &params, seed).map_err(|e| e.to_string())?;
            let tot = r.trace.totals();
            if m == Method::Aarc {
                check(tot.samples <= 100, format!("seed {seed}: AARC took {} samples", tot.samples))?;
            }
            *time.entry(m).or_insert(0.0) += tot.sampling_time;
        }
    }
    let (a, b, m) = (time[&Method::Aarc], time[&Method::Bo], time[&Method::Maff]);
    let msg = format!(
        "sampling time AARC {a:.0}s = {:.1}% of BO ({b:.0}s), {:.1}% of MAFF ({m:.0}s)",
        100.0 * a / b,
        100.0 * a / m
    );
    check(a <= 0.5 * b && a <= 0.5 * m, msg.clone())?;
    Ok(msg)
}

fn baseline_conformance() -> Outcome {
    let pricing = PricingParams::default();
    let mut maff_rows = 0;
    let mut bo_points = 0;
    for seed in 0..8u64 {
        let t = template_for(seed);
        let mut dag = generate_workload(&t, seed);
        let slo = dag.slo();
        let out = maff_optimize(&mut dag, slo, &SyntheticBackend, &pricing, &MaffParams::default(), seed).unwrap();
        let coupled = |c: &ResourceConfig| c.cpu == (f64::from(c.mem) / 1024.0).clamp(0.1, 10.0);
        for r in out.trace.records() {
            if r.op_type != OpType::Joint {
                let c = ResourceConfig::new(r.cpu, r.mem as u32);
                check(coupled(&c), format!("MAFF row {} on {}: {c:?}", r.sample_idx, t.name))?;
                maff_rows += 1;
            }
        }
        for cfg in &out.sampled {
            for (id, c) in cfg.iter() {
                check(coupled(c), format!("MAFF sampled `{id}` at {c:?}"))?;
            }
        }
        check(out.sampled.len() == out.trace.len(), "MAFF sampled list out of step with trace")?;

        let mut dag = generate_workload(&t, seed);
        let params = BoParams { budget: 30, ..BoParams::default() };
        let out = bo_optimize(&mut dag, slo, &SyntheticBackend, &pricing, &params, seed).unwrap();
        check(out.trace.len() == 30 && out.sampled.len() == 30, "BO sample count")?;
        let cpu_grid: Vec<f64> = (1..=100).map(|i| f64::from(i) / 10.0).collect();
        for cfg in out.sampled.iter().chain(std::iter::once(&out.configs)) {
            for (id, c) in cfg.iter() {
                let ok = cpu_grid.contains(&c.cpu) && c.mem >= 128 && c.mem <= 10240 && c.mem % 64 == 0;
                check(ok && on_grid(c), format!("BO sampled `{id}` off grid: {c:?}"))?;
                bo_points += 1;
            }
        }
    }
    Ok(format!("{maff_rows} MAFF rows coupled; {bo_points} BO node configs on grid"))
}

fn input_aware() -> Outcome {
    let pricing = PricingParams::default();
    let t = WorkloadTemplate::builtin("videoanalysis").unwrap();
    let base = generate_workload(&t, 0);
    let slo = base.slo();
    let classes = InputClass::parse_list("light:0.3,middle:1.0,heavy:3.0").unwrap();
    let table = input_aware_optimize(&base, &classes, slo, &SyntheticBackend, &pricing, &ScheduleParams::default(), 0)
        .map_err(|e| e.to_string())?;
    let light = scale_dag(&base, 0.3);
    let heavy = scale_dag(&base, 3.0);

    let mut heavy_run = heavy.clone();
    let maff_heavy = maff_optimize(&mut heavy_run, slo, &SyntheticBackend, &pricing, &MaffParams::default(), 0)
        .map_err(|e| e.to_string())?
        .configs;
    let light_cfg = table.dispatch("light").map_err(|e| e.to_string())?;
    let (_, maff_on_light, _) = measure(&light, &maff_heavy);
    let (_, aarc_light, _) = measure(&light, light_cfg);
    let ratio = maff_on_light / aarc_light;
    check(ratio >= 2.0, format!("heavy-tuned MAFF config costs only {ratio:.2}x on light input"))?;

    let (rt, _, viol) = measure(&heavy, light_cfg);
    check(viol == 1.0, format!("light config meets the SLO on heavy input ({rt:.1}s)"))?;

    for c in &classes {
        let dag = scale_dag(&base, c.scale);
        let (rt, _, v) = measure(&dag, table.dispatch(&c.label).unwrap());
        check(v == 0.0, format!("class {} misses the SLO ({rt:.1}s)", c.label))?;
    }
    check(table.dispatch("huge").is_err(), "unknown class dispatched")?;
    Ok(format!(
        "heavy-tuned MAFF on light input costs {ratio:.2}x; light config takes {rt:.0}s > {}s on heavy; all classes compliant",
        slo.seconds()
    ))
}

fn reproducibility() -> Outcome {
    let pricing = PricingParams::default();
    let params = MethodParams { bo: BoParams { budget: 40, ..BoParams::default() }, ..MethodParams::default() };
    let mut files = 0;
    for name in ["chatbot", "mlpipeline", "videoanalysis", "random"] {
        let t = WorkloadTemplate::builtin(name).unwrap().with_noise(0.03);
        for seed in [3u64, 11] {
            for m in Method::ALL {
                let run = || {
                    let dag = generate_workload(&t, seed);
                    let r = optimize(&dag, dag.slo(), m, &SyntheticBackend, &pricing, &params, seed).unwrap();
                    let dir = tempfile::tempdir().unwrap();
                    let path = dir.path().join("trace.csv");
                    r.trace.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
                    std::fs::read(&path).unwrap()
                };
                let (a, b) = (run(), run());
                check(a == b, format!("{m} on {name} seed {seed}: traces differ"))?;
                files += 1;
            }
        }
    }
    Ok(format!("{files} trace files byte-identical across repeated runs"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("critical-path oracle", critical_path_oracle),
        ("detour coverage and interval additivity", subpath_coverage),
        ("priority configurator mechanics", configurator_mechanics),
        ("SLO safety", slo_safety),
        ("near-optimality vs grid brute force", near_optimality),
        ("decoupling advantage on mlpipeline", decoupling_advantage),
        ("sampling efficiency on videoanalysis", sampling_efficiency),
        ("baseline conformance", baseline_conformance),
        ("input-aware configuration", input_aware),
        ("trace reproducibility", reproducibility),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|s| name.contains(s.as_str())) {
            continue;
        }
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS [{name}] {detail} ({secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL [{name}] {detail} ({secs:.2}s)", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
