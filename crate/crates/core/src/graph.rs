//! Workflow DAG, node state, and the path queries the scheduler is built on:
//! the node-weighted critical path, detour sub-paths hanging off it, and
//! interval runtime sums along a path.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigMap, ResourceConfig};
use crate::perf::FunctionPerfProfile;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("workflow has no nodes")]
    EmptyWorkflow,
    #[error("duplicate node id `{0}`")]
    DuplicateNodeId(String),
    #[error("edge {from} -> {to} references an unknown node")]
    DanglingEdge { from: String, to: String },
    #[error("cycle detected through node `{0}`")]
    CycleDetected(String),
    #[error("multiple source nodes: {0:?}")]
    MultipleSources(Vec<String>),
    #[error("multiple sink nodes: {0:?}")]
    MultipleSinks(Vec<String>),
    #[error("node `{node}` references unknown profile `{profile}`")]
    UnknownProfile { node: String, profile: String },
    #[error("node `{0}` has no measured runtime")]
    MissingRuntime(String),
    #[error("node `{0}` is not on the path")]
    NodeNotOnPath(String),
    #[error("interval start `{start}` comes after end `{end}`")]
    InvalidInterval { start: String, end: String },
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("SLO must be strictly positive, got {0}")]
    InvalidSlo(f64),
}

/// End-to-end latency objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SloSpec {
    end_to_end_seconds: f64,
}

impl SloSpec {
    pub fn new(seconds: f64) -> Result<Self, GraphError> {
        if seconds.is_finite() && seconds > 0.0 {
            Ok(Self { end_to_end_seconds: seconds })
        } else {
            Err(GraphError::InvalidSlo(seconds))
        }
    }

    pub fn seconds(&self) -> f64 {
        self.end_to_end_seconds
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionNode {
    pub id: String,
    /// Key into the workflow's profile table.
    pub profile: String,
    pub config: ResourceConfig,
    /// Weight after the most recent execution.
    pub last_runtime: Option<f64>,
    pub scheduled: bool,
}

impl FunctionNode {
    pub fn new(id: impl Into<String>, profile: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            profile: profile.into(),
            config: ResourceConfig::max(),
            last_runtime: None,
            scheduled: false,
        }
    }

    pub fn with_config(mut self, config: ResourceConfig) -> Self {
        self.config = config;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: String,
    pub to: String,
}

impl Edge {
    pub fn new(from: impl Into<String>, to: impl Into<String>) -> Self {
        Self { from: from.into(), to: to.into() }
    }
}

/// Ordered node sequence along directed edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub node_ids: Vec<String>,
    pub total_runtime: f64,
}

impl Path {
    pub fn position(&self, id: &str) -> Option<usize> {
        self.node_ids.iter().position(|n| n == id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.position(id).is_some()
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }
}

/// A detour leaving the critical path at `start` and rejoining at `end`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubPath {
    pub start: String,
    pub end: String,
    /// Nodes strictly off the critical path, in execution order.
    pub interior: Vec<String>,
    pub sub_slo: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct WorkflowDag {
    nodes: Vec<FunctionNode>,
    edges: Vec<Edge>,
    slo: SloSpec,
    profiles: BTreeMap<String, FunctionPerfProfile>,
    index: HashMap<String, usize>,
    succ: Vec<Vec<usize>>,
    pred: Vec<Vec<usize>>,
}

impl WorkflowDag {
    /// Builds the graph without checking invariants; call [`validate_dag`]
    /// before running any path query.
    pub fn new(
        nodes: Vec<FunctionNode>,
        edges: Vec<Edge>,
        slo: SloSpec,
        profiles: BTreeMap<String, FunctionPerfProfile>,
    ) -> Self {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            index.entry(n.id.clone()).or_insert(i);
        }
        let mut succ = vec![Vec::new(); nodes.len()];
        let mut pred = vec![Vec::new(); nodes.len()];
        for e in &edges {
            if let (Some(&a), Some(&b)) = (index.get(&e.from), index.get(&e.to)) {
                succ[a].push(b);
                pred[b].push(a);
            }
        }
        for list in succ.iter_mut().chain(pred.iter_mut()) {
            list.sort_by(|&x, &y| nodes[x].id.cmp(&nodes[y].id));
            list.dedup();
        }
        Self { nodes, edges, slo, profiles, index, succ, pred }
    }

    pub fn nodes(&self) -> &[FunctionNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn slo(&self) -> SloSpec {
        self.slo
    }

    pub fn set_slo(&mut self, slo: SloSpec) {
        self.slo = slo;
    }

    pub fn profiles(&self) -> &BTreeMap<String, FunctionPerfProfile> {
        &self.profiles
    }

    pub fn profiles_mut(&mut self) -> &mut BTreeMap<String, FunctionPerfProfile> {
        &mut self.profiles
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: &str) -> Option<&FunctionNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub fn node_mut(&mut self, id: &str) -> Option<&mut FunctionNode> {
        self.index.get(id).map(|&i| &mut self.nodes[i])
    }

    pub fn profile_of(&self, id: &str) -> Option<&FunctionPerfProfile> {
        self.node(id).and_then(|n| self.profiles.get(&n.profile))
    }

    pub fn successors(&self, id: &str) -> Vec<&str> {
        self.index
            .get(id)
            .map(|&i| self.succ[i].iter().map(|&j| self.nodes[j].id.as_str()).collect())
            .unwrap_or_default()
    }

    pub fn predecessors(&self, id: &str) -> Vec<&str> {
        self.index
            .get(id)
            .map(|&i| self.pred[i].iter().map(|&j| self.nodes[j].id.as_str()).collect())
            .unwrap_or_default()
    }

    /// Current allocation of every node.
    pub fn configs(&self) -> ConfigMap {
        self.nodes.iter().map(|n| (n.id.clone(), n.config)).collect()
    }

    /// Overwrites node configs from `map`; nodes absent from the map keep theirs.
    pub fn apply_configs(&mut self, map: &ConfigMap) {
        for (id, cfg) in map.iter() {
            if let Some(n) = self.node_mut(id) {
                n.config = *cfg;
            }
        }
    }

    pub fn set_all_configs(&mut self, config: ResourceConfig) {
        for n in &mut self.nodes {
            n.config = config;
        }
    }

    pub fn reset_schedule_state(&mut self) {
        for n in &mut self.nodes {
            n.scheduled = false;
            n.last_runtime = None;
        }
    }

    pub fn sources(&self) -> Vec<&str> {
        (0..self.nodes.len()).filter(|&i| self.pred[i].is_empty()).map(|i| self.nodes[i].id.as_str()).collect()
    }

    pub fn sinks(&self) -> Vec<&str> {
        (0..self.nodes.len()).filter(|&i| self.succ[i].is_empty()).map(|i| self.nodes[i].id.as_str()).collect()
    }

    /// Kahn's algorithm, smallest ready id first. `Err` carries a node left
    /// on a cycle.
    fn topo_indices(&self) -> Result<Vec<usize>, usize> {
        let n = self.nodes.len();
        let mut indeg: Vec<usize> = self.pred.iter().map(Vec::len).collect();
        let mut ready: BinaryHeap<Reverse<(&str, usize)>> =
            (0..n).filter(|&i| indeg[i] == 0).map(|i| Reverse((self.nodes[i].id.as_str(), i))).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse((_, i))) = ready.pop() {
            order.push(i);
            for &j in &self.succ[i] {
                indeg[j] -= 1;
                if indeg[j] == 0 {
                    ready.push(Reverse((self.nodes[j].id.as_str(), j)));
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err((0..n).find(|&i| indeg[i] > 0).unwrap_or(0))
        }
    }

    /// Node ids in a deterministic topological order.
    pub fn topological_order(&self) -> Result<Vec<&str>, GraphError> {
        self.topo_indices()
            .map(|order| order.into_iter().map(|i| self.nodes[i].id.as_str()).collect())
            .map_err(|i| GraphError::CycleDetected(self.nodes[i].id.clone()))
    }

    fn runtime_at(&self, i: usize) -> Result<f64, GraphError> {
        self.nodes[i].last_runtime.ok_or_else(|| GraphError::MissingRuntime(self.nodes[i].id.clone()))
    }

    /// Heaviest source-to-sink path weight under the current node runtimes.
    pub fn makespan(&self) -> Result<f64, GraphError> {
        Ok(find_critical_path(self)?.total_runtime)
    }
}

/// Checks every structural invariant, reporting the first violation.
pub fn validate_dag(dag: &WorkflowDag) -> Result<(), GraphError> {
    if dag.nodes.is_empty() {
        return Err(GraphError::EmptyWorkflow);
    }
    let mut seen = HashSet::with_capacity(dag.nodes.len());
    for n in &dag.nodes {
        if !seen.insert(n.id.as_str()) {
            return Err(GraphError::DuplicateNodeId(n.id.clone()));
        }
    }
    for e in &dag.edges {
        if !dag.index.contains_key(&e.from) || !dag.index.contains_key(&e.to) {
            return Err(GraphError::DanglingEdge { from: e.from.clone(), to: e.to.clone() });
        }
        if e.from == e.to {
            return Err(GraphError::CycleDetected(e.from.clone()));
        }
    }
    dag.topological_order()?;
    let sources = dag.sources();
    if sources.len() > 1 {
        return Err(GraphError::MultipleSources(sources.into_iter().map(String::from).collect()));
    }
    let sinks = dag.sinks();
    if sinks.len() > 1 {
        return Err(GraphError::MultipleSinks(sinks.into_iter().map(String::from).collect()));
    }
    for n in &dag.nodes {
        if !dag.profiles.contains_key(&n.profile) {
            return Err(GraphError::UnknownProfile { node: n.id.clone(), profile: n.profile.clone() });
        }
    }
    Ok(())
}

/// Node-weighted longest source-to-sink path. Among equally heavy paths the
/// lexicographically smallest id sequence wins.
pub fn find_critical_path(dag: &WorkflowDag) -> Result<Path, GraphError> {
    let order = dag.topo_indices().map_err(|i| GraphError::CycleDetected(dag.nodes[i].id.clone()))?;
    if order.is_empty() {
        return Err(GraphError::EmptyWorkflow);
    }
    let n = dag.nodes.len();
    // best[v]: heaviest suffix starting at v; next[v]: its successor.
    let mut best = vec![0.0_f64; n];
    let mut next: Vec<Option<usize>> = vec![None; n];
    for &v in order.iter().rev() {
        let w = dag.runtime_at(v)?;
        let mut choice: Option<usize> = None;
        // succ is sorted by id, so the first maximum is the smallest id.
        for &s in &dag.succ[v] {
            match choice {
                Some(c) if best[s] <= best[c] => {}
                _ => choice = Some(s),
            }
        }
        best[v] = w + choice.map_or(0.0, |c| best[c]);
        next[v] = choice;
    }
    // Unique source after validation; otherwise start from the heaviest,
    // smallest-id source.
    let mut start: Option<usize> = None;
    for &v in &order {
        if !dag.pred[v].is_empty() {
            continue;
        }
        start = match start {
            Some(s) if best[v] < best[s] || (best[v] == best[s] && dag.nodes[v].id > dag.nodes[s].id) => Some(s),
            _ => Some(v),
        };
    }
    let mut cur = start;
    let mut node_ids = Vec::new();
    let mut total = 0.0;
    while let Some(v) = cur {
        node_ids.push(dag.nodes[v].id.clone());
        total += dag.runtime_at(v)?;
        cur = next[v];
    }
    Ok(Path { node_ids, total_runtime: total })
}

/// Every directed path that leaves `critical` at one node, runs through
/// off-path nodes only, and rejoins it at a later node.
///
/// Ordered by start position, then interior ids, then end position.
pub fn find_detour_subpaths(dag: &WorkflowDag, critical: &Path) -> Vec<SubPath> {
    let on_path: HashMap<&str, usize> = critical.node_ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut found: Vec<(usize, Vec<String>, usize)> = Vec::new();

    fn walk<'a>(
        dag: &'a WorkflowDag,
        on_path: &HashMap<&str, usize>,
        start_pos: usize,
        stack: &mut Vec<&'a str>,
        found: &mut Vec<(usize, Vec<String>, usize)>,
    ) {
        let Some(&last) = stack.last() else { return };
        for s in dag.successors(last) {
            if let Some(&end_pos) = on_path.get(s) {
                found.push((start_pos, stack.iter().map(|x| x.to_string()).collect(), end_pos));
            } else {
                stack.push(s);
                walk(dag, on_path, start_pos, stack, found);
                stack.pop();
            }
        }
    }

    for (pos, id) in critical.node_ids.iter().enumerate() {
        for s in dag.successors(id) {
            if on_path.contains_key(s) {
                continue;
            }
            let mut stack = vec![s];
            walk(dag, &on_path, pos, &mut stack, &mut found);
        }
    }
    found.sort();
    found.dedup();
    found
        .into_iter()
        .map(|(s, interior, e)| SubPath {
            start: critical.node_ids[s].clone(),
            end: critical.node_ids[e].clone(),
            interior,
            sub_slo: None,
        })
        .collect()
}

/// Sum of `last_runtime` over the nodes strictly between `start` and `end`
/// on `path`. The endpoints themselves run concurrently with any detour
/// between them and are excluded.
pub fn runtime_sum(dag: &WorkflowDag, path: &Path, start: &str, end: &str) -> Result<f64, GraphError> {
    let a = path.position(start).ok_or_else(|| GraphError::NodeNotOnPath(start.to_string()))?;
    let b = path.position(end).ok_or_else(|| GraphError::NodeNotOnPath(end.to_string()))?;
    if a > b {
        return Err(GraphError::InvalidInterval { start: start.to_string(), end: end.to_string() });
    }
    let mut total = 0.0;
    for id in &path.node_ids[(a + 1).min(b)..b] {
        let node = dag.node(id).ok_or_else(|| GraphError::UnknownNode(id.clone()))?;
        total += node.last_runtime.ok_or_else(|| GraphError::MissingRuntime(id.clone()))?;
    }
    Ok(total)
}
