//! Per-sample search traces shared by every optimizer.
//!
//! A trace is a CSV file with a header row and one row per backend
//! execution. `cpu`/`mem` hold the sampled node's allocation, or the totals
//! over all nodes for whole-workflow (`joint`) samples.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::config::{ResourceConfig, ResourceKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpType {
    Cpu,
    Mem,
    Joint,
}

impl From<ResourceKind> for OpType {
    fn from(k: ResourceKind) -> Self {
        match k {
            ResourceKind::Cpu => OpType::Cpu,
            ResourceKind::Mem => OpType::Mem,
        }
    }
}

/// Node id used for whole-workflow samples.
pub const WHOLE_WORKFLOW: &str = "*";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub sample_idx: u64,
    pub method: String,
    pub node_id: String,
    pub op_type: OpType,
    pub cpu: f64,
    pub mem: u64,
    pub runtime_s: f64,
    pub cost: f64,
    pub accepted: bool,
    /// Simulated seconds this sample consumed.
    pub wall_note: f64,
}

/// Totals over a trace.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TraceTotals {
    pub samples: u64,
    pub sampling_time: f64,
    pub sampling_cost: f64,
}

/// Append-only trace with run-local sample numbering.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trace {
    method: String,
    records: Vec<TraceRecord>,
}

impl Trace {
    pub fn new(method: impl Into<String>) -> Self {
        Self { method: method.into(), records: Vec::new() }
    }

    pub fn method(&self) -> &str {
        &self.method
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn records_mut(&mut self) -> &mut [TraceRecord] {
        &mut self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records one per-node sample and returns its index in the trace.
    pub fn push_node(
        &mut self,
        node_id: &str,
        op_type: OpType,
        config: ResourceConfig,
        runtime_s: f64,
        cost: f64,
        accepted: bool,
    ) -> usize {
        self.push(node_id, op_type, config.cpu, u64::from(config.mem), runtime_s, cost, accepted)
    }

    /// Records one whole-workflow sample with allocation totals.
    pub fn push_joint(&mut self, total_cpu: f64, total_mem: u64, runtime_s: f64, cost: f64, accepted: bool) -> usize {
        self.push(WHOLE_WORKFLOW, OpType::Joint, total_cpu, total_mem, runtime_s, cost, accepted)
    }

    #[allow(clippy::too_many_arguments)]
    fn push(
        &mut self,
        node_id: &str,
        op_type: OpType,
        cpu: f64,
        mem: u64,
        runtime_s: f64,
        cost: f64,
        accepted: bool,
    ) -> usize {
        let idx = self.records.len();
        self.records.push(TraceRecord {
            sample_idx: idx as u64,
            method: self.method.clone(),
            node_id: node_id.to_string(),
            op_type,
            cpu,
            mem,
            runtime_s,
            cost,
            accepted,
            wall_note: runtime_s,
        });
        idx
    }

    pub fn set_accepted(&mut self, idx: usize, accepted: bool) {
        if let Some(r) = self.records.get_mut(idx) {
            r.accepted = accepted;
        }
    }

    pub fn totals(&self) -> TraceTotals {
        totals(&self.records)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), csv::Error> {
        let mut wr = csv::Writer::from_writer(w);
        if self.records.is_empty() {
            wr.write_record([
                "sample_idx",
                "method",
                "node_id",
                "op_type",
                "cpu",
                "mem",
                "runtime_s",
                "cost",
                "accepted",
                "wall_note",
            ])?;
        }
        for r in &self.records {
            wr.serialize(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self, csv::Error> {
        let mut rd = csv::Reader::from_reader(r);
        let records = rd.deserialize().collect::<Result<Vec<TraceRecord>, _>>()?;
        let method = records.first().map(|r| r.method.clone()).unwrap_or_default();
        Ok(Self { method, records })
    }
}

pub fn totals(records: &[TraceRecord]) -> TraceTotals {
    TraceTotals {
        samples: records.len() as u64,
        sampling_time: records.iter().map(|r| r.wall_note).sum(),
        sampling_cost: records.iter().map(|r| r.cost).sum(),
    }
}
