use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use super::{ElementKey, GraphWrite, KnowledgeGraph};
use crate::journal::{FsyncPolicy, Journal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    NodeUpsert,
    EdgeUpsert,
}

/// One line of `graph.log`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphLogRecord {
    pub seq: u64,
    pub kind: RecordKind,
    pub label: String,
    pub payload: Value,
}

#[derive(Serialize, Deserialize)]
struct NodePayload {
    labels: Vec<String>,
    properties: Map<String, Value>,
    stub: bool,
}

#[derive(Serialize, Deserialize)]
struct EdgePayload {
    source: ElementKey,
    target: ElementKey,
    undirected: bool,
    properties: Map<String, Value>,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("graph log i/o: {0}")]
    Io(#[from] io::Error),
    #[error("graph log line {line}: {reason}")]
    Corrupt { line: usize, reason: String },
    #[error("graph log sequence went from {previous} to {found}")]
    OutOfOrder { previous: u64, found: u64 },
}

impl GraphLogRecord {
    pub fn from_write(seq: u64, write: &GraphWrite) -> Self {
        let (kind, label, payload) = match write {
            GraphWrite::Node {
                label,
                labels,
                properties,
                stub,
            } => (
                RecordKind::NodeUpsert,
                label,
                serde_json::to_value(NodePayload {
                    labels: labels.clone(),
                    properties: properties.clone(),
                    stub: *stub,
                }),
            ),
            GraphWrite::Edge {
                label,
                source,
                target,
                undirected,
                properties,
            } => (
                RecordKind::EdgeUpsert,
                label,
                serde_json::to_value(EdgePayload {
                    source: source.clone(),
                    target: target.clone(),
                    undirected: *undirected,
                    properties: properties.clone(),
                }),
            ),
        };
        Self {
            seq,
            kind,
            label: label.clone(),
            payload: payload.expect("payload serializes"),
        }
    }

    pub fn to_write(&self) -> Result<GraphWrite, serde_json::Error> {
        Ok(match self.kind {
            RecordKind::NodeUpsert => {
                let p: NodePayload = serde_json::from_value(self.payload.clone())?;
                GraphWrite::Node {
                    label: self.label.clone(),
                    labels: p.labels,
                    properties: p.properties,
                    stub: p.stub,
                }
            }
            RecordKind::EdgeUpsert => {
                let p: EdgePayload = serde_json::from_value(self.payload.clone())?;
                GraphWrite::Edge {
                    label: self.label.clone(),
                    source: p.source,
                    target: p.target,
                    undirected: p.undirected,
                    properties: p.properties,
                }
            }
        })
    }
}

/// Left fold of `records` over an empty graph. Sequence numbers must be
/// strictly increasing.
pub fn replay_log(records: &[GraphLogRecord]) -> Result<KnowledgeGraph, LogError> {
    let mut graph = KnowledgeGraph::new();
    let mut previous = 0;
    for (i, record) in records.iter().enumerate() {
        if record.seq <= previous {
            return Err(LogError::OutOfOrder {
                previous,
                found: record.seq,
            });
        }
        previous = record.seq;
        let write = record.to_write().map_err(|e| LogError::Corrupt {
            line: i + 1,
            reason: e.to_string(),
        })?;
        graph.apply(&write);
    }
    Ok(graph)
}

fn parse_lines(lines: &[String]) -> Result<Vec<GraphLogRecord>, LogError> {
    lines
        .iter()
        .enumerate()
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| LogError::Corrupt {
                line: i + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

/// Reads every intact record in a log file without opening it for writing.
pub fn read_log(path: &Path) -> Result<Vec<GraphLogRecord>, LogError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    let intact = text.rfind('\n').map_or("", |i| &text[..=i]);
    let lines: Vec<String> = intact
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(str::to_string)
        .collect();
    parse_lines(&lines)
}

/// Writer side of `graph.log`.
#[derive(Debug)]
pub struct GraphLog {
    journal: Journal,
    next_seq: u64,
}

impl GraphLog {
    /// Opens the log for appending and returns the records already in it.
    pub fn open(path: &Path, fsync: FsyncPolicy) -> Result<(Self, Vec<GraphLogRecord>), LogError> {
        let (journal, lines) = Journal::open(path, fsync)?;
        let records = parse_lines(&lines)?;
        let next_seq = records.last().map_or(1, |r| r.seq + 1);
        Ok((Self { journal, next_seq }, records))
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    /// Appends `writes` as consecutive records in one write call.
    pub fn append(&mut self, writes: &[GraphWrite]) -> Result<(), LogError> {
        let lines: Vec<String> = writes
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let record = GraphLogRecord::from_write(self.next_seq + i as u64, w);
                serde_json::to_string(&record).expect("record serializes")
            })
            .collect();
        self.journal.append(&lines)?;
        self.next_seq += writes.len() as u64;
        Ok(())
    }
}
