//! Drives a running service: sets up a project from a fixture, then times
//! the edge uploads one request at a time.

use std::time::{Duration, Instant};

use reqwest::blocking::Client;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::fixture::{Fixture, EDGE_TITLE};

/// Requests issued and discarded before timing starts.
pub const WARMUP_REQUESTS: usize = 5;

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Single,
    Bulk,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Single => "single",
            Mode::Bulk => "bulk",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(Mode::Single),
            "bulk" => Ok(Mode::Bulk),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Service base URL, e.g. `http://127.0.0.1:8000`.
    pub url: String,
    /// Must not exist yet; it is created by the run.
    pub project: String,
    pub mode: Mode,
    pub n: usize,
    /// Documents per request in bulk mode.
    pub batch: usize,
    pub seed: u64,
    /// Concurrent clients for the timed phase. 1 issues requests in order.
    pub clients: usize,
}

impl BenchConfig {
    pub fn new(url: impl Into<String>, project: impl Into<String>, mode: Mode, n: usize) -> Self {
        Self {
            url: url.into(),
            project: project.into(),
            mode,
            n,
            batch: 1000,
            seed: 1,
            clients: 1,
        }
    }

    /// Requests in the timed phase.
    pub fn request_count(&self) -> usize {
        match self.mode {
            Mode::Single => self.n,
            Mode::Bulk => self.n.div_ceil(self.batch.max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchResult {
    pub mode: Mode,
    pub n_records: usize,
    pub batch: usize,
    /// One entry per timed request, in issue order.
    pub wall_times_ms: Vec<f64>,
    /// Wall clock of the whole timed phase.
    pub total_ms: f64,
    pub throughput_rps: f64,
    /// False when the run stopped early.
    pub complete: bool,
}

impl BenchResult {
    fn finish(
        mode: Mode,
        n_records: usize,
        batch: usize,
        wall_times_ms: Vec<f64>,
        elapsed: Duration,
        complete: bool,
    ) -> Self {
        let total_ms = elapsed.as_secs_f64() * 1e3;
        let done = match mode {
            Mode::Single => wall_times_ms.len(),
            Mode::Bulk => (wall_times_ms.len() * batch).min(n_records),
        };
        Self {
            mode,
            n_records,
            batch,
            wall_times_ms,
            total_ms,
            throughput_rps: if total_ms > 0.0 {
                done as f64 / (total_ms / 1e3)
            } else {
                0.0
            },
            complete,
        }
    }

    pub fn mean_ms(&self) -> f64 {
        if self.wall_times_ms.is_empty() {
            0.0
        } else {
            self.wall_times_ms.iter().sum::<f64>() / self.wall_times_ms.len() as f64
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{context}: HTTP {status}: {body}")]
    Status {
        context: String,
        status: u16,
        body: String,
    },
    #[error("{context}: {source}")]
    Transport {
        context: String,
        #[source]
        source: reqwest::Error,
    },
    #[error("timed phase aborted after {} of {} requests: {cause}", partial.wall_times_ms.len(), expected)]
    Aborted {
        partial: BenchResult,
        expected: usize,
        cause: Box<BenchError>,
    },
}

impl BenchError {
    /// Timings gathered before the failure, if the timed phase had started.
    pub fn partial(&self) -> Option<&BenchResult> {
        match self {
            BenchError::Aborted { partial, .. } => Some(partial),
            _ => None,
        }
    }
}

/// Thin JSON client over one keep-alive connection pool.
#[derive(Debug, Clone)]
pub struct Service {
    client: Client,
    base: String,
}

impl Service {
    pub fn new(url: &str) -> Self {
        Self {
            client: Client::builder()
                .timeout(Duration::from_secs(300))
                .build()
                .expect("client builds"),
            base: url.trim_end_matches('/').to_string(),
        }
    }

    fn check(context: &str, response: reqwest::blocking::Response) -> Result<Value, BenchError> {
        let status = response.status();
        let bytes = response.bytes().map_err(|source| BenchError::Transport {
            context: context.to_string(),
            source,
        })?;
        if !status.is_success() {
            return Err(BenchError::Status {
                context: context.to_string(),
                status: status.as_u16(),
                body: String::from_utf8_lossy(&bytes).into_owned(),
            });
        }
        Ok(serde_json::from_slice(&bytes).unwrap_or(Value::Null))
    }

    pub fn get(&self, path: &str) -> Result<Value, BenchError> {
        let context = format!("GET {path}");
        let response = self
            .client
            .get(format!("{}{path}", self.base))
            .send()
            .map_err(|source| BenchError::Transport {
                context: context.clone(),
                source,
            })?;
        Self::check(&context, response)
    }

    pub fn get_text(&self, path: &str) -> Result<String, BenchError> {
        let context = format!("GET {path}");
        let response = self
            .client
            .get(format!("{}{path}", self.base))
            .send()
            .and_then(|r| r.error_for_status())
            .and_then(|r| r.text())
            .map_err(|source| BenchError::Transport { context, source })?;
        Ok(response)
    }

    /// Posts an already serialized JSON body.
    pub fn post_bytes(&self, path: &str, body: Vec<u8>) -> Result<Value, BenchError> {
        let context = format!("POST {path}");
        let response = self
            .client
            .post(format!("{}{path}", self.base))
            .header("content-type", "application/json")
            .body(body)
            .send()
            .map_err(|source| BenchError::Transport {
                context: context.clone(),
                source,
            })?;
        Self::check(&context, response)
    }

    pub fn post(&self, path: &str, body: &Value) -> Result<Value, BenchError> {
        self.post_bytes(path, serde_json::to_vec(body).expect("serializable"))
    }
}

/// Creates the project, registers every descriptor and bulk-uploads the node
/// documents.
pub fn setup(service: &Service, project: &str, fixture: &Fixture) -> Result<(), BenchError> {
    service.post("/projects", &json!({"name": project}))?;
    for (_, descriptor) in &fixture.descriptors {
        service.post(&format!("/projects/{project}/descriptors"), descriptor)?;
    }
    for (title, docs) in &fixture.nodes {
        service.post(
            &format!("/projects/{project}/data/{title}/bulk"),
            &Value::Array(docs.clone()),
        )?;
    }
    Ok(())
}

/// Pre-serialized request bodies for the timed phase.
fn requests(config: &BenchConfig, fixture: &Fixture) -> Vec<(String, Vec<u8>)> {
    let project = &config.project;
    match config.mode {
        Mode::Single => fixture
            .edges
            .iter()
            .map(|doc| {
                (
                    format!("/projects/{project}/data/{EDGE_TITLE}"),
                    serde_json::to_vec(doc).expect("serializable"),
                )
            })
            .collect(),
        Mode::Bulk => fixture
            .edges
            .chunks(config.batch.max(1))
            .map(|chunk| {
                (
                    format!("/projects/{project}/data/{EDGE_TITLE}/bulk"),
                    serde_json::to_vec(chunk).expect("serializable"),
                )
            })
            .collect(),
    }
}

/// Runs requests in order, stopping at the first failure.
fn timed(service: &Service, requests: Vec<(String, Vec<u8>)>) -> (Vec<f64>, Option<BenchError>) {
    let mut times = Vec::with_capacity(requests.len());
    for (path, body) in requests {
        let start = Instant::now();
        let outcome = service.post_bytes(&path, body);
        times.push(start.elapsed().as_secs_f64() * 1e3);
        if let Err(e) = outcome {
            times.pop();
            return (times, Some(e));
        }
    }
    (times, None)
}

/// Full run: setup, warm-up, timed edge uploads.
/// Timings `(request index, ms)` of one client and the error that stopped it.
type LaneResult = (Vec<(usize, f64)>, Option<BenchError>);

pub fn run_bench(config: &BenchConfig) -> Result<BenchResult, BenchError> {
    let fixture = crate::fixture::generate(config.n, config.seed);
    let service = Service::new(&config.url);
    setup(&service, &config.project, &fixture)?;
    for _ in 0..WARMUP_REQUESTS {
        service.get(&format!("/projects/{}", config.project))?;
    }
    let requests = requests(config, &fixture);
    let expected = requests.len();
    let clients = config.clients.max(1).min(expected.max(1));

    let start = Instant::now();
    let (times, failure) = if clients == 1 {
        timed(&service, requests)
    } else {
        // interleave so each client gets every k-th request
        let mut lanes: Vec<Vec<(usize, String, Vec<u8>)>> = vec![Vec::new(); clients];
        for (i, (path, body)) in requests.into_iter().enumerate() {
            lanes[i % clients].push((i, path, body));
        }
        let results: Vec<LaneResult> = std::thread::scope(|scope| {
            let handles: Vec<_> = lanes
                .into_iter()
                .map(|lane| {
                    let service = Service::new(&config.url);
                    scope.spawn(move || {
                        let mut out = Vec::with_capacity(lane.len());
                        for (i, path, body) in lane {
                            let t = Instant::now();
                            if let Err(e) = service.post_bytes(&path, body) {
                                return (out, Some(e));
                            }
                            out.push((i, t.elapsed().as_secs_f64() * 1e3));
                        }
                        (out, None)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("client thread"))
                .collect()
        });
        let mut all: Vec<(usize, f64)> = Vec::new();
        let mut failure = None;
        for (times, err) in results {
            all.extend(times);
            failure = failure.or(err);
        }
        all.sort_by_key(|(i, _)| *i);
        (all.into_iter().map(|(_, ms)| ms).collect(), failure)
    };
    let elapsed = start.elapsed();
    let result = BenchResult::finish(
        config.mode,
        config.n,
        config.batch,
        times,
        elapsed,
        failure.is_none(),
    );
    match failure {
        None => Ok(result),
        Some(cause) => Err(BenchError::Aborted {
            partial: result,
            expected,
            cause: Box::new(cause),
        }),
    }
}
