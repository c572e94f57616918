//! CSV output (`mode,n,request_index,ms`) and the summary table.

use std::collections::BTreeMap;
use std::io::{self, Read, Write};

use crate::runner::{BenchResult, Mode};

pub const INCOMPLETE_MARKER: &str = "# INCOMPLETE";

/// Writes one row per timed request; a partial run gets a trailing marker line.
pub fn write_csv<W: Write>(result: &BenchResult, out: W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["mode", "n", "request_index", "ms"])?;
    for (i, ms) in result.wall_times_ms.iter().enumerate() {
        w.write_record([
            result.mode.as_str().to_string(),
            result.n_records.to_string(),
            i.to_string(),
            format!("{ms:.6}"),
        ])?;
    }
    let mut out = w.into_inner().map_err(|e| e.into_error())?;
    if !result.complete {
        writeln!(out, "{INCOMPLETE_MARKER}")?;
    }
    out.flush()
}

/// Timings read back from a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub mode: Mode,
    pub n: usize,
    pub ms: Vec<f64>,
    pub complete: bool,
}

impl Series {
    pub fn total_ms(&self) -> f64 {
        self.ms.iter().sum()
    }

    fn percentile(&self, p: f64) -> f64 {
        if self.ms.is_empty() {
            return 0.0;
        }
        let mut sorted = self.ms.clone();
        sorted.sort_by(f64::total_cmp);
        let rank = ((p / 100.0) * (sorted.len() - 1) as f64).round() as usize;
        sorted[rank]
    }
}

impl From<&BenchResult> for Series {
    fn from(r: &BenchResult) -> Self {
        Self {
            mode: r.mode,
            n: r.n_records,
            ms: r.wall_times_ms.clone(),
            complete: r.complete,
        }
    }
}

/// Parses a CSV written by [`write_csv`]; one file may hold several series.
pub fn read_csv<R: Read>(mut input: R) -> anyhow::Result<Vec<Series>> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let complete = !text.lines().any(|l| l.trim() == INCOMPLETE_MARKER);
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let mut series: BTreeMap<(Mode, usize), Vec<(usize, f64)>> = BTreeMap::new();
    for row in reader.records() {
        let row = row?;
        let field = |i: usize| {
            row.get(i)
                .ok_or_else(|| anyhow::anyhow!("short row {row:?}"))
        };
        let mode: Mode = field(0)?.parse().map_err(anyhow::Error::msg)?;
        let n: usize = field(1)?.parse()?;
        let index: usize = field(2)?.parse()?;
        let ms: f64 = field(3)?.parse()?;
        series.entry((mode, n)).or_default().push((index, ms));
    }
    Ok(series
        .into_iter()
        .map(|((mode, n), mut rows)| {
            rows.sort_by_key(|(i, _)| *i);
            Series {
                mode,
                n,
                ms: rows.into_iter().map(|(_, ms)| ms).collect(),
                complete,
            }
        })
        .collect())
}

/// Bulk speedup per `n` for which both modes are present.
pub fn speedups(series: &[Series]) -> BTreeMap<usize, f64> {
    let mut totals: BTreeMap<(usize, Mode), f64> = BTreeMap::new();
    for s in series {
        *totals.entry((s.n, s.mode)).or_default() += s.total_ms();
    }
    let mut out = BTreeMap::new();
    for (&(n, mode), &single) in &totals {
        if mode == Mode::Single {
            if let Some(&bulk) = totals.get(&(n, Mode::Bulk)) {
                if bulk > 0.0 {
                    out.insert(n, single / bulk);
                }
            }
        }
    }
    out
}

/// Human-readable table plus speedup lines.
pub fn summary(series: &[Series]) -> String {
    let mut out = format!(
        "{:<7} {:>8} {:>9} {:>12} {:>10} {:>10} {:>10} {:>12}\n",
        "mode", "n", "requests", "total_ms", "mean_ms", "p50_ms", "p95_ms", "docs/s"
    );
    for s in series {
        let total = s.total_ms();
        let mean = if s.ms.is_empty() {
            0.0
        } else {
            total / s.ms.len() as f64
        };
        let rate = if total > 0.0 {
            s.n as f64 / (total / 1e3)
        } else {
            0.0
        };
        out.push_str(&format!(
            "{:<7} {:>8} {:>9} {:>12.3} {:>10.3} {:>10.3} {:>10.3} {:>12.1}{}\n",
            s.mode.as_str(),
            s.n,
            s.ms.len(),
            total,
            mean,
            s.percentile(50.0),
            s.percentile(95.0),
            rate,
            if s.complete { "" } else { "  (incomplete)" }
        ));
    }
    for (n, x) in speedups(series) {
        out.push_str(&format!("speedup bulk vs single, n={n}: {x:.1}x\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(mode: Mode, times: &[f64], complete: bool) -> BenchResult {
        BenchResult {
            mode,
            n_records: 10,
            batch: 5,
            wall_times_ms: times.to_vec(),
            total_ms: times.iter().sum(),
            throughput_rps: 0.0,
            complete,
        }
    }

    #[test]
    fn round_trip_and_speedup() {
        let mut buf = Vec::new();
        write_csv(&result(Mode::Single, &[1.0; 10], true), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 11);
        assert!(text.starts_with("mode,n,request_index,ms\nsingle,10,0,1.000000\n"));
        let mut bulk = Vec::new();
        write_csv(&result(Mode::Bulk, &[0.5, 0.5], true), &mut bulk).unwrap();

        let mut series = read_csv(buf.as_slice()).unwrap();
        series.extend(read_csv(bulk.as_slice()).unwrap());
        assert_eq!(series[0].ms.len(), 10);
        assert_eq!(speedups(&series)[&10], 10.0);
        assert!(summary(&series).contains("speedup bulk vs single, n=10: 10.0x"));
    }

    #[test]
    fn incomplete_runs_are_flagged() {
        let mut buf = Vec::new();
        write_csv(&result(Mode::Single, &[1.0, 2.0], false), &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.ends_with("# INCOMPLETE\n"));
        let series = read_csv(buf.as_slice()).unwrap();
        assert!(!series[0].complete);
        assert!(summary(&series).contains("(incomplete)"));
    }
}
