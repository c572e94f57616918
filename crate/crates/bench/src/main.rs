use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use schemagraph_bench::report::{read_csv, summary, write_csv, Series};
use schemagraph_bench::{generate, run_bench, BenchConfig, Mode};

#[derive(Parser)]
#[command(
    name = "schemagraph-bench",
    version,
    about = "Fixture generator and upload benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write descriptors, node documents and edge documents to a directory.
    Fixture {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Upload a fresh fixture into a new project and time the edge uploads.
    Bench {
        #[arg(long, default_value = "http://127.0.0.1:8000")]
        url: String,
        /// Project to create; must not exist.
        #[arg(long)]
        project: String,
        #[arg(long, value_enum, default_value_t = Mode::Single)]
        mode: Mode,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Documents per request in bulk mode.
        #[arg(long, default_value_t = 1000)]
        batch: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Concurrent clients for the timed phase.
        #[arg(long, default_value_t = 1)]
        clients: usize,
        /// CSV output path (mode,n,request_index,ms).
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the summary table and speedups for one or more CSV files.
    Report {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

fn write(out: &PathBuf, result: &schemagraph_bench::BenchResult) -> anyhow::Result<()> {
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_csv(result, BufWriter::new(file))?;
    Ok(())
}

fn main() -> anyhow::Result<ExitCode> {
    match Cli::parse().command {
        Command::Fixture { n, seed, out } => {
            anyhow::ensure!(n >= 1, "--n must be at least 1");
            let fixture = generate(n, seed);
            for rel in fixture.write_to(&out)? {
                println!("{}", out.join(rel).display());
            }
        }
        Command::Bench {
            url,
            project,
            mode,
            n,
            batch,
            seed,
            clients,
            out,
        } => {
            anyhow::ensure!(n >= 1 && batch >= 1, "--n and --batch must be at least 1");
            let config = BenchConfig {
                url,
                project,
                mode,
                n,
                batch,
                seed,
                clients,
            };
            match run_bench(&config) {
                Ok(result) => {
                    write(&out, &result)?;
                    print!("{}", summary(&[Series::from(&result)]));
                }
                Err(e) => {
                    if let Some(partial) = e.partial() {
                        write(&out, partial)?;
                        eprintln!("partial results written to {}", out.display());
                    }
                    eprintln!("error: {e}");
                    return Ok(ExitCode::FAILURE);
                }
            }
        }
        Command::Report { files } => {
            let mut series = Vec::new();
            for path in files {
                let file =
                    File::open(&path).with_context(|| format!("opening {}", path.display()))?;
                series
                    .extend(read_csv(file).with_context(|| format!("reading {}", path.display()))?);
            }
            print!("{}", summary(&series));
        }
    }
    Ok(ExitCode::SUCCESS)
}
