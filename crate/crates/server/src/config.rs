use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::Parser;
use schemagraph_core::descriptor::KnownFunctions;
use schemagraph_core::project::StoreConfig;
use schemagraph_core::FsyncPolicy;
use serde::Deserialize;

pub const DEFAULT_LISTEN: &str = "127.0.0.1:8000";

/// Command line. Every flag can also come from the environment or from the
/// config file; precedence is flag, then environment, then file, then default.
#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "schemagraph-server",
    version,
    about = "Knowledge-graph ingestion service"
)]
pub struct Args {
    /// TOML file with any of: listen, data_dir, fsync, known_functions.
    #[arg(long, env = "SCHEMAGRAPH_CONFIG")]
    pub config: Option<PathBuf>,
    /// Socket address to bind [default: 127.0.0.1:8000].
    #[arg(long, env = "SCHEMAGRAPH_LISTEN")]
    pub listen: Option<SocketAddr>,
    /// Directory holding one sub-directory per project. Without it, nothing
    /// is persisted.
    #[arg(long, env = "SCHEMAGRAPH_DATA_DIR")]
    pub data_dir: Option<PathBuf>,
    /// When to fsync log appends: always or never [default: always].
    #[arg(long, env = "SCHEMAGRAPH_FSYNC")]
    pub fsync: Option<FsyncPolicy>,
    /// Comma-separated function names accepted in descriptor settings
    /// [default: unique,index].
    #[arg(long, env = "SCHEMAGRAPH_KNOWN_FUNCTIONS", value_delimiter = ',')]
    pub known_functions: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub listen: Option<SocketAddr>,
    pub data_dir: Option<PathBuf>,
    pub fsync: Option<FsyncPolicy>,
    pub known_functions: Option<Vec<String>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Effective settings.
#[derive(Debug, Clone)]
pub struct Config {
    pub listen: SocketAddr,
    pub store: StoreConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            listen: DEFAULT_LISTEN.parse().expect("valid default address"),
            store: StoreConfig::default(),
        }
    }
}

impl Config {
    pub fn resolve(args: Args) -> anyhow::Result<Self> {
        let file = match &args.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Ok(Self::merge(args, file))
    }

    pub fn merge(args: Args, file: FileConfig) -> Self {
        let defaults = Config::default();
        let known = args.known_functions.or(file.known_functions);
        Self {
            listen: args.listen.or(file.listen).unwrap_or(defaults.listen),
            store: StoreConfig {
                data_dir: args.data_dir.or(file.data_dir),
                fsync: args.fsync.or(file.fsync).unwrap_or_default(),
                known_functions: match known {
                    Some(names) => KnownFunctions::new(
                        names.iter().map(|s| s.trim()).filter(|s| !s.is_empty()),
                    ),
                    None => KnownFunctions::default(),
                },
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_defaults_fill_gaps() {
        let file: FileConfig = toml::from_str(
            r#"
            listen = "0.0.0.0:9000"
            data_dir = "/var/lib/graphs"
            fsync = "never"
            known_functions = ["unique"]
            "#,
        )
        .unwrap();
        let args = Args::try_parse_from([
            "x",
            "--listen",
            "127.0.0.1:1234",
            "--known-functions",
            "a, b",
        ])
        .unwrap();
        let c = Config::merge(args, file);
        assert_eq!(c.listen.to_string(), "127.0.0.1:1234");
        assert_eq!(
            c.store.data_dir.as_deref(),
            Some(Path::new("/var/lib/graphs"))
        );
        assert_eq!(c.store.fsync, FsyncPolicy::Never);
        assert_eq!(
            c.store.known_functions.iter().collect::<Vec<_>>(),
            ["a", "b"]
        );

        let c = Config::merge(Args::default(), FileConfig::default());
        assert_eq!(c.listen.to_string(), DEFAULT_LISTEN);
        assert_eq!(c.store.fsync, FsyncPolicy::Always);
        assert!(c.store.known_functions.contains("unique"));
        assert!(c.store.data_dir.is_none());
    }

    #[test]
    fn unknown_file_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("port = 1").is_err());
        assert!(toml::from_str::<FileConfig>("fsync = \"sometimes\"").is_err());
    }
}
