//! Append-only JSON Lines file.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// When appended lines are forced to stable storage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FsyncPolicy {
    /// `fdatasync` after every append call (one call per request).
    #[default]
    Always,
    /// Leave flushing to the OS.
    Never,
}

impl FromStr for FsyncPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "always" => Ok(Self::Always),
            "never" => Ok(Self::Never),
            other => Err(format!(
                "unknown fsync policy {other:?} (expected always or never)"
            )),
        }
    }
}

#[derive(Debug)]
pub struct Journal {
    file: File,
    fsync: FsyncPolicy,
}

impl Journal {
    /// Opens (creating if needed) and returns the complete lines already in
    /// the file. A trailing fragment without a newline is a torn write from a
    /// crash and is truncated away.
    pub fn open(path: &Path, fsync: FsyncPolicy) -> io::Result<(Self, Vec<String>)> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let bytes = match fs::read(path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e),
        };
        let intact = bytes.iter().rposition(|b| *b == b'\n').map_or(0, |i| i + 1);
        let text = std::str::from_utf8(&bytes[..intact])
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        let lines = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(str::to_string)
            .collect();

        let file = OpenOptions::new().create(true).append(true).open(path)?;
        if intact < bytes.len() {
            tracing::warn!(path = %path.display(), dropped = bytes.len() - intact, "truncating torn journal tail");
            file.set_len(intact as u64)?;
        }
        Ok((Self { file, fsync }, lines))
    }

    /// Writes all lines with a single `write` call, then syncs per policy.
    pub fn append<S: AsRef<str>>(&mut self, lines: &[S]) -> io::Result<()> {
        if lines.is_empty() {
            return Ok(());
        }
        let mut buf = String::with_capacity(lines.iter().map(|l| l.as_ref().len() + 1).sum());
        for line in lines {
            debug_assert!(!line.as_ref().contains('\n'));
            buf.push_str(line.as_ref());
            buf.push('\n');
        }
        self.file.write_all(buf.as_bytes())?;
        if self.fsync == FsyncPolicy::Always {
            self.file.sync_data()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn append_and_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p/graph.log");
        let (mut j, lines) = Journal::open(&path, FsyncPolicy::Always).unwrap();
        assert!(lines.is_empty());
        j.append(&["{\"a\":1}", "{\"b\":2}"]).unwrap();
        drop(j);
        let (_, lines) = Journal::open(&path, FsyncPolicy::Never).unwrap();
        assert_eq!(lines, ["{\"a\":1}", "{\"b\":2}"]);
    }

    #[test]
    fn torn_tail_is_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("graph.log");
        fs::write(&path, "{\"a\":1}\n{\"b\":").unwrap();
        let (mut j, lines) = Journal::open(&path, FsyncPolicy::Never).unwrap();
        assert_eq!(lines, ["{\"a\":1}"]);
        j.append(&["{\"c\":3}"]).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "{\"a\":1}\n{\"c\":3}\n");
    }

    #[test]
    fn policy_parses() {
        assert_eq!("never".parse::<FsyncPolicy>().unwrap(), FsyncPolicy::Never);
        assert!("sometimes".parse::<FsyncPolicy>().is_err());
    }
}
