//! Artifact writing: CSV tables with a comment header and JSON documents
//! wrapped in a run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

pub const SCHEMA_VERSION: u32 = 1;

/// Parameters identifying a run. Everything except the wall time is
/// repeated as `#` comment lines at the top of each CSV.
pub struct Run {
    pub subcommand: &'static str,
    pub seed: Option<u64>,
    pub spec: Value,
    pub out_dir: PathBuf,
    started: Instant,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    schema_version: u32,
    subcommand: &'a str,
    seed: Option<u64>,
    spec: &'a Value,
    wall_time_seconds: f64,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    schema_version: u32,
    manifest: Manifest<'a>,
    result: &'a T,
}

impl Run {
    pub fn new(subcommand: &'static str, seed: Option<u64>, spec: Value, out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
        Ok(Run {
            subcommand,
            seed,
            spec,
            out_dir: out_dir.to_path_buf(),
            started: Instant::now(),
        })
    }

    fn header(&self) -> String {
        let mut h = String::new();
        h.push_str(&format!("# tool=dilute version={}\n", env!("CARGO_PKG_VERSION")));
        h.push_str(&format!("# schema_version={SCHEMA_VERSION}\n"));
        h.push_str(&format!("# subcommand={}\n", self.subcommand));
        match self.seed {
            Some(s) => h.push_str(&format!("# seed={s}\n")),
            None => h.push_str("# seed=none\n"),
        }
        h.push_str(&format!("# spec={}\n", self.spec));
        h
    }

    /// Writes `<subcommand>.csv` (or `<subcommand>_<suffix>.csv`).
    pub fn write_csv<R: Serialize>(&self, suffix: Option<&str>, rows: &[R]) -> Result<PathBuf> {
        let path = self.path(suffix, "csv");
        let mut w = csv::WriterBuilder::new().has_headers(true).from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        let body = w.into_inner().context("flushing csv")?;
        let mut bytes = self.header().into_bytes();
        bytes.extend(body);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    /// Writes `<subcommand>.json` holding the manifest and `result`.
    pub fn write_json<T: Serialize>(&self, result: &T) -> Result<PathBuf> {
        let path = self.path(None, "json");
        let doc = Document {
            schema_version: SCHEMA_VERSION,
            manifest: Manifest {
                tool: "dilute",
                version: env!("CARGO_PKG_VERSION"),
                schema_version: SCHEMA_VERSION,
                subcommand: self.subcommand,
                seed: self.seed,
                spec: &self.spec,
                wall_time_seconds: self.started.elapsed().as_secs_f64(),
            },
            result,
        };
        let text = serde_json::to_string_pretty(&doc)?;
        fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    fn path(&self, suffix: Option<&str>, ext: &str) -> PathBuf {
        let stem = match suffix {
            Some(s) => format!("{}_{s}", self.subcommand.replace('-', "_")),
            None => self.subcommand.replace('-', "_"),
        };
        self.out_dir.join(format!("{stem}.{ext}"))
    }
}
