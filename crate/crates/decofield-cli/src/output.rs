//! Artifact writing: CSV bodies with full decimal precision and LF line
//! endings, a JSON sidecar with enough metadata to re-run the job, and
//! atomic placement (write to a temp name, then rename). On failure every
//! partial output of the run is removed.

use anyhow::{Context, Result};
use std::fs;
use std::path::{Path, PathBuf};

/// 17 significant decimal digits: enough to round-trip any f64 exactly.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Collects files written during one run; unless `commit` is called, they
/// are deleted on drop.
pub struct RunOutputs {
    written: Vec<PathBuf>,
    committed: bool,
}

impl RunOutputs {
    pub fn new() -> Self {
        Self {
            written: Vec::new(),
            committed: false,
        }
    }

    /// Atomically place `content` at `path` (same-directory temp + rename).
    pub fn write(&mut self, path: &Path, content: &str) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)
                .with_context(|| format!("cannot create {}", parent.display()))?;
        }
        let tmp = path.with_extension("tmp-partial");
        fs::write(&tmp, content).with_context(|| format!("cannot write {}", tmp.display()))?;
        fs::rename(&tmp, path)
            .with_context(|| format!("cannot move output into place at {}", path.display()))?;
        self.written.push(path.to_path_buf());
        Ok(())
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Default for RunOutputs {
    fn default() -> Self {
        Self::new()
    }
}

impl Drop for RunOutputs {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}

/// CSV body: header row plus rows of preformatted cells, LF endings.
pub fn csv_body(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// CSV body with blank-line-separated blocks (one block per parameter set).
pub fn csv_body_blocks(header: &[&str], blocks: &[Vec<Vec<String>>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, rows) in blocks.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        for row in rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
    }
    out
}

/// Sidecar JSON: full provenance for exact re-runs. The timestamp lives
/// only here, never in the CSV body.
pub fn sidecar_json(
    command: &str,
    config: &impl serde::Serialize,
    threads: usize,
    effective_seed: Option<u64>,
    extra: serde_json::Value,
    outputs: &[&Path],
) -> Result<String> {
    let created_unix_ms = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    let doc = serde_json::json!({
        "command": command,
        "config": config,
        "threads": threads,
        "effective_seed": effective_seed,
        "code_version": env!("CARGO_PKG_VERSION"),
        "created_unix_ms": created_unix_ms,
        "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "extra": extra,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_round_trips() {
        for &x in &[0.0, 1.0, -0.3333333333333333, 1e-300, 6.02e23] {
            let s = fmt17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(fmt17(f64::INFINITY), "inf");
    }

    #[test]
    fn uncommitted_outputs_are_removed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        {
            let mut out = RunOutputs::new();
            out.write(&path, "a,b\n").unwrap();
            assert!(path.exists());
        }
        assert!(!path.exists());
    }
}
