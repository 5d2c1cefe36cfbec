//! The bundled scenario corpus.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::exterior::equality::SampleConfig;

use super::parser::parse;
use super::runner::{run, run_source, Report};

pub const CORPUS_ENV: &str = "GCX_CORPUS_DIR";

/// `$GCX_CORPUS_DIR`, or the corpus shipped with the crate.
pub fn corpus_dir() -> PathBuf {
    match std::env::var_os(CORPUS_ENV) {
        Some(d) => PathBuf::from(d),
        None => PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus")),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub file: String,
    pub path: PathBuf,
    pub title: String,
}

/// `*.gcx` files of `dir` sorted by name. A missing directory is an error;
/// an empty one gives an empty list.
pub fn list_corpus(dir: &Path) -> std::io::Result<Vec<Entry>> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir)? {
        let path = e?.path();
        if path.extension().and_then(|x| x.to_str()) != Some("gcx") {
            continue;
        }
        let file = path.file_name().unwrap().to_string_lossy().into_owned();
        let src = fs::read_to_string(&path)?;
        let title = match parse(&src) {
            Ok(s) => s.title.unwrap_or_else(|| "(untitled)".into()),
            Err(e) => format!("(parse error: {e})"),
        };
        out.push(Entry { file, path, title });
    }
    out.sort_by(|a, b| a.file.cmp(&b.file));
    Ok(out)
}

pub fn format_manifest(entries: &[Entry]) -> String {
    let width = entries.iter().map(|e| e.file.len()).max().unwrap_or(0);
    entries.iter().map(|e| format!("{:width$}  {}\n", e.file, e.title)).collect()
}

/// Run a single file.
pub fn run_file(path: &Path, cfg: &SampleConfig) -> Report {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    match fs::read_to_string(path) {
        Ok(src) => run_source(&src, &name, cfg),
        Err(e) => {
            let mut r = run(&Default::default(), &name, cfg);
            r.config_error = Some(format!("cannot read {}: {e}", path.display()));
            r
        }
    }
}

/// Run every entry in parallel; results come back in manifest order.
pub fn run_all(entries: &[Entry], cfg: &SampleConfig) -> Vec<(Entry, Report)> {
    entries.par_iter().map(|e| (e.clone(), run_file(&e.path, cfg))).collect()
}

/// Worst exit code over a batch.
pub fn batch_exit_code(results: &[(Entry, Report)]) -> i32 {
    results.iter().map(|(_, r)| r.exit_code()).max().unwrap_or(0)
}

pub fn summary(results: &[(Entry, Report)]) -> String {
    let width = results.iter().map(|(e, _)| e.file.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (e, r) in results {
        out.push_str(&format!(
            "{:width$}  {:5}  {} assertions, {} failures\n",
            e.file,
            r.status(),
            r.assertion_count(),
            r.failures()
        ));
    }
    let passed = results.iter().filter(|(_, r)| r.exit_code() == 0).count();
    out.push_str(&format!("{passed}/{} scenarios passed\n", results.len()));
    out
}
