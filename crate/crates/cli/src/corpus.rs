//! Program corpus: `*.wl` sources with optional `<stem>.json` sidecars
//! giving the analysis configuration each program is meant to be run with.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use qex_core::classical::InputDomain;
use qex_core::lang::{parse, Program};
use serde::Deserialize;

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Sidecar {
    #[serde(default)]
    pub width: Option<u32>,
    #[serde(default)]
    pub unroll: Option<usize>,
    #[serde(default)]
    pub var: Option<String>,
    #[serde(default)]
    pub domain: Option<serde_json::Value>,
    #[serde(default)]
    pub tags: Vec<String>,
}

impl Sidecar {
    pub fn read_for(source: &Path) -> Result<Option<Sidecar>, String> {
        let path = source.with_extension("json");
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map(Some).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn input_domain(&self) -> Result<InputDomain, String> {
        match &self.domain {
            None => Ok(InputDomain::full()),
            Some(v) => InputDomain::from_json(&v.to_string()).map_err(|e| e.to_string()),
        }
    }

    pub fn has_tag(&self, tag: &str) -> bool {
        self.tags.iter().any(|t| t == tag)
    }
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub source: String,
    pub program: Program,
    pub sidecar: Sidecar,
}

impl CorpusEntry {
    pub fn name(&self) -> &str {
        &self.program.name
    }

    pub fn width(&self) -> u32 {
        self.sidecar.width.unwrap_or(3)
    }

    pub fn unroll(&self) -> usize {
        self.sidecar.unroll.unwrap_or(8)
    }

    pub fn var(&self) -> &str {
        self.sidecar.var.as_deref().unwrap_or("return")
    }

    pub fn domain(&self) -> InputDomain {
        self.sidecar.input_domain().expect("checked at load time")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusError {
    /// `(file, message)` for every file that failed to load.
    pub failures: Vec<(String, String)>,
}

impl fmt::Display for CorpusError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (file, msg)) in self.failures.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{file}: {msg}")?;
        }
        Ok(())
    }
}

impl std::error::Error for CorpusError {}

/// Loads every `.wl` file of `dir` in file-name order.
pub fn load_corpus(dir: &Path) -> Result<Vec<CorpusEntry>, CorpusError> {
    let io = |e: std::io::Error| CorpusError { failures: vec![(dir.display().to_string(), e.to_string())] };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "wl"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    let mut failures = Vec::new();
    let mut names = BTreeSet::new();
    for path in paths {
        let file = path.display().to_string();
        match load_one(&path) {
            Ok(e) => {
                if !names.insert(e.program.name.clone()) {
                    failures.push((file, format!("duplicate program name `{}`", e.program.name)));
                } else {
                    out.push(e);
                }
            }
            Err(msg) => failures.push((file, msg)),
        }
    }
    if failures.is_empty() {
        Ok(out)
    } else {
        Err(CorpusError { failures })
    }
}

pub fn load_one(path: &Path) -> Result<CorpusEntry, String> {
    let source = fs::read_to_string(path).map_err(|e| e.to_string())?;
    let program = parse(&source).map_err(|e| e.to_string())?;
    let sidecar = Sidecar::read_for(path)?.unwrap_or_default();
    sidecar.input_domain()?;
    Ok(CorpusEntry { path: path.to_path_buf(), source, program, sidecar })
}
