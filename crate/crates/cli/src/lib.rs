//! `qex` command line: argument parsing, configuration resolution and the
//! subcommands, each producing one JSON document.

pub mod corpus;
mod render;

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qex_core::amplify::{search, SearchOptions, TargetSpec};
use qex_core::circuit::{depth, gate_count, to_json_value, to_qasm};
use qex_core::classical::{enumerate, interval_analyze, EnumOptions, InputDomain, DEFAULT_CAP};
use qex_core::hybrid::{bound_n, plan, run_hybrid, HybridPlan, PlanPrefs, PrefixBackend};
use qex_core::lang::{unroll, validate, Backend, Program};
use qex_core::report::{attribution, compare, estimate, scale_report, Measured};
use qex_core::synth::{synthesize, ArithBackend, OptFlags, SynthOptions, SynthResult};
use qex_core::Error;

use corpus::{load_corpus, load_one, CorpusEntry};

#[derive(Debug, Parser)]
#[command(name = "qex", version, about = "Superposed execution of WHILE programs")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Quantum,
    Classical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArithArg {
    Ripple,
    Fourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrefixArg {
    Enumerate,
    Interval,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Program source (`.wl`); a sidecar `<stem>.json` supplies defaults.
    pub file: PathBuf,
    /// Value bits per variable.
    #[arg(short = 'n', long = "width")]
    pub width: Option<u32>,
    /// Loop iterations to compile.
    #[arg(short = 'k', long)]
    pub unroll: Option<usize>,
    /// Comma-separated passes: uncompute, share, parallel.
    #[arg(long)]
    pub opt: Option<String>,
    /// JSON file of input domains.
    #[arg(long)]
    pub domain: Option<PathBuf>,
    /// Largest simulated support / enumerated input count.
    #[arg(long, env = "QEX_CAP")]
    pub cap: Option<u64>,
    #[arg(long, value_enum, default_value = "ripple")]
    pub arith: ArithArg,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Parse and validate a program.
    Check {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "quantum")]
        backend: BackendArg,
        #[arg(short = 'n', long = "width")]
        width: Option<u32>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Compile to a circuit and report its size.
    Synth {
        #[command(flatten)]
        common: Common,
        /// Print OpenQASM-style text instead of the summary.
        #[arg(long)]
        qasm: bool,
        /// Include the full circuit in the JSON summary.
        #[arg(long)]
        circuit: bool,
    },
    /// Simulate the circuit and sample a variable.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        var: Option<String>,
        #[arg(long, default_value_t = 1000)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact value distribution of a variable, checked against the oracle.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        var: Option<String>,
    },
    /// Fixed-point amplitude amplification of a target condition.
    Search {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: String,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 1000)]
        shots: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Lower bound on the initial success probability (default 1/N).
        #[arg(long)]
        p0: Option<f64>,
    },
    /// Resource model at width `n`, scaled from the synthesized circuit.
    Estimate {
        file: PathBuf,
        /// Model width.
        #[arg(short = 'n', long = "width", default_value_t = 64)]
        width: u32,
        /// Width the circuit is synthesized at.
        #[arg(long)]
        from: Option<u32>,
        #[arg(short = 'k', long)]
        unroll: Option<usize>,
        #[arg(long)]
        opt: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Classical prefix feeding the quantum suffix.
    Hybrid {
        #[command(flatten)]
        common: Common,
        /// Top-level statement index the suffix starts at.
        #[arg(long)]
        split: Option<usize>,
        #[arg(long, value_enum)]
        prefix: Option<PrefixArg>,
        #[arg(long)]
        target: Option<String>,
        #[arg(long)]
        delta: Option<f64>,
        /// JSON plan file; overrides the other plan flags.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Classical enumeration of a variable's values.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        var: Option<String>,
        /// Enumerate the program unrolled to `k` iterations.
        #[arg(long)]
        bounded: bool,
    },
}

/// Failure of a subcommand, reported with exit code 2.
#[derive(Debug)]
pub struct Failure(pub String, pub Option<Value>);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let detail = match &e {
            Error::Invalid(v) => Some(json!({"violations": v.iter().map(|x| x.to_string()).collect::<Vec<_>>()})),
            _ => None,
        };
        Failure(e.to_string(), detail)
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure(e, None)
    }
}

type Out = Result<(Value, Format), Failure>;

/// Parses `args` and runs the command. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let res = match cli.cmd {
        Cmd::Check { file, backend, width, format } => check(&file, backend, width, format),
        Cmd::Synth { common, qasm, circuit } => synth_cmd(&common, qasm, circuit, out),
        Cmd::Run { common, var, shots, seed } => run_cmd(&common, var, shots, seed),
        Cmd::Analyze { common, var } => analyze_cmd(&common, var),
        Cmd::Search { common, target, delta, shots, seed, p0 } => {
            search_cmd(&common, &target, delta, shots, seed, p0)
        }
        Cmd::Estimate { file, width, from, unroll, opt, format } => {
            estimate_cmd(&file, width, from, unroll, opt, format)
        }
        Cmd::Hybrid { common, split, prefix, target, delta, plan } => {
            hybrid_cmd(&common, split, prefix, target, delta, plan)
        }
        Cmd::Oracle { common, var, bounded } => oracle_cmd(&common, var, bounded),
    };
    match res {
        Ok((Value::Null, _)) => 0,
        Ok((v, fmt)) => {
            let _ = writeln!(out, "{}", render::render(&v, fmt));
            0
        }
        Err(Failure(msg, detail)) => {
            let _ = writeln!(err, "error: {msg}");
            if let Some(d) = detail {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&d).unwrap_or_default());
            }
            2
        }
    }
}

/// Everything a command needs about one program.
pub struct Config {
    pub entry: CorpusEntry,
    pub dom: InputDomain,
    pub opts: SynthOptions,
    pub cap: u64,
}

impl Config {
    pub fn resolve(c: &Common) -> Result<Self, Failure> {
        let entry = load_one(&c.file).map_err(|e| format!("{}: {e}", c.file.display()))?;
        let dom = match &c.domain {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
                InputDomain::from_json(&text)?
            }
            None => entry.domain(),
        };
        let flags = match &c.opt {
            Some(s) => OptFlags::parse(s)?,
            None => OptFlags::default(),
        };
        let backend = match c.arith {
            ArithArg::Ripple => ArithBackend::Ripple,
            ArithArg::Fourier => ArithBackend::Fourier,
        };
        let opts = SynthOptions {
            m: c.width.unwrap_or(entry.width()),
            k: c.unroll.unwrap_or(entry.unroll()),
            flags,
            backend,
            ..SynthOptions::default()
        };
        Ok(Config { entry, dom, opts, cap: c.cap.unwrap_or(DEFAULT_CAP) })
    }

    fn var(&self, v: &Option<String>) -> String {
        v.clone().unwrap_or_else(|| self.entry.var().to_string())
    }

    fn synth(&self) -> Result<SynthResult, Failure> {
        Ok(synthesize(&self.entry.program, &self.dom, &self.opts)?)
    }

    fn support_cap(&self) -> usize {
        usize::try_from(self.cap).unwrap_or(usize::MAX)
    }
}

fn check(file: &Path, backend: BackendArg, width: Option<u32>, format: Format) -> Out {
    let e = load_one(file).map_err(|e| format!("{}: {e}", file.display()))?;
    let b = match backend {
        BackendArg::Quantum => Backend::Quantum,
        BackendArg::Classical => Backend::Classical,
    };
    let v = validate(&e.program, b, width.unwrap_or(e.width()));
    let doc = json!({
        "program": e.program.name,
        "backend": b,
        "violations": v.iter().map(|x| json!({
            "kind": format!("{:?}", x.kind), "line": x.line, "col": x.col, "message": x.message,
        })).collect::<Vec<_>>(),
    });
    if v.is_empty() {
        Ok((doc, format))
    } else {
        Err(Failure(format!("{} violation(s)", v.len()), Some(doc)))
    }
}

fn summary(r: &SynthResult) -> Value {
    json!({
        "program": r.program.name,
        "m": r.opts.m,
        "k": r.opts.k,
        "flags": r.opts.flags,
        "qubits": r.circuit.qubits,
        "gates": r.circuit.gates.len(),
        "depth": depth(&r.circuit),
        "gate_counts": gate_count(&r.circuit).by_kind,
        "by_source": attribution(&r.circuit),
        "layout": r.layout_json(),
        "diagnostics": r.diagnostics,
    })
}

fn synth_cmd(c: &Common, qasm: bool, circuit: bool, out: &mut dyn Write) -> Out {
    let cfg = Config::resolve(c)?;
    let r = cfg.synth()?;
    if qasm {
        let _ = write!(out, "{}", to_qasm(&r.circuit));
        return Ok((Value::Null, c.format));
    }
    let mut doc = summary(&r);
    if circuit {
        doc["circuit"] = to_json_value(&r.circuit);
    }
    Ok((doc, c.format))
}

fn run_cmd(c: &Common, var: Option<String>, shots: usize, seed: u64) -> Out {
    let cfg = Config::resolve(c)?;
    let var = cfg.var(&var);
    let r = cfg.synth()?;
    let st = r.simulate_capped(cfg.support_cap())?;
    let reg = r.register(&var)?.to_vec();
    let samples = st.sample(std::slice::from_ref(&reg), shots, seed);
    let samples: serde_json::Map<String, Value> =
        samples.into_iter().map(|(k, n)| (k[0].to_string(), json!(n))).collect();
    Ok((
        json!({
            "program": r.program.name,
            "var": var,
            "qubits": r.circuit.qubits,
            "support": st.support(),
            "norm": st.norm_sqr(),
            "distribution": st.marginal(&reg).to_json(Some(r.input_count())),
            "shots": shots,
            "seed": seed,
            "samples": samples,
        }),
        c.format,
    ))
}

/// Ground-truth values of `var`: exhaustive runs of the program itself.
fn ground_truth(p: &Program, dom: &InputDomain, m: u32, var: &str, cap: u64) -> Result<BTreeSet<u64>, Failure> {
    let e = enumerate(p, dom, m, &[var.to_string()], EnumOptions { cap, joint: false })?;
    Ok(e.values(var))
}

pub fn analyze_one(cfg: &Config, var: &str) -> Result<Value, Failure> {
    let r = cfg.synth()?;
    let st = r.simulate_capped(cfg.support_cap())?;
    let d = st.marginal(r.register(var)?);
    let values: BTreeSet<u64> = d.support().into_iter().collect();
    let gt = ground_truth(&r.program, &cfg.dom, cfg.opts.m, var, cfg.cap)?;
    let rep = compare(&values, &gt)?;
    Ok(json!({
        "program": r.program.name,
        "var": var,
        "m": cfg.opts.m,
        "k": cfg.opts.k,
        "total": r.input_count(),
        "distribution": d.to_json(Some(r.input_count())),
        "report": rep.to_json(),
    }))
}

fn analyze_cmd(c: &Common, var: Option<String>) -> Out {
    if c.file.is_dir() {
        let entries = load_corpus(&c.file).map_err(|e| e.to_string())?;
        let mut docs = Vec::new();
        for e in entries {
            if e.program.body.iter().any(|s| s.contains_pointer_stmt()) {
                continue;
            }
            let common = Common { file: e.path.clone(), ..c.clone() };
            let cfg = Config::resolve(&common)?;
            let v = cfg.var(&var);
            docs.push(analyze_one(&cfg, &v)?);
        }
        return Ok((Value::Array(docs), c.format));
    }
    let cfg = Config::resolve(c)?;
    let v = cfg.var(&var);
    Ok((analyze_one(&cfg, &v)?, c.format))
}

fn search_cmd(c: &Common, target: &str, delta: f64, shots: usize, seed: u64, p0: Option<f64>) -> Out {
    let cfg = Config::resolve(c)?;
    let t: TargetSpec = target.parse()?;
    let so = SearchOptions { delta, shots, seed, p0_bound: p0, cap: cfg.support_cap() };
    let rep = search(&cfg.entry.program, &cfg.dom, &cfg.opts, &t, &so)?;
    Ok((rep.to_json(), c.format))
}

fn estimate_cmd(
    file: &Path,
    n: u32,
    from: Option<u32>,
    unroll: Option<usize>,
    opt: Option<String>,
    format: Format,
) -> Out {
    let common = Common {
        file: file.to_path_buf(),
        width: from,
        unroll,
        opt,
        domain: None,
        cap: None,
        arith: ArithArg::Ripple,
        format,
    };
    let cfg = Config::resolve(&common)?;
    let r = cfg.synth()?;
    let measured = Measured::of(&r.circuit, cfg.opts.m as usize + 1);
    let at_n = estimate(&r.tally, n)?;
    let scale = scale_report(&r.tally, cfg.opts.m, n, Some(measured.clone()))?;
    Ok((
        json!({
            "program": r.program.name,
            "estimate": at_n.with_measured(measured).to_json(),
            "scaling": scale.to_json(),
        }),
        format,
    ))
}

fn hybrid_cmd(
    c: &Common,
    split: Option<usize>,
    prefix: Option<PrefixArg>,
    target: Option<String>,
    delta: Option<f64>,
    plan_file: Option<PathBuf>,
) -> Out {
    let cfg = Config::resolve(c)?;
    let p = &cfg.entry.program;
    let hp: HybridPlan = match plan_file {
        Some(f) => {
            let text = std::fs::read_to_string(&f).map_err(|e| format!("{}: {e}", f.display()))?;
            serde_json::from_str(&text).map_err(|e| format!("{}: {e}", f.display()))?
        }
        None => {
            let prefs = PlanPrefs {
                split,
                backend: prefix.map(|b| match b {
                    PrefixArg::Enumerate => PrefixBackend::Enumerate,
                    PrefixArg::Interval => PrefixBackend::Interval,
                }),
                cap: Some(cfg.cap),
                delta,
                target,
            };
            plan(p, &cfg.dom, cfg.opts.m, &prefs)?
        }
    };
    let rep = run_hybrid(p, &cfg.dom, &hp, &cfg.opts)?;
    let bn = bound_n(p, &cfg.dom, cfg.opts.m, hp.split)?;
    let pure = interval_analyze(p, &cfg.dom, cfg.opts.m)?;
    let pure_ret = pure.get("return").map(|i| json!([i.lo, i.hi]));
    let mut doc = rep.to_json();
    doc["program"] = json!(p.name);
    doc["split_line"] = json!(p.body.get(hp.split).map(|s| s.span.line));
    doc["bound_n"] = bn.to_json();
    doc["interval_return"] = json!(pure_ret);
    Ok((doc, c.format))
}

fn oracle_cmd(c: &Common, var: Option<String>, bounded: bool) -> Out {
    let cfg = Config::resolve(c)?;
    let var = cfg.var(&var);
    let p = if bounded { unroll(&cfg.entry.program, cfg.opts.k) } else { cfg.entry.program.clone() };
    let e = enumerate(&p, &cfg.dom, cfg.opts.m, std::slice::from_ref(&var), EnumOptions { cap: cfg.cap, joint: false })?;
    let counts = e.per_target.get(&var).cloned().unwrap_or_default();
    let dist: serde_json::Map<String, Value> = counts
        .iter()
        .map(|(v, n)| (v.to_string(), json!({"count": n, "num": n, "den": e.total})))
        .collect();
    Ok((
        json!({
            "program": p.name,
            "var": var,
            "bounded": bounded,
            "total": e.total,
            "distribution": dist,
            "values": e.values(&var),
        }),
        c.format,
    ))
}
