//! Batch front end for `mpwb`: a [`JobSpec`] names a command, its JSON input
//! and the global options; [`run`] produces the output document and the exit
//! status (0 success, 1 failed selftest or internal error, 2 domain error,
//! 3 input or schema error).

use std::fmt;
use std::io::Read;
use std::path::PathBuf;

use serde_json::{Map, Value};

mod commands;

pub use commands::Table;

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_TRUNCATION: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Index,
    Compose,
    Cocycle,
    Lift,
    BargmannOp,
    KernelTrace,
    Trace,
    Lefschetz,
    SphereModel { theta: f64, k_max: u32 },
    Selftest { seed: u64, cases: usize },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Index => "index",
            Command::Compose => "compose",
            Command::Cocycle => "cocycle",
            Command::Lift => "lift",
            Command::BargmannOp => "bargmann-op",
            Command::KernelTrace => "kernel-trace",
            Command::Trace => "trace",
            Command::Lefschetz => "lefschetz",
            Command::SphereModel { .. } => "sphere-model",
            Command::Selftest { .. } => "selftest",
        }
    }

    fn needs_input(&self) -> bool {
        !matches!(self, Command::SphereModel { .. } | Command::Selftest { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Input {
    None,
    Stdin,
    Path(PathBuf),
    Inline(String),
}

impl Input {
    /// `-` is stdin, text starting with `{` or `[` is inline JSON, anything else a path.
    pub fn parse(arg: &str) -> Input {
        let t = arg.trim_start();
        if arg == "-" {
            Input::Stdin
        } else if t.starts_with('{') || t.starts_with('[') {
            Input::Inline(arg.to_string())
        } else {
            Input::Path(PathBuf::from(arg))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub tolerance: f64,
    pub truncation: Option<u32>,
    pub path_steps: Option<usize>,
    pub p: Option<u32>,
    pub format: Format,
}

impl Default for Options {
    fn default() -> Self {
        Options { tolerance: DEFAULT_TOLERANCE, truncation: None, path_steps: None, p: None, format: Format::Json }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub command: Command,
    pub input: Input,
    pub options: Options,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub status: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Schema(String),
    Domain(String),
    Internal(String),
}

impl CliError {
    pub fn status(&self) -> i32 {
        match self {
            CliError::Schema(_) => 3,
            CliError::Domain(_) => 2,
            CliError::Internal(_) => 1,
        }
    }

    /// Names the array position of a failing job, unless the message already does.
    fn at(self, index: usize) -> CliError {
        let tag = format!("$[{index}]");
        let wrap = |m: String| if m.contains(&tag) { m } else { format!("{tag}: {m}") };
        match self {
            CliError::Schema(m) => CliError::Schema(wrap(m)),
            CliError::Domain(m) => CliError::Domain(wrap(m)),
            CliError::Internal(m) => CliError::Internal(wrap(m)),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Schema(m) => write!(f, "input error: {m}"),
            CliError::Domain(m) => write!(f, "domain error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<mpwb_core::Error> for CliError {
    fn from(e: mpwb_core::Error) -> Self {
        use mpwb_core::Error as E;
        match e {
            E::InvalidArgument(_) | E::DimensionMismatch { .. } => CliError::Schema(e.to_string()),
            E::Internal(_) => CliError::Internal(e.to_string()),
            _ => CliError::Domain(e.to_string()),
        }
    }
}

/// One result: the JSON body and, for sweeps, a scalar table.
pub struct Doc {
    pub body: Map<String, Value>,
    pub table: Option<Table>,
}

fn read_input(input: &Input) -> Result<Value, CliError> {
    let text = match input {
        Input::None => return Err(CliError::Schema("this command needs an input document".into())),
        Input::Inline(s) => s.clone(),
        Input::Path(p) => std::fs::read_to_string(p)
            .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", p.display())))?,
        Input::Stdin => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::Schema(format!("cannot read stdin: {e}")))?;
            s
        }
    };
    serde_json::from_str(&text).map_err(|e| CliError::Schema(format!("$: invalid JSON: {e}")))
}

fn execute(job: &JobSpec) -> Result<(Vec<Doc>, bool), CliError> {
    let opts = &job.options;
    if !(opts.tolerance > 0.0 && opts.tolerance.is_finite()) {
        return Err(CliError::Schema(format!("tolerance must be positive, got {}", opts.tolerance)));
    }
    if opts.p == Some(0) {
        return Err(CliError::Schema("p must be positive".into()));
    }
    if let Some(s) = opts.path_steps {
        if s == 0 {
            return Err(CliError::Schema("path-steps must be positive".into()));
        }
    }
    if !job.command.needs_input() {
        let doc = commands::run_standalone(&job.command, opts)?;
        return Ok((vec![doc], false));
    }
    let input = read_input(&job.input)?;
    match &input {
        Value::Array(items) => {
            let docs = items
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    commands::run_one(&job.command, v, &format!("$[{i}]"), opts).map_err(|e| e.at(i))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Ok((docs, true))
        }
        v => Ok((vec![commands::run_one(&job.command, v, "$", opts)?], false)),
    }
}

fn render(job: &JobSpec, docs: Vec<Doc>, array: bool) -> Result<String, CliError> {
    match job.options.format {
        Format::Json => {
            let values: Vec<Value> = docs.into_iter().map(|d| mpwb_core::json::tagged(d.body)).collect();
            let v = if array { Value::Array(values) } else { values.into_iter().next().expect("one document") };
            let mut s = serde_json::to_string_pretty(&v).map_err(|e| CliError::Internal(e.to_string()))?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut tables = Vec::with_capacity(docs.len());
            for d in docs {
                tables.push(d.table.ok_or_else(|| {
                    CliError::Schema(format!(
                        "csv output is only available for sweeps (sphere-model, trace or lefschetz with k_max); use --format json for {}",
                        job.command.name()
                    ))
                })?);
            }
            Ok(Table::render_all(&tables, array))
        }
    }
}

/// Runs one job; never panics on bad input.
pub fn run(job: &JobSpec) -> Output {
    let result = execute(job).and_then(|(docs, array)| {
        let failed = docs.iter().any(|d| d.body.get("passed") == Some(&Value::Bool(false)));
        render(job, docs, array).map(|s| (s, failed))
    });
    match result {
        Ok((stdout, failed)) => Output {
            status: i32::from(failed),
            stdout,
            stderr: if failed { "mpwb: selftest failed\n".into() } else { String::new() },
        },
        Err(e) => Output { status: e.status(), stdout: String::new(), stderr: format!("mpwb: {e}\n") },
    }
}
