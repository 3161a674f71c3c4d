use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mpwb_cli::{run, Command, Format, Input, JobSpec, Options, DEFAULT_TOLERANCE};

/// Metaplectic workbench: indices, half-form cocycles, Bargmann operators and trace formulas.
#[derive(Parser)]
#[command(name = "mpwb", version)]
struct Cli {
    /// Residual tolerance for index computations.
    #[arg(long, global = true, env = "MPWB_TOLERANCE")]
    tolerance: Option<f64>,

    /// Fock-space truncation degree.
    #[arg(short = 'N', long, global = true)]
    truncation: Option<u32>,

    /// Base number of steps for branch tracking of zeta^(1/2).
    #[arg(long, global = true)]
    path_steps: Option<usize>,

    /// Order of the generalized metaplectic group.
    #[arg(long, global = true)]
    p: Option<u32>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Index m (or m_p with --p) of a metaplectic element {g, z, ref?}.
    Index { input: String },
    /// Composite of {"elements": [...]} or {"morphisms": [...]}, first applied first.
    Compose { input: String },
    /// zeta and its tracked square root on {"polarizations": [a, b, c, d?]}.
    Cocycle { input: String },
    /// Both lifts of {g, ref?} to Mp, or of {g, source, target} to half-form morphisms.
    Lift { input: String },
    /// Truncated matrix of U(g, psi) in the orthonormal Fock basis.
    BargmannOp { input: String },
    /// Closed-form kernel trace; with -N also the Abel-summed Fock trace.
    KernelTrace { input: String },
    /// Fixed-point trace formula on {"k" | "k_max", "data": [...]}.
    Trace { input: String },
    /// Holomorphic Lefschetz sum on {"k" | "k_max", "data": [...]}.
    Lefschetz { input: String },
    /// Rotation of the sphere: exact character against the trace formulas.
    SphereModel {
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 40)]
        k_max: u32,
    },
    /// Randomized run of the library invariants; exits 1 on any failure.
    Selftest {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 50)]
        cases: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let (command, input) = match cli.command {
        Cmd::Index { input } => (Command::Index, Input::parse(&input)),
        Cmd::Compose { input } => (Command::Compose, Input::parse(&input)),
        Cmd::Cocycle { input } => (Command::Cocycle, Input::parse(&input)),
        Cmd::Lift { input } => (Command::Lift, Input::parse(&input)),
        Cmd::BargmannOp { input } => (Command::BargmannOp, Input::parse(&input)),
        Cmd::KernelTrace { input } => (Command::KernelTrace, Input::parse(&input)),
        Cmd::Trace { input } => (Command::Trace, Input::parse(&input)),
        Cmd::Lefschetz { input } => (Command::Lefschetz, Input::parse(&input)),
        Cmd::SphereModel { theta, k_max } => (Command::SphereModel { theta, k_max }, Input::None),
        Cmd::Selftest { seed, cases } => (Command::Selftest { seed, cases }, Input::None),
    };
    let job = JobSpec {
        command,
        input,
        options: Options {
            tolerance: cli.tolerance.unwrap_or(DEFAULT_TOLERANCE),
            truncation: cli.truncation,
            path_steps: cli.path_steps,
            p: cli.p,
            format: cli.format,
        },
    };
    let out = run(&job);
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.status as u8)
}
