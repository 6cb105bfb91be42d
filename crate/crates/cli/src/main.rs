//! `picmonoid`: command-line front end to the library, one subcommand group
//! per module.

mod commands;
mod input;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use picmonoid::Error;
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "picmonoid", version, about = "Arithmetic divisors, adeles, Picard classes, frames, covers and the Weil explicit formula")]
struct Cli {
    /// Print a JSON result document instead of text
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Arithmetic divisors `{p:n, ...; default:0|inf}`
    #[command(subcommand)]
    Divisor(DivisorCmd),
    /// Rational adeles (JSON, or @file)
    #[command(subcommand)]
    Adele(AdeleCmd),
    /// Picard classes (JSON, or `D@lambda`)
    #[command(subcommand)]
    Pic(PicCmd),
    /// Framed divisors and their roots (JSON, or @file)
    #[command(subcommand)]
    Frame(FrameCmd),
    /// Abelian covers `(Z/m)^× / kernel`
    #[command(subcommand)]
    Cover(CoverCmd),
    /// Numerical explicit formula
    #[command(subcommand)]
    Weil(WeilCmd),
}

#[derive(Subcommand, Debug)]
pub enum DivisorCmd {
    /// Sum of two divisors
    Add { a: String, b: String },
    /// Whether `a ~ b`, with the witness `q` such that `b + div(q) = a`
    Equiv { a: String, b: String },
    /// Normal form `Θ(S) + div(q)`
    Normalize { d: String },
    /// Membership of `x` in `L(D)`, or the generator of `L(D)` when `--x` is absent
    Sections {
        d: String,
        #[arg(long)]
        x: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
pub enum AdeleCmd {
    Mul { a: String, b: String },
    /// The divisor of the finite part
    Todivisor { a: String },
    /// The class in `Q^× \ A / Ẑ^×`
    Xqclass { a: String },
    /// `ψ(a_f x)` in `Q/Z`
    Pair {
        a: String,
        #[arg(long)]
        x: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum PicCmd {
    Product { a: String, b: String },
    Equal { a: String, b: String },
    /// Closed-form value spectrum sample up to `--bound`
    Spectrum {
        class: String,
        #[arg(long)]
        bound: String,
        /// Per-prime caps `p:k,...`
        #[arg(long, conflicts_with = "cap")]
        caps: Option<String>,
        /// One cap for every prime of the locus
        #[arg(long)]
        cap: Option<u32>,
        /// List the elements by brute-force enumeration as well
        #[arg(long)]
        list: bool,
    },
    /// Sections `x ∈ L(D)` with `λ|x| ≤ 1`
    Unitball {
        d: String,
        #[arg(long)]
        lambda: String,
    },
    /// Projection to the Jacobian
    Jac { class: String },
    /// Image of a prime set in the Jacobian
    Theta {
        #[arg(long, default_value = "")]
        primes: String,
        /// Take the complement of `--primes`
        #[arg(long)]
        cofinite: bool,
    },
}

#[derive(Subcommand, Debug)]
pub enum FrameCmd {
    Tensor { f1: String, f2: String },
    /// The root at level `n` evaluated at `x`
    Root {
        frame: String,
        #[arg(long)]
        n: String,
        #[arg(long)]
        x: String,
    },
    /// Root of the tensor at `x y` against the product of roots
    Dualcheck {
        f1: String,
        f2: String,
        #[arg(long)]
        n: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Torsion of the dual group, and the order of `x` at `--prime`
    Torsion {
        frame: String,
        #[arg(long, requires = "x")]
        prime: Option<String>,
        #[arg(long, requires = "prime")]
        x: Option<String>,
    },
}

#[derive(Args, Debug)]
pub struct CoverArgs {
    #[arg(long, required_unless_present = "quadratic")]
    modulus: Option<u64>,
    /// Kernel generators, comma separated
    #[arg(long, default_value = "")]
    kernel: String,
    /// The cover of `Q(√d)` instead of `--modulus/--kernel`
    #[arg(long, conflicts_with_all = ["modulus", "kernel"], allow_hyphen_values = true)]
    quadratic: Option<i64>,
}

#[derive(Subcommand, Debug)]
pub enum CoverCmd {
    Build(CoverArgs),
    Frobenius {
        #[command(flatten)]
        cover: CoverArgs,
        #[arg(long)]
        prime: String,
    },
    /// TSV `p, frobenius, components, degree` for each prime
    Split {
        #[command(flatten)]
        cover: CoverArgs,
        #[arg(long)]
        primes: String,
    },
    Ramified(CoverArgs),
    /// Normal form of a torus point, optionally after `--step k`
    Torus {
        point: String,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        step: i64,
    },
}

#[derive(Subcommand, Debug)]
pub enum WeilCmd {
    /// Spectral side against geometric side
    Balance {
        #[arg(long)]
        tf: String,
        /// Zero table; defaults to $PICMONOID_ZEROS, then the bundled table
        #[arg(long)]
        zeros: Option<String>,
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Also write `N residual tail_bound` rows for N = 1..=n
        #[arg(long)]
        curve: Option<String>,
        #[arg(long)]
        sequential: bool,
    },
    /// Local term at one place
    Localterm {
        #[arg(long)]
        tf: String,
        #[arg(long)]
        place: String,
    },
    /// Certify each ordinate by a sign change of Hardy's Z
    Zerosverify {
        #[arg(long)]
        zeros: Option<String>,
        #[arg(long, default_value_t = 1e-8)]
        delta: f64,
    },
    /// Right side of the semilocal trace formula
    Semilocal {
        #[arg(long)]
        tf: String,
        /// Places, comma separated, e.g. `inf,2,3`
        #[arg(long)]
        places: String,
        #[arg(long)]
        lambda: f64,
    },
}

/// What a command produced: the JSON payload, its text rendering and any
/// diagnostics.
pub struct Outcome {
    pub payload: serde_json::Value,
    pub text: String,
    pub diagnostics: Vec<String>,
}

#[derive(Serialize)]
struct CommandResult<'a> {
    status: &'static str,
    payload: &'a serde_json::Value,
    diagnostics: &'a [String],
}

/// Exit status per error class: 3 for bad input, 5 for numerical failures,
/// 4 for every other domain error. Usage errors exit with 2.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::InvalidArgument(_) | Error::NonPrime(_) | Error::PrimeTooLarge(_) => 3,
        Error::QuadratureFailure { .. } | Error::InsufficientZeros { .. } | Error::InsufficientPrecision { .. } => 5,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Divisor(c) => commands::divisor(c),
        Command::Adele(c) => commands::adele(c),
        Command::Pic(c) => commands::pic(c),
        Command::Frame(c) => commands::frame(c),
        Command::Cover(c) => commands::cover(c),
        Command::Weil(c) => commands::weil(c),
    };
    match result {
        Ok(out) => {
            if cli.json {
                let doc = CommandResult { status: "ok", payload: &out.payload, diagnostics: &out.diagnostics };
                println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
            } else {
                print!("{}", out.text);
                if !out.text.ends_with('\n') {
                    println!();
                }
                for d in &out.diagnostics {
                    eprintln!("note: {d}");
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            if cli.json {
                let payload = serde_json::json!({ "code": e.code(), "message": e.to_string() });
                let doc = CommandResult { status: "error", payload: &payload, diagnostics: &[] };
                println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
            } else {
                eprintln!("error [{}]: {e}", e.code());
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
