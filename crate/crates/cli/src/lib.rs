//! Command implementations behind the `preserver` binary.
//!
//! Every command returns an [`Outcome`] instead of printing, so tests can
//! drive them in-process. Exit codes:
//!
//! | command   | 0        | 1                  | 2            | 3                  | 4            |
//! |-----------|----------|--------------------|--------------|--------------------|--------------|
//! | decompose | success  | I/O or parse error | NotPreserver | NumericalBreakdown |              |
//! | check     | Yes      | usage or input     | No           | NumericalBreakdown | Inapplicable |
//! | gen       | success  | infeasible request |              |                    |              |
//! | fuzz      | no fails | I/O                | failures     |                    |              |

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use preserver::canonical::{build, decompose_seeded, verify_preserver_sampled, FailureKind};
use preserver::classify::{
    check_disjointness_preserver, check_kyfan_isometry, check_partial_isometry_preserver,
    check_schatten_isometry, check_triple_homomorphism, check_zero_triple_preserver,
    ClassifierVerdict, ClassifyError, Verdict,
};
use preserver::format::{
    canonical_to_json, failure_to_json, map_from_json, map_to_json, matrix_to_value,
    verdict_to_json,
};
use preserver::genfuzz::{
    canonical_with_q, fuzz_equivalences, perturb, random_canonical, random_disjoint_pair,
    random_partial_isometry, FuzzConfig, Seed,
};
use preserver::{Field, LinMap, Tolerances};
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;
pub const EXIT_BREAKDOWN: i32 = 3;
pub const EXIT_INAPPLICABLE: i32 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "preserver",
    version,
    about = "Analyze disjointness preserving maps between matrix spaces"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Recover U, V, Q1, Q2 for a map file, or refute it with a witness pair
    Decompose(DecomposeArgs),
    /// Classify a map file
    Check(CheckArgs),
    /// Generate random maps, disjoint pairs or partial isometries
    Gen(GenArgs),
    /// Run the randomized equivalence checks
    Fuzz(FuzzArgs),
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Map file, or `-` for standard input
    pub input: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Random disjoint pairs for the witness search and the final sampled check
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Class {
    Disjoint,
    ZeroTriple,
    TripleHom,
    Pisom,
    Schatten,
    Kyfan,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub class: Class,
    /// Schatten exponent
    #[arg(long)]
    pub p: Option<f64>,
    /// Ky Fan index on the codomain
    #[arg(long)]
    pub k: Option<usize>,
    /// Ky Fan index on the domain
    #[arg(long)]
    pub kprime: Option<usize>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Samples for the cross-check against the canonical form
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Canonical,
    DisjointPair,
    Pisom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Field {
        match f {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Codomain rows; defaults to the smallest that fits
    #[arg(long)]
    pub r: Option<usize>,
    /// Codomain columns; defaults to the smallest that fits
    #[arg(long)]
    pub s: Option<usize>,
    /// Number of Q1 entries, drawn log-uniformly from [0.1, 10]
    #[arg(long, default_value_t = 1)]
    pub q1: usize,
    /// Number of Q2 entries, drawn log-uniformly from [0.1, 10]
    #[arg(long, default_value_t = 0)]
    pub q2: usize,
    /// Explicit Q1 entries (comma separated); overrides --q1
    #[arg(long, value_delimiter = ',')]
    pub q1_values: Option<Vec<f64>>,
    /// Explicit Q2 entries (comma separated); overrides --q2
    #[arg(long, value_delimiter = ',')]
    pub q2_values: Option<Vec<f64>>,
    /// Rank of the generated partial isometry
    #[arg(long, default_value_t = 1)]
    pub rank: usize,
    #[arg(long, value_enum, default_value_t = FieldArg::Real)]
    pub field: FieldArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Add this much noise to one basis image after building the map
    #[arg(long)]
    pub perturb: Option<f64>,
}

#[derive(Debug, Args)]
pub struct FuzzArgs {
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 4)]
    pub max_dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Exit code plus the text destined for standard output and standard error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn out(code: i32, stdout: String) -> Self {
        Outcome {
            code,
            stdout: stdout + "\n",
            stderr: String::new(),
        }
    }

    fn err(code: i32, message: impl std::fmt::Display) -> Self {
        Outcome {
            code,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

pub fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Decompose(a) => cmd_decompose(&a),
        Command::Check(a) => cmd_check(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Fuzz(a) => cmd_fuzz(&a),
    }
}

fn read_map(path: &Path) -> Result<LinMap, String> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| format!("stdin: {e}"))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?
    };
    map_from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn tolerances(tol: f64, trials: usize) -> Result<Tolerances, String> {
    Tolerances::default()
        .with_residual(tol)
        .and_then(|t| t.with_trials(trials))
        .map_err(|e| e.to_string())
}

pub fn cmd_decompose(args: &DecomposeArgs) -> Outcome {
    let phi = match read_map(&args.input) {
        Ok(phi) => phi,
        Err(e) => return Outcome::err(EXIT_USAGE, e),
    };
    let tol = match tolerances(args.tol, args.trials) {
        Ok(t) => t,
        Err(e) => return Outcome::err(EXIT_USAGE, e),
    };
    match decompose_seeded(&phi, &tol, args.seed) {
        Ok(c) => {
            if let (false, _) = verify_preserver_sampled(&phi, args.trials, args.seed, &tol) {
                return Outcome::err(
                    EXIT_BREAKDOWN,
                    "canonical form found but a sampled disjoint pair is not preserved",
                );
            }
            Outcome::out(EXIT_OK, canonical_to_json(&c))
        }
        Err(f) => {
            let code = match f.kind {
                FailureKind::NotPreserver => EXIT_NEGATIVE,
                FailureKind::NumericalBreakdown => EXIT_BREAKDOWN,
                FailureKind::DegenerateDomain => EXIT_USAGE,
            };
            Outcome {
                code,
                stdout: failure_to_json(&f) + "\n",
                stderr: format!("{}: {}\n", f.kind, f.detail),
            }
        }
    }
}

pub fn cmd_check(args: &CheckArgs) -> Outcome {
    let phi = match read_map(&args.input) {
        Ok(phi) => phi,
        Err(e) => return Outcome::err(EXIT_USAGE, e),
    };
    let tol = match tolerances(args.tol, args.trials) {
        Ok(t) => t,
        Err(e) => return Outcome::err(EXIT_USAGE, e),
    };
    let seed = args.seed;
    let result = match args.class {
        Class::Disjoint => check_disjointness_preserver(&phi, &tol, seed),
        Class::ZeroTriple => check_zero_triple_preserver(&phi, &tol, seed),
        Class::TripleHom => check_triple_homomorphism(&phi, &tol, seed),
        Class::Pisom => check_partial_isometry_preserver(&phi, &tol, seed),
        Class::Schatten => match args.p {
            Some(p) => check_schatten_isometry(&phi, p, &tol, seed),
            None => return Outcome::err(EXIT_USAGE, "--class schatten needs --p"),
        },
        Class::Kyfan => match (args.k, args.kprime) {
            (Some(k), Some(kp)) => check_kyfan_isometry(&phi, k, kp, &tol, seed),
            _ => return Outcome::err(EXIT_USAGE, "--class kyfan needs --k and --kprime"),
        },
    };
    verdict_outcome(result)
}

fn verdict_outcome(result: Result<ClassifierVerdict, ClassifyError>) -> Outcome {
    match result {
        Ok(v) => {
            let code = match v.verdict {
                Verdict::Yes => EXIT_OK,
                Verdict::No => EXIT_NEGATIVE,
                Verdict::Inapplicable => EXIT_INAPPLICABLE,
            };
            Outcome::out(code, verdict_to_json(&v))
        }
        Err(e @ ClassifyError::NumericalBreakdown { .. }) => Outcome::err(EXIT_BREAKDOWN, e),
        Err(e) => Outcome::err(EXIT_USAGE, e),
    }
}

pub fn cmd_gen(args: &GenArgs) -> Outcome {
    let field = Field::from(args.field);
    let mut rng = Seed::new(args.seed).rng(0);
    let (m, n) = (args.m, args.n);
    match args.kind {
        Kind::Canonical => {
            let explicit = args.q1_values.is_some() || args.q2_values.is_some();
            let count = |values: &Option<Vec<f64>>, k: usize| match values {
                Some(v) => v.len(),
                None if explicit => 0,
                None => k,
            };
            let k1 = count(&args.q1_values, args.q1);
            let k2 = count(&args.q2_values, args.q2);
            let r = args.r.unwrap_or((m * k1 + n * k2).max(1));
            let s = args.s.unwrap_or((n * k1 + m * k2).max(1));
            let form = if explicit {
                let mut q1 = args.q1_values.clone().unwrap_or_default();
                let mut q2 = args.q2_values.clone().unwrap_or_default();
                q1.sort_by(|a, b| b.total_cmp(a));
                q2.sort_by(|a, b| b.total_cmp(a));
                canonical_with_q(m, n, r, s, field, q1, q2, &mut rng)
            } else {
                random_canonical(m, n, r, s, field, k1, k2, &mut rng)
            };
            let form = match form {
                Ok(c) => c,
                Err(e) => return Outcome::err(EXIT_USAGE, e),
            };
            let mut phi = build(&form);
            if let Some(eps) = args.perturb {
                phi = match perturb(&phi, eps, &mut rng) {
                    Ok(p) => p,
                    Err(e) => return Outcome::err(EXIT_USAGE, e),
                };
            }
            Outcome::out(EXIT_OK, map_to_json(&phi))
        }
        Kind::DisjointPair => match random_disjoint_pair(m, n, field, &mut rng) {
            Ok((a, b)) => {
                let v =
                    json!({"field": field, "matrices": [matrix_to_value(&a), matrix_to_value(&b)]});
                Outcome::out(EXIT_OK, v.to_string())
            }
            Err(e) => Outcome::err(EXIT_USAGE, e),
        },
        Kind::Pisom => match random_partial_isometry(m, n, args.rank, field, &mut rng) {
            Ok(p) => {
                let v = json!({"field": field, "matrix": matrix_to_value(&p)});
                Outcome::out(EXIT_OK, v.to_string())
            }
            Err(e) => Outcome::err(EXIT_USAGE, e),
        },
    }
}

pub fn cmd_fuzz(args: &FuzzArgs) -> Outcome {
    let report = fuzz_equivalences(FuzzConfig {
        trials: args.trials,
        max_dim: args.max_dim,
        seed: args.seed,
    });
    let text = serde_json::to_string(&report).expect("report serializes");
    let code = if report.failures == 0 {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    };
    Outcome::out(code, text)
}
