use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rotn_core::circle::Precision;
use rotn_core::harness::{self, Experiment, ExperimentConfig, LeafStart};

const DEFAULT_ALPHA: &str = "[0;5,(6)]";
const SUMMARY_WIDTH: usize = 400;

/// Exact experiments on the skew product over an irrational rotation.
#[derive(Parser)]
#[command(name = "rotn", version)]
struct Cli {
    /// Arithmetic policy; exact-only disables the float fast path.
    #[arg(long, global = true, value_enum, default_value_t = PrecisionArg::CertifiedFast)]
    precision: PrecisionArg,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PrecisionArg {
    ExactOnly,
    CertifiedFast,
}

impl From<PrecisionArg> for Precision {
    fn from(p: PrecisionArg) -> Self {
        match p {
            PrecisionArg::ExactOnly => Precision::ExactOnly,
            PrecisionArg::CertifiedFast => Precision::CertifiedFast,
        }
    }
}

#[derive(Args)]
struct Output {
    /// Output file; `.json` selects JSON, anything else CSV. Stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Renormalization tower with bound checks.
    Tower {
        #[arg(long, default_value = DEFAULT_ALPHA)]
        alpha: String,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Max gap of the visits to level m, shifted by k.
    Density {
        #[arg(long, default_value = DEFAULT_ALPHA)]
        alpha: String,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
        m: i64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
        k: i64,
        #[arg(long = "N", default_value_t = 1_000_000)]
        n: u64,
        /// Fail unless the final gap is below this.
        #[arg(long)]
        max_gap: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Non-dense example for alpha = [0;2m+1,(2m+2)].
    Example {
        #[arg(long, default_value_t = 2)]
        m: i64,
        #[arg(long = "kmax", default_value_t = 10)]
        k_max: usize,
        #[arg(long = "N", default_value_t = 1_000_000)]
        n: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Trace a vertical leaf through the rectangle chain.
    Leaf {
        #[arg(long, default_value = DEFAULT_ALPHA)]
        alpha: String,
        /// Start on ray i.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "through")]
        ray: Option<i64>,
        /// Start at this point, e.g. "(1+a)/2".
        #[arg(long, requires = "level")]
        through: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        level: Option<i64>,
        #[arg(long, requires = "through")]
        backward: bool,
        #[arg(long = "N", default_value_t = 100_000)]
        n: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Check S_n(1/2) < 0 for all 1 <= n <= N.
    Heavy {
        #[arg(long, default_value = "[0;(2)]")]
        alpha: String,
        #[arg(long = "N", default_value_t = 1_000_000)]
        n: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Compare predicted first returns against direct simulation.
    Oracle {
        #[arg(long, default_value = DEFAULT_ALPHA)]
        alpha: String,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
}

fn experiment(cmd: Command) -> Result<(Experiment, Option<PathBuf>), String> {
    Ok(match cmd {
        Command::Tower { alpha, depth, out } => (Experiment::Tower { alpha, depth }, out.out),
        Command::Density {
            alpha,
            m,
            k,
            n,
            max_gap,
            out,
        } => (
            Experiment::Density {
                alpha,
                m,
                k,
                n,
                max_gap,
            },
            out.out,
        ),
        Command::Example { m, k_max, n, out } => (Experiment::Example { m, k_max, n }, out.out),
        Command::Leaf {
            alpha,
            ray,
            through,
            level,
            backward,
            n,
            out,
        } => {
            let start = match (ray, through, level) {
                (Some(i), None, _) => LeafStart::Ray { i },
                (None, Some(x0), Some(level)) => LeafStart::Through { x0, level },
                _ => return Err("leaf needs --ray I or --through X --level J".into()),
            };
            (
                Experiment::Leaf {
                    alpha,
                    start,
                    n,
                    backward,
                },
                out.out,
            )
        }
        Command::Heavy { alpha, n, out } => (Experiment::HeavyContrast { alpha, n }, out.out),
        Command::Oracle {
            alpha,
            depth,
            samples,
            seed,
            out,
        } => (
            Experiment::Oracle {
                alpha,
                depth,
                samples,
                seed,
            },
            out.out,
        ),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (exp, out) = match experiment(cli.command) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("rotn: {e}");
            return ExitCode::from(2);
        }
    };
    let config = ExperimentConfig::new(exp, cli.precision.into());
    let result = match harness::run(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("rotn: {e}");
            return ExitCode::from(2);
        }
    };
    match &out {
        Some(path) => {
            if let Err(e) = result.write(path) {
                eprintln!("rotn: {e}");
                return ExitCode::from(2);
            }
        }
        None => print!("{}", result.to_csv_document()),
    }
    let status = if result.passed { "PASS" } else { "FAIL" };
    let summary = serde_json::to_string(&result.summary).unwrap_or_default();
    if summary.len() <= SUMMARY_WIDTH {
        eprintln!("{status} {summary}");
    } else {
        eprintln!("{status} (summary in output header)");
    }
    if result.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
