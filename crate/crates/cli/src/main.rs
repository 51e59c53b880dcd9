mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use robustiso::rational::parse_rational;
use robustiso::{Error, Rational};

#[derive(Parser, Debug)]
#[command(
    name = "robustiso",
    version,
    about = "Edit distance, QAP approximation and robust isomorphism testing"
)]
pub struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Work budget for WL tuples, partial injections and weak-VC search
    /// (overrides ROBUSTISO_BUDGET).
    #[arg(long, global = true)]
    pub budget: Option<u128>,

    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// VC dimension of neighbourhood, mixed or QAP threshold systems.
    Vc(VcArgs),
    /// Approximate graph edit distance, with the exact value for small orders.
    Ged(GedArgs),
    /// Approximate a quadratic assignment instance.
    Qap(QapArgs),
    /// Decide "isomorphic" versus "far"; exit 0 or 1.
    RobustGi(RobustGiArgs),
    /// k-dimensional Weisfeiler-Leman colouring of one graph or a pair.
    Wl(WlArgs),
    /// Generate instances.
    Gen(GenArgs),
    /// Exact brute-force edit distance or QAP optimum.
    Oracle(OracleArgs),
    /// Approximation against the exact oracle on seeded random pairs.
    Bench(BenchArgs),
}

pub fn rational_arg(text: &str) -> Result<Rational, String> {
    parse_rational(text).map_err(|e| e.to_string())
}

#[derive(Args, Debug)]
pub struct VcArgs {
    #[arg(long, conflicts_with = "qap", required_unless_present = "qap")]
    pub graph: Option<String>,
    #[arg(long)]
    pub qap: Option<String>,
    /// Also report the mixed-neighbourhood system.
    #[arg(long)]
    pub mixed: bool,
    /// Only this threshold for QAP input.
    #[arg(long, value_parser = rational_arg)]
    pub threshold: Option<Rational>,
    /// Decide whether every restriction to a bijection has VC at most d.
    #[arg(long, requires = "qap")]
    pub weak_d: Option<usize>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Sampled,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BackendArg {
    Exact,
    Float,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Additive error parameter.
    #[arg(long, value_parser = rational_arg)]
    pub eps: Rational,
    /// Largest partial injection size.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "exact")]
    pub backend: BackendArg,
    /// Rounding attempts per LP.
    #[arg(long, default_value_t = 32)]
    pub retries: usize,
    /// Prefer roundings whose LP objective stays below the LP optimum.
    #[arg(long)]
    pub zeta_row: bool,
    /// Partial injections drawn per size in sampled mode.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    /// Largest order for which the exact oracle is also run.
    #[arg(long, default_value_t = 8)]
    pub oracle_cap: usize,
}

#[derive(Args, Debug)]
pub struct GedArgs {
    #[arg(long)]
    pub g: String,
    #[arg(long)]
    pub h: String,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug)]
pub struct QapArgs {
    #[arg(long)]
    pub qap: String,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Include per-partial-injection LP results.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum StrategyArg {
    Net,
    ColouredGreedy,
}

#[derive(Args, Debug)]
pub struct RobustGiArgs {
    #[arg(long)]
    pub g: String,
    #[arg(long)]
    pub h: String,
    #[arg(long, value_parser = rational_arg)]
    pub eps: Rational,
    #[arg(long, value_enum, default_value = "coloured-greedy")]
    pub strategy: StrategyArg,
}

#[derive(Args, Debug)]
pub struct WlArgs {
    #[arg(long)]
    pub g: String,
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(subcommand)]
    pub family: GenFamily,
}

#[derive(Subcommand, Debug)]
pub enum GenFamily {
    /// QAP whose threshold system has VC floor(log2 n) but every restriction VC <= 1.
    Lemma36 {
        #[arg(long)]
        n: usize,
        /// Output file (default lemma36_n<N>.qap).
        #[arg(long)]
        out: Option<String>,
    },
    /// CFI pair over a 3-regular connected base.
    Cfi {
        /// One of k4, k33, prism, cube, petersen.
        #[arg(long, conflicts_with = "base_file", required_unless_present = "base_file")]
        base: Option<String>,
        #[arg(long)]
        base_file: Option<String>,
        #[arg(long)]
        out: Option<String>,
    },
    /// Blow up both graphs of a bundle.
    Blowup {
        #[arg(long = "in")]
        input: String,
        #[arg(long)]
        ell: usize,
        #[arg(long)]
        out: Option<String>,
    },
    /// Pair of seeded random graphs.
    Random {
        #[arg(long)]
        n: usize,
        /// Edge probability.
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long)]
        seed: u64,
        /// Redraw until the neighbourhood system has this VC dimension.
        #[arg(long)]
        target_vc: Option<i64>,
        #[arg(long, default_value_t = 100)]
        retries: usize,
        #[arg(long)]
        out: Option<String>,
    },
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long, requires = "h", conflicts_with = "qap", required_unless_present = "qap")]
    pub g: Option<String>,
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long)]
    pub qap: Option<String>,
    /// Largest order to enumerate.
    #[arg(long)]
    pub cap: Option<usize>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

/// Process exit status for a failed command.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::BudgetExceeded { .. } | Error::CapExceeded { .. } => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .target(env_logger::Target::Stderr)
        .init();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            log::warn!("could not size the thread pool: {e}");
        }
    }
    match commands::run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.json);
            ExitCode::from(outcome.code)
        }
        Err(failure) => {
            log::error!("{}", failure.error);
            let mut body = serde_json::json!({ "error": failure.error.to_string() });
            if let Some(extra) = failure.context {
                body["context"] = extra;
            }
            println!("{body}");
            ExitCode::from(exit_code(&failure.error))
        }
    }
}
