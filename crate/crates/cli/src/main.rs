mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use mulsets::Error;
use output::Format;

#[derive(Parser)]
#[command(
    name = "mulsets",
    version,
    about = "Counting functions, Euler-Kronecker constants and races for multiplicative sets"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Directory for cached characteristic and tau tables.
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,

    /// Decimal digits printed for exact-path constants (at most 31).
    #[arg(long, global = true, default_value_t = 30)]
    digits: u32,

    /// Prime density for sets without a known one, e.g. 1/2.
    #[arg(long, global = true)]
    delta: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GammaMethod {
    Auto,
    Lfunction,
    PartialSum,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum C0Method {
    Auto,
    Accelerated,
    Direct,
}

#[derive(Subcommand)]
enum Cmd {
    /// S(x), π_S(x) and δ for a set.
    Count {
        #[arg(long)]
        set: String,
        #[arg(long, value_parser = commands::parse_count)]
        x: u64,
    },
    /// The Euler-Kronecker constant γ_S.
    Gamma {
        #[arg(long)]
        set: String,
        #[arg(long, value_enum, default_value_t = GammaMethod::Auto)]
        method: GammaMethod,
        /// Truncation for the partial-sum method.
        #[arg(long, value_parser = commands::parse_count, default_value = "1000000")]
        x: u64,
    },
    /// The Wirsing constant C₀(S).
    C0 {
        #[arg(long)]
        set: String,
        #[arg(long, value_enum, default_value_t = C0Method::Auto)]
        method: C0Method,
        /// Largest product cutoff P for the direct method.
        #[arg(long, value_parser = commands::parse_count)]
        limit: Option<u64>,
        /// Extrapolate the direct product in 1/log P.
        #[arg(long)]
        extrapolate: bool,
    },
    /// S(x) against the Landau and Ramanujan approximants.
    Compare {
        #[arg(long)]
        set: String,
        /// Comma-separated sample points, e.g. 1e4,1e5,1e6.
        #[arg(long, value_parser = commands::parse_points)]
        points: commands::Points,
    },
    /// Check A(x) >= B(x) for all x <= limit.
    Race {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, value_parser = commands::parse_count)]
        limit: u64,
        /// Race the prime counts π_A, π_B instead.
        #[arg(long)]
        primes: bool,
    },
    /// The four progression semigroup races.
    RaceSuite {
        #[arg(long, value_parser = commands::parse_count, default_value = "10000000")]
        limit: u64,
    },
    /// τ(n) mod q tables and prime non-divisibility densities.
    TauSieve {
        /// Comma-separated moduli.
        #[arg(long, default_value = "3,5,7,23,691")]
        q: String,
        #[arg(long, value_parser = commands::parse_count)]
        n: u64,
        /// Check τ(n) ≡ σ₁₁(n) (mod 691) for all n <= N.
        #[arg(long)]
        verify_sigma11: bool,
    },
    /// Euler-Kronecker constants and winners for the classical sets.
    Table {
        /// Truncation for the rows only estimable by partial sums.
        #[arg(long, value_parser = commands::parse_count, default_value = "1000000")]
        x: u64,
    },
    /// log lcm(1²+1, ..., n²+1) and the constant J.
    LcmF {
        #[arg(long, value_parser = commands::parse_count)]
        n: u64,
    },
}

/// 2 for errors in the request, 1 for failures while computing.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NonConvergence { .. } | Error::Quadrature { .. } | Error::Cache(_) | Error::Io(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        mulsets::par::init_threads(t);
    }
    let env = match commands::Env::new(cli.cache_dir.as_deref(), cli.digits, cli.delta.as_deref()) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let result = match cli.cmd {
        Cmd::Count { set, x } => commands::count(&env, &set, x),
        Cmd::Gamma { set, method, x } => commands::gamma(&env, &set, method, x),
        Cmd::C0 { set, method, limit, extrapolate } => commands::c0(&env, &set, method, limit, extrapolate),
        Cmd::Compare { set, points } => commands::compare(&env, &set, &points),
        Cmd::Race { a, b, limit, primes } => commands::race(&env, &a, &b, limit, primes),
        Cmd::RaceSuite { limit } => commands::race_suite(&env, limit),
        Cmd::TauSieve { q, n, verify_sigma11 } => commands::tau_sieve(&env, &q, n, verify_sigma11),
        Cmd::Table { x } => commands::table(&env, x),
        Cmd::LcmF { n } => commands::lcm_f(&env, n),
    };
    match result {
        Ok(report) => {
            print!("{}", report.render(cli.format));
            if report.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
