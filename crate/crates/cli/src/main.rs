use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use algapprox_cli::{
    approximate, dimension, loja, mesh, profile, verify, CliError, Outcome, Overrides,
};

#[derive(Debug, Parser)]
#[command(
    name = "algapprox",
    version,
    about = "Algebraic approximation of semialgebraic germs"
)]
struct Cli {
    /// Seed of every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Newton starts per radius.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Strictly decreasing radii in (0, 1), comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    radii: Option<Vec<f64>>,
    /// Largest odd exponent tried per step.
    #[arg(long, global = true)]
    max_exponent: Option<u32>,
    /// No summaries on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Approximate the set of a job document and write a run report.
    Approximate {
        job: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Check `A ∼_s B` for two set documents.
    Verify {
        a: PathBuf,
        b: PathBuf,
        #[arg(long = "s")]
        s: f64,
        /// Write the report here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the estimated local dimension at the origin.
    Dimension { set: PathBuf },
    /// Write the per-radius delta profile of `A` against `B` as CSV.
    Profile {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long = "s", default_value_t = 1.0)]
        s: f64,
    },
    /// Print the Łojasiewicz exponent estimate of `|g|^α ≤ |f|`; lists are `;` separated.
    Loja {
        f: String,
        g: String,
        domain: PathBuf,
    },
    /// Write samples of the set inside the ball of the given radius as CSV.
    Mesh {
        set: PathBuf,
        #[arg(long)]
        radius: f64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let o = Overrides {
        seed: cli.seed,
        samples: cli.samples,
        radii: cli.radii,
        max_exponent: cli.max_exponent,
    };
    let quiet = cli.quiet;
    match cli.command {
        Command::Approximate { job, output } => {
            let a = approximate(&job, &o)?;
            write(&output, &a.report.to_json())?;
            if !quiet {
                match &a.report.error {
                    Some(e) => eprintln!("search exhausted: {}", e.message),
                    None => {
                        for p in &a.report.pieces {
                            eprintln!(
                                "piece {}: {} (verified: {})",
                                p.piece, p.structured, p.verified
                            );
                        }
                    }
                }
            }
            Ok(a.exit_code)
        }
        Command::Verify { a, b, s, output } => {
            let (report, code) = verify(&a, &b, s, &o)?;
            match output {
                Some(path) => write(&path, &to_json(&report))?,
                None => print!("{}", to_json(&report)),
            }
            if !quiet {
                let verdict = if code == Outcome::Verified.exit_code() {
                    "pass"
                } else {
                    "fail"
                };
                eprintln!(
                    "{verdict}: orders {:?} and {:?} at s = {s}",
                    report.result.a_leq_b.fitted_order, report.result.b_leq_a.fitted_order
                );
            }
            Ok(code)
        }
        Command::Dimension { set } => {
            println!("{}", dimension(&set, &o)?.dimension);
            Ok(0)
        }
        Command::Profile { a, b, output, s } => {
            write(&output, &profile(&a, &b, s, &o)?)?;
            Ok(0)
        }
        Command::Loja { f, g, domain } => {
            let est = loja(&f, &g, &domain, &o)?;
            println!("{}", est.alpha_hat);
            if !quiet {
                eprintln!(
                    "{} samples, maximum at {:?}",
                    est.samples_used, est.max_attained_at
                );
            }
            Ok(0)
        }
        Command::Mesh {
            set,
            radius,
            output,
        } => {
            let csv = mesh(&set, radius, &o)?;
            if !quiet {
                eprintln!("{} points", csv.lines().count() - 1);
            }
            write(&output, &csv)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let code = match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
