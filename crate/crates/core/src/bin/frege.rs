use clap::{Args, Parser, Subcommand, ValueEnum};
use frege::axioms::CorpusConfig;
use frege::bias::BiasConfig;
use frege::command::{Command, Input, Variant};
use frege::io::{parse_problem, Format, ProblemInput};
use frege::{Error, Method, Result};
use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

/// Frege's temporal voting method and apportionment methods.
#[derive(Parser)]
#[command(name = "frege", version)]
struct Cli {
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    output: OutputFormat,
    /// Worker threads for parallel commands (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print the command as JSON instead of running it.
    #[arg(long, global = true)]
    emit_command: bool,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Csv,
    Json,
}

impl From<OutputFormat> for Format {
    fn from(f: OutputFormat) -> Format {
        match f {
            OutputFormat::Text => Format::Text,
            OutputFormat::Csv => Format::Csv,
            OutputFormat::Json => Format::Json,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    Original,
    Modified,
}

#[derive(Subcommand)]
enum Sub {
    /// Run the original or modified method on a profile.
    Simulate {
        #[arg(long, value_enum, default_value_t = VariantArg::Original)]
        method: VariantArg,
        /// Number of rounds.
        #[arg(long, short = 't', default_value_t = 10)]
        horizon: u64,
        /// Also report variable quota violations.
        #[arg(long)]
        audit: bool,
        /// Profile file (JSON or CSV); standard input if omitted or `-`.
        profile: Option<PathBuf>,
    },
    /// Apportion seats with one method.
    Apportion {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long)]
        method: Option<Method>,
    },
    /// Apportion seats with all seven methods.
    Compare {
        #[command(flatten)]
        problem: ProblemArgs,
    },
    /// Check every method against the apportionment axioms on a random corpus.
    AxiomCheck {
        /// A method name or `all`.
        #[arg(long, default_value = "all")]
        method: String,
        #[arg(long, default_value_t = 10_000)]
        instances: u64,
        #[arg(long, default_value_t = 10_000)]
        three_party_instances: u64,
        #[arg(long, default_value_t = 8)]
        max_parties: usize,
        #[arg(long, default_value_t = 150)]
        max_seats: u64,
        #[arg(long, default_value_t = 1000)]
        max_votes: u64,
    },
    /// Estimate how often each method favors the smallest party.
    Bias {
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 5)]
        parties: usize,
        #[arg(long, default_value_t = 1000)]
        max_votes: u64,
        #[arg(long, default_value_t = 100)]
        seats: u64,
        /// Comma-separated method names or `all`.
        #[arg(long, default_value = "all")]
        methods: String,
    },
    /// First round at which the cost of winning stops changing.
    Stabilize {
        /// Voters.
        n: u64,
        /// Candidates.
        m: u64,
    },
    /// Find the cycle of the original method on a fixed electorate.
    Cycle {
        #[arg(long, default_value_t = frege::original::DEFAULT_CYCLE_CAP)]
        cap: u64,
        profile: Option<PathBuf>,
    },
    /// Run a command stored as JSON (see --emit-command).
    Replay { command: Option<PathBuf> },
}

#[derive(Args)]
struct ProblemArgs {
    /// Problem file: {"votes": [...], "seats": k} or {"shares": ["a/b", ...], "seats": k}.
    #[arg(conflicts_with_all = ["votes", "seats"])]
    file: Option<PathBuf>,
    /// Comma-separated vote counts.
    #[arg(long, value_delimiter = ',', requires = "seats")]
    votes: Option<Vec<u64>>,
    #[arg(long)]
    seats: Option<u64>,
}

fn read_source(path: Option<&PathBuf>) -> Result<Input> {
    match path {
        Some(p) if p.as_os_str() != "-" => Ok(Input::Path(p.clone())),
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Error::Validation(format!("cannot read standard input: {e}")))?;
            Ok(Input::Inline(s))
        }
    }
}

impl ProblemArgs {
    fn input(&self) -> Result<ProblemInput> {
        if let (Some(votes), Some(seats)) = (&self.votes, self.seats) {
            return Ok(ProblemInput {
                votes: Some(votes.clone()),
                shares: None,
                seats,
                method: None,
            });
        }
        parse_problem(&read_source(self.file.as_ref())?.read()?)
    }
}

fn parse_methods(list: &str) -> Result<Vec<Method>> {
    if list == "all" {
        return Ok(Method::ALL.to_vec());
    }
    list.split(',').map(|m| m.trim().parse()).collect()
}

fn build(cli: &Cli) -> Result<Command> {
    Ok(match &cli.command {
        Sub::Simulate {
            method,
            horizon,
            audit,
            profile,
        } => Command::Simulate {
            method: match method {
                VariantArg::Original => Variant::Original,
                VariantArg::Modified => Variant::Modified,
            },
            profile: read_source(profile.as_ref())?,
            horizon: *horizon,
            audit: *audit,
        },
        Sub::Apportion { problem, method } => Command::Apportion {
            problem: problem.input()?,
            method: *method,
        },
        Sub::Compare { problem } => Command::Compare {
            problem: problem.input()?,
        },
        Sub::AxiomCheck {
            method,
            instances,
            three_party_instances,
            max_parties,
            max_seats,
            max_votes,
        } => Command::AxiomCheck {
            methods: parse_methods(method)?,
            corpus: CorpusConfig {
                seed: cli.seed,
                instances: *instances,
                three_party_instances: *three_party_instances,
                max_parties: *max_parties,
                max_seats: *max_seats,
                max_votes: *max_votes,
            },
        },
        Sub::Bias {
            samples,
            parties,
            max_votes,
            seats,
            methods,
        } => Command::Bias(BiasConfig {
            parties: *parties,
            max_votes: *max_votes,
            seats: *seats,
            samples: *samples,
            seed: cli.seed,
            methods: parse_methods(methods)?,
        }),
        Sub::Stabilize { n, m } => Command::Stabilize { n: *n, m: *m },
        Sub::Cycle { cap, profile } => Command::Cycle {
            profile: read_source(profile.as_ref())?,
            cap: *cap,
        },
        Sub::Replay { command } => {
            let bytes = read_source(command.as_ref())?.read()?;
            serde_json::from_slice(&bytes).map_err(|e| Error::Parse(format!("invalid command JSON: {e}")))?
        }
    })
}

fn run(cli: &Cli) -> Result<String> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Validation(format!("cannot configure threads: {e}")))?;
    }
    let command = build(cli)?;
    if cli.emit_command {
        let json = serde_json::to_string_pretty(&command).map_err(|e| Error::Invariant(e.to_string()))?;
        return Ok(json + "\n");
    }
    command.execute(cli.output.into())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
