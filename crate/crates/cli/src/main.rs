use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use prochern::diag::utf8_error_pos;
use prochern::{evaluate, parse, render, Diagnostic, Document, Options};

/// Exact constructible-function calculus on towers of variety models.
#[derive(Parser)]
#[command(name = "prochern", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate queries and run checks.
    Eval(RunArgs),
    /// Run checks only.
    Check(RunArgs),
    /// Print the canonical form of a document.
    Fmt { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct RunArgs {
    file: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    depth: u32,
    #[arg(long, default_value_t = 8)]
    horizon: u32,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Print per-check timings to stderr.
    #[arg(long)]
    timings: bool,
}

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;

fn load(path: &Path) -> Result<Document, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| {
        let d = Diagnostic::new(utf8_error_pos(&bytes, &e), "input is not UTF-8");
        format!("{}:{d}", path.display())
    })?;
    parse(text).map_err(|d| format!("{}:{d}", path.display()))
}

fn run(args: &RunArgs, queries: bool) -> Result<u8, String> {
    let doc = load(&args.file)?;
    let opts = Options {
        seed: args.seed,
        depth: args.depth,
        horizon: args.horizon,
        queries,
        checks: true,
    };
    let report = evaluate(&doc, &opts).map_err(|d| format!("{}:{d}", args.file.display()))?;
    match args.format {
        Format::Text => print!("{}", report.to_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    if args.timings {
        eprint!("{}", report.timings());
    }
    Ok(if report.all_passed() { 0 } else { EXIT_CHECK_FAILED })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Eval(a) => run(a, true),
        Command::Check(a) => run(a, false),
        Command::Fmt { file } => load(file).map(|d| {
            print!("{}", render(&d));
            0
        }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
