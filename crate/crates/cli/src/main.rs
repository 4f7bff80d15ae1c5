use std::fs::File;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hamstream_cli::alloc::CountingAlloc;
use hamstream_cli::{bench, hard, Alphabet, CliError, CliResult, RunConfig};

#[global_allocator]
static ALLOC: CountingAlloc = CountingAlloc;

/// Streaming k-mismatch pattern matching.
#[derive(Parser)]
#[command(name = "hamstream", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Pattern file.
    #[arg(short, long)]
    pattern: PathBuf,
    /// Text file; standard input when absent.
    #[arg(short, long)]
    text: Option<PathBuf>,
    /// Mismatch threshold.
    #[arg(short)]
    k: usize,
    #[arg(long, env = "HAMSTREAM_SEED", default_value_t = 0)]
    seed: u64,
    /// Prime modulus for sketches (default 2^64 - 2^32 + 1).
    #[arg(long)]
    prime: Option<u64>,
    /// Read little-endian 32-bit tokens instead of bytes.
    #[arg(long)]
    tokens: bool,
}

impl Common {
    fn config(&self) -> RunConfig {
        RunConfig {
            k: self.k,
            seed: self.seed,
            prime: self.prime,
            alphabet: if self.tokens { Alphabet::Tokens } else { Alphabet::Bytes },
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Report every k-mismatch occurrence, streaming.
    Match(Common),
    /// Same output as `match`, by direct comparison.
    Oracle(Common),
    /// Write the occurrence message for a pattern and a short text.
    Encode {
        #[command(flatten)]
        common: Common,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the occurrences stored in a message.
    Decode {
        #[arg(short, long)]
        message: PathBuf,
        #[arg(long)]
        tokens: bool,
    },
    /// Print a recursive hard instance.
    GenHard {
        #[arg(short)]
        k: usize,
        #[arg(short, long)]
        levels: u32,
        #[arg(long, env = "HAMSTREAM_SEED", default_value_t = 0)]
        seed: u64,
    },
    /// Time the streaming matcher on planted instances; prints JSON.
    Bench {
        /// Run the built-in grid of (n, k).
        #[arg(long)]
        grid: bool,
        #[arg(short, default_value_t = 4096)]
        n: usize,
        #[arg(short, default_value_t = 16)]
        k: usize,
        #[arg(long, default_value_t = 256)]
        sigma: u64,
        #[arg(long, env = "HAMSTREAM_SEED", default_value_t = 0)]
        seed: u64,
    },
}

fn open(path: &PathBuf) -> CliResult<File> {
    File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn text_input(c: &Common) -> CliResult<Box<dyn Read>> {
    Ok(match &c.text {
        Some(p) => Box::new(open(p)?),
        None => Box::new(io::stdin().lock()),
    })
}

fn run(cli: Cli) -> CliResult<()> {
    let stdout = io::stdout().lock();
    match cli.cmd {
        Cmd::Match(c) => hamstream_cli::cmd_match(&c.config(), open(&c.pattern)?, text_input(&c)?, stdout),
        Cmd::Oracle(c) => hamstream_cli::cmd_oracle(&c.config(), open(&c.pattern)?, text_input(&c)?, stdout),
        Cmd::Encode { common: c, output } => {
            let msg = File::create(&output).map_err(|e| CliError::Io(format!("{}: {e}", output.display())))?;
            let bits = hamstream_cli::cmd_encode(&c.config(), open(&c.pattern)?, text_input(&c)?, msg)?;
            writeln!(io::stdout(), "{bits}")?;
            Ok(())
        }
        Cmd::Decode { message, tokens } => {
            let alphabet = if tokens { Alphabet::Tokens } else { Alphabet::Bytes };
            hamstream_cli::cmd_decode(alphabet, open(&message)?, stdout)
        }
        Cmd::GenHard { k, levels, seed } => {
            let s = hard::gen_hard(k, levels, seed)?;
            let mut out = stdout;
            out.write_all(&s)?;
            out.flush()?;
            Ok(())
        }
        Cmd::Bench { grid, n, k, sigma, seed } => {
            if sigma == 0 {
                return Err(CliError::Usage("sigma must be positive".into()));
            }
            let cases = if grid { bench::grid() } else { vec![(n, k)] };
            let report = bench::report(&cases, sigma, seed)?;
            let mut out = stdout;
            serde_json::to_writer_pretty(&mut out, &report).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(out)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hamstream: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
