use std::fs::File;
use std::io::{self, BufWriter};
use std::process::ExitCode;

use clap::Parser;

use mastermind_core::codec::LayoutOptions;
use mastermind_core::experiment::{self, ExperimentConfig};
use mastermind_core::{Code, GameParams};

/// Runs memory-restricted Mastermind codebreakers over seeded trial grids.
#[derive(Debug, Parser)]
#[command(name = "mastermind", version)]
struct Cli {
    /// size-one, size-two, unrestricted or rls
    #[arg(long, default_value = "size-one")]
    strategy: String,
    /// fixed, random, devil or interactive
    #[arg(long, default_value = "random")]
    codemaker: String,
    /// Comma-separated list of n values
    #[arg(long, value_delimiter = ',', default_value = "64")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    k: u8,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Slack constant K in the size-one block count
    #[arg(long, default_value_t = 10.0)]
    bigk: f64,
    #[arg(long)]
    block_size: Option<usize>,
    /// Override the number of random samples per block
    #[arg(long)]
    samples: Option<usize>,
    /// Override the number of size-one sampling blocks
    #[arg(long)]
    blocks: Option<usize>,
    /// Defaults to 50 n
    #[arg(long)]
    query_cap: Option<usize>,
    /// Memory size for rls and unrestricted
    #[arg(long)]
    mu: Option<usize>,
    /// Secret code for the fixed codemaker
    #[arg(long)]
    secret: Option<String>,
    /// Write per-trial rows here
    #[arg(long)]
    csv: Option<String>,
    /// Write the transcript of trial 0 of the first cell here
    #[arg(long)]
    transcript: Option<String>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let layout = LayoutOptions {
        block_size: cli.block_size,
        samples: cli.samples,
        blocks: cli.blocks,
        epsilon: cli.epsilon,
        big_k: cli.bigk,
    };
    let err = |e: mastermind_core::Error| e.to_string();
    if cli.codemaker == "interactive" {
        let n = *cli.n.first().ok_or("no n given")?;
        let params = GameParams::new(n, cli.k).map_err(err)?;
        let status = experiment::interactive_game(
            &cli.strategy,
            params,
            &layout,
            cli.mu,
            cli.seed,
            io::BufReader::new(io::stdin()),
            io::stdout(),
        )
        .map_err(err)?;
        return Ok(ExitCode::from(status as u8));
    }
    let secret = cli
        .secret
        .as_deref()
        .map(|s| Code::parse(s, cli.k))
        .transpose()
        .map_err(err)?;
    let config = ExperimentConfig {
        strategy: cli.strategy,
        codemaker: cli.codemaker,
        ns: cli.n,
        k: cli.k,
        mu: cli.mu,
        trials: cli.trials,
        seed: cli.seed,
        layout,
        query_cap: cli.query_cap,
        secret,
        workers: cli.workers,
    };
    let result = experiment::run_grid(&config).map_err(err)?;
    for line in &result.layouts {
        println!("# {line}");
    }
    for s in &result.skipped {
        eprintln!("skipping n={}: {}", s.n, s.reason);
    }
    print!("{}", experiment::format_summary(&result));
    if let Some(path) = &cli.csv {
        let file = File::create(path).map_err(|e| format!("{path}: {e}"))?;
        experiment::write_csv(&result.records, BufWriter::new(file)).map_err(err)?;
    }
    if let Some(path) = &cli.transcript {
        let n = result
            .records
            .first()
            .map(|r| r.n)
            .ok_or("no trial to record")?;
        let (_, transcript) = experiment::run_trial(&config, n, 0, false).map_err(err)?;
        std::fs::write(path, transcript.to_text()).map_err(|e| format!("{path}: {e}"))?;
    }
    Ok(if result.all_won() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
