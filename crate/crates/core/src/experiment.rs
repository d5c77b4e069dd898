//! Seeded trial grids, CSV output, summaries and the interactive game.

use std::io::{BufRead, Write};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::codec::{LayoutOptions, LayoutParams};
use crate::consistent::CandidateSet;
use crate::error::{Error, Result};
use crate::game::{Code, Codemaker, DevilCodemaker, FixedCodemaker, GameParams};
use crate::harness::{run_game, RunOptions, Transcript};
use crate::strategy;
use crate::stream;

pub const CODEMAKER_NAMES: [&str; 4] = ["fixed", "random", "devil", "interactive"];

pub const CSV_HEADER: [&str; 12] = [
    "n",
    "k",
    "strategy",
    "codemaker",
    "mu",
    "seed",
    "queries",
    "phase0",
    "phase1",
    "phase2",
    "phase3",
    "won",
];

/// Stream id used to draw random secrets, far from the per-query ids.
const SECRET_STREAM: u64 = 1 << 62;

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub strategy: String,
    pub codemaker: String,
    pub ns: Vec<usize>,
    pub k: u8,
    /// Memory size; defaults to what the strategy needs.
    pub mu: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub layout: LayoutOptions,
    /// Defaults to `50 n`.
    pub query_cap: Option<usize>,
    /// Secret for the `fixed` codemaker.
    pub secret: Option<Code>,
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            strategy: "size-one".into(),
            codemaker: "random".into(),
            ns: vec![64],
            k: 2,
            mu: None,
            trials: 1,
            seed: 0,
            layout: LayoutOptions::default(),
            query_cap: None,
            secret: None,
            workers: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    pub n: usize,
    pub k: u8,
    pub strategy: String,
    pub codemaker: String,
    pub mu: usize,
    pub seed: u64,
    pub queries: usize,
    pub phases: [usize; 4],
    pub won: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub n: usize,
    pub k: u8,
    pub trials: usize,
    pub wins: usize,
    pub mean: f64,
    pub median: f64,
    pub max: usize,
    /// `mean * log2(n) / n`.
    pub normalized: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedCell {
    pub n: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct GridResult {
    pub records: Vec<TrialRecord>,
    pub skipped: Vec<SkippedCell>,
    /// Layout line per cell that uses one.
    pub layouts: Vec<String>,
}

impl GridResult {
    pub fn all_won(&self) -> bool {
        self.records.iter().all(|r| r.won)
    }

    pub fn summaries(&self) -> Vec<CellSummary> {
        summarize(&self.records)
    }
}

/// splitmix64 finaliser.
fn mix(mut v: u64) -> u64 {
    v = v.wrapping_add(0x9e37_79b9_7f4a_7c15);
    v = (v ^ (v >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    v = (v ^ (v >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    v ^ (v >> 31)
}

/// Seed of one trial, a hash of the base seed and the cell coordinates.
pub fn trial_seed(base: u64, n: usize, k: u8, trial: usize) -> u64 {
    let mut h = mix(base);
    for v in [n as u64, k as u64, trial as u64] {
        h = mix(h ^ v);
    }
    h
}

/// Memory size for a strategy, rejecting inadmissible pairings.
pub fn admissible_mu(strategy: &str, requested: Option<usize>, natural: usize) -> Result<usize> {
    match (strategy, requested) {
        (_, None) => Ok(natural),
        ("size-one" | "size-two", Some(mu)) if mu != natural => Err(Error::InvalidArgument(
            format!("{strategy} needs mu = {natural}, got {mu}"),
        )),
        (_, Some(0)) => Err(Error::InvalidArgument("mu must be positive".into())),
        (_, Some(mu)) => Ok(mu),
    }
}

/// Builds the non-interactive codemaker for one trial.
pub fn build_codemaker(
    name: &str,
    params: GameParams,
    seed: u64,
    secret: Option<&Code>,
) -> Result<Box<dyn Codemaker>> {
    Ok(match name {
        "fixed" => {
            let z = secret
                .ok_or_else(|| Error::InvalidArgument("fixed codemaker needs a secret".into()))?;
            if z.len() != params.n {
                return Err(Error::LengthMismatch {
                    left: params.n,
                    right: z.len(),
                });
            }
            Box::new(FixedCodemaker::new(z.clone()))
        }
        "random" => Box::new(FixedCodemaker::random(
            params,
            &mut stream(seed, SECRET_STREAM),
        )),
        "devil" => Box::new(DevilCodemaker::new(params)?),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown codemaker {other:?}, expected one of {CODEMAKER_NAMES:?}"
            )))
        }
    })
}

/// One game with full bookkeeping.
pub fn run_trial(
    config: &ExperimentConfig,
    n: usize,
    trial: usize,
    record_memory: bool,
) -> Result<(TrialRecord, Transcript)> {
    let params = GameParams::new(n, config.k)?;
    let strategy = strategy::build(&config.strategy, params, &config.layout)?;
    let mu = admissible_mu(&config.strategy, config.mu, strategy.memory_size())?;
    let seed = trial_seed(config.seed, n, config.k, trial);
    let mut maker = build_codemaker(&config.codemaker, params, seed, config.secret.as_ref())?;
    let opts = RunOptions {
        query_cap: config.query_cap.unwrap_or(50 * n),
        record_memory,
    };
    let transcript = run_game(strategy.as_ref(), maker.as_mut(), params, mu, seed, opts)?;
    let record = TrialRecord {
        n,
        k: config.k,
        strategy: config.strategy.clone(),
        codemaker: config.codemaker.clone(),
        mu,
        seed,
        queries: transcript.query_count(),
        phases: transcript.phase_counts(),
        won: transcript.won(),
    };
    Ok((record, transcript))
}

fn layout_line(config: &ExperimentConfig, params: GameParams) -> Result<Option<String>> {
    Ok(match config.strategy.as_str() {
        "size-one" => Some(LayoutParams::size_one(params, &config.layout)?.to_string()),
        "size-two" => Some(LayoutParams::size_two(params, &config.layout)?.to_string()),
        _ => None,
    })
}

/// Runs every cell of the grid. Cells whose setup fails are skipped with
/// the reason; errors inside a game abort the run.
pub fn run_grid(config: &ExperimentConfig) -> Result<GridResult> {
    if config.codemaker == "interactive" {
        return Err(Error::InvalidArgument(
            "the interactive codemaker runs one game at a time".into(),
        ));
    }
    if !strategy::STRATEGY_NAMES.contains(&config.strategy.as_str()) {
        return Err(Error::InvalidArgument(format!(
            "unknown strategy {:?}, expected one of {:?}",
            config.strategy,
            strategy::STRATEGY_NAMES
        )));
    }
    if !CODEMAKER_NAMES.contains(&config.codemaker.as_str()) {
        return Err(Error::InvalidArgument(format!(
            "unknown codemaker {:?}, expected one of {CODEMAKER_NAMES:?}",
            config.codemaker
        )));
    }
    let mut result = GridResult::default();
    for &n in &config.ns {
        let setup = GameParams::new(n, config.k).and_then(|params| {
            let strategy = strategy::build(&config.strategy, params, &config.layout)?;
            admissible_mu(&config.strategy, config.mu, strategy.memory_size())?;
            if config.trials > 0 {
                // surfaces codemaker errors such as an oversized devil
                build_codemaker(&config.codemaker, params, 0, config.secret.as_ref())?;
            }
            layout_line(config, params)
        });
        match setup {
            Ok(line) => result.layouts.extend(line),
            Err(e) => {
                result.skipped.push(SkippedCell {
                    n,
                    reason: e.to_string(),
                });
                continue;
            }
        }
        let slots: Vec<Mutex<Option<Result<TrialRecord>>>> =
            (0..config.trials).map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = config.workers.max(1).min(config.trials.max(1));
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let trial = next.fetch_add(1, Ordering::Relaxed);
                    if trial >= config.trials {
                        break;
                    }
                    let outcome = run_trial(config, n, trial, false).map(|(r, _)| r);
                    *slots[trial].lock().unwrap() = Some(outcome);
                });
            }
        });
        for slot in slots {
            result
                .records
                .push(slot.into_inner().unwrap().expect("trial not run")?);
        }
    }
    Ok(result)
}

pub fn write_csv<W: Write>(records: &[TrialRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(format!("csv output failed: {e}"));
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        let [p0, p1, p2, p3] = r.phases;
        w.write_record([
            r.n.to_string(),
            r.k.to_string(),
            r.strategy.clone(),
            r.codemaker.clone(),
            r.mu.to_string(),
            r.seed.to_string(),
            r.queries.to_string(),
            p0.to_string(),
            p1.to_string(),
            p2.to_string(),
            p3.to_string(),
            r.won.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush()
        .map_err(|e| Error::InvalidArgument(format!("csv output failed: {e}")))?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<TrialRecord>> {
    let parse_err = |e: String| Error::Parse(e);
    let mut reader = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| parse_err(e.to_string()))?;
        let num = |i: usize| -> Result<u64> {
            row.get(i)
                .ok_or_else(|| parse_err(format!("missing column {i}")))?
                .parse::<u64>()
                .map_err(|e| parse_err(e.to_string()))
        };
        out.push(TrialRecord {
            n: num(0)? as usize,
            k: num(1)? as u8,
            strategy: row[2].to_string(),
            codemaker: row[3].to_string(),
            mu: num(4)? as usize,
            seed: num(5)?,
            queries: num(6)? as usize,
            phases: [
                num(7)? as usize,
                num(8)? as usize,
                num(9)? as usize,
                num(10)? as usize,
            ],
            won: &row[11] == "true",
        });
    }
    Ok(out)
}

fn median(sorted: &[usize]) -> f64 {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2] as f64
    } else {
        (sorted[m / 2 - 1] + sorted[m / 2]) as f64 / 2.0
    }
}

/// Per-(n, k) statistics in first-seen order.
pub fn summarize(records: &[TrialRecord]) -> Vec<CellSummary> {
    let mut cells: Vec<(usize, u8)> = Vec::new();
    for r in records {
        if !cells.contains(&(r.n, r.k)) {
            cells.push((r.n, r.k));
        }
    }
    cells
        .into_iter()
        .map(|(n, k)| {
            let mut q: Vec<usize> = records
                .iter()
                .filter(|r| r.n == n && r.k == k)
                .map(|r| r.queries)
                .collect();
            q.sort_unstable();
            let wins = records
                .iter()
                .filter(|r| r.n == n && r.k == k && r.won)
                .count();
            let mean = q.iter().sum::<usize>() as f64 / q.len() as f64;
            CellSummary {
                n,
                k,
                trials: q.len(),
                wins,
                mean,
                median: median(&q),
                max: *q.last().unwrap(),
                normalized: mean * (n as f64).log2() / n as f64,
            }
        })
        .collect()
}

pub fn format_summary(result: &GridResult) -> String {
    let mut out = String::from("n,k,trials,wins,mean,median,max,mean*log2(n)/n\n");
    for s in result.summaries() {
        out.push_str(&format!(
            "{},{},{},{},{:.2},{:.1},{},{:.4}\n",
            s.n, s.k, s.trials, s.wins, s.mean, s.median, s.max, s.normalized
        ));
    }
    for s in &result.skipped {
        out.push_str(&format!("skipped n={}: {}\n", s.n, s.reason));
    }
    out
}

/// Least-squares slope of `ln(y)` against `ln(x)`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    cov / var
}

/// A person answering at a terminal. Answers are range-checked; at small
/// `n` the codes consistent with all answers are tracked so a
/// contradiction is reported as soon as it happens.
pub struct HumanCodemaker<R, W> {
    params: GameParams,
    input: R,
    output: W,
    history: Vec<(Code, usize)>,
    consistent: Option<CandidateSet>,
}

/// Largest code space tracked for inconsistency detection.
const HUMAN_TRACK_CAP: u64 = 1 << 20;

impl<R: BufRead + Send, W: Write + Send> HumanCodemaker<R, W> {
    pub fn new(params: GameParams, input: R, output: W) -> Self {
        HumanCodemaker {
            params,
            input,
            output,
            history: Vec::new(),
            consistent: CandidateSet::full(params.n, params.k, HUMAN_TRACK_CAP).ok(),
        }
    }

    fn read_answer(&mut self, guess: &Code) -> Result<usize> {
        let io = |e: std::io::Error| Error::InvalidArgument(format!("terminal i/o failed: {e}"));
        loop {
            write!(
                self.output,
                "guess {}: {}\nblack pegs (0..={})? ",
                self.history.len() + 1,
                guess.to_text(self.params.k),
                self.params.n
            )
            .map_err(io)?;
            self.output.flush().map_err(io)?;
            let mut line = String::new();
            if self.input.read_line(&mut line).map_err(io)? == 0 {
                return Err(Error::InvalidArgument("input closed".into()));
            }
            match line.trim().parse::<usize>() {
                Ok(a) if a <= self.params.n => return Ok(a),
                _ => writeln!(
                    self.output,
                    "please enter a number between 0 and {}",
                    self.params.n
                )
                .map_err(io)?,
            }
        }
    }
}

impl<R: BufRead + Send, W: Write + Send> Codemaker for HumanCodemaker<R, W> {
    fn name(&self) -> &str {
        "interactive"
    }

    fn answer(&mut self, guess: &Code) -> Result<usize> {
        let a = self.read_answer(guess)?;
        self.history.push((guess.clone(), a));
        if let Some(set) = self.consistent.as_mut() {
            set.retain_eq(guess, a);
            if set.is_empty() {
                let mut msg = String::from("no code matches all answers:");
                for (g, b) in &self.history {
                    msg.push_str(&format!(" eq(z, {}) = {b};", g.to_text(self.params.k)));
                }
                return Err(Error::InvalidArgument(msg));
            }
        }
        Ok(a)
    }

    fn revealed(&self) -> Option<Code> {
        self.consistent.as_ref().and_then(CandidateSet::first)
    }
}

/// Plays one game against a person. Returns the process exit status:
/// 0 on a win, 1 when the query cap is hit, 2 on contradictory answers.
pub fn interactive_game<R: BufRead + Send, W: Write + Send>(
    strategy_name: &str,
    params: GameParams,
    layout: &LayoutOptions,
    mu: Option<usize>,
    seed: u64,
    input: R,
    mut output: W,
) -> Result<i32> {
    let strategy = strategy::build(strategy_name, params, layout)?;
    let mu = admissible_mu(strategy_name, mu, strategy.memory_size())?;
    let mut maker = HumanCodemaker::new(params, input, &mut output);
    match run_game(
        strategy.as_ref(),
        &mut maker,
        params,
        mu,
        seed,
        RunOptions::for_params(params),
    ) {
        Ok(t) if t.won() => {
            writeln!(output, "solved in {} guesses", t.query_count()).ok();
            Ok(0)
        }
        Ok(t) => {
            writeln!(output, "gave up after {} guesses", t.query_count()).ok();
            Ok(1)
        }
        Err(Error::InvalidArgument(msg)) if msg.starts_with("no code matches") => {
            writeln!(output, "inconsistent answers, {msg}").ok();
            Ok(2)
        }
        Err(e) => Err(e),
    }
}
