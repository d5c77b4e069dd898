//! The memory-restricted black-box scheme: a strategy sees only its memory
//! and a random stream, the harness owns everything else.

use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{eq, Code, Codemaker, GameParams};
use crate::{stream, RandomStream};

/// Ordered (guess, black answer) pairs, at most `capacity` of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Memory {
    pairs: Vec<(Code, usize)>,
    capacity: usize,
}

impl Memory {
    pub fn new(capacity: usize) -> Self {
        Memory {
            pairs: Vec::new(),
            capacity,
        }
    }

    /// A memory with the same capacity holding `pairs`.
    pub fn with_pairs(&self, pairs: Vec<(Code, usize)>) -> Self {
        Memory {
            pairs,
            capacity: self.capacity,
        }
    }

    pub fn pairs(&self) -> &[(Code, usize)] {
        &self.pairs
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// A codebreaker following the bounded-memory scheme. Implementations must
/// not keep mutable state: both steps are functions of their arguments.
pub trait Strategy: Send + Sync {
    fn name(&self) -> &str;

    /// Memory size the strategy is designed for.
    fn memory_size(&self) -> usize;

    fn variation(&self, memory: &Memory, rng: &mut RandomStream) -> Result<Code>;

    /// Picks the next memory from the old memory and the new pair.
    fn selection(
        &self,
        memory: &Memory,
        guess: &Code,
        answer: usize,
        rng: &mut RandomStream,
    ) -> Result<Memory>;

    /// Phase label (0..=3) of the query about to be made from `memory`.
    fn phase(&self, _memory: &Memory) -> usize {
        0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryRecord {
    pub guess: Code,
    pub black: usize,
    pub phase: usize,
}

/// Full history of one game.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub params: GameParams,
    pub seed: u64,
    pub mu: usize,
    pub strategy: String,
    pub codemaker: String,
    pub queries: Vec<QueryRecord>,
    /// Memory before every query plus the final memory, when recorded.
    pub memories: Option<Vec<Memory>>,
    pub winning_index: Option<usize>,
    /// Largest memory size seen after a selection step.
    pub max_memory: usize,
}

impl Transcript {
    pub fn won(&self) -> bool {
        self.winning_index.is_some()
    }

    pub fn query_count(&self) -> usize {
        self.queries.len()
    }

    /// Queries per phase label.
    pub fn phase_counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for q in &self.queries {
            counts[q.phase.min(3)] += 1;
        }
        counts
    }

    /// Header line followed by `index guess black` lines.
    pub fn to_text(&self) -> String {
        let k = self.params.k;
        let mut out = format!(
            "n={} k={} mu={} seed={} strategy={} codemaker={}\n",
            self.params.n, k, self.mu, self.seed, self.strategy, self.codemaker
        );
        for (i, q) in self.queries.iter().enumerate() {
            let _ = writeln!(out, "{i} {} {}", q.guess.to_text(k), q.black);
        }
        out
    }

    /// Parses the text form. Memory snapshots and phases are not part of it.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty transcript".into()))?;
        let get = |key: &str| -> Result<String> {
            header
                .split_whitespace()
                .find_map(|kv| kv.strip_prefix(key).and_then(|v| v.strip_prefix('=')))
                .map(str::to_string)
                .ok_or_else(|| Error::Parse(format!("header lacks {key}")))
        };
        let num = |v: String| {
            v.parse::<u64>()
                .map_err(|e| Error::Parse(format!("{v}: {e}")))
        };
        let n = num(get("n")?)? as usize;
        let k = num(get("k")?)? as u8;
        let mu = num(get("mu")?)? as usize;
        let seed = num(get("seed")?)?;
        let strategy = get("strategy")?;
        let codemaker = get("codemaker")?;
        let params = GameParams::new(n, k)?;
        let mut queries = Vec::new();
        let mut winning_index = None;
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("bad query line {line:?}")));
            }
            let index = num(fields[0].to_string())? as usize;
            if index != queries.len() {
                return Err(Error::Parse(format!("query index {index} out of order")));
            }
            let guess = Code::parse(fields[1], k)?;
            let black = num(fields[2].to_string())? as usize;
            if black == n {
                winning_index = Some(index);
            }
            queries.push(QueryRecord {
                guess,
                black,
                phase: 0,
            });
        }
        Ok(Transcript {
            params,
            seed,
            mu,
            strategy,
            codemaker,
            queries,
            memories: None,
            winning_index,
            max_memory: 0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    pub query_cap: usize,
    /// Keep every memory snapshot (needed for the statelessness check).
    pub record_memory: bool,
}

impl RunOptions {
    /// Default cap of `50 n` queries.
    pub fn for_params(params: GameParams) -> Self {
        RunOptions {
            query_cap: 50 * params.n,
            record_memory: false,
        }
    }
}

fn check_guess(params: GameParams, guess: &Code) -> Result<()> {
    if guess.len() != params.n {
        return Err(Error::ContractViolation(format!(
            "guess has length {} instead of {}",
            guess.len(),
            params.n
        )));
    }
    if let Some(c) = guess.as_slice().iter().find(|&&c| c >= params.k) {
        return Err(Error::ContractViolation(format!(
            "guess uses color {c} with k = {}",
            params.k
        )));
    }
    Ok(())
}

/// Every pair of `next` is either the new pair or one of the old pairs
/// (as a multiset), and there are at most `mu` of them.
fn check_selection(
    old: &Memory,
    next: &Memory,
    guess: &Code,
    answer: usize,
    mu: usize,
) -> Result<()> {
    if next.len() > mu {
        return Err(Error::ContractViolation(format!(
            "selection kept {} pairs with mu = {mu}",
            next.len()
        )));
    }
    let mut pool: Vec<Option<&(Code, usize)>> = old.pairs().iter().map(Some).collect();
    let mut new_used = false;
    for pair in next.pairs() {
        if let Some(slot) = pool.iter_mut().find(|p| p.is_some_and(|q| q == pair)) {
            *slot = None;
        } else if !new_used && pair.0 == *guess && pair.1 == answer {
            new_used = true;
        } else {
            return Err(Error::ContractViolation(
                "selection produced a pair that was neither stored nor queried".into(),
            ));
        }
    }
    Ok(())
}

/// Plays one game. The step-`j` query uses `stream(seed, j)` for both the
/// variation and the selection step.
pub fn run_game(
    strategy: &dyn Strategy,
    codemaker: &mut dyn Codemaker,
    params: GameParams,
    mu: usize,
    seed: u64,
    opts: RunOptions,
) -> Result<Transcript> {
    if mu == 0 || opts.query_cap == 0 {
        return Err(Error::InvalidArgument(
            "mu and the query cap must be positive".into(),
        ));
    }
    let mut memory = Memory::new(mu);
    let mut memories = opts.record_memory.then(Vec::new);
    let mut queries = Vec::new();
    let mut winning_index = None;
    let mut max_memory = 0;
    for j in 0..opts.query_cap {
        if let Some(m) = memories.as_mut() {
            m.push(memory.clone());
        }
        let mut rng = stream(seed, j as u64);
        let phase = strategy.phase(&memory);
        let guess = strategy.variation(&memory, &mut rng)?;
        check_guess(params, &guess)?;
        let black = codemaker.answer(&guess)?;
        let won = black == params.n;
        let next = strategy.selection(&memory, &guess, black, &mut rng)?;
        check_selection(&memory, &next, &guess, black, mu)?;
        max_memory = max_memory.max(next.len());
        memory = next;
        queries.push(QueryRecord {
            guess,
            black,
            phase,
        });
        if won {
            winning_index = Some(j);
            break;
        }
    }
    if let Some(m) = memories.as_mut() {
        m.push(memory);
    }
    Ok(Transcript {
        params,
        seed,
        mu,
        strategy: strategy.name().to_string(),
        codemaker: codemaker.name().to_string(),
        queries,
        memories,
        winning_index,
        max_memory,
    })
}

/// Replays a recorded game: every memory snapshot goes into a freshly built
/// strategy with the same stream. True iff every guess and every selection
/// is reproduced.
pub fn statelessness_check<F>(factory: F, transcript: &Transcript) -> Result<bool>
where
    F: Fn() -> Box<dyn Strategy>,
{
    let memories = transcript
        .memories
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("transcript has no memory snapshots".into()))?;
    for (j, q) in transcript.queries.iter().enumerate() {
        let fresh = factory();
        let mut rng = stream(transcript.seed, j as u64);
        let guess = match fresh.variation(&memories[j], &mut rng) {
            Ok(g) => g,
            Err(_) => return Ok(false),
        };
        if guess != q.guess {
            return Ok(false);
        }
        match fresh.selection(&memories[j], &guess, q.black, &mut rng) {
            Ok(next) if next == memories[j + 1] => {}
            _ => return Ok(false),
        }
    }
    Ok(true)
}

/// The game as a OneMax-type fitness function `x -> eq(z, x)`.
pub fn one_max_view(z: Code) -> impl Fn(&Code) -> usize {
    move |x| eq(&z, x).expect("length mismatch in fitness evaluation")
}

/// Negative control for the statelessness check: guesses are driven by a
/// hidden counter instead of the memory.
#[derive(Debug)]
pub struct HiddenCounterStrategy {
    params: GameParams,
    calls: AtomicUsize,
}

impl HiddenCounterStrategy {
    pub fn new(params: GameParams) -> Self {
        HiddenCounterStrategy {
            params,
            calls: AtomicUsize::new(0),
        }
    }
}

impl Strategy for HiddenCounterStrategy {
    fn name(&self) -> &str {
        "hidden-counter"
    }

    fn memory_size(&self) -> usize {
        1
    }

    fn variation(&self, _memory: &Memory, rng: &mut RandomStream) -> Result<Code> {
        let c = self.calls.fetch_add(1, Ordering::Relaxed);
        let mut guess = Code::constant(self.params.n, (c % self.params.k as usize) as u8);
        let p = rng.gen_range(0..self.params.n);
        guess[p] = rng.gen_range(0..self.params.k);
        Ok(guess)
    }

    fn selection(
        &self,
        memory: &Memory,
        guess: &Code,
        answer: usize,
        _rng: &mut RandomStream,
    ) -> Result<Memory> {
        Ok(memory.with_pairs(vec![(guess.clone(), answer)]))
    }
}
