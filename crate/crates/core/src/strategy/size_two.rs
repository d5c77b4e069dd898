//! Size-two strategy: a sampling string `y` (`y_n = 0`) and a storage
//! string `x` (`x_n = 1`). Blocks are found one at a time by `k` reference
//! queries, `t` random samples and guesses from the consistent set.
//!
//! Storage string: `[bin(i) | record 1 | ... | record q | 0 ... | 1]`, a
//! record being `[fragment | bin(answer) | 1]`. Records `1..=k` are the
//! references `[c ... c]`, the first of them being `y` itself.

use rand::Rng;

use crate::codec::{substitute_block, write_binary, LayoutKind, LayoutParams};
use crate::consistent::{consistent_fragments, BlockEvidence, DEFAULT_ENUMERATION_BUDGET};
use crate::error::{corrupt, Error, Result};
use crate::game::{Code, GameParams};
use crate::harness::{Memory, Strategy};
use crate::strategy::linalg::other_color;
use crate::RandomStream;

/// What the next query does, decoded from the memory alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeTwoStep {
    /// Empty memory: `y = 0^n`.
    First,
    /// One pair: the storage string `[0 ... 0 | 1]`.
    InitStorage,
    /// Block `i` is done (or `i = 0`): new storage string for block `i + 1`.
    Advance {
        i: usize,
    },
    /// Append `y` as record `q + 1` of block `i`.
    Store {
        i: usize,
        q: usize,
    },
    /// Reference query with color `c` on block `i`.
    Reference {
        i: usize,
        c: usize,
    },
    Sample {
        i: usize,
    },
    /// Guess a fragment from the consistent set of block `i`.
    Resolve {
        i: usize,
    },
    /// All blocks known: recolor position `n`.
    Finish,
}

impl SizeTwoStep {
    pub fn phase(self) -> usize {
        match self {
            SizeTwoStep::First | SizeTwoStep::InitStorage => 0,
            SizeTwoStep::Advance { .. }
            | SizeTwoStep::Store { .. }
            | SizeTwoStep::Reference { .. }
            | SizeTwoStep::Sample { .. } => 1,
            SizeTwoStep::Resolve { .. } => 2,
            SizeTwoStep::Finish => 3,
        }
    }
}

/// The records of one block read back from a storage string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeTwoHistory {
    pub block: usize,
    /// Answers to the `k` reference queries, by color.
    pub references: Vec<usize>,
    /// Random fragments with the answers to their queries.
    pub samples: Vec<(Code, usize)>,
    /// On-block contribution of every sample.
    pub contributions: Vec<usize>,
}

impl SizeTwoHistory {
    pub fn evidence(&self) -> BlockEvidence {
        self.samples
            .iter()
            .zip(&self.contributions)
            .map(|((frag, _), &d)| (frag.clone(), d))
            .collect()
    }
}

/// `answer - (sum(references) - block_len) / k`.
pub fn delta_contribution(
    answer: usize,
    references: &[usize],
    block_len: usize,
    k: u8,
) -> Result<usize> {
    if references.len() != k as usize {
        return Err(Error::InvalidArgument(format!(
            "{} reference answers for k = {k}",
            references.len()
        )));
    }
    let sum: usize = references.iter().sum();
    if sum < block_len || !(sum - block_len).is_multiple_of(k as usize) {
        return Err(corrupt(format!(
            "reference sum {sum} does not fit block length {block_len}"
        )));
    }
    let off = (sum - block_len) / k as usize;
    if answer < off || answer - off > block_len {
        return Err(corrupt(format!(
            "contribution {answer} - {off} outside 0..={block_len}"
        )));
    }
    Ok(answer - off)
}

#[derive(Debug, Clone)]
pub struct SizeTwoStrategy {
    params: GameParams,
    layout: LayoutParams,
    budget: u64,
}

struct Pair<'a> {
    code: &'a Code,
    answer: usize,
    slot: usize,
}

impl SizeTwoStrategy {
    pub fn new(params: GameParams, layout: LayoutParams) -> Result<Self> {
        if layout.kind != LayoutKind::SizeTwo || layout.n != params.n || layout.k != params.k {
            return Err(Error::InvalidArgument(
                "layout does not match the game".into(),
            ));
        }
        Ok(SizeTwoStrategy {
            params,
            layout,
            budget: DEFAULT_ENUMERATION_BUDGET,
        })
    }

    pub fn layout(&self) -> &LayoutParams {
        &self.layout
    }

    fn roles<'a>(&self, memory: &'a Memory) -> Result<(Pair<'a>, Pair<'a>)> {
        let n = self.params.n;
        let mut x = None;
        let mut y = None;
        for (slot, (code, answer)) in memory.pairs().iter().enumerate() {
            let pair = Pair {
                code,
                answer: *answer,
                slot,
            };
            match code[n - 1] {
                1 if x.is_none() => x = Some(pair),
                0 if y.is_none() => y = Some(pair),
                _ => {
                    return Err(Error::ContractViolation(
                        "memory roles are ambiguous".into(),
                    ))
                }
            }
        }
        match (x, y) {
            (Some(x), Some(y)) => Ok((x, y)),
            _ => Err(Error::ContractViolation(
                "memory lacks a storage or sampling string".into(),
            )),
        }
    }

    /// Reads every record of the current block of `x`.
    pub fn reconstruct_history(&self, x: &Code) -> Result<SizeTwoHistory> {
        let l = &self.layout;
        let i = l.block_index_size_two(x)?;
        let q = l.query_count_size_two(x)?;
        let k = self.params.k as usize;
        let block_len = l.block_range(i)?.len();
        let mut references = Vec::with_capacity(k);
        let mut samples = Vec::new();
        for j in 1..=q {
            let (frag, answer) = l.read_record_two(x, i, j)?;
            if j <= k {
                if frag.as_slice().iter().any(|&c| c as usize != j - 1) {
                    return Err(corrupt(format!(
                        "reference record {j} is not constant {}",
                        j - 1
                    )));
                }
                references.push(answer);
            } else {
                samples.push((frag, answer));
            }
        }
        let contributions = if references.len() == k {
            samples
                .iter()
                .map(|(_, a)| delta_contribution(*a, &references, block_len, self.params.k))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        Ok(SizeTwoHistory {
            block: i,
            references,
            samples,
            contributions,
        })
    }

    fn reference_answers(&self, x: &Code, i: usize) -> Result<Vec<usize>> {
        (1..=self.params.k as usize)
            .map(|j| self.layout.read_record_two(x, i, j).map(|(_, a)| a))
            .collect()
    }

    /// On-block contribution of the sampling string `y`, once all `k`
    /// references of the current block are stored.
    pub fn contribution(&self, x: &Code, y_answer: usize) -> Result<usize> {
        let i = self.layout.block_index_size_two(x)?;
        let refs = self.reference_answers(x, i)?;
        delta_contribution(
            y_answer,
            &refs,
            self.layout.block_range(i)?.len(),
            self.params.k,
        )
    }

    /// Decodes the dispatch for the next query.
    pub fn step(&self, memory: &Memory) -> Result<SizeTwoStep> {
        match memory.len() {
            0 => return Ok(SizeTwoStep::First),
            1 => return Ok(SizeTwoStep::InitStorage),
            2 => {}
            m => {
                return Err(Error::ContractViolation(format!(
                    "size-two memory holds {m} pairs"
                )))
            }
        }
        let (x, y) = self.roles(memory)?;
        let l = &self.layout;
        let blocks = l.block_count();
        let i = l.block_index_size_two(x.code)?;
        if i == 0 {
            return Ok(SizeTwoStep::Advance { i: 0 });
        }
        if i == blocks + 1 {
            return Ok(SizeTwoStep::Finish);
        }
        if i > blocks + 1 {
            return Err(corrupt(format!("block counter {i} beyond {}", blocks + 1)));
        }
        let k = self.params.k as usize;
        let q = l.query_count_size_two(x.code)?;
        if q == 0 || q > l.t + k {
            return Err(corrupt(format!("record count {q} at block {i}")));
        }
        let block_len = l.block_range(i)?.len();
        if q >= k && self.contribution(x.code, y.answer)? == block_len {
            return Ok(SizeTwoStep::Advance { i });
        }
        if !l.part_flag(y.code, y.answer, x.code)? {
            return Ok(SizeTwoStep::Store { i, q });
        }
        Ok(if q < k {
            SizeTwoStep::Reference { i, c: q }
        } else if q < l.t + k {
            SizeTwoStep::Sample { i }
        } else {
            SizeTwoStep::Resolve { i }
        })
    }
}

impl Strategy for SizeTwoStrategy {
    fn name(&self) -> &str {
        "size-two"
    }

    fn memory_size(&self) -> usize {
        2
    }

    fn variation(&self, memory: &Memory, rng: &mut RandomStream) -> Result<Code> {
        let n = self.params.n;
        let k = self.params.k;
        let l = &self.layout;
        let step = self.step(memory)?;
        if let SizeTwoStep::First = step {
            return Ok(Code::zeros(n));
        }
        if let SizeTwoStep::InitStorage = step {
            let mut x = Code::zeros(n);
            x[n - 1] = 1;
            return Ok(x);
        }
        let (x, y) = self.roles(memory)?;
        match step {
            SizeTwoStep::First | SizeTwoStep::InitStorage => unreachable!(),
            SizeTwoStep::Advance { i } => {
                let mut next = Code::zeros(n);
                next[n - 1] = 1;
                write_binary(&mut next.as_mut_slice()[..l.ell_n], (i + 1) as u64)?;
                if i < l.block_count() {
                    let block = l.block_of(y.code, i + 1)?.to_vec();
                    l.write_record_two(&mut next, i + 1, 1, &block, y.answer)?;
                }
                Ok(next)
            }
            SizeTwoStep::Store { i, q } => {
                let mut next = x.code.clone();
                let block = l.block_of(y.code, i)?.to_vec();
                l.write_record_two(&mut next, i, q + 1, &block, y.answer)?;
                Ok(next)
            }
            SizeTwoStep::Reference { i, c } => {
                let range = l.block_range(i)?;
                let fill = vec![c as u8; range.len()];
                substitute_block(y.code, range, &fill)
            }
            SizeTwoStep::Sample { i } => {
                let range = l.block_range(i)?;
                let r: Vec<u8> = (0..range.len()).map(|_| rng.gen_range(0..k)).collect();
                substitute_block(y.code, range, &r)
            }
            SizeTwoStep::Resolve { i } => {
                let range = l.block_range(i)?;
                let history = self.reconstruct_history(x.code)?;
                let set = consistent_fragments(&history.evidence(), range.len(), k, self.budget)?;
                if set.is_empty() {
                    return Err(corrupt(format!("block {i} has no consistent fragment")));
                }
                let w = &set[rng.gen_range(0..set.len())];
                substitute_block(y.code, range, w.as_slice())
            }
            SizeTwoStep::Finish => {
                let mut guess = y.code.clone();
                guess[n - 1] = other_color(y.code[n - 1], k, rng);
                Ok(guess)
            }
        }
    }

    fn selection(
        &self,
        memory: &Memory,
        guess: &Code,
        answer: usize,
        _rng: &mut RandomStream,
    ) -> Result<Memory> {
        let step = self.step(memory)?;
        let new = (guess.clone(), answer);
        let mut pairs = memory.pairs().to_vec();
        match step {
            SizeTwoStep::First => pairs = vec![new],
            SizeTwoStep::InitStorage => pairs.push(new),
            SizeTwoStep::Advance { .. } | SizeTwoStep::Store { .. } => {
                let (x, _) = self.roles(memory)?;
                pairs[x.slot] = new;
            }
            SizeTwoStep::Reference { .. } | SizeTwoStep::Sample { .. } => {
                let (_, y) = self.roles(memory)?;
                pairs[y.slot] = new;
            }
            SizeTwoStep::Resolve { i } => {
                let (x, y) = self.roles(memory)?;
                let block_len = self.layout.block_range(i)?.len();
                if self.contribution(x.code, answer)? == block_len {
                    pairs[y.slot] = new;
                }
            }
            SizeTwoStep::Finish => {}
        }
        Ok(memory.with_pairs(pairs))
    }

    fn phase(&self, memory: &Memory) -> usize {
        self.step(memory).map_or(0, SizeTwoStep::phase)
    }
}
