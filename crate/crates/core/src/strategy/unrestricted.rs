//! Random guessing followed by guesses from the consistent set. Needs the
//! whole history, so it runs with effectively unbounded memory.

use rand::Rng;

use crate::consistent::{theorem_three_t, CandidateSet, DEFAULT_ENUMERATION_BUDGET};
use crate::error::{corrupt, Result};
use crate::game::{random_code, Code, GameParams};
use crate::harness::{Memory, Strategy};
use crate::RandomStream;

#[derive(Debug, Clone)]
pub struct UnrestrictedStrategy {
    params: GameParams,
    t: usize,
    budget: u64,
}

impl UnrestrictedStrategy {
    pub fn new(params: GameParams, epsilon: f64) -> Result<Self> {
        let t = theorem_three_t(params.n, params.k, epsilon)?;
        Self::with_samples(params, t)
    }

    pub fn with_samples(params: GameParams, t: usize) -> Result<Self> {
        crate::consistent::space_size(params.n, params.k, DEFAULT_ENUMERATION_BUDGET)?;
        Ok(UnrestrictedStrategy {
            params,
            t,
            budget: DEFAULT_ENUMERATION_BUDGET,
        })
    }

    pub fn samples(&self) -> usize {
        self.t
    }

    /// Codes consistent with every stored answer.
    pub fn consistent(&self, memory: &Memory) -> Result<CandidateSet> {
        let mut set = CandidateSet::full(self.params.n, self.params.k, self.budget)?;
        for (g, a) in memory.pairs() {
            set.retain_eq(g, *a);
        }
        Ok(set)
    }
}

impl Strategy for UnrestrictedStrategy {
    fn name(&self) -> &str {
        "unrestricted"
    }

    fn memory_size(&self) -> usize {
        self.t + 50 * self.params.n
    }

    fn variation(&self, memory: &Memory, rng: &mut RandomStream) -> Result<Code> {
        if memory.len() < self.t {
            return Ok(random_code(self.params, rng));
        }
        let set = self.consistent(memory)?;
        if set.is_empty() {
            return Err(corrupt("no code is consistent with the stored answers"));
        }
        Ok(set.code_at(rng.gen_range(0..set.len())))
    }

    fn selection(
        &self,
        memory: &Memory,
        guess: &Code,
        answer: usize,
        _rng: &mut RandomStream,
    ) -> Result<Memory> {
        let mut pairs = memory.pairs().to_vec();
        pairs.push((guess.clone(), answer));
        Ok(memory.with_pairs(pairs))
    }

    fn phase(&self, memory: &Memory) -> usize {
        usize::from(memory.len() >= self.t)
    }
}
