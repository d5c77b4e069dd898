//! Randomized local search: memory one, recolor one position, keep the
//! better string (ties go to the new one).

use rand::Rng;

use crate::error::{Error, Result};
use crate::game::{random_code, Code, GameParams};
use crate::harness::{Memory, Strategy};
use crate::strategy::linalg::other_color;
use crate::RandomStream;

#[derive(Debug, Clone)]
pub struct RlsStrategy {
    params: GameParams,
}

impl RlsStrategy {
    pub fn new(params: GameParams) -> Self {
        RlsStrategy { params }
    }
}

impl Strategy for RlsStrategy {
    fn name(&self) -> &str {
        "rls"
    }

    fn memory_size(&self) -> usize {
        1
    }

    fn variation(&self, memory: &Memory, rng: &mut RandomStream) -> Result<Code> {
        match memory.pairs() {
            [] => Ok(random_code(self.params, rng)),
            [(x, _)] => {
                let mut y = x.clone();
                let p = rng.gen_range(0..self.params.n);
                y[p] = other_color(x[p], self.params.k, rng);
                Ok(y)
            }
            _ => Err(Error::ContractViolation("rls holds one pair".into())),
        }
    }

    fn selection(
        &self,
        memory: &Memory,
        guess: &Code,
        answer: usize,
        _rng: &mut RandomStream,
    ) -> Result<Memory> {
        let keep_new = match memory.pairs() {
            [] => true,
            [(_, old)] => answer >= *old,
            _ => return Err(Error::ContractViolation("rls holds one pair".into())),
        };
        Ok(if keep_new {
            memory.with_pairs(vec![(guess.clone(), answer)])
        } else {
            memory.clone()
        })
    }
}
