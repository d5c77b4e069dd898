//! Brute-force consistent-set enumeration over `k^len` candidates.
//!
//! Candidates are indexed in base k with position 0 as the most significant
//! digit, so numeric order is lexicographic order.

use crate::error::{Error, Result};
use crate::game::{random_code, random_fragment, Code, GameParams};
use crate::RandomStream;

/// Default cap on the number of candidates any enumeration may scan.
pub const DEFAULT_ENUMERATION_BUDGET: u64 = 1 << 24;

/// `k^len`, or an error if it exceeds `budget`.
pub fn space_size(len: usize, k: u8, budget: u64) -> Result<u64> {
    let total = (k as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
    if total > budget as u128 {
        return Err(Error::EnumerationBudget {
            candidates: total,
            budget,
        });
    }
    Ok(total as u64)
}

/// Fragments of one block together with their contributions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BlockEvidence {
    samples: Vec<(Code, usize)>,
}

impl BlockEvidence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, fragment: Code, contribution: usize) -> Result<()> {
        if contribution > fragment.len() {
            return Err(Error::InvalidArgument(format!(
                "contribution {contribution} exceeds fragment length {}",
                fragment.len()
            )));
        }
        if let Some((first, _)) = self.samples.first() {
            if first.len() != fragment.len() {
                return Err(Error::LengthMismatch {
                    left: first.len(),
                    right: fragment.len(),
                });
            }
        }
        self.samples.push((fragment, contribution));
        Ok(())
    }

    pub fn samples(&self) -> &[(Code, usize)] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

impl FromIterator<(Code, usize)> for BlockEvidence {
    fn from_iter<I: IntoIterator<Item = (Code, usize)>>(iter: I) -> Self {
        BlockEvidence {
            samples: iter.into_iter().collect(),
        }
    }
}

fn binary_mask(code: &[u8]) -> u64 {
    code.iter()
        .fold(0u64, |acc, &c| (acc << 1) | u64::from(c == 1))
}

fn decode_index(mut idx: u64, len: usize, k: u8, out: &mut [u8]) {
    for slot in out[..len].iter_mut().rev() {
        *slot = (idx % k as u64) as u8;
        idx /= k as u64;
    }
}

fn encode_index(code: &[u8], k: u8) -> u64 {
    code.iter().fold(0u64, |acc, &c| acc * k as u64 + c as u64)
}

/// All fragments `w` of length `len` with `eq(w, sample) = contribution` for
/// every sample, in lexicographic order.
pub fn consistent_fragments(
    evidence: &BlockEvidence,
    len: usize,
    k: u8,
    budget: u64,
) -> Result<Vec<Code>> {
    if let Some((first, _)) = evidence.samples.first() {
        if first.len() != len {
            return Err(Error::LengthMismatch {
                left: len,
                right: first.len(),
            });
        }
    }
    let total = space_size(len, k, budget)?;
    let mut out = Vec::new();
    if k == 2 {
        let checks: Vec<(u64, u32)> = evidence
            .samples
            .iter()
            .map(|(frag, want)| (binary_mask(frag.as_slice()), *want as u32))
            .collect();
        let len32 = len as u32;
        let mut digits = vec![0u8; len];
        for idx in 0..total {
            if checks
                .iter()
                .all(|&(mask, want)| len32 - (idx ^ mask).count_ones() == want)
            {
                decode_index(idx, len, k, &mut digits);
                out.push(Code::new(digits.clone()));
            }
        }
    } else {
        let mut digits = vec![0u8; len];
        for idx in 0..total {
            if idx > 0 {
                // odometer step, last position is the least significant digit
                let mut p = len;
                while p > 0 {
                    p -= 1;
                    digits[p] += 1;
                    if digits[p] < k {
                        break;
                    }
                    digits[p] = 0;
                }
            }
            let ok = evidence.samples.iter().all(|(frag, want)| {
                digits
                    .iter()
                    .zip(frag.as_slice())
                    .filter(|(a, b)| a == b)
                    .count()
                    == *want
            });
            if ok {
                out.push(Code::new(digits.clone()));
            }
        }
    }
    Ok(out)
}

/// Chvátal's sample count `ceil((2+eps) * size * (1 + 2 log k) / (log size - log k))`
/// with base-2 logarithms.
pub fn theorem_three_t(size: usize, k: u8, epsilon: f64) -> Result<usize> {
    if size <= k as usize {
        return Err(Error::InvalidArgument(format!(
            "size {size} must exceed k = {k}"
        )));
    }
    if epsilon <= 0.0 {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    let lk = f64::from(k).log2();
    let value = (2.0 + epsilon) * size as f64 * (1.0 + 2.0 * lk) / ((size as f64).log2() - lk);
    let rounded = value.round();
    if (value - rounded).abs() < 1e-9 {
        Ok(rounded as usize)
    } else {
        Ok(value.ceil() as usize)
    }
}

/// Exact `E|S|` for a uniform secret and `t` uniform samples of length
/// `len`: `sum_d C(len,d) (k-1)^d p_d^t`, where `p_d` is the chance that a
/// sample cannot tell apart two fragments at Hamming distance `d`.
pub fn predicted_consistent_size(len: usize, k: u8, t: usize) -> f64 {
    let kf = f64::from(k);
    let hit = 1.0 / kf;
    let miss = (kf - 2.0) / kf;
    // ln of factorials up to len
    let mut ln_fact = vec![0.0f64; len + 1];
    for i in 1..=len {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let mut total = 0.0;
    for d in 0..=len {
        let tie = if d == 0 {
            1.0
        } else {
            (0..=d / 2)
                .map(|a| {
                    let rest = d - 2 * a;
                    if rest > 0 && miss == 0.0 {
                        return 0.0;
                    }
                    let ln_multi = ln_fact[d] - 2.0 * ln_fact[a] - ln_fact[rest];
                    let ln_p = 2.0 * a as f64 * hit.ln()
                        + if rest > 0 {
                            rest as f64 * miss.ln()
                        } else {
                            0.0
                        };
                    (ln_multi + ln_p).exp()
                })
                .sum::<f64>()
        };
        let ln_pairs = ln_fact[len] - ln_fact[d] - ln_fact[len - d] + d as f64 * (kf - 1.0).ln();
        total += ln_pairs.exp() * tie.powi(t as i32);
    }
    total
}

/// Consistent codes as a packed index set; used by the devil and the
/// unrestricted strategy.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    len: usize,
    k: u8,
    items: Vec<u64>,
}

impl CandidateSet {
    pub fn full(len: usize, k: u8, budget: u64) -> Result<Self> {
        let total = space_size(len, k, budget)?;
        Ok(CandidateSet {
            len,
            k,
            items: (0..total).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    fn scorer(&self, guess: &Code) -> impl Fn(u64) -> usize + '_ {
        let mask = binary_mask(guess.as_slice());
        let digits: Vec<u8> = guess.as_slice().to_vec();
        move |idx: u64| {
            if self.k == 2 {
                self.len - (idx ^ mask).count_ones() as usize
            } else {
                let mut rest = idx;
                let mut matches = 0;
                for &g in digits.iter().rev() {
                    if (rest % self.k as u64) as u8 == g {
                        matches += 1;
                    }
                    rest /= self.k as u64;
                }
                matches
            }
        }
    }

    /// Class sizes of the partition by `eq(., guess)`, indexed by eq value.
    pub fn eq_histogram(&self, guess: &Code) -> Vec<usize> {
        let score = self.scorer(guess);
        let mut counts = vec![0usize; self.len + 1];
        for &idx in &self.items {
            counts[score(idx)] += 1;
        }
        counts
    }

    pub fn retain_eq(&mut self, guess: &Code, value: usize) {
        let mask = binary_mask(guess.as_slice());
        let (len, k) = (self.len, self.k);
        let digits: Vec<u8> = guess.as_slice().to_vec();
        self.items.retain(|&idx| {
            let score = if k == 2 {
                len - (idx ^ mask).count_ones() as usize
            } else {
                let mut rest = idx;
                let mut matches = 0;
                for &g in digits.iter().rev() {
                    if (rest % k as u64) as u8 == g {
                        matches += 1;
                    }
                    rest /= k as u64;
                }
                matches
            };
            score == value
        });
    }

    pub fn contains(&self, code: &Code) -> bool {
        self.items
            .binary_search(&encode_index(code.as_slice(), self.k))
            .is_ok()
    }

    pub fn code_at(&self, i: usize) -> Code {
        let mut digits = vec![0u8; self.len];
        decode_index(self.items[i], self.len, self.k, &mut digits);
        Code::new(digits)
    }

    pub fn first(&self) -> Option<Code> {
        (!self.items.is_empty()).then(|| self.code_at(0))
    }

    pub fn codes(&self) -> Vec<Code> {
        (0..self.items.len()).map(|i| self.code_at(i)).collect()
    }
}

/// Size of the set of codes consistent with `eq(z, g)` for every guess.
pub fn consistent_set_size(secret: &Code, guesses: &[Code], k: u8, budget: u64) -> Result<usize> {
    let mut set = CandidateSet::full(secret.len(), k, budget)?;
    for g in guesses {
        let answer = crate::game::eq(secret, g)?;
        set.retain_eq(g, answer);
    }
    Ok(set.len())
}

/// Monte Carlo mean of `|S^consistent|` with `t` uniform guesses per secret.
pub fn mean_consistent_size(
    n: usize,
    k: u8,
    t: usize,
    trials: usize,
    rng: &mut RandomStream,
) -> Result<f64> {
    let params = GameParams::new(n, k)?;
    space_size(n, k, DEFAULT_ENUMERATION_BUDGET)?;
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial is needed".into(),
        ));
    }
    let mut total = 0usize;
    for _ in 0..trials {
        let z = random_code(params, rng);
        let guesses: Vec<Code> = (0..t).map(|_| random_fragment(n, k, rng)).collect();
        total += consistent_set_size(&z, &guesses, k, DEFAULT_ENUMERATION_BUDGET)?;
    }
    Ok(total as f64 / trials as f64)
}

/// Mean consistent-set size with `theorem_three_t` uniform guesses.
pub fn expected_consistent_size(
    n: usize,
    k: u8,
    epsilon: f64,
    trials: usize,
    rng: &mut RandomStream,
) -> Result<f64> {
    let t = theorem_three_t(n, k, epsilon)?;
    mean_consistent_size(n, k, t, trials, rng)
}
