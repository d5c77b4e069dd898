//! Size-one strategy. The single stored string carries every piece of state:
//!
//! ```text
//! [x1 | answer (ell_n) | blocks B_1..B_b | prefix copy (ell) | k-1 reference slots
//!  | t sample records | 0 ... | block counter (ell_s) | suffix]
//! ```
//!
//! A reference slot is `[bin(A_S) | bin(A_ref) | 1]`, a sample record
//! `[bin(A_S) | fragment | bin_ell_s(contribution) | 1]`, where `A_S` is the
//! answer of the stored string the query was derived from. Suffix `01`
//! marks the sampling phase; LinAlg phases keep a constant tail.

use rand::Rng;

use crate::codec::{
    binary_decode, substitute_block, tail_number, write_binary, LayoutKind, LayoutParams,
};
use crate::consistent::{consistent_fragments, BlockEvidence, DEFAULT_ENUMERATION_BUDGET};
use crate::error::{corrupt, Error, Result};
use crate::game::{eq_slices, Code, GameParams};
use crate::harness::{Memory, Strategy};
use crate::strategy::linalg::{linalg_guess, linalg_keep, other_color};
use crate::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeOneStep {
    /// Empty memory: a uniform constant string.
    Init,
    LinAlg {
        tn: usize,
    },
    /// First `ell` entries known: copy them and enter the sampling phase.
    Intermediate,
    /// Query reference color `c` on block `i`.
    RefSample {
        i: usize,
        c: usize,
    },
    /// Store the answer of reference `c` in its slot.
    RefStore {
        i: usize,
        c: usize,
    },
    Sample {
        i: usize,
    },
    /// Store the last sample as record `j`.
    Store {
        i: usize,
        j: usize,
    },
    /// Guess a fragment from the consistent set of block `i`.
    Resolve {
        i: usize,
    },
    /// Block `i` found: clear the scratch area and move to block `i + 1`.
    Update {
        i: usize,
    },
    /// All `b` blocks found: rebuild the prefix and mark a fresh tail.
    Prep,
    /// Only the last two positions are open.
    Endgame,
}

/// Reference slots and sample records of one block, read back from the
/// stored string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeOneHistory {
    pub block: usize,
    /// `(A_S, A_ref)` for reference colors `1..k`.
    pub references: Vec<(usize, usize)>,
    /// `(A_S, fragment, contribution)` per stored sample.
    pub samples: Vec<(usize, Code, usize)>,
}

impl SizeOneHistory {
    pub fn evidence(&self) -> BlockEvidence {
        self.samples
            .iter()
            .map(|(_, r, d)| (r.clone(), *d))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SizeOneStrategy {
    params: GameParams,
    layout: LayoutParams,
    budget: u64,
}

fn decode(field: &[u8]) -> Result<usize> {
    Ok(binary_decode(field)? as usize)
}

impl SizeOneStrategy {
    pub fn new(params: GameParams, layout: LayoutParams) -> Result<Self> {
        if layout.kind != LayoutKind::SizeOne || layout.n != params.n || layout.k != params.k {
            return Err(Error::InvalidArgument(
                "layout does not match the game".into(),
            ));
        }
        if layout.b > 0 && layout.ell + layout.ell_s + 2 >= params.n {
            return Err(Error::InfeasibleLayout(
                "no room for the sampling phase".into(),
            ));
        }
        Ok(SizeOneStrategy {
            params,
            layout,
            budget: DEFAULT_ENUMERATION_BUDGET,
        })
    }

    pub fn layout(&self) -> &LayoutParams {
        &self.layout
    }

    fn single<'a>(&self, memory: &'a Memory) -> Result<(&'a Code, usize)> {
        match memory.pairs() {
            [(x, a)] => Ok((x, *a)),
            other => Err(Error::ContractViolation(format!(
                "size-one memory holds {} pairs",
                other.len()
            ))),
        }
    }

    /// Decodes the dispatch for the next query.
    pub fn step(&self, memory: &Memory) -> Result<SizeOneStep> {
        if memory.is_empty() {
            return Ok(SizeOneStep::Init);
        }
        let (x, _) = self.single(memory)?;
        self.classify(x)
    }

    /// Phase of a stored string.
    pub fn classify(&self, x: &Code) -> Result<SizeOneStep> {
        let l = &self.layout;
        let n = self.params.n;
        let k = self.params.k as usize;
        if n >= 2 && x[n - 2] != x[n - 1] {
            if l.b == 0 || x[n - 2] != 0 || x[n - 1] != 1 {
                return Err(corrupt("unexpected suffix"));
            }
            let i = l.block_index_size_one(x)?;
            if i == l.b + 1 {
                return Ok(SizeOneStep::Prep);
            }
            if i == 0 || i > l.b {
                return Err(corrupt(format!(
                    "block counter {i} outside 1..={}",
                    l.b + 1
                )));
            }
            let q = l.query_count_size_one(x)?;
            let storing = x[0] == 1;
            return Ok(if q <= 1 || q < k {
                let c = q.max(1);
                if storing {
                    SizeOneStep::RefStore { i, c }
                } else {
                    SizeOneStep::RefSample { i, c }
                }
            } else if q < l.t + k {
                if storing {
                    SizeOneStep::Store { i, j: q - k + 1 }
                } else {
                    SizeOneStep::Sample { i }
                }
            } else if q == l.t + k {
                if storing {
                    SizeOneStep::Update { i }
                } else {
                    SizeOneStep::Resolve { i }
                }
            } else {
                return Err(corrupt(format!("sample count {q} beyond {}", l.t + k)));
            });
        }
        let tn = tail_number(x.as_slice());
        if tn + 1 >= n {
            Ok(SizeOneStep::Endgame)
        } else if l.b > 0 && tn == l.ell + 1 {
            Ok(SizeOneStep::Intermediate)
        } else {
            Ok(SizeOneStep::LinAlg { tn })
        }
    }

    fn copy<'a>(&self, x: &'a Code) -> &'a [u8] {
        &x.as_slice()[self.layout.prefix_copy_range()]
    }

    /// `eq` of a prefix field against the copied `z_1..z_ell`.
    fn f_tilde(&self, x: &Code, prefix: &[u8]) -> usize {
        eq_slices(self.copy(x), prefix).expect("prefix length")
    }

    fn f_tilde_zero(&self, x: &Code) -> usize {
        self.copy(x).iter().filter(|&&c| c == 0).count()
    }

    /// `eq(z|B_i, 0^s)` from the reference slots of `x`.
    pub fn zero_block_contribution(&self, x: &Code) -> Result<usize> {
        let l = &self.layout;
        let k = self.params.k as i64;
        let f0 = self.f_tilde_zero(x) as i64;
        let mut sum = 0i64;
        for c in 1..self.params.k as usize {
            let start = l.ref_slot_start(c);
            let xs = x.as_slice();
            if xs[start + 2 * l.ell_n] != 1 {
                return Err(corrupt(format!("reference slot {c} is empty")));
            }
            let a_s = decode(&xs[start..start + l.ell_n])?;
            let a_ref = decode(&xs[start + l.ell_n..start + 2 * l.ell_n])?;
            let mut prefix = vec![0u8; l.ell];
            prefix[0] = 1;
            write_binary(&mut prefix[1..], a_s as u64)?;
            sum += a_ref as i64 - a_s as i64 - self.f_tilde(x, &prefix) as i64 + f0;
        }
        let rest = l.s as i64 - sum;
        if rest < 0 || rest % k != 0 || rest / k > l.s as i64 {
            return Err(corrupt(format!("reference contributions sum to {sum}")));
        }
        Ok((rest / k) as usize)
    }

    /// Contribution of the block of `v` whose prefix is `prefix`, answer
    /// `av`, derived from a stored string with answer `a_s`.
    fn contribution_from(&self, v: &Code, prefix: &[u8], av: usize, a_s: usize) -> Result<usize> {
        let delta =
            av as i64 - a_s as i64 - self.f_tilde(v, prefix) as i64 + self.f_tilde_zero(v) as i64;
        let total = delta + self.zero_block_contribution(v)? as i64;
        if total < 0 || total > self.layout.s as i64 {
            return Err(corrupt(format!(
                "contribution {total} outside 0..={}",
                self.layout.s
            )));
        }
        Ok(total as usize)
    }

    /// Contribution of the current block of a sample query `v` (first entry
    /// 1, answer field holding the stored answer).
    pub fn sample_contribution(&self, v: &Code, av: usize) -> Result<usize> {
        let l = &self.layout;
        let a_s = decode(&v.as_slice()[1..l.ell])?;
        self.contribution_from(v, &v.as_slice()[..l.ell], av, a_s)
    }

    /// Contribution of a resolution query (prefix `1^ell`) made from `x`.
    pub fn resolution_contribution(&self, x: &Code, ax: usize, ay: usize) -> Result<usize> {
        let ones = vec![1u8; self.layout.ell];
        self.contribution_from(x, &ones, ay, ax)
    }

    /// Reads the reference slots and sample records of the current block.
    pub fn reconstruct_history(&self, x: &Code) -> Result<SizeOneHistory> {
        let l = &self.layout;
        let k = self.params.k as usize;
        let i = l.block_index_size_one(x)?;
        let q = l.query_count_size_one(x)?;
        let slots = if q <= 1 { 0 } else { (q - 1).min(k - 1) };
        let records = q.saturating_sub(k);
        let xs = x.as_slice();
        let mut references = Vec::new();
        for c in 1..=slots {
            let start = l.ref_slot_start(c);
            references.push((
                decode(&xs[start..start + l.ell_n])?,
                decode(&xs[start + l.ell_n..start + 2 * l.ell_n])?,
            ));
        }
        let mut samples = Vec::new();
        for j in 1..=records {
            let start = l.record_start_one(j);
            let a_s = decode(&xs[start..start + l.ell_n])?;
            let r = Code::new(xs[start + l.ell_n..start + l.ell_n + l.s].to_vec());
            let d = decode(&xs[start + l.ell_n + l.s..start + l.ell_n + l.s + l.ell_s])?;
            if xs[start + l.record_len_one() - 1] != 1 {
                return Err(corrupt(format!("record {j} lacks its end marker")));
            }
            samples.push((a_s, r, d));
        }
        Ok(SizeOneHistory {
            block: i,
            references,
            samples,
        })
    }

    /// Rebuilds every stored sample query and its answer from a string in
    /// the storing state (first entry 0).
    pub fn reconstruct_queries(&self, x: &Code) -> Result<Vec<(Code, usize)>> {
        let l = &self.layout;
        let history = self.reconstruct_history(x)?;
        let block = l.block_range(history.block)?;
        let d0 = self.zero_block_contribution(x)?;
        let f0 = self.f_tilde_zero(x);
        let mut out = Vec::new();
        for (j, (a_s, r, d)) in history.samples.iter().enumerate() {
            let mut v = x.clone();
            let start = l.record_start_one(j + 1);
            let end = l.record_start_one(history.samples.len() + 1);
            v.as_mut_slice()[start..end].fill(0);
            v[0] = 1;
            write_binary(&mut v.as_mut_slice()[1..l.ell], *a_s as u64)?;
            v.as_mut_slice()[block.clone()].copy_from_slice(r.as_slice());
            let f = self.f_tilde(x, &v.as_slice()[..l.ell]);
            let av = (*d + a_s + f) as i64 - d0 as i64 - f0 as i64;
            out.push((v, av as usize));
        }
        Ok(out)
    }

    fn evidence_set(&self, x: &Code, i: usize) -> Result<Vec<Code>> {
        let history = self.reconstruct_history(x)?;
        let set = consistent_fragments(
            &history.evidence(),
            self.layout.s,
            self.params.k,
            self.budget,
        )?;
        if set.is_empty() {
            return Err(corrupt(format!("block {i} has no consistent fragment")));
        }
        Ok(set)
    }

    fn sampling_query(&self, x: &Code, ax: usize, i: usize, fragment: &[u8]) -> Result<Code> {
        let l = &self.layout;
        let mut v = substitute_block(x, l.block_range(i)?, fragment)?;
        v[0] = 1;
        write_binary(&mut v.as_mut_slice()[1..l.ell], ax as u64)?;
        Ok(v)
    }

    /// Stored string with prefix and current block cleared.
    fn cleared(&self, x: &Code, i: usize) -> Result<Code> {
        let l = &self.layout;
        let mut v = x.clone();
        v.as_mut_slice()[..l.ell].fill(0);
        v.as_mut_slice()[l.block_range(i)?].fill(0);
        Ok(v)
    }
}

impl Strategy for SizeOneStrategy {
    fn name(&self) -> &str {
        "size-one"
    }

    fn memory_size(&self) -> usize {
        1
    }

    fn variation(&self, memory: &Memory, rng: &mut RandomStream) -> Result<Code> {
        let n = self.params.n;
        let k = self.params.k;
        let l = &self.layout;
        let step = self.step(memory)?;
        if step == SizeOneStep::Init {
            return Ok(Code::constant(n, rng.gen_range(0..k)));
        }
        let (x, ax) = self.single(memory)?;
        match step {
            SizeOneStep::Init => unreachable!(),
            SizeOneStep::LinAlg { .. } => Ok(linalg_guess(x, k, rng)),
            SizeOneStep::Intermediate => {
                let mut y = Code::zeros(n);
                let copy = l.prefix_copy_range();
                y.as_mut_slice()[copy].copy_from_slice(&x.as_slice()[..l.ell]);
                write_binary(&mut y.as_mut_slice()[l.counter_range()], 1)?;
                y[n - 1] = 1;
                Ok(y)
            }
            SizeOneStep::RefSample { i, c } => self.sampling_query(x, ax, i, &vec![c as u8; l.s]),
            SizeOneStep::Sample { i } => {
                let r: Vec<u8> = (0..l.s).map(|_| rng.gen_range(0..k)).collect();
                self.sampling_query(x, ax, i, &r)
            }
            SizeOneStep::RefStore { i, c } => {
                let a_s = decode(&x.as_slice()[1..l.ell])?;
                let mut v = self.cleared(x, i)?;
                let start = l.ref_slot_start(c);
                let vs = v.as_mut_slice();
                write_binary(&mut vs[start..start + l.ell_n], a_s as u64)?;
                write_binary(&mut vs[start + l.ell_n..start + 2 * l.ell_n], ax as u64)?;
                vs[start + 2 * l.ell_n] = 1;
                Ok(v)
            }
            SizeOneStep::Store { i, j } => {
                let a_s = decode(&x.as_slice()[1..l.ell])?;
                let d = self.sample_contribution(x, ax)?;
                let r = l.block_of(x, i)?.to_vec();
                let mut v = self.cleared(x, i)?;
                let start = l.record_start_one(j);
                let vs = v.as_mut_slice();
                write_binary(&mut vs[start..start + l.ell_n], a_s as u64)?;
                vs[start + l.ell_n..start + l.ell_n + l.s].copy_from_slice(&r);
                let d_field = start + l.ell_n + l.s;
                write_binary(&mut vs[d_field..d_field + l.ell_s], d as u64)?;
                vs[d_field + l.ell_s] = 1;
                Ok(v)
            }
            SizeOneStep::Resolve { i } => {
                let set = self.evidence_set(x, i)?;
                let w = &set[rng.gen_range(0..set.len())];
                let mut y = substitute_block(x, l.block_range(i)?, w.as_slice())?;
                y.as_mut_slice()[..l.ell].fill(1);
                Ok(y)
            }
            SizeOneStep::Update { i } => {
                let mut v = Code::zeros(n);
                let known = l.ell..l.ell + i * l.s;
                v.as_mut_slice()[known.clone()].copy_from_slice(&x.as_slice()[known]);
                let copy = l.prefix_copy_range();
                v.as_mut_slice()[copy.clone()].copy_from_slice(&x.as_slice()[copy]);
                write_binary(&mut v.as_mut_slice()[l.counter_range()], (i + 1) as u64)?;
                v[n - 1] = 1;
                Ok(v)
            }
            SizeOneStep::Prep => {
                let end = l.ell + l.b * l.s;
                let c = other_color(x[end - 1], k, rng);
                let mut v = Code::constant(n, c);
                v.as_mut_slice()[..l.ell].copy_from_slice(self.copy(x));
                v.as_mut_slice()[l.ell..end].copy_from_slice(&x.as_slice()[l.ell..end]);
                Ok(v)
            }
            SizeOneStep::Endgame => {
                let m = n.min(2);
                let options = (k as usize).pow(m as u32);
                let current = x.as_slice()[n - m..]
                    .iter()
                    .fold(0usize, |acc, &c| acc * k as usize + c as usize);
                let mut pick = rng.gen_range(0..options - 1);
                if pick >= current {
                    pick += 1;
                }
                let mut y = x.clone();
                for p in (n - m..n).rev() {
                    y[p] = (pick % k as usize) as u8;
                    pick /= k as usize;
                }
                Ok(y)
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
        let keep = match step {
            SizeOneStep::Init => true,
            SizeOneStep::LinAlg { .. } => {
                let (x, ax) = self.single(memory)?;
                linalg_keep(x, ax, guess, answer, self.params.k)
            }
            SizeOneStep::Resolve { .. } => {
                let (x, ax) = self.single(memory)?;
                self.resolution_contribution(x, ax, answer)? == self.layout.s
            }
            SizeOneStep::Endgame => answer == self.params.n,
            _ => true,
        };
        Ok(if keep {
            memory.with_pairs(vec![(guess.clone(), answer)])
        } else {
            memory.clone()
        })
    }

    fn phase(&self, memory: &Memory) -> usize {
        match self.step(memory) {
            Ok(SizeOneStep::Init) => 0,
            Ok(SizeOneStep::LinAlg { tn }) => {
                if tn <= self.layout.ell {
                    0
                } else {
                    2
                }
            }
            Ok(SizeOneStep::Prep) => 2,
            Ok(SizeOneStep::Endgame) => 3,
            Ok(_) => 1,
            Err(_) => 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::LayoutOptions;
    use crate::game::{eq, random_code, FixedCodemaker};
    use crate::harness::{run_game, RunOptions};
    use crate::stream;

    fn layout(n: usize, k: u8, s: usize, t: usize, b: usize) -> (GameParams, LayoutParams) {
        let params = GameParams::new(n, k).unwrap();
        let opts = LayoutOptions {
            block_size: Some(s),
            samples: Some(t),
            blocks: Some(b),
            big_k: 0.0,
            ..LayoutOptions::default()
        };
        (params, LayoutParams::size_one(params, &opts).unwrap())
    }

    #[test]
    fn sampling_run_has_exact_contributions() {
        for (k, s, t, b) in [(2u8, 8usize, 6usize, 9usize), (3, 6, 4, 14)] {
            let (params, layout) = layout(256, k, s, t, b);
            let strategy = SizeOneStrategy::new(params, layout).unwrap();
            let mut rng = stream(k as u64, 0);
            let z = random_code(params, &mut rng);
            let mut maker = FixedCodemaker::new(z.clone());
            let opts = RunOptions {
                query_cap: 50 * 256,
                record_memory: true,
            };
            let tr = run_game(&strategy, &mut maker, params, 1, 8, opts).unwrap();
            assert!(tr.won());
            assert!(tr.max_memory <= 1);
            let mut checked = 0;
            for m in tr.memories.unwrap() {
                let Ok(SizeOneStep::Store { i, .. }) = strategy.step(&m) else {
                    continue;
                };
                let (v, av) = strategy.single(&m).unwrap();
                let zb = Code::new(layout.block_of(&z, i).unwrap().to_vec());
                let r = Code::new(layout.block_of(v, i).unwrap().to_vec());
                assert_eq!(
                    strategy.sample_contribution(v, av).unwrap(),
                    eq(&zb, &r).unwrap()
                );
                checked += 1;
            }
            assert_eq!(checked, t * b);
        }
    }

    #[test]
    fn degenerate_layout_still_wins() {
        let (params, layout) = layout(100, 2, 8, 0, 0);
        let strategy = SizeOneStrategy::new(params, layout).unwrap();
        let mut rng = stream(4, 0);
        for trial in 0..5 {
            let mut maker = FixedCodemaker::random(params, &mut rng);
            let tr = run_game(
                &strategy,
                &mut maker,
                params,
                1,
                trial,
                RunOptions::for_params(params),
            )
            .unwrap();
            assert!(tr.won());
            assert_eq!(tr.phase_counts()[1], 0);
        }
    }

    #[test]
    fn tiny_games_end() {
        for n in 1..=6usize {
            for k in [2u8, 3] {
                let params = GameParams::new(n, k).unwrap();
                let layout = LayoutParams::size_one(params, &LayoutOptions::default()).unwrap();
                let strategy = SizeOneStrategy::new(params, layout).unwrap();
                let mut rng = stream(n as u64, k as u64);
                for trial in 0..10 {
                    let mut maker = FixedCodemaker::random(params, &mut rng);
                    let tr = run_game(
                        &strategy,
                        &mut maker,
                        params,
                        1,
                        trial,
                        RunOptions::for_params(params),
                    )
                    .unwrap();
                    assert!(tr.won(), "n={n} k={k}");
                }
            }
        }
    }
}
