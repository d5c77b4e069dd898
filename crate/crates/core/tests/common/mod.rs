//! Checks shared by the integration tests and the acceptance binary. Every
//! check returns `Err(reason)` on the first violation and a short summary
//! otherwise.

#![allow(dead_code)]

use mastermind_core::codec::{
    binary_decode, binary_encode, last_one_pos, substitute_block, tail_number, LayoutOptions,
    LayoutParams,
};
use mastermind_core::game::{
    eq, random_code, random_fragment, white_pegs, Codemaker, DevilCodemaker,
};
use mastermind_core::harness::{run_game, RunOptions, Transcript};
use mastermind_core::strategy::size_one::SizeOneStep;
use mastermind_core::strategy::size_two::SizeTwoStep;
use mastermind_core::strategy::{SizeOneStrategy, SizeTwoStrategy};
use mastermind_core::{stream, Code, FixedCodemaker, GameParams, Memory, Result as CoreResult};
use rand::Rng;

pub type Check<T = String> = std::result::Result<T, String>;

pub fn params(n: usize, k: u8) -> GameParams {
    GameParams::new(n, k).unwrap()
}

/// Layout options with every derived constant pinned.
pub fn pinned(s: usize, t: usize, b: usize) -> LayoutOptions {
    LayoutOptions {
        block_size: Some(s),
        samples: Some(t),
        blocks: Some(b),
        big_k: 0.0,
        ..LayoutOptions::default()
    }
}

/// Size-one layouts at n = 256 that actually sample: `(k, options)`.
pub fn size_one_sampling_layouts() -> Vec<(u8, LayoutOptions)> {
    vec![(2, pinned(8, 6, 9)), (3, pinned(6, 4, 14))]
}

pub fn recorded(n: usize) -> RunOptions {
    RunOptions {
        query_cap: 50 * n,
        record_memory: true,
    }
}

fn block(layout: &LayoutParams, x: &Code, i: usize) -> Code {
    Code::new(layout.block_of(x, i).unwrap().to_vec())
}

fn memories(t: &Transcript) -> &[Memory] {
    t.memories
        .as_deref()
        .expect("transcript without memory snapshots")
}

/// Plays one recorded size-one game against a uniform secret.
pub fn size_one_game(
    n: usize,
    k: u8,
    opts: &LayoutOptions,
    seed: u64,
) -> (SizeOneStrategy, Code, Transcript) {
    let p = params(n, k);
    let strategy = SizeOneStrategy::new(p, LayoutParams::size_one(p, opts).unwrap()).unwrap();
    let z = random_code(p, &mut stream(seed, 1 << 62));
    let mut maker = FixedCodemaker::new(z.clone());
    let t = run_game(&strategy, &mut maker, p, 1, seed, recorded(n)).unwrap();
    (strategy, z, t)
}

pub fn size_two_game(
    n: usize,
    k: u8,
    opts: &LayoutOptions,
    seed: u64,
) -> (SizeTwoStrategy, Code, Transcript) {
    let p = params(n, k);
    let strategy = SizeTwoStrategy::new(p, LayoutParams::size_two(p, opts).unwrap()).unwrap();
    let z = random_code(p, &mut stream(seed, 1 << 62));
    let mut maker = FixedCodemaker::new(z.clone());
    let t = run_game(&strategy, &mut maker, p, 2, seed, recorded(n)).unwrap();
    (strategy, z, t)
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct DeltaCounts {
    pub checked: usize,
    pub mismatches: usize,
}

/// Every contribution the size-one strategy derives (stored samples and
/// resolution guesses) against `eq(z|B, fragment)`.
pub fn size_one_deltas(s: &SizeOneStrategy, z: &Code, t: &Transcript) -> Check<DeltaCounts> {
    let l = *s.layout();
    let mems = memories(t);
    let mut c = DeltaCounts::default();
    for (j, q) in t.queries.iter().enumerate() {
        let m = &mems[j];
        let step = s.step(m).map_err(|e| format!("query {j}: {e}"))?;
        let (x, ax) = match m.pairs() {
            [(x, a)] => (x, *a),
            _ => continue,
        };
        let (computed, frag, i) = match step {
            SizeOneStep::Store { i, .. } => (s.sample_contribution(x, ax), block(&l, x, i), i),
            SizeOneStep::Resolve { i } => (
                s.resolution_contribution(x, ax, q.black),
                block(&l, &q.guess, i),
                i,
            ),
            _ => continue,
        };
        let computed = computed.map_err(|e| format!("query {j}: {e}"))?;
        c.checked += 1;
        if computed != eq(&block(&l, z, i), &frag).unwrap() {
            c.mismatches += 1;
        }
    }
    Ok(c)
}

/// Contributions of every size-two record and every resolution guess.
pub fn size_two_deltas(s: &SizeTwoStrategy, z: &Code, t: &Transcript) -> Check<DeltaCounts> {
    let l = *s.layout();
    let mut c = DeltaCounts::default();
    for (j, m) in memories(t).iter().enumerate() {
        let step = s.step(m).map_err(|e| format!("memory {j}: {e}"))?;
        let i = match step {
            SizeTwoStep::Sample { i } | SizeTwoStep::Resolve { i } => i,
            _ => continue,
        };
        let (x, _) = roles_two(m, l.n);
        let h = s
            .reconstruct_history(x)
            .map_err(|e| format!("memory {j}: {e}"))?;
        let zb = block(&l, z, i);
        for ((frag, _), d) in h.samples.iter().zip(&h.contributions) {
            c.checked += 1;
            if *d != eq(&zb, frag).unwrap() {
                c.mismatches += 1;
            }
        }
        if let (SizeTwoStep::Resolve { .. }, Some(q)) = (step, t.queries.get(j)) {
            let d = s
                .contribution(x, q.black)
                .map_err(|e| format!("query {j}: {e}"))?;
            c.checked += 1;
            if d != eq(&zb, &block(&l, &q.guess, i)).unwrap() {
                c.mismatches += 1;
            }
        }
    }
    Ok(c)
}

/// `(x, y)` of a two-pair size-two memory: storage string ends in 1.
pub fn roles_two(m: &Memory, n: usize) -> (&Code, (&Code, usize)) {
    let p = m.pairs();
    let (xs, ys) = if p[0].0[n - 1] == 1 { (0, 1) } else { (1, 0) };
    (&p[xs].0, (&p[ys].0, p[ys].1))
}

/// Compares the records read back from the last storage string of every
/// block with the queries that were actually asked. Returns the number of
/// blocks checked.
pub fn size_two_history(s: &SizeTwoStrategy, t: &Transcript) -> Check<usize> {
    let l = *s.layout();
    let k = l.k as usize;
    let mems = memories(t);
    let steps: Vec<Option<SizeTwoStep>> = mems.iter().map(|m| s.step(m).ok()).collect();
    let mut checked = 0;
    for i in 1..=l.block_count() {
        // ground truth: the sampling string when block i opens, then every
        // reference / sample query that was stored right after
        let mut truth: Vec<(Code, usize)> = Vec::new();
        let mut last_x = None;
        for (j, step) in steps.iter().enumerate() {
            match step {
                Some(SizeTwoStep::Advance { i: a }) if *a + 1 == i => {
                    let (_, (y, ay)) = roles_two(&mems[j], l.n);
                    truth.push((block(&l, y, i), ay));
                }
                Some(SizeTwoStep::Store { i: b, .. }) if *b == i => {
                    let (_, (y, ay)) = roles_two(&mems[j], l.n);
                    truth.push((block(&l, y, i), ay));
                }
                _ => {}
            }
            let bi = mems[j].len() == 2 && {
                let (x, _) = roles_two(&mems[j], l.n);
                l.block_index_size_two(x).ok() == Some(i)
            };
            if bi {
                last_x = Some(j);
            }
        }
        // the stored queries themselves must appear in the transcript
        for (frag, a) in &truth {
            let asked = t
                .queries
                .iter()
                .any(|q| q.black == *a && &block(&l, &q.guess, i) == frag);
            if !asked {
                return Err(format!("block {i}: stored pair never asked"));
            }
        }
        let Some(j) = last_x else { continue };
        let (x, _) = roles_two(&mems[j], l.n);
        let h = s
            .reconstruct_history(x)
            .map_err(|e| format!("block {i}: {e}"))?;
        let mut got: Vec<(Code, usize)> = (0..h.references.len())
            .map(|c| {
                (
                    Code::constant(l.block_range(i).unwrap().len(), c as u8),
                    h.references[c],
                )
            })
            .collect();
        got.extend(h.samples.iter().cloned());
        if got != truth {
            return Err(format!(
                "block {i}: {} records read, {} stored",
                got.len(),
                truth.len()
            ));
        }
        if h.references.len() == k {
            checked += 1;
        }
    }
    Ok(checked)
}

/// For every block, the sample queries rebuilt from the storage string at
/// resolution time equal the sample queries in the transcript, and the
/// reference slots hold the reference answers.
pub fn size_one_history(s: &SizeOneStrategy, t: &Transcript) -> Check<usize> {
    let l = *s.layout();
    let k = l.k as usize;
    let mems = memories(t);
    let mut samples: Vec<(Code, usize)> = Vec::new();
    let mut refs: Vec<usize> = Vec::new();
    let mut checked = 0;
    let mut resolved = 0;
    for (j, q) in t.queries.iter().enumerate() {
        let step = s.step(&mems[j]).map_err(|e| format!("query {j}: {e}"))?;
        match step {
            SizeOneStep::Sample { .. } => samples.push((q.guess.clone(), q.black)),
            SizeOneStep::RefSample { .. } => refs.push(q.black),
            // a wrong resolution guess leaves the string unchanged
            SizeOneStep::Resolve { i } if i == resolved => {}
            SizeOneStep::Resolve { i } => {
                resolved = i;
                let x = &mems[j].pairs()[0].0;
                let rebuilt = s
                    .reconstruct_queries(x)
                    .map_err(|e| format!("block {i}: {e}"))?;
                if rebuilt != samples {
                    return Err(format!(
                        "block {i}: rebuilt sample queries differ from the transcript"
                    ));
                }
                let h = s
                    .reconstruct_history(x)
                    .map_err(|e| format!("block {i}: {e}"))?;
                let stored: Vec<usize> = h.references.iter().map(|r| r.1).collect();
                if stored.len() != k - 1 || stored[..] != refs[refs.len() + 1 - k..] {
                    return Err(format!(
                        "block {i}: reference slots {stored:?} vs asked {refs:?}"
                    ));
                }
                let frags: Vec<Code> = h.samples.iter().map(|r| r.1.clone()).collect();
                let asked: Vec<Code> = samples.iter().map(|(v, _)| block(&l, v, i)).collect();
                if frags != asked {
                    return Err(format!("block {i}: stored fragments differ"));
                }
                samples.clear();
                refs.clear();
                checked += 1;
            }
            _ => {}
        }
    }
    Ok(checked)
}

/// Prefix copy integrity: while sampling, the copy field holds `z_1..z_ell`.
pub fn size_one_prefix_copy(s: &SizeOneStrategy, z: &Code, t: &Transcript) -> Check<usize> {
    let l = *s.layout();
    let want = &z.as_slice()[..l.ell];
    let mut checked = 0;
    for m in memories(t) {
        let Ok(step) = s.step(m) else { continue };
        let sampling = matches!(
            step,
            SizeOneStep::RefSample { .. }
                | SizeOneStep::RefStore { .. }
                | SizeOneStep::Sample { .. }
                | SizeOneStep::Store { .. }
                | SizeOneStep::Resolve { .. }
                | SizeOneStep::Update { .. }
        );
        if sampling {
            if &m.pairs()[0].0.as_slice()[l.prefix_copy_range()] != want {
                return Err("prefix copy differs from the secret prefix".into());
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Binary, substitute/blockOf, tn/p1 laws. Returns the number of cases.
pub fn codec_laws(random_cases: usize, seed: u64) -> Check<usize> {
    let mut cases = 0;
    for n in 1..=4096usize {
        let ell_n = mastermind_core::codec::ceil_log2(n) + 1;
        if n <= 64 || n.is_power_of_two() || n % 97 == 0 {
            for h in 0..=n as u64 {
                let code = binary_encode(h, ell_n).map_err(|e| e.to_string())?;
                if binary_decode(code.as_slice()).map_err(|e| e.to_string())? != h {
                    return Err(format!("binary round trip fails for h={h} width {ell_n}"));
                }
                cases += 1;
            }
        }
    }
    for s in 1..=64usize {
        let ell_s = mastermind_core::codec::ceil_log2(s) + 1;
        for h in 0..=s as u64 {
            let code = binary_encode(h, ell_s).map_err(|e| e.to_string())?;
            if binary_decode(code.as_slice()).unwrap() != h {
                return Err(format!("binary round trip fails for h={h} width {ell_s}"));
            }
            cases += 1;
        }
    }
    // exhaustive tn / p1 for k = 2, n <= 10
    for n in 1..=10usize {
        for bits in 0u32..(1 << n) {
            let x: Vec<u8> = (0..n).map(|p| ((bits >> p) & 1) as u8).collect();
            check_tn_p1(&x)?;
            cases += 1;
        }
    }
    let mut rng = stream(seed, 0);
    for _ in 0..random_cases {
        let n = rng.gen_range(1..=64usize);
        let k = rng.gen_range(2..=4u8);
        let mut x = random_fragment(n, k, &mut rng).into_vec();
        // long constant tails are the interesting case
        let from = rng.gen_range(0..n);
        let c = rng.gen_range(0..k);
        x[from..].fill(c);
        check_tn_p1(&x)?;
        let x = Code::new(x);
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(a..=n);
        let r = random_fragment(b - a, k, &mut rng);
        let y = substitute_block(&x, a..b, r.as_slice()).map_err(|e| e.to_string())?;
        if y.as_slice()[a..b] != *r.as_slice() {
            return Err("blockOf(substitute(x, B, r), B) != r".into());
        }
        if (0..n).any(|p| !(a..b).contains(&p) && y[p] != x[p]) {
            return Err("substitute changed a position outside the block".into());
        }
        let back = substitute_block(&y, a..b, &x.as_slice()[a..b]).unwrap();
        if back != x {
            return Err("substitute(x, B, blockOf(x, B)) != x".into());
        }
        cases += 1;
    }
    Ok(cases)
}

fn check_tn_p1(x: &[u8]) -> Check<()> {
    let n = x.len();
    let tn = (1..=n)
        .find(|&i| x[i - 1..].iter().all(|&c| c == x[n - 1]))
        .unwrap();
    if tail_number(x) != tn {
        return Err(format!("tn({x:?}) = {} instead of {tn}", tail_number(x)));
    }
    for limit in 0..=n {
        let p1 = (1..=limit).rev().find(|&i| x[i - 1] == 1).unwrap_or(0);
        if last_one_pos(x, limit) != p1 {
            return Err(format!("p1({x:?}, {limit}) wrong"));
        }
    }
    Ok(())
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for at in 0..=p.len() {
            let mut q = p.clone();
            q.insert(at, n - 1);
            out.push(q);
        }
    }
    out
}

fn white_pegs_brute(z: &Code, x: &Code, perms: &[Vec<usize>]) -> usize {
    let base = eq(z, x).unwrap();
    let best = perms
        .iter()
        .map(|p| {
            let moved = Code::new(p.iter().map(|&i| x[i]).collect());
            eq(z, &moved).unwrap()
        })
        .max()
        .unwrap();
    best - base
}

/// White pegs against the permutation definition.
pub fn white_peg_laws(random_cases: usize, seed: u64) -> Check<usize> {
    let mut cases = 0;
    for n in 1..=5usize {
        let perms = permutations(n);
        for k in 2..=3u8 {
            let total = (k as usize).pow(n as u32);
            let decode = |mut v: usize| {
                Code::new(
                    (0..n)
                        .map(|_| {
                            let d = (v % k as usize) as u8;
                            v /= k as usize;
                            d
                        })
                        .collect(),
                )
            };
            for a in 0..total {
                for b in 0..total {
                    let (z, x) = (decode(a), decode(b));
                    if white_pegs(&z, &x).unwrap() != white_pegs_brute(&z, &x, &perms) {
                        return Err(format!("white pegs differ for z={z:?} x={x:?}"));
                    }
                    cases += 1;
                }
            }
        }
    }
    let mut rng = stream(seed, 1);
    let all: Vec<Vec<Vec<usize>>> = (0..=6).map(permutations).collect();
    for _ in 0..random_cases {
        let n = rng.gen_range(1..=6usize);
        let k = rng.gen_range(2..=6u8);
        let z = random_fragment(n, k, &mut rng);
        let x = random_fragment(n, k, &mut rng);
        if white_pegs(&z, &x).unwrap() != white_pegs_brute(&z, &x, &all[n]) {
            return Err(format!("white pegs differ for z={z:?} x={x:?}"));
        }
        cases += 1;
    }
    Ok(cases)
}

/// Devil that records the size of its consistent set after every answer.
pub struct WatchedDevil {
    pub inner: DevilCodemaker,
    pub smallest: usize,
    pub answers: usize,
}

impl WatchedDevil {
    pub fn new(p: GameParams) -> Self {
        Self::with_cap(p, mastermind_core::game::DEFAULT_DEVIL_CAP)
    }

    pub fn with_cap(p: GameParams, cap: u64) -> Self {
        let inner = DevilCodemaker::with_cap(p, cap).unwrap();
        WatchedDevil {
            smallest: inner.consistent_len(),
            inner,
            answers: 0,
        }
    }
}

impl Codemaker for WatchedDevil {
    fn name(&self) -> &str {
        "devil"
    }

    fn answer(&mut self, guess: &Code) -> CoreResult<usize> {
        let a = self.inner.answer(guess)?;
        self.answers += 1;
        self.smallest = self.smallest.min(self.inner.consistent_len());
        Ok(a)
    }

    fn revealed(&self) -> Option<Code> {
        self.inner.revealed()
    }
}

/// LinAlg calls and determined positions over recorded size-one games with
/// no sampling phase.
pub fn linalg_calls<F>(n: usize, games: usize, seed: u64, mut maker: F) -> (usize, usize)
where
    F: FnMut(GameParams, u64) -> Box<dyn Codemaker>,
{
    let p = params(n, 2);
    let strategy =
        SizeOneStrategy::new(p, LayoutParams::size_one(p, &pinned(8, 0, 0)).unwrap()).unwrap();
    let (mut calls, mut positions) = (0, 0);
    for g in 0..games {
        let game_seed = seed + g as u64;
        let mut m = maker(p, game_seed);
        let t = run_game(&strategy, m.as_mut(), p, 1, game_seed, recorded(n)).unwrap();
        assert!(t.won(), "LinAlg game lost");
        let mems = memories(&t);
        let mut first = None;
        let mut last = 0;
        for m in &mems[..t.queries.len()] {
            if let Ok(SizeOneStep::LinAlg { tn }) = s_step(&strategy, m) {
                calls += 1;
                first.get_or_insert(tn);
                last = tn;
            }
        }
        if let Some(f) = first {
            // the final call moves the frontier from `last` to `last + 1`
            positions += last + 1 - f;
        }
    }
    (calls, positions)
}

fn s_step(s: &SizeOneStrategy, m: &Memory) -> CoreResult<SizeOneStep> {
    s.step(m)
}
