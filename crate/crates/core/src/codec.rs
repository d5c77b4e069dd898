//! String bookkeeping shared by the encoding strategies.
//!
//! Positions in the documentation are 1-based like the game itself; block
//! ranges returned by this module are 0-based half-open index ranges.

use std::fmt;
use std::ops::Range;

use crate::consistent::{predicted_consistent_size, theorem_three_t, DEFAULT_ENUMERATION_BUDGET};
use crate::error::{corrupt, Error, Result};
use crate::game::{Code, GameParams};

/// Largest block length whose `k^s` fragments stay below this many
/// candidates when `s` is chosen automatically.
pub const DESK_ENUMERATION_CAP: u64 = 1 << 20;

/// `ceil(log2 x)` for `x >= 1`.
pub fn ceil_log2(x: usize) -> usize {
    assert!(x >= 1, "ceil_log2 of zero");
    (usize::BITS - (x - 1).leading_zeros()) as usize
}

/// `ceil(sqrt(n))` without floating point.
pub fn ceil_sqrt(n: usize) -> usize {
    let mut r = (n as f64).sqrt() as usize;
    while r * r < n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r
}

/// Largest `s` with `k^s <= cap`.
pub fn max_block_for_cap(k: u8, cap: u64) -> usize {
    let mut s = 0usize;
    let mut size = 1u128;
    while size * k as u128 <= cap as u128 {
        size *= k as u128;
        s += 1;
    }
    s
}

/// Tail number: smallest 1-based `i` with `x_j = x_i` for all `j >= i`.
pub fn tail_number(x: &[u8]) -> usize {
    assert!(!x.is_empty(), "tail number of an empty string");
    let last = x[x.len() - 1];
    let mut i = x.len();
    while i > 1 && x[i - 2] == last {
        i -= 1;
    }
    i
}

/// Largest 1-based position `i <= limit` with `x_i = 1`, or 0 if there is
/// none.
pub fn last_one_pos(x: &[u8], limit: usize) -> usize {
    let limit = limit.min(x.len());
    x[..limit]
        .iter()
        .rposition(|&c| c == 1)
        .map_or(0, |p| p + 1)
}

/// Binary expansion of `h` in `width` digits, most significant first.
pub fn binary_encode(h: u64, width: usize) -> Result<Code> {
    let mut out = vec![0u8; width];
    write_binary(&mut out, h)?;
    Ok(Code::new(out))
}

/// Writes `h` into `field` in binary, most significant digit first.
pub fn write_binary(field: &mut [u8], h: u64) -> Result<()> {
    let width = field.len();
    if width < 64 && h >> width != 0 {
        return Err(Error::InvalidArgument(format!(
            "{h} does not fit in {width} binary digits"
        )));
    }
    for (i, slot) in field.iter_mut().enumerate() {
        let shift = width - 1 - i;
        *slot = if shift < 64 {
            ((h >> shift) & 1) as u8
        } else {
            0
        };
    }
    Ok(())
}

pub fn binary_decode(field: &[u8]) -> Result<u64> {
    field.iter().try_fold(0u64, |acc, &c| match c {
        0 | 1 => Ok((acc << 1) | c as u64),
        other => Err(corrupt(format!(
            "non-binary entry {other} in a binary field"
        ))),
    })
}

/// `x` with the positions in `block` replaced by `r`.
pub fn substitute_block(x: &Code, block: Range<usize>, r: &[u8]) -> Result<Code> {
    if block.end > x.len() || block.start > block.end {
        return Err(Error::InvalidArgument(format!(
            "block {block:?} outside a string of length {}",
            x.len()
        )));
    }
    if block.len() != r.len() {
        return Err(Error::LengthMismatch {
            left: block.len(),
            right: r.len(),
        });
    }
    let mut out = x.clone();
    out.as_mut_slice()[block].copy_from_slice(r);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayoutKind {
    SizeTwo,
    SizeOne,
}

/// User-facing knobs; everything else is derived.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutOptions {
    pub block_size: Option<usize>,
    pub samples: Option<usize>,
    pub blocks: Option<usize>,
    pub epsilon: f64,
    pub big_k: f64,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        LayoutOptions {
            block_size: None,
            samples: None,
            blocks: None,
            epsilon: 1.0,
            big_k: 10.0,
        }
    }
}

/// Derived layout constants for one of the two encoding strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayoutParams {
    pub kind: LayoutKind,
    pub n: usize,
    pub k: u8,
    /// Block length.
    pub s: usize,
    /// Width of an answer field, `ceil(log2 n) + 1`.
    pub ell_n: usize,
    /// `ell_n + 1`; the size-one prefix length.
    pub ell: usize,
    /// Width of a contribution / block-counter field, `ceil(log2 s) + 1`.
    pub ell_s: usize,
    /// Random samples per block.
    pub t: usize,
    /// Size-one only: number of blocks found by sampling.
    pub b: usize,
    pub epsilon: f64,
    pub big_k: f64,
}

/// Storage needed by the size-one layout.
pub fn size_one_storage(n: usize, k: u8, s: usize, t: usize, b: usize) -> usize {
    let ell_n = ceil_log2(n) + 1;
    let ell = ell_n + 1;
    let ell_s = ceil_log2(s.max(1)) + 1;
    1 + ell_n
        + b * s
        + ell
        + (k as usize - 1) * (2 * ell_n + 1)
        + t * (ell_n + s + ell_s + 1)
        + ell_s
        + 2
}

/// Number of records a size-two storage string can hold for blocks of
/// length `s`.
fn size_two_capacity(n: usize, ell_n: usize, s: usize) -> usize {
    (n - 1).saturating_sub(ell_n) / (s + ell_n + 1)
}

fn size_two_samples(n: usize, k: u8, s: usize, ell_n: usize, epsilon: f64) -> Option<usize> {
    let cap = size_two_capacity(n, ell_n, s);
    if cap < k as usize {
        return None;
    }
    let room = cap - k as usize;
    if s > k as usize {
        Some(theorem_three_t(s, k, epsilon).map_or(room, |t| t.min(room)))
    } else {
        Some(room)
    }
}

impl LayoutParams {
    /// Layout for the size-two strategy. The default block length minimises
    /// the predicted number of queries per position.
    pub fn size_two(params: GameParams, opts: &LayoutOptions) -> Result<Self> {
        let GameParams { n, k } = params;
        check_options(opts)?;
        if n < 3 {
            return Err(Error::InfeasibleLayout(format!("n = {n} is too small")));
        }
        let ell_n = ceil_log2(n) + 1;
        let s = match opts.block_size {
            Some(s) => s,
            None => {
                let desk = max_block_for_cap(k, DESK_ENUMERATION_CAP);
                let mut best: Option<(f64, usize)> = None;
                for s in 1..=ceil_sqrt(n).min(desk).min(n - 1) {
                    let Some(t) = opts
                        .samples
                        .or_else(|| size_two_samples(n, k, s, ell_n, opts.epsilon))
                    else {
                        continue;
                    };
                    let block_cost = 1.0
                        + 2.0 * (k as f64 - 1.0)
                        + 2.0 * t as f64
                        + predicted_consistent_size(s, k, t);
                    let cost = block_cost / s as f64;
                    if best.is_none_or(|(c, _)| cost < c) {
                        best = Some((cost, s));
                    }
                }
                best.map(|(_, s)| s).ok_or_else(|| {
                    Error::InfeasibleLayout(format!(
                        "no block length fits k = {k} references at n = {n}"
                    ))
                })?
            }
        };
        if s == 0 || s > n - 1 {
            return Err(Error::InfeasibleLayout(format!(
                "block length {s} at n = {n}"
            )));
        }
        let t = match opts.samples {
            Some(t) => t,
            None => size_two_samples(n, k, s, ell_n, opts.epsilon).ok_or_else(|| {
                Error::InfeasibleLayout(format!(
                    "storage string holds fewer than k = {k} records at n = {n}, s = {s}"
                ))
            })?,
        };
        let layout = LayoutParams {
            kind: LayoutKind::SizeTwo,
            n,
            k,
            s,
            ell_n,
            ell: ell_n + 1,
            ell_s: ceil_log2(s) + 1,
            t,
            b: 0,
            epsilon: opts.epsilon,
            big_k: opts.big_k,
        };
        if layout.storage_requirement() > n {
            return Err(Error::InfeasibleLayout(format!(
                "size-two storage needs {} > n = {n} positions",
                layout.storage_requirement()
            )));
        }
        crate::consistent::space_size(s, k, DEFAULT_ENUMERATION_BUDGET)?;
        Ok(layout)
    }

    /// Layout for the size-one strategy. `b` is clamped so the storage
    /// inequality holds; with `b = 0` the strategy only runs LinAlg.
    pub fn size_one(params: GameParams, opts: &LayoutOptions) -> Result<Self> {
        let GameParams { n, k } = params;
        check_options(opts)?;
        let ell_n = ceil_log2(n) + 1;
        let ell = ell_n + 1;
        let desk = max_block_for_cap(k, DESK_ENUMERATION_CAP);
        let s = opts
            .block_size
            .unwrap_or_else(|| ceil_sqrt(n).min(desk))
            .max(1);
        let ell_s = ceil_log2(s) + 1;
        let sample_count = |s: usize| -> Result<usize> {
            match opts.samples {
                Some(t) => Ok(t),
                None => theorem_three_t(s, k, opts.epsilon),
            }
        };
        let counter_limit = (1usize << ell_s.min(63)) - 1;
        let b = match opts.blocks {
            Some(b) => {
                if b > 0 {
                    let t = sample_count(s)?;
                    let need = size_one_storage(n, k, s, t, b);
                    if need > n {
                        return Err(Error::InfeasibleLayout(format!(
                            "size-one storage needs {need} > n = {n} positions"
                        )));
                    }
                    if b + 1 > counter_limit {
                        return Err(Error::InfeasibleLayout(format!(
                            "block counter of width {ell_s} cannot reach {}",
                            b + 1
                        )));
                    }
                }
                b
            }
            None => {
                let factor = 1.0 - opts.big_k / (n as f64).log2();
                let raw = if n > 2 && factor > 0.0 {
                    ((n as f64 - 2.0) / s as f64 * factor).floor()
                } else {
                    0.0
                };
                let mut b = if raw > 0.0 { raw as usize } else { 0 };
                if b > 0 {
                    let t = sample_count(s)?;
                    b = b.min(counter_limit - 1);
                    while b > 0 && size_one_storage(n, k, s, t, b) > n {
                        b -= 1;
                    }
                }
                b
            }
        };
        let t = if b > 0 { sample_count(s)? } else { 0 };
        let layout = LayoutParams {
            kind: LayoutKind::SizeOne,
            n,
            k,
            s,
            ell_n,
            ell,
            ell_s,
            t,
            b,
            epsilon: opts.epsilon,
            big_k: opts.big_k,
        };
        if b > 0 {
            assert!(layout.storage_requirement() <= n);
            crate::consistent::space_size(s, k, DEFAULT_ENUMERATION_BUDGET)?;
        }
        Ok(layout)
    }

    /// Blocks handled by sampling: `ceil((n-1)/s)` for size-two, `b` for
    /// size-one.
    pub fn block_count(&self) -> usize {
        match self.kind {
            LayoutKind::SizeTwo => (self.n - 1).div_ceil(self.s),
            LayoutKind::SizeOne => self.b,
        }
    }

    /// 0-based range of block `i` (1-based).
    pub fn block_range(&self, i: usize) -> Result<Range<usize>> {
        if i == 0 || i > self.block_count() {
            return Err(Error::InvalidArgument(format!(
                "block {i} outside 1..={}",
                self.block_count()
            )));
        }
        Ok(match self.kind {
            LayoutKind::SizeTwo => (i - 1) * self.s..(i * self.s).min(self.n - 1),
            LayoutKind::SizeOne => self.ell + (i - 1) * self.s..self.ell + i * self.s,
        })
    }

    pub fn block_of<'a>(&self, x: &'a Code, i: usize) -> Result<&'a [u8]> {
        let r = self.block_range(i)?;
        Ok(&x.as_slice()[r])
    }

    /// Positions the layout needs. A size-one layout with `b = 0` never
    /// leaves LinAlg and reserves no fields.
    pub fn storage_requirement(&self) -> usize {
        match self.kind {
            LayoutKind::SizeTwo => {
                (self.k as usize + self.t) * (self.s + self.ell_n + 1) + self.ell_n + 1
            }
            LayoutKind::SizeOne if self.b == 0 => 0,
            LayoutKind::SizeOne => size_one_storage(self.n, self.k, self.s, self.t, self.b),
        }
    }

    // ---- size-two fields ----

    /// Length of a size-two record for block `i`.
    pub fn record_len_two(&self, i: usize) -> Result<usize> {
        Ok(self.block_range(i)?.len() + self.ell_n + 1)
    }

    /// Block counter in the first `ell_n` entries.
    pub fn block_index_size_two(&self, x: &Code) -> Result<usize> {
        Ok(binary_decode(&x.as_slice()[..self.ell_n])? as usize)
    }

    /// Records already stored for the current block.
    pub fn query_count_size_two(&self, x: &Code) -> Result<usize> {
        let i = self.block_index_size_two(x)?;
        let p1 = last_one_pos(x.as_slice(), self.n - 1);
        if p1 <= self.ell_n {
            return Ok(0);
        }
        let rec = self.record_len_two(i)?;
        let used = p1 - self.ell_n;
        if !used.is_multiple_of(rec) {
            return Err(corrupt(format!(
                "last one at {p1} is not on a record boundary (record length {rec})"
            )));
        }
        Ok(used / rec)
    }

    /// 0-based start of the `j`-th (1-based) size-two record of block `i`.
    pub fn record_start_two(&self, i: usize, j: usize) -> Result<usize> {
        Ok(self.ell_n + (j - 1) * self.record_len_two(i)?)
    }

    /// `(fragment, answer)` stored in record `j`.
    pub fn read_record_two(&self, x: &Code, i: usize, j: usize) -> Result<(Code, usize)> {
        let len = self.block_range(i)?.len();
        let start = self.record_start_two(i, j)?;
        let xs = x.as_slice();
        if start + len + self.ell_n + 1 > self.n - 1 {
            return Err(corrupt(format!("record {j} runs past the storage area")));
        }
        if xs[start + len + self.ell_n] != 1 {
            return Err(corrupt(format!("record {j} lacks its end marker")));
        }
        let frag = Code::new(xs[start..start + len].to_vec());
        let answer = binary_decode(&xs[start + len..start + len + self.ell_n])? as usize;
        Ok((frag, answer))
    }

    /// Writes record `j` of block `i` into `x`.
    pub fn write_record_two(
        &self,
        x: &mut Code,
        i: usize,
        j: usize,
        fragment: &[u8],
        answer: usize,
    ) -> Result<()> {
        let len = self.block_range(i)?.len();
        if fragment.len() != len {
            return Err(Error::LengthMismatch {
                left: len,
                right: fragment.len(),
            });
        }
        let start = self.record_start_two(i, j)?;
        if start + len + self.ell_n + 1 > self.n - 1 {
            return Err(Error::InfeasibleLayout(format!("record {j} does not fit")));
        }
        let xs = x.as_mut_slice();
        xs[start..start + len].copy_from_slice(fragment);
        write_binary(
            &mut xs[start + len..start + len + self.ell_n],
            answer as u64,
        )?;
        xs[start + len + self.ell_n] = 1;
        Ok(())
    }

    /// 1 iff the last stored record of `x` is `(BLOCK_i(y), eq(z, y))`.
    pub fn part_flag(&self, y: &Code, y_answer: usize, x: &Code) -> Result<bool> {
        let i = self.block_index_size_two(x)?;
        if i == 0 || i > self.block_count() {
            return Ok(false);
        }
        let q = self.query_count_size_two(x)?;
        if q == 0 {
            return Ok(false);
        }
        let (frag, answer) = self.read_record_two(x, i, q)?;
        Ok(answer == y_answer && frag.as_slice() == self.block_of(y, i)?)
    }

    // ---- size-one fields ----

    /// Length of one reference slot, `2 ell_n + 1`.
    pub fn ref_slot_len(&self) -> usize {
        2 * self.ell_n + 1
    }

    /// Length of one sample record, `ell_n + s + ell_s + 1`.
    pub fn record_len_one(&self) -> usize {
        self.ell_n + self.s + self.ell_s + 1
    }

    /// 0-based range of the prefix copy.
    pub fn prefix_copy_range(&self) -> Range<usize> {
        let start = self.ell + self.b * self.s;
        start..start + self.ell
    }

    /// 0-based start of reference slot `c` (1-based, `c < k`).
    pub fn ref_slot_start(&self, c: usize) -> usize {
        2 * self.ell + self.b * self.s + (c - 1) * self.ref_slot_len()
    }

    /// 0-based start of sample record `j` (1-based).
    pub fn record_start_one(&self, j: usize) -> usize {
        self.ref_slot_start(self.k as usize) + (j - 1) * self.record_len_one()
    }

    /// 0-based range of the block counter, 1-based positions
    /// `n - ell_s - 1 ..= n - 2`.
    pub fn counter_range(&self) -> Range<usize> {
        self.n - self.ell_s - 2..self.n - 2
    }

    /// Largest 1-based position scanned for the last one.
    pub fn p1_limit_one(&self) -> usize {
        self.n - self.ell_s - 2
    }

    pub fn block_index_size_one(&self, x: &Code) -> Result<usize> {
        Ok(binary_decode(&x.as_slice()[self.counter_range()])? as usize)
    }

    /// Sampling progress `q(x)` of a size-one string in the sampling phase.
    pub fn query_count_size_one(&self, x: &Code) -> Result<usize> {
        let p1 = last_one_pos(x.as_slice(), self.p1_limit_one());
        let base = 2 * self.ell + self.b * self.s;
        if p1 <= base {
            return Ok(x[0] as usize);
        }
        let off = p1 - base;
        let refs = (self.k as usize - 1) * self.ref_slot_len();
        if off <= refs {
            if !off.is_multiple_of(self.ref_slot_len()) {
                return Err(corrupt(format!(
                    "last one at {p1} is inside a reference slot"
                )));
            }
            return Ok(1 + off / self.ref_slot_len());
        }
        let used = off - refs;
        if !used.is_multiple_of(self.record_len_one()) {
            return Err(corrupt(format!(
                "last one at {p1} is inside a sample record"
            )));
        }
        Ok(self.k as usize + used / self.record_len_one())
    }
}

fn check_options(opts: &LayoutOptions) -> Result<()> {
    if opts.epsilon.is_nan() || opts.epsilon <= 0.0 {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if !opts.big_k.is_finite() || opts.big_k < 0.0 {
        return Err(Error::InvalidArgument(
            "K must be a non-negative number".into(),
        ));
    }
    Ok(())
}

impl fmt::Display for LayoutParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            LayoutKind::SizeTwo => "size-two",
            LayoutKind::SizeOne => "size-one",
        };
        write!(
            f,
            "{kind} layout: n={} k={} s={} ell_n={} ell={} ell_s={} t={} b={} blocks={} eps={} K={} storage={}",
            self.n,
            self.k,
            self.s,
            self.ell_n,
            self.ell,
            self.ell_s,
            self.t,
            self.b,
            self.block_count(),
            self.epsilon,
            self.big_k,
            self.storage_requirement()
        )
    }
}
