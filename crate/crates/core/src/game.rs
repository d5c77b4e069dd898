//! Code strings, the black/white peg oracles and the codemakers.
//!
//! Colors are 0-based, `0..k`. Positions are 0-based in code; doc comments
//! that talk about "position i" in the 1-based sense say so explicitly.

use std::fmt;

use rand::Rng;

use crate::consistent::CandidateSet;
use crate::error::{Error, Result};
use crate::RandomStream;

/// Game dimensions: `n` positions over `k` colors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GameParams {
    pub n: usize,
    pub k: u8,
}

impl GameParams {
    pub fn new(n: usize, k: u8) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if k < 2 {
            return Err(Error::InvalidArgument("k must be at least 2".into()));
        }
        Ok(Self { n, k })
    }
}

/// A length-n string over `0..k`. Used for secrets, guesses and fragments.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Code(Vec<u8>);

impl Code {
    pub fn new(entries: Vec<u8>) -> Self {
        Code(entries)
    }

    pub fn constant(len: usize, color: u8) -> Self {
        Code(vec![color; len])
    }

    pub fn zeros(len: usize) -> Self {
        Code(vec![0; len])
    }

    /// Builds a code and checks every entry against `k`.
    pub fn with_colors(entries: Vec<u8>, k: u8) -> Result<Self> {
        if let Some(&bad) = entries.iter().find(|&&c| c >= k) {
            return Err(Error::ColorOutOfRange { color: bad, k });
        }
        Ok(Code(entries))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [u8] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.0
    }

    pub fn max_color(&self) -> Option<u8> {
        self.0.iter().copied().max()
    }

    /// Text form: bare digits for `k <= 10`, comma separated otherwise.
    pub fn to_text(&self, k: u8) -> String {
        if k <= 10 {
            self.0.iter().map(|&c| char::from(b'0' + c)).collect()
        } else {
            let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
            parts.join(",")
        }
    }

    /// Parses the text form produced by [`Code::to_text`].
    pub fn parse(text: &str, k: u8) -> Result<Self> {
        let text = text.trim();
        let entries: Vec<u8> = if k <= 10 && !text.contains(',') {
            text.chars()
                .map(|ch| {
                    ch.to_digit(10)
                        .map(|d| d as u8)
                        .ok_or_else(|| Error::Parse(format!("not a digit: {ch:?}")))
                })
                .collect::<Result<_>>()?
        } else {
            text.split(',')
                .map(|part| {
                    part.trim()
                        .parse::<u8>()
                        .map_err(|e| Error::Parse(format!("bad color {part:?}: {e}")))
                })
                .collect::<Result<_>>()?
        };
        Code::with_colors(entries, k)
    }
}

impl fmt::Debug for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = self.max_color().map_or(2, |m| m.saturating_add(1).max(2));
        write!(f, "Code[{}]", self.to_text(k))
    }
}

impl From<Vec<u8>> for Code {
    fn from(v: Vec<u8>) -> Self {
        Code(v)
    }
}

impl std::ops::Index<usize> for Code {
    type Output = u8;
    fn index(&self, i: usize) -> &u8 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for Code {
    fn index_mut(&mut self, i: usize) -> &mut u8 {
        &mut self.0[i]
    }
}

/// Oracle reply. Strategies only ever see `black`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Answer {
    pub black: usize,
    pub white: Option<usize>,
}

impl Answer {
    pub fn black(black: usize) -> Self {
        Answer { black, white: None }
    }

    pub fn full(z: &Code, x: &Code) -> Result<Self> {
        Ok(Answer {
            black: eq(z, x)?,
            white: Some(white_pegs(z, x)?),
        })
    }
}

fn check_len(a: &[u8], b: &[u8]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Number of positions where the two strings agree.
pub fn eq(z: &Code, x: &Code) -> Result<usize> {
    eq_slices(z.as_slice(), x.as_slice())
}

pub fn eq_slices(z: &[u8], x: &[u8]) -> Result<usize> {
    check_len(z, x)?;
    Ok(eq_unchecked(z, x))
}

#[inline]
pub(crate) fn eq_unchecked(z: &[u8], x: &[u8]) -> usize {
    z.iter().zip(x).filter(|(a, b)| a == b).count()
}

/// White pegs: shared colors in wrong positions, via
/// `sum_c min(count_c(z), count_c(x)) - eq(z, x)`.
pub fn white_pegs(z: &Code, x: &Code) -> Result<usize> {
    check_len(z.as_slice(), x.as_slice())?;
    let mut cz = [0usize; 256];
    let mut cx = [0usize; 256];
    for (&a, &b) in z.as_slice().iter().zip(x.as_slice()) {
        cz[a as usize] += 1;
        cx[b as usize] += 1;
    }
    let shared: usize = cz.iter().zip(&cx).map(|(&a, &b)| a.min(b)).sum();
    Ok(shared - eq_unchecked(z.as_slice(), x.as_slice()))
}

/// Uniform code: each entry independently uniform over `0..k`.
pub fn random_code(params: GameParams, rng: &mut RandomStream) -> Code {
    random_fragment(params.n, params.k, rng)
}

pub fn random_fragment(len: usize, k: u8, rng: &mut RandomStream) -> Code {
    Code((0..len).map(|_| rng.gen_range(0..k)).collect())
}

/// The answering side of the game.
pub trait Codemaker: Send {
    fn name(&self) -> &str;

    /// Black-peg answer for `guess`.
    fn answer(&mut self, guess: &Code) -> Result<usize>;

    /// A code consistent with every answer so far. For fixed secrets this is
    /// the secret itself.
    fn revealed(&self) -> Option<Code>;
}

/// Answers from one immutable secret.
#[derive(Debug, Clone)]
pub struct FixedCodemaker {
    secret: Code,
    label: &'static str,
}

impl FixedCodemaker {
    pub fn new(secret: Code) -> Self {
        FixedCodemaker {
            secret,
            label: "fixed",
        }
    }

    /// Secret drawn uniformly from the given stream.
    pub fn random(params: GameParams, rng: &mut RandomStream) -> Self {
        FixedCodemaker {
            secret: random_code(params, rng),
            label: "random",
        }
    }

    pub fn secret(&self) -> &Code {
        &self.secret
    }
}

impl Codemaker for FixedCodemaker {
    fn name(&self) -> &str {
        self.label
    }

    fn answer(&mut self, guess: &Code) -> Result<usize> {
        eq(&self.secret, guess)
    }

    fn revealed(&self) -> Option<Code> {
        Some(self.secret.clone())
    }
}

/// Default devil cap: 2^16 codes (n <= 16 at k = 2).
pub const DEFAULT_DEVIL_CAP: u64 = 1 << 16;

/// Adversary that never commits: it keeps every code consistent with the
/// answers so far and answers with the eq value of the largest class.
#[derive(Debug, Clone)]
pub struct DevilCodemaker {
    params: GameParams,
    consistent: CandidateSet,
}

impl DevilCodemaker {
    pub fn new(params: GameParams) -> Result<Self> {
        Self::with_cap(params, DEFAULT_DEVIL_CAP)
    }

    pub fn with_cap(params: GameParams, cap: u64) -> Result<Self> {
        let consistent = CandidateSet::full(params.n, params.k, cap)?;
        Ok(DevilCodemaker { params, consistent })
    }

    pub fn consistent_len(&self) -> usize {
        self.consistent.len()
    }

    pub fn consistent_codes(&self) -> Vec<Code> {
        self.consistent.codes()
    }

    /// Partitions the consistent set by `eq(., guess)` and keeps the largest
    /// class (ties go to the smaller eq value).
    pub fn devil_answer(&mut self, guess: &Code) -> Result<usize> {
        if guess.len() != self.params.n {
            return Err(Error::LengthMismatch {
                left: self.params.n,
                right: guess.len(),
            });
        }
        let counts = self.consistent.eq_histogram(guess);
        let mut best = 0;
        for (value, &count) in counts.iter().enumerate() {
            if count > counts[best] {
                best = value;
            }
        }
        self.consistent.retain_eq(guess, best);
        debug_assert!(!self.consistent.is_empty());
        Ok(best)
    }
}

impl Codemaker for DevilCodemaker {
    fn name(&self) -> &str {
        "devil"
    }

    fn answer(&mut self, guess: &Code) -> Result<usize> {
        self.devil_answer(guess)
    }

    fn revealed(&self) -> Option<Code> {
        self.consistent.first()
    }
}
