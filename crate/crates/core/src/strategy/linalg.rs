//! LinAlg: determine the entry at the tail number, one position at a time.
//!
//! Precondition for every step: `x_i = z_i` for all `i < tn(x)` and
//! `tn(x) < n`.

use rand::Rng;

use crate::codec::tail_number;
use crate::error::Result;
use crate::game::{eq, Code, Codemaker};
use crate::RandomStream;

/// Next LinAlg query from `x`.
///
/// k = 2: with probability 1/2 flip position `tn`, otherwise flip every
/// position after `tn`. k >= 3: with probability (k-1)/k recolor position
/// `tn` to some `j != x_tn`, otherwise re-mark the tail `tn..n` with some
/// `j != x_{tn-1}` (`j != x_1` when `tn = 1`).
pub fn linalg_guess(x: &Code, k: u8, rng: &mut RandomStream) -> Code {
    let tn = tail_number(x.as_slice());
    let mut y = x.clone();
    if k == 2 {
        if rng.gen_bool(0.5) {
            y[tn - 1] ^= 1;
        } else {
            for c in &mut y.as_mut_slice()[tn..] {
                *c ^= 1;
            }
        }
        return y;
    }
    if rng.gen_range(0..k) != 0 {
        y[tn - 1] = other_color(x[tn - 1], k, rng);
    } else {
        let avoid = if tn > 1 { x[tn - 2] } else { x[0] };
        let j = other_color(avoid, k, rng);
        for c in &mut y.as_mut_slice()[tn - 1..] {
            *c = j;
        }
    }
    y
}

/// Uniform color different from `c`.
pub fn other_color(c: u8, k: u8, rng: &mut RandomStream) -> u8 {
    let j = rng.gen_range(0..k - 1);
    if j >= c {
        j + 1
    } else {
        j
    }
}

/// Whether the LinAlg query `y` (answer `ay`) replaces `x` (answer `ax`).
/// The move is recognised from the two strings.
pub fn linalg_keep(x: &Code, ax: usize, y: &Code, ay: usize, k: u8) -> bool {
    let n = x.len();
    let tn = tail_number(x.as_slice());
    let single = (0..n).all(|p| (p == tn - 1) == (x[p] != y[p]));
    if single {
        ay > ax
    } else if k == 2 {
        ax + ay == n + tn
    } else {
        true
    }
}

/// Fixed-secret adversary for LinAlg with k = 2. At the first query of a
/// new frontier `p` it swaps `z_p` with a later differing entry whenever
/// that makes the query fail. Every earlier query is constant on `p..n`, so
/// all previous answers stay valid.
#[derive(Debug, Clone)]
pub struct LinAlgAdversary {
    secret: Code,
    frontier: usize,
}

impl LinAlgAdversary {
    pub fn new(secret: Code) -> Self {
        LinAlgAdversary {
            secret,
            frontier: 0,
        }
    }
}

impl Codemaker for LinAlgAdversary {
    fn name(&self) -> &str {
        "linalg-adversary"
    }

    fn answer(&mut self, guess: &Code) -> Result<usize> {
        let n = self.secret.len();
        let p = tail_number(guess.as_slice()) - 1;
        if p >= 1 && p + 1 < n && p != self.frontier {
            self.frontier = p;
            let z = self.secret.as_mut_slice();
            // both LinAlg moves succeed iff z_p equals the guess at p
            if z[p - 1] == guess[p - 1] {
                if let Some(j) = (p..n).find(|&j| z[j] != z[p - 1]) {
                    z.swap(p - 1, j);
                }
            }
        }
        eq(&self.secret, guess)
    }

    fn revealed(&self) -> Option<Code> {
        Some(self.secret.clone())
    }
}
