//! Memory-restricted black-peg Mastermind: game engine, codemakers,
//! strategy harness, string layouts and the codebreaker strategies.

pub mod codec;
pub mod consistent;
pub mod error;
pub mod experiment;
pub mod game;
pub mod harness;
pub mod strategy;

use rand::SeedableRng;

pub use error::{Error, Result};
pub use game::{eq, Code, Codemaker, DevilCodemaker, FixedCodemaker, GameParams};
pub use harness::{run_game, Memory, Strategy, Transcript};

/// Seeded random stream used everywhere in the crate.
pub type RandomStream = rand_chacha::ChaCha8Rng;

/// Stream number `step` of the generator seeded by `seed`. The harness hands
/// the step-`j` stream to the strategy, so a query can be replayed from its
/// memory snapshot alone.
pub fn stream(seed: u64, step: u64) -> RandomStream {
    let mut rng = RandomStream::seed_from_u64(seed);
    rng.set_stream(step);
    rng
}
