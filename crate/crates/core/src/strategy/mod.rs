//! Codebreaker strategies.

pub mod linalg;
pub mod rls;
pub mod size_one;
pub mod size_two;
pub mod unrestricted;

use crate::codec::{LayoutOptions, LayoutParams};
use crate::error::{Error, Result};
use crate::game::GameParams;
use crate::harness::Strategy;

pub use linalg::LinAlgAdversary;
pub use rls::RlsStrategy;
pub use size_one::SizeOneStrategy;
pub use size_two::SizeTwoStrategy;
pub use unrestricted::UnrestrictedStrategy;

/// Names accepted by [`build`].
pub const STRATEGY_NAMES: [&str; 4] = ["size-one", "size-two", "unrestricted", "rls"];

/// Builds a strategy by CLI name.
pub fn build(name: &str, params: GameParams, opts: &LayoutOptions) -> Result<Box<dyn Strategy>> {
    Ok(match name {
        "size-one" => Box::new(SizeOneStrategy::new(
            params,
            LayoutParams::size_one(params, opts)?,
        )?),
        "size-two" => Box::new(SizeTwoStrategy::new(
            params,
            LayoutParams::size_two(params, opts)?,
        )?),
        "unrestricted" => Box::new(UnrestrictedStrategy::new(params, opts.epsilon)?),
        "rls" => Box::new(RlsStrategy::new(params)),
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown strategy {other:?}, expected one of {STRATEGY_NAMES:?}"
            )))
        }
    })
}
