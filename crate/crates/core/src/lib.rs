//! Compile WHILE programs into quantum circuits whose superposed execution
//! covers every input at once, simulate them exactly, and check the decoded
//! value sets against classical oracles.

pub mod amplify;
pub mod circuit;
pub mod classical;
pub mod hybrid;
pub mod lang;
pub mod report;
pub mod sim;
pub mod synth;

mod error;

pub use error::{Error, Result};

/// Number of bits used to hold a value at analysis width `m`: `m` value bits
/// plus one overflow bit.
pub fn word_bits(m: u32) -> u32 {
    m + 1
}

/// Largest representable value at width `m`, `2^(m+1) - 1`.
pub fn word_mask(m: u32) -> u64 {
    (1u64 << word_bits(m)) - 1
}
