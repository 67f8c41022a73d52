//! Library half of the `eigenop-lab` binary: argument parsing helpers,
//! output renderers and the seeded self-test.

pub mod error;
pub mod input;
pub mod output;
pub mod sample;
pub mod selftest;
