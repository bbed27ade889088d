//! Explicit generators, up to radical, for the Stanley-Reisner ideal of the
//! `n`-gon over a field of positive characteristic, with tools to check them.

pub mod cli;
pub mod gf;
pub mod lift;
pub mod mpoly;
pub mod schedule;
pub mod srideal;
pub mod verify;
