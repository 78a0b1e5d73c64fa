//! Slice-aware mode selection for D2D-enabled LTE/NR networks.
//!
//! The crate bundles a two-level AHP ranking engine ([`ahp`]), an LDPC
//! coded-modulation link simulator used for offline BLER calibration
//! ([`ldpc`]), a link-budget and latency model ([`radio`]), the mode
//! selectors ([`selection`]) and a Monte-Carlo mobility simulator ([`sim`]).
//! [`config`] and [`output`] back the `modesel` command-line tool.

// `!(x > 0.0)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ahp;
pub mod config;
pub mod kv;
pub mod ldpc;
pub mod output;
pub mod radio;
pub mod seeds;
pub mod selection;
pub mod sim;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
