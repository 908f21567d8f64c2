//! Monte Carlo simulator and capacity-bound evaluator for the wideband SIMO
//! i.i.d. Rayleigh block-fading channel.
//!
//! The channel has N receive antennas, `B = ceil(N^eps)` flat subcarriers and
//! a fading coefficient per (antenna, subcarrier) that stays constant for
//! `L = ceil(N^tau)` channel uses. Three transceivers are simulated:
//!
//! * [`em`]: energy modulation, one energy symbol repeated over the block;
//! * [`fem`]: fast energy modulation, L independent energy symbols per block;
//! * [`pa`]: one pilot per block, MMSE estimate, MRC and scaled BPSK.
//!
//! [`bounds`] evaluates the shape-encoding capacity bound, the critical
//! bandwidth interval, the coherent baseline and the predicted scaling
//! exponents; [`harness`] runs the N sweeps and fits empirical exponents.

// `!(x > 0.0)` is deliberate: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channel;
pub mod em;
pub mod error;
pub mod fem;
pub mod harness;
pub mod numerics;
pub mod pa;
pub mod scheme;

pub use error::{Error, Result};
pub use scheme::{Scheme, SelectionMode};
