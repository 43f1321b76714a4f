//! Inner and outer bounds on the capacity region of multi-input broadcast
//! packet-erasure channels with feedback.
//!
//! * [`erasure`]: channel models, joint non-reception probabilities, sampling.
//! * [`lp`]: constraint systems over named rate variables and an exact
//!   rational simplex solver.
//! * [`bounds`]: degraded-permutation outer bounds, time-sharing and
//!   capacity-sum inner bounds, sum-rate gaps.
//! * [`relay`]: reduction of a relay network and a cut to a multi-input
//!   channel, and the resulting rate bound.
//! * [`gf`]: GF(2^m) arithmetic and Gaussian elimination.
//! * [`scheme`]: Monte Carlo simulation of the cross-subchannel XOR coding
//!   scheme and its no-cross-coding baseline.

pub mod bounds;
pub mod erasure;
pub mod error;
pub mod gf;
pub mod lp;
pub mod rational;
pub mod relay;
pub mod scheme;

pub use bounds::{PermutationTuple, TupleFamily, WeightVector};
pub use erasure::{DestSet, ErasureModel, MultiInputPEC, ReceptionOutcome};
pub use error::{Error, Result};
pub use lp::{ConstraintSystem, LpSolution, LpStatus, Mode, Relation};
pub use rational::Rational;
pub use relay::{CutSpec, ReductionResult, RelayGraph};
pub use scheme::{SchemeConfig, SchemeReport};
