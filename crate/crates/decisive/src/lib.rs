//! Verification of stochastic transition systems through decisiveness,
//! avoid-sets, attractors and finite abstractions.
//!
//! The toolkit analyses labelled Markov chains — finite, or countable and
//! lazily enumerated — and stochastic timed automata:
//!
//! - exact finite-chain analysis (reachability, until, repeated
//!   reachability, Muller probabilities) with rational arithmetic;
//! - qualitative verdicts for reachability, repeated reachability and
//!   ω-regular properties, justified by explicit decisiveness or attractor
//!   evidence;
//! - convergent interval approximation schemes built from adjacent
//!   lower/upper sequences, with stalling diagnostics when the underlying
//!   decisiveness hypothesis fails;
//! - α-abstractions with completeness/soundness certification, counter-
//!   example search, and transfer of attractors;
//! - stochastic timed automata: region machinery, the thick-graph
//!   abstraction, reactive/one-clock classification, exact-inverse-CDF
//!   sampling, and end-to-end qualitative/quantitative pipelines.
//!
//! Each major capability has a runnable demonstration under `examples/`;
//! `cargo run --example <name>` is the quickest way to see the API in use.
//! A batch CLI (`decisive`) exposes the same pipelines over JSON models.

pub mod abstraction;
pub mod chain;
pub mod cli;
pub mod error;
pub mod families;
pub mod formula;
pub mod graph;
pub mod model_json;
pub mod omega;
pub mod prob;
pub mod qualitative;
pub mod quantitative;
pub mod report;
pub mod solve;
pub mod sta;

pub use chain::{LabelSet, MarkovChain, SparseDistribution, StateId, StateSet};
pub use error::{Error, Result};
pub use prob::Prob;
