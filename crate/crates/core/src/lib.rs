//! Simulation and verification toolkit for the random `K_k`-removal process:
//! start from `K_n`, repeatedly pick a uniformly random copy of `K_k` and
//! delete its edges, stop when no `K_k` is left.
//!
//! - [`graph`]: bit-packed dynamic graph and brute-force counts.
//! - [`clique_index`]: the live `K_k` set with exact uniform sampling.
//! - [`process`]: the removal loop, checkpointed traces, CSV/JSON export.
//! - [`trajectory`]: predicted curves, error envelopes, critical intervals.
//! - [`identity`]: exact checks of the counting identities on small graphs.
//! - [`tail_bounds`]: martingale and binomial tail bound calculators.
//! - [`ensemble`]: seeded multi-trial runs, concentration scoring, exponent fits.
//!
//! Trials run on rayon with the default `parallel` feature; without it the
//! ensemble runner falls back to a sequential loop with identical output.

pub mod bits;
pub mod clique_index;
pub mod combinatorics;
pub mod ensemble;
pub mod error;
pub mod graph;
pub mod identity;
pub mod process;
pub mod rng;
pub mod tail_bounds;
pub mod trajectory;

pub use clique_index::{CliqueIndex, RemovalDelta};
pub use error::{Error, Result};
pub use graph::{Graph, VertexSet};
