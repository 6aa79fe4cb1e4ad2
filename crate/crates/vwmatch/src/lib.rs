//! Online vertex-weighted bipartite matching.
//!
//! The offline side `U` carries known weights `b_u`; the online side `V`
//! arrives in a fixed adversarial order and must be matched irrevocably.
//! This crate provides:
//!
//! * the instance model and canonical JSON file formats ([`instance`], [`io`]),
//! * exact offline oracles for `OPT(G)` and a canonical optimal matching
//!   ([`oracle`]),
//! * the online policies Greedy, Ranking, Perturbed-Greedy (continuous and
//!   discrete) and MSVV budget scaling ([`online`]),
//! * the single-bid budgeted-allocation reduction with both solution
//!   mappings ([`reduction`]),
//! * an exhaustive verifier that enumerates the discrete probability space
//!   `[k]^n` on small instances and mechanically checks the event tables,
//!   charging map and inequality chain of the competitive analysis
//!   ([`verifier`]),
//! * generators for the adversarial instance families ([`generators`]) and a
//!   seeded Monte-Carlo experiment harness ([`experiment`]).

pub mod experiment;
pub mod generators;
pub mod instance;
pub mod io;
pub mod online;
pub mod oracle;
pub mod reduction;
pub mod verifier;

pub use instance::{Matching, OptimalAnnotation, VertexWeightedInstance};
pub use online::{MatchResult, PositionAssignment, Psi};
pub use reduction::BudgetedAllocationInstance;
