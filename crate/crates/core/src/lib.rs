//! Empirical laboratory for gaps between sums of four fourth powers.
//!
//! Everything here is built around one construction: with N given, choose
//! diminishing ranges P₁ = N^{1/4}, P_{j+1} = P_j^{13/16}, a short interval
//! length Y = N^γ, and study numbers n = x₁⁴ + x₂⁴ + x₃⁴ + x₄⁴ + y with
//! x_j ∈ (P_j/2, P_j] and 0 ≤ y < Y. The crate provides
//!
//! * exact parameter/constant arithmetic (`params`, `rational`),
//! * the exponential sums and counting functions of the construction
//!   (`weyl`), with exact phase reduction (`phase`),
//! * exhaustive enumeration of representable integers and gap statistics
//!   (`enumeration`),
//! * arc decompositions of the torus (`arcs`),
//! * correlation integrals over the torus and over arc sets (`integrate`),
//! * packaged experiments with deterministic JSON reports (`experiments`,
//!   `report`).
//!
//! Determinism is a contract: identical inputs produce byte-identical
//! reports regardless of thread count. All summation orders are fixed and
//! pairwise, and no randomness is used anywhere.

pub mod arcs;
pub mod arith;
pub mod enumeration;
pub mod error;
pub mod experiments;
pub mod integrate;
pub mod params;
pub mod phase;
pub mod rational;
pub mod report;
pub mod weyl;

pub use error::{Error, Result};
pub use params::{constants, gamma0, gamma0_general, gamma1, theta_k, Constants, Parameters};
pub use phase::Alpha;
pub use rational::{parse_ratio, ratio_string};
