//! Simulation and verification laboratory for random `d`-ary recursive trees
//! and random Apollonian networks (RANs).
//!
//! The crate provides:
//!
//! - growth of the random `d`-ary recursive tree `T_t` and of RANs together
//!   with their triangle tree ([`dary_tree`], [`apollonian`]),
//! - samplers for the Beta, Dirichlet, Pólya-urn and `Υ` distributions that
//!   drive the coupling arguments ([`stochastics`]),
//! - exact dynamic programs over subtrees: largest `r`-ary subtree, largest
//!   buono subtree, maximum mass and adjusted mass ([`subtree_dp`]),
//! - longest-path search, a greedy path heuristic, and the buono-subtree
//!   upper bound on path length ([`paths`]),
//! - every closed-form constant and inequality of the explicit bounds,
//!   numerically verified ([`bounds`]),
//! - a reproducible ensemble runner with statistical lemma checks and
//!   exponent fitting ([`experiments`], [`verify`]).
//!
//! All randomness flows through the counter-based [`rng::Stream`], so every
//! result is a pure function of its seed.

pub mod apollonian;
pub mod bounds;
pub mod dary_tree;
pub mod experiments;
pub mod paths;
pub mod rng;
pub mod stats;
pub mod stochastics;
pub mod subtree_dp;
pub mod verify;

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
