use alloc::string::String;

use crate::pairing::Group;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("randomness source failed")]
    Rng,

    #[error("expected an element of group {expected}, got group {found}")]
    GroupMismatch { expected: Group, found: Group },

    #[error("invalid encoding for group {group}: {reason}")]
    Decode { group: Group, reason: &'static str },

    #[error("invalid scalar encoding: {0}")]
    DecodeScalar(&'static str),

    #[error("inconsistent key pair: {0}")]
    InconsistentKey(&'static str),

    #[error("invalid provenance fragment: {0}")]
    InvalidFragment(String),

    #[error("invalid provenance graph: {0}")]
    InvalidGraph(String),

    #[error("provenance graph contains a cycle through node `{0}`")]
    CyclicGraph(String),

    #[error("invalid policy `{id}`: {reason}")]
    InvalidPolicy { id: String, reason: String },

    #[error("duplicate policy id `{0}`")]
    DuplicatePolicyId(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("tags in one submission must share the same authenticator component")]
    MixedAuthenticator,
}
