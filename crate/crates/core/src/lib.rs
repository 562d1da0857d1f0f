//! Classification of encrypted documents by keyword search over encrypted
//! provenance.
//!
//! Users attach a provenance-based classification tag (PBCT) to every
//! provenance fragment of a file. An administrator compiles classification
//! policies into trapdoors. A decision point tests tags against trapdoors and
//! learns only whether they match and whether the submitter holds the key it
//! claims, then picks a storage unit by policy priority.
//!
//! The crate is `no_std` (it needs `alloc`) and performs no IO. File formats,
//! the storage layout and the command-line tool live in the `pbcap` crate.
//!
//! ## Modules
//!
//! - [`pairing`]: the [`PairingSuite`] abstraction, tagged element encodings,
//!   and the BLS12-381 production suite.
//! - [`mock`]: a transparent suite with known discrete logarithms, used as a
//!   brute-force oracle (feature `mock`).
//! - [`scheme`]: key generation, tag construction, trapdoors and the
//!   two-equation test.
//! - [`provenance`]: provenance graphs, fragments and their canonical bytes.
//! - [`policy`]: policy compilation and priority-based classification.
//! - [`harness`]: the chosen-fragment indistinguishability game and the
//!   identity oracle.

#![no_std]
#![deny(rust_2018_idioms, unsafe_code)]

extern crate alloc;

mod error;
pub mod harness;
#[cfg(feature = "mock")]
pub mod mock;
pub mod pairing;
pub mod policy;
pub mod provenance;
pub mod scheme;

pub use error::Error;
pub use pairing::{Bls12Suite, Group, GroupElement, PairingSuite};
pub use policy::{classify, compile_policies, CompiledPolicy, Decision, Policy};
pub use provenance::{ProvenanceFragment, ProvenanceGraph};
pub use scheme::{
    AdminKeyPair, AdminPublicKey, ClassificationTag, KeywordSlot, Tagger, TrapdoorEntry,
    UserKeyPair, UserPublicKey,
};

/// Length in bytes of the tag component produced by
/// [`PairingSuite::hash_to_bits`].
pub const DIGEST_LEN: usize = 32;

/// Domain-separation string used when hashing fragments into group A.
pub const HASH_TO_GROUP_DST: &[u8] = b"PBCAP-H1-v1";
