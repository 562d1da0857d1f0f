//! Command-line roles, file formats and storage routing for provenance-based
//! classification.
//!
//! The binary `pbcap` exposes four roles as subcommands:
//!
//! - `pap`: the policy administration point. Generates the administrator key
//!   pair and compiles policy files into trapdoors.
//! - `user`: generates user keys and turns a provenance graph plus a payload
//!   into a tagged submission.
//! - `pdp`: the policy decision point. Classifies submissions, copies each
//!   authenticated payload into its storage unit and appends to the
//!   decision log.
//! - `harness`: runs the chosen-fragment indistinguishability game.
//!
//! Everything the binary does is also available through [`commands`].

#![deny(rust_2018_idioms, unsafe_code)]

pub mod commands;
pub mod error;
pub mod formats;
pub mod graph_file;
pub mod policy_file;
pub mod storage;
