//! Classification policies.
//!
//! A policy maps a set of provenance fragments to a category and a storage
//! unit. A file matches a policy when any of its tags passes the test against
//! any of the policy's trapdoors. When several policies match, the one with
//! the largest priority wins; equal priorities fall back to the
//! lexicographically smallest policy id. Files matching nothing go to the
//! [`UNCLASSIFIED`] category in the [`DEFAULT_UNIT`].

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::pairing::PairingSuite;
use crate::provenance::ProvenanceFragment;
use crate::scheme::{
    keyword_matches, make_trapdoor, verify_authenticator, AdminKeyPair, AdminPublicKey,
    ClassificationTag, KeywordSlot, TrapdoorEntry, UserPublicKey,
};
use crate::Error;

pub const UNCLASSIFIED: &str = "unclassified";
pub const DEFAULT_UNIT: &str = "default";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Policy {
    id: String,
    keywords: Vec<ProvenanceFragment>,
    priority: i64,
    category: String,
    storage_unit: String,
}

impl Policy {
    /// Validates the policy. Repeated keywords are kept once, in first-seen
    /// order.
    pub fn new(
        id: impl Into<String>,
        keywords: Vec<ProvenanceFragment>,
        priority: i64,
        category: impl Into<String>,
        storage_unit: impl Into<String>,
    ) -> Result<Self, Error> {
        let id = id.into();
        let category = category.into();
        let storage_unit = storage_unit.into();
        let invalid = |reason: &str| Error::InvalidPolicy { id: id.clone(), reason: reason.to_string() };
        if id.trim().is_empty() {
            return Err(invalid("empty policy id"));
        }
        if keywords.is_empty() {
            return Err(invalid("empty keyword set"));
        }
        if category.trim().is_empty() {
            return Err(invalid("empty category"));
        }
        if storage_unit.trim().is_empty() {
            return Err(invalid("empty storage unit"));
        }
        let mut seen = BTreeSet::new();
        let keywords = keywords.into_iter().filter(|k| seen.insert(k.canonical_string())).collect();
        Ok(Self { id, keywords, priority, category, storage_unit })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn keywords(&self) -> &[ProvenanceFragment] {
        &self.keywords
    }

    pub fn priority(&self) -> i64 {
        self.priority
    }

    pub fn category(&self) -> &str {
        &self.category
    }

    pub fn storage_unit(&self) -> &str {
        &self.storage_unit
    }
}

/// A policy whose keywords have been replaced by trapdoors.
#[derive(Clone, PartialEq, Eq)]
pub struct CompiledPolicy<S: PairingSuite> {
    pub id: String,
    pub priority: i64,
    pub category: String,
    pub storage_unit: String,
    pub trapdoors: Vec<TrapdoorEntry<S>>,
}

impl<S: PairingSuite> fmt::Debug for CompiledPolicy<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompiledPolicy")
            .field("id", &self.id)
            .field("priority", &self.priority)
            .field("category", &self.category)
            .field("storage_unit", &self.storage_unit)
            .field("trapdoors", &self.trapdoors)
            .finish()
    }
}

/// Precedence order: higher priority first, then smaller id.
pub fn precedence(a: (i64, &str), b: (i64, &str)) -> Ordering {
    b.0.cmp(&a.0).then_with(|| a.1.cmp(b.1))
}

pub fn compile_policies<S: PairingSuite>(
    suite: &S,
    admin: &AdminKeyPair<S>,
    policies: &[Policy],
) -> Result<Vec<CompiledPolicy<S>>, Error> {
    let mut ids = BTreeSet::new();
    for p in policies {
        if !ids.insert(p.id.as_str()) {
            return Err(Error::DuplicatePolicyId(p.id.clone()));
        }
    }
    Ok(policies
        .iter()
        .map(|p| CompiledPolicy {
            id: p.id.clone(),
            priority: p.priority,
            category: p.category.clone(),
            storage_unit: p.storage_unit.clone(),
            trapdoors: p
                .keywords
                .iter()
                .enumerate()
                .map(|(i, k)| make_trapdoor(suite, admin.secret(), &k.canonicalize(), KeywordSlot(i as u32)))
                .collect(),
        })
        .collect())
}

/// Routing outcome handed from the decision point to the enforcement point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub file_id: String,
    pub matched_policy: Option<String>,
    pub category: String,
    pub storage_unit: String,
    pub authenticated: bool,
}

impl Decision {
    fn unclassified(file_id: &str, authenticated: bool) -> Self {
        Self {
            file_id: file_id.to_string(),
            matched_policy: None,
            category: UNCLASSIFIED.to_string(),
            storage_unit: DEFAULT_UNIT.to_string(),
            authenticated,
        }
    }
}

fn policy_matches<S: PairingSuite>(suite: &S, policy: &CompiledPolicy<S>, tags: &[ClassificationTag<S>]) -> bool {
    tags.iter().any(|tag| policy.trapdoors.iter().any(|td| keyword_matches(suite, td, tag)))
}

fn check_shared_authenticator<S: PairingSuite>(x: &S::B, tags: &[ClassificationTag<S>]) -> Result<(), Error> {
    if tags.iter().all(|t| &t.x == x) {
        Ok(())
    } else {
        Err(Error::MixedAuthenticator)
    }
}

/// Ids of every policy some tag matches, in input order. Does not check
/// authenticity.
pub fn matching_policies<S: PairingSuite>(
    suite: &S,
    tags: &[ClassificationTag<S>],
    compiled: &[CompiledPolicy<S>],
) -> Vec<String> {
    compiled.iter().filter(|p| policy_matches(suite, p, tags)).map(|p| p.id.clone()).collect()
}

/// Classifies one submission.
///
/// `authenticator` is the submission's shared `X` component; every tag must
/// carry it. Authenticity is checked once, before any keyword test. An
/// unauthenticated submission gets a [`Decision`] with `authenticated ==
/// false` and no matched policy.
pub fn classify<S: PairingSuite>(
    suite: &S,
    file_id: &str,
    admin: &AdminPublicKey<S>,
    user: &UserPublicKey<S>,
    authenticator: &S::B,
    tags: &[ClassificationTag<S>],
    compiled: &[CompiledPolicy<S>],
) -> Result<Decision, Error> {
    check_shared_authenticator(authenticator, tags)?;
    if !verify_authenticator(suite, admin, user, authenticator) {
        return Ok(Decision::unclassified(file_id, false));
    }
    // Visiting policies in precedence order, the first match is the winner.
    let mut order: Vec<&CompiledPolicy<S>> = compiled.iter().collect();
    order.sort_by(|a, b| precedence((a.priority, &a.id), (b.priority, &b.id)));
    let winner = order.into_iter().find(|p| policy_matches(suite, p, tags));
    Ok(match winner {
        Some(p) => Decision {
            file_id: file_id.to_string(),
            matched_policy: Some(p.id.clone()),
            category: p.category.clone(),
            storage_unit: p.storage_unit.clone(),
            authenticated: true,
        },
        None => Decision::unclassified(file_id, true),
    })
}
