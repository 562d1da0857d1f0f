//! On-disk formats. See `docs/formats.md` for the byte-level description.
//!
//! Every file is a JSON object whose first three members are `format`
//! (always [`FORMAT_VERSION`]), `suite` and `kind`. Group elements and scalars
//! are lowercase hex of their canonical encodings; payloads are standard
//! base64 with padding.

use std::fs;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use pbcap_core::policy::Decision;
use pbcap_core::scheme::{AdminKeyPair, AdminPublicKey, ClassificationTag, UserKeyPair, UserPublicKey};
use pbcap_core::{CompiledPolicy, KeywordSlot, PairingSuite, TrapdoorEntry, DIGEST_LEN};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const FORMAT_VERSION: &str = "pbcap/1";

pub const KIND_ADMIN_SECRET: &str = "admin-secret-key";
pub const KIND_ADMIN_PUBLIC: &str = "admin-public-key";
pub const KIND_USER_SECRET: &str = "user-secret-key";
pub const KIND_USER_PUBLIC: &str = "user-public-key";
pub const KIND_COMPILED: &str = "compiled-policies";
pub const KIND_SUBMISSION: &str = "submission";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecretKeyFile {
    pub format: String,
    pub suite: String,
    pub kind: String,
    pub secret: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdminPublicKeyFile {
    pub format: String,
    pub suite: String,
    pub kind: String,
    pub pk_a: String,
    pub pk_b: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserPublicKeyFile {
    pub format: String,
    pub suite: String,
    pub kind: String,
    pub pk_b: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapdoorRecord {
    pub slot: u32,
    pub token: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompiledPolicyRecord {
    pub id: String,
    pub priority: i64,
    pub category: String,
    pub storage_unit: String,
    pub trapdoors: Vec<TrapdoorRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompiledPolicyFile {
    pub format: String,
    pub suite: String,
    pub kind: String,
    pub policies: Vec<CompiledPolicyRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagRecord {
    pub y: String,
    pub z: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmissionFile {
    pub format: String,
    pub suite: String,
    pub kind: String,
    pub file_id: String,
    pub user_public_key: String,
    pub x: String,
    pub tags: Vec<TagRecord>,
    pub payload: String,
}

/// One line of the decision log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecisionRecord {
    pub file_id: String,
    pub matched_policy: Option<String>,
    pub category: String,
    pub storage_unit: String,
    pub authenticated: bool,
}

impl From<&Decision> for DecisionRecord {
    fn from(d: &Decision) -> Self {
        Self {
            file_id: d.file_id.clone(),
            matched_policy: d.matched_policy.clone(),
            category: d.category.clone(),
            storage_unit: d.storage_unit.clone(),
            authenticated: d.authenticated,
        }
    }
}

/// Pretty-printed JSON followed by a newline.
pub fn to_file_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("format structs always serialize");
    out.push(b'\n');
    out
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| CliError::decode(path, e))
}

fn check_header(path: &Path, format: &str, suite: &str, kind: &str, want_suite: &str, want_kind: &str) -> Result<()> {
    if format != FORMAT_VERSION {
        return Err(CliError::decode(path, format!("unsupported format `{format}`, expected `{FORMAT_VERSION}`")));
    }
    if kind != want_kind {
        return Err(CliError::decode(path, format!("expected a `{want_kind}` file, found `{kind}`")));
    }
    if suite != want_suite {
        return Err(CliError::decode(path, format!("file is for suite `{suite}`, not `{want_suite}`")));
    }
    Ok(())
}

fn unhex(path: &Path, field: &str, text: &str) -> Result<Vec<u8>> {
    hex::decode(text).map_err(|e| CliError::decode(path, format!("{field}: {e}")))
}

fn core_err(path: &Path, field: &str) -> impl Fn(pbcap_core::Error) -> CliError {
    let path = path.to_path_buf();
    let field = field.to_string();
    move |e| CliError::decode(&path, format!("{field}: {e}"))
}

pub fn admin_secret_to_file<S: PairingSuite>(suite: &S, key: &AdminKeyPair<S>) -> SecretKeyFile {
    SecretKeyFile {
        format: FORMAT_VERSION.into(),
        suite: S::NAME.into(),
        kind: KIND_ADMIN_SECRET.into(),
        secret: hex::encode(suite.encode_scalar(key.secret())),
    }
}

pub fn user_secret_to_file<S: PairingSuite>(suite: &S, key: &UserKeyPair<S>) -> SecretKeyFile {
    SecretKeyFile {
        format: FORMAT_VERSION.into(),
        suite: S::NAME.into(),
        kind: KIND_USER_SECRET.into(),
        secret: hex::encode(suite.encode_scalar(key.secret())),
    }
}

pub fn admin_public_to_file<S: PairingSuite>(suite: &S, key: &AdminPublicKey<S>) -> AdminPublicKeyFile {
    AdminPublicKeyFile {
        format: FORMAT_VERSION.into(),
        suite: S::NAME.into(),
        kind: KIND_ADMIN_PUBLIC.into(),
        pk_a: hex::encode(suite.encode_a(&key.pk_a)),
        pk_b: hex::encode(suite.encode_b(&key.pk_b)),
    }
}

pub fn user_public_to_file<S: PairingSuite>(suite: &S, key: &UserPublicKey<S>) -> UserPublicKeyFile {
    UserPublicKeyFile {
        format: FORMAT_VERSION.into(),
        suite: S::NAME.into(),
        kind: KIND_USER_PUBLIC.into(),
        pk_b: hex::encode(suite.encode_b(&key.pk_b)),
    }
}

fn load_secret<S: PairingSuite>(suite: &S, path: &Path, kind: &str) -> Result<S::Scalar> {
    let f: SecretKeyFile = read_json(path)?;
    check_header(path, &f.format, &f.suite, &f.kind, S::NAME, kind)?;
    suite.decode_scalar(&unhex(path, "secret", &f.secret)?).map_err(core_err(path, "secret"))
}

pub fn load_admin_secret<S: PairingSuite>(suite: &S, path: &Path) -> Result<AdminKeyPair<S>> {
    let alpha = load_secret(suite, path, KIND_ADMIN_SECRET)?;
    AdminKeyPair::from_secret(suite, alpha).map_err(core_err(path, "secret"))
}

pub fn load_user_secret<S: PairingSuite>(suite: &S, path: &Path) -> Result<UserKeyPair<S>> {
    let beta = load_secret(suite, path, KIND_USER_SECRET)?;
    UserKeyPair::from_secret(suite, beta).map_err(core_err(path, "secret"))
}

/// Loads an administrator public key and checks that both components carry
/// the same exponent.
pub fn load_admin_public<S: PairingSuite>(suite: &S, path: &Path) -> Result<AdminPublicKey<S>> {
    let f: AdminPublicKeyFile = read_json(path)?;
    check_header(path, &f.format, &f.suite, &f.kind, S::NAME, KIND_ADMIN_PUBLIC)?;
    let pk_a = suite.decode_a(&unhex(path, "pk_a", &f.pk_a)?).map_err(core_err(path, "pk_a"))?;
    let pk_b = suite.decode_b(&unhex(path, "pk_b", &f.pk_b)?).map_err(core_err(path, "pk_b"))?;
    AdminPublicKey::new(suite, pk_a, pk_b).map_err(core_err(path, "public key"))
}

pub fn load_user_public<S: PairingSuite>(suite: &S, path: &Path) -> Result<UserPublicKey<S>> {
    let f: UserPublicKeyFile = read_json(path)?;
    check_header(path, &f.format, &f.suite, &f.kind, S::NAME, KIND_USER_PUBLIC)?;
    let pk_b = suite.decode_b(&unhex(path, "pk_b", &f.pk_b)?).map_err(core_err(path, "pk_b"))?;
    UserPublicKey::new(suite, pk_b).map_err(core_err(path, "pk_b"))
}

pub fn compiled_to_file<S: PairingSuite>(suite: &S, compiled: &[CompiledPolicy<S>]) -> CompiledPolicyFile {
    CompiledPolicyFile {
        format: FORMAT_VERSION.into(),
        suite: S::NAME.into(),
        kind: KIND_COMPILED.into(),
        policies: compiled
            .iter()
            .map(|p| CompiledPolicyRecord {
                id: p.id.clone(),
                priority: p.priority,
                category: p.category.clone(),
                storage_unit: p.storage_unit.clone(),
                trapdoors: p
                    .trapdoors
                    .iter()
                    .map(|t| TrapdoorRecord { slot: t.slot.0, token: hex::encode(suite.encode_a(&t.token)) })
                    .collect(),
            })
            .collect(),
    }
}

pub fn load_compiled<S: PairingSuite>(suite: &S, path: &Path) -> Result<Vec<CompiledPolicy<S>>> {
    let f: CompiledPolicyFile = read_json(path)?;
    check_header(path, &f.format, &f.suite, &f.kind, S::NAME, KIND_COMPILED)?;
    let mut ids = std::collections::BTreeSet::new();
    f.policies
        .into_iter()
        .map(|p| {
            if !ids.insert(p.id.clone()) {
                return Err(CliError::decode(path, format!("duplicate policy id `{}`", p.id)));
            }
            crate::storage::check_unit_name(&p.storage_unit).map_err(|m| CliError::decode(path, m))?;
            let trapdoors = p
                .trapdoors
                .iter()
                .map(|t| {
                    let token = suite
                        .decode_a(&unhex(path, "token", &t.token)?)
                        .map_err(core_err(path, "token"))?;
                    Ok(TrapdoorEntry { token, slot: KeywordSlot(t.slot) })
                })
                .collect::<Result<Vec<_>>>()?;
            if trapdoors.is_empty() {
                return Err(CliError::decode(path, format!("policy `{}` has no trapdoors", p.id)));
            }
            Ok(CompiledPolicy {
                id: p.id,
                priority: p.priority,
                category: p.category,
                storage_unit: p.storage_unit,
                trapdoors,
            })
        })
        .collect()
}

/// A decoded submission.
pub struct Submission<S: PairingSuite> {
    pub file_id: String,
    pub user_public_key: UserPublicKey<S>,
    pub x: S::B,
    pub tags: Vec<ClassificationTag<S>>,
    pub payload: Vec<u8>,
}

pub fn submission_to_file<S: PairingSuite>(suite: &S, s: &Submission<S>) -> SubmissionFile {
    SubmissionFile {
        format: FORMAT_VERSION.into(),
        suite: S::NAME.into(),
        kind: KIND_SUBMISSION.into(),
        file_id: s.file_id.clone(),
        user_public_key: hex::encode(suite.encode_b(&s.user_public_key.pk_b)),
        x: hex::encode(suite.encode_b(&s.x)),
        tags: s
            .tags
            .iter()
            .map(|t| TagRecord { y: hex::encode(suite.encode_b(&t.y)), z: hex::encode(t.z) })
            .collect(),
        payload: BASE64.encode(&s.payload),
    }
}

pub fn load_submission<S: PairingSuite>(suite: &S, path: &Path) -> Result<Submission<S>> {
    let f: SubmissionFile = read_json(path)?;
    check_header(path, &f.format, &f.suite, &f.kind, S::NAME, KIND_SUBMISSION)?;
    crate::storage::check_file_id(&f.file_id).map_err(|m| CliError::decode(path, m))?;
    let user_pk = suite
        .decode_b(&unhex(path, "user_public_key", &f.user_public_key)?)
        .map_err(core_err(path, "user_public_key"))?;
    let user_public_key = UserPublicKey::new(suite, user_pk).map_err(core_err(path, "user_public_key"))?;
    let x = suite.decode_b(&unhex(path, "x", &f.x)?).map_err(core_err(path, "x"))?;
    let tags = f
        .tags
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let y = suite.decode_b(&unhex(path, "y", &t.y)?).map_err(core_err(path, &format!("tags[{i}].y")))?;
            let z: [u8; DIGEST_LEN] = unhex(path, "z", &t.z)?
                .try_into()
                .map_err(|_| CliError::decode(path, format!("tags[{i}].z: expected {DIGEST_LEN} bytes")))?;
            Ok(ClassificationTag { x: x.clone(), y, z })
        })
        .collect::<Result<Vec<_>>>()?;
    let payload = BASE64.decode(&f.payload).map_err(|e| CliError::decode(path, format!("payload: {e}")))?;
    Ok(Submission { file_id: f.file_id, user_public_key, x, tags, payload })
}

/// Reads only the `suite` member of any pbcap file.
pub fn peek_suite(path: &Path) -> Result<String> {
    #[derive(Deserialize)]
    struct Peek {
        suite: String,
    }
    let p: Peek = read_json(path)?;
    Ok(p.suite)
}
