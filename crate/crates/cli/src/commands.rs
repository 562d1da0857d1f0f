//! The roles behind each subcommand, callable in-process.
//!
//! Every command takes a [`Env`] that selects the pairing suite and,
//! optionally, a deterministic seed. Seeds are refused for key generation and
//! tagging under the production suite.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use pbcap_core::harness::{attacker_by_name, run_game, ATTACKER_NAMES};
use pbcap_core::policy::{DEFAULT_UNIT, UNCLASSIFIED};
use pbcap_core::scheme::{keygen_admin, keygen_user};
use pbcap_core::{classify, compile_policies, Bls12Suite, CompiledPolicy, Decision, PairingSuite, Tagger};
use rand_chacha::ChaCha20Rng;
use rand_core::SeedableRng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::formats::{
    admin_public_to_file, admin_secret_to_file, compiled_to_file, load_admin_public, load_admin_secret,
    load_compiled, load_submission, load_user_public, load_user_secret, submission_to_file, to_file_bytes,
    user_public_to_file, user_secret_to_file, DecisionRecord, Submission,
};
use crate::graph_file::load_graph;
use crate::policy_file::load_policies;
use crate::storage::{check_file_id, StorageLayout};

#[cfg(feature = "mock")]
use pbcap_core::mock::MockSuite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SuiteKind {
    /// BLS12-381.
    Production,
    /// Insecure transparent suite for tests and reproducible runs.
    #[cfg(feature = "mock")]
    Mock,
}

impl SuiteKind {
    pub fn name(self) -> &'static str {
        match self {
            SuiteKind::Production => Bls12Suite::NAME,
            #[cfg(feature = "mock")]
            SuiteKind::Mock => MockSuite::NAME,
        }
    }
}

/// Options shared by every command.
#[derive(Debug, Clone, Copy)]
pub struct Env {
    pub suite: SuiteKind,
    pub seed: Option<u64>,
}

// Distinct streams keep seeded roles from drawing identical secrets.
const STREAM_ADMIN_KEYGEN: u64 = 1;
const STREAM_USER_KEYGEN: u64 = 2;
const STREAM_TAG: u64 = 3;

impl Env {
    fn rng(&self, stream: u64) -> Result<ChaCha20Rng> {
        match self.seed {
            None => Ok(ChaCha20Rng::from_entropy()),
            Some(_) if self.suite == SuiteKind::Production => Err(CliError::Usage(
                "--seed is only accepted with --suite mock or by the harness".into(),
            )),
            Some(seed) => {
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                rng.set_stream(stream);
                Ok(rng)
            }
        }
    }
}

macro_rules! with_suite {
    ($kind:expr, $s:ident => $body:expr) => {
        match $kind {
            SuiteKind::Production => {
                let $s = &Bls12Suite;
                $body
            }
            #[cfg(feature = "mock")]
            SuiteKind::Mock => {
                let $s = &MockSuite;
                $body
            }
        }
    };
}

fn refuse_existing(paths: &[&Path], force: bool) -> Result<()> {
    if !force {
        if let Some(p) = paths.iter().find(|p| p.exists()) {
            return Err(CliError::Exists(p.to_path_buf()));
        }
    }
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8], secret: bool) -> Result<()> {
    let mut opts = OpenOptions::new();
    opts.write(true).create(true).truncate(true);
    #[cfg(unix)]
    if secret {
        use std::os::unix::fs::OpenOptionsExt;
        opts.mode(0o600);
    }
    #[cfg(not(unix))]
    let _ = secret;
    let mut f = opts.open(path).map_err(|e| CliError::io(path, e))?;
    #[cfg(unix)]
    if secret {
        use std::os::unix::fs::PermissionsExt;
        f.set_permissions(fs::Permissions::from_mode(0o600)).map_err(|e| CliError::io(path, e))?;
    }
    f.write_all(bytes).map_err(|e| CliError::io(path, e))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Paths written by a key generation command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPaths {
    pub secret: PathBuf,
    pub public: PathBuf,
}

impl KeyPaths {
    pub fn from_prefix(prefix: &Path) -> Self {
        Self { secret: with_suffix(prefix, ".secret.json"), public: with_suffix(prefix, ".public.json") }
    }
}

pub fn pap_keygen(env: &Env, prefix: &Path, force: bool) -> Result<KeyPaths> {
    let paths = KeyPaths::from_prefix(prefix);
    refuse_existing(&[&paths.secret, &paths.public], force)?;
    let mut rng = env.rng(STREAM_ADMIN_KEYGEN)?;
    with_suite!(env.suite, s => {
        let key = keygen_admin(s, &mut rng)?;
        write_file(&paths.secret, &to_file_bytes(&admin_secret_to_file(s, &key)), true)?;
        write_file(&paths.public, &to_file_bytes(&admin_public_to_file(s, key.public())), false)?;
    });
    Ok(paths)
}

pub fn user_keygen(env: &Env, prefix: &Path, force: bool) -> Result<KeyPaths> {
    let paths = KeyPaths::from_prefix(prefix);
    refuse_existing(&[&paths.secret, &paths.public], force)?;
    let mut rng = env.rng(STREAM_USER_KEYGEN)?;
    with_suite!(env.suite, s => {
        let key = keygen_user(s, &mut rng)?;
        write_file(&paths.secret, &to_file_bytes(&user_secret_to_file(s, &key)), true)?;
        write_file(&paths.public, &to_file_bytes(&user_public_to_file(s, key.public())), false)?;
    });
    Ok(paths)
}

/// Compiles a policy file into trapdoors. Returns the number of policies.
pub fn pap_compile(env: &Env, policies: &Path, admin_secret: &Path, out: &Path, force: bool) -> Result<usize> {
    refuse_existing(&[out], force)?;
    let policies = load_policies(policies)?;
    with_suite!(env.suite, s => {
        let admin = load_admin_secret(s, admin_secret)?;
        let compiled = compile_policies(s, &admin, &policies)?;
        write_file(out, &to_file_bytes(&compiled_to_file(s, &compiled)), false)?;
    });
    Ok(policies.len())
}

pub struct TagRequest<'a> {
    pub graph: &'a Path,
    pub admin_public_key: &'a Path,
    pub user_secret_key: &'a Path,
    pub payload: &'a Path,
    /// Defaults to the payload's file name.
    pub file_id: Option<&'a str>,
    pub out: &'a Path,
    pub force: bool,
}

/// Tags every fragment of a provenance graph and writes a submission.
/// Returns the number of tags.
pub fn user_tag(env: &Env, req: &TagRequest<'_>) -> Result<usize> {
    refuse_existing(&[req.out], req.force)?;
    let file_id = match req.file_id {
        Some(id) => id.to_string(),
        None => req
            .payload
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| CliError::Usage(format!("cannot derive a file id from {}", req.payload.display())))?
            .to_string(),
    };
    check_file_id(&file_id).map_err(CliError::Usage)?;
    let fragments: Vec<Vec<u8>> =
        load_graph(req.graph)?.fragments()?.iter().map(|f| f.canonicalize()).collect();
    let payload = fs::read(req.payload).map_err(|e| CliError::io(req.payload, e))?;
    let mut rng = env.rng(STREAM_TAG)?;
    let bytes = with_suite!(env.suite, s => tag_with(s, req, &fragments, file_id, payload, &mut rng))?;
    write_file(req.out, &bytes, false)?;
    Ok(fragments.len())
}

fn tag_with<S: PairingSuite>(
    suite: &S,
    req: &TagRequest<'_>,
    fragments: &[Vec<u8>],
    file_id: String,
    payload: Vec<u8>,
    rng: &mut ChaCha20Rng,
) -> Result<Vec<u8>> {
    let admin = load_admin_public(suite, req.admin_public_key)?;
    let user = load_user_secret(suite, req.user_secret_key)?;
    let tagger = Tagger::new(suite, &admin, &user);
    let tags = fragments.iter().map(|f| tagger.tag(f, rng)).collect::<Result<Vec<_>, _>>()?;
    let submission = Submission {
        file_id,
        user_public_key: user.public().clone(),
        x: tagger.authenticator().clone(),
        tags,
        payload,
    };
    Ok(to_file_bytes(&submission_to_file(suite, &submission)))
}

pub struct ClassifyRequest<'a> {
    pub submissions: &'a [PathBuf],
    pub compiled: &'a Path,
    pub admin_public_key: &'a Path,
    pub user_public_keys: &'a [PathBuf],
    pub storage_root: &'a Path,
    /// Worker threads for the decision step. `None` or `Some(1)` runs inline.
    pub parallel: Option<usize>,
}

/// What happened to one submission.
#[derive(Debug)]
pub enum Outcome {
    /// Authenticated and copied into `stored`.
    Routed { decision: DecisionRecord, stored: PathBuf },
    /// Failed the authenticity check. Logged, not stored.
    Unauthenticated { decision: DecisionRecord },
    /// Could not be decoded or stored. Neither logged nor stored.
    Failed { submission: PathBuf, error: CliError },
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::Routed { .. } => 0,
            Outcome::Unauthenticated { decision } => {
                CliError::Unauthenticated(decision.file_id.clone()).exit_code()
            }
            Outcome::Failed { error, .. } => error.exit_code(),
        }
    }
}

#[derive(Debug)]
pub struct ClassifyReport {
    pub outcomes: Vec<Outcome>,
}

impl ClassifyReport {
    /// The largest exit status across submissions.
    pub fn exit_code(&self) -> i32 {
        self.outcomes.iter().map(Outcome::exit_code).max().unwrap_or(0)
    }
}

fn unregistered(file_id: &str) -> Decision {
    Decision {
        file_id: file_id.to_string(),
        matched_policy: None,
        category: UNCLASSIFIED.to_string(),
        storage_unit: DEFAULT_UNIT.to_string(),
        authenticated: false,
    }
}

fn decide<S: PairingSuite>(
    suite: &S,
    admin: &pbcap_core::AdminPublicKey<S>,
    users: &[pbcap_core::UserPublicKey<S>],
    compiled: &[CompiledPolicy<S>],
    sub: &Submission<S>,
) -> Result<Decision> {
    match users.iter().find(|u| u.pk_b == sub.user_public_key.pk_b) {
        Some(user) => Ok(classify(suite, &sub.file_id, admin, user, &sub.x, &sub.tags, compiled)?),
        None => Ok(unregistered(&sub.file_id)),
    }
}

fn classify_with<S: PairingSuite>(suite: &S, req: &ClassifyRequest<'_>) -> Result<ClassifyReport> {
    let layout = StorageLayout::open(req.storage_root)?;
    let admin = load_admin_public(suite, req.admin_public_key)?;
    let users = req
        .user_public_keys
        .iter()
        .map(|p| load_user_public(suite, p))
        .collect::<Result<Vec<_>>>()?;
    if users.is_empty() {
        return Err(CliError::Usage("at least one --user-public-key is required".into()));
    }
    let compiled = load_compiled(suite, req.compiled)?;

    let loaded: Vec<Result<Submission<S>>> = req.submissions.iter().map(|p| load_submission(suite, p)).collect();
    let run = |sub: &Result<Submission<S>>| -> Result<Decision> {
        let sub = sub.as_ref().map_err(clone_error)?;
        decide(suite, &admin, &users, &compiled, sub)
    };
    let decisions: Vec<Result<Decision>> = match req.parallel {
        Some(n) if n > 1 => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(format!("cannot start {n} worker threads: {e}")))?
            .install(|| loaded.par_iter().map(run).collect()),
        _ => loaded.iter().map(run).collect(),
    };

    // Routing and logging stay sequential so the log follows input order.
    let mut outcomes = Vec::with_capacity(decisions.len());
    for ((path, sub), decision) in req.submissions.iter().zip(&loaded).zip(decisions) {
        let outcome = match (sub, decision) {
            (Ok(sub), Ok(d)) if d.authenticated => match layout.store(&d, &sub.payload) {
                Ok(stored) => {
                    layout.append_log(&d)?;
                    Outcome::Routed { decision: DecisionRecord::from(&d), stored }
                }
                Err(error) => Outcome::Failed { submission: path.clone(), error },
            },
            (Ok(_), Ok(d)) => {
                layout.append_log(&d)?;
                Outcome::Unauthenticated { decision: DecisionRecord::from(&d) }
            }
            (_, Err(error)) => Outcome::Failed { submission: path.clone(), error: as_submission_error(path, error) },
            (Err(_), Ok(_)) => unreachable!("a decision needs a decoded submission"),
        };
        outcomes.push(outcome);
    }
    Ok(ClassifyReport { outcomes })
}

// `CliError` wraps `io::Error` and is not `Clone`; submissions that failed to
// load are reported again by path in the routing loop.
fn clone_error(e: &CliError) -> CliError {
    match e {
        CliError::Decode { path, message } => CliError::Decode { path: path.clone(), message: message.clone() },
        CliError::Io { path, source } => CliError::io(path, std::io::Error::new(source.kind(), source.to_string())),
        other => CliError::Usage(other.to_string()),
    }
}

// A core error while classifying means the submission itself was malformed.
fn as_submission_error(path: &Path, e: CliError) -> CliError {
    match e {
        CliError::Core(core) => CliError::decode(path, core),
        other => other,
    }
}

pub fn pdp_classify(env: &Env, req: &ClassifyRequest<'_>) -> Result<ClassifyReport> {
    with_suite!(env.suite, s => classify_with(s, req))
}

/// JSON summary printed by `harness run`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HarnessReport {
    pub attacker_id: String,
    pub suite: String,
    pub seed: u64,
    pub trials: u64,
    pub wins: u64,
    pub voided: u64,
    pub win_rate: f64,
    pub advantage: f64,
    pub leaked: bool,
    pub rules_respected: bool,
}

/// Runs the indistinguishability game. The seed defaults to 0 and is
/// accepted under every suite.
pub fn harness_run(env: &Env, attacker: &str, trials: u64) -> Result<HarnessReport> {
    let seed = env.seed.unwrap_or(0);
    let unknown = || CliError::Usage(format!("unknown attacker `{attacker}`; expected one of {}", ATTACKER_NAMES.join(", ")));
    let t = with_suite!(env.suite, s => {
        let mut a = attacker_by_name(attacker).ok_or_else(unknown)?;
        run_game(s, a.as_mut(), trials, seed)?
    });
    Ok(HarnessReport {
        attacker_id: t.attacker_id.clone(),
        suite: env.suite.name().to_string(),
        seed,
        trials: t.trials,
        wins: t.wins,
        voided: t.voided,
        win_rate: t.win_rate(),
        advantage: t.advantage(),
        leaked: t.leaked,
        rules_respected: t.rules_respected(),
    })
}
