//! Executable chosen-fragment indistinguishability game, plus an exact
//! identity oracle over the mock suite.
//!
//! One trial of the game:
//!
//! 1. the challenger generates fresh administrator and user keys and hands
//!    out the public halves;
//! 2. the attacker may ask the trapdoor oracle for any fragments;
//! 3. the attacker names two challenge fragments `P0`, `P1`;
//! 4. the challenger flips `b` and returns a tag for `P_b`;
//! 5. the attacker may keep querying, except for `P0` and `P1`;
//! 6. the attacker guesses `b`.
//!
//! A trial in which the oracle was ever asked for `P0` or `P1` is voided. Voided
//! trials stay in the denominator of the win rate and are counted separately.
//!
//! Each trial draws from its own ChaCha20 streams derived from the root seed
//! and the trial index, so trials can run in any order or in parallel and
//! still reproduce the same transcript.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::pairing::PairingSuite;
use crate::scheme::{
    keygen_admin, keygen_user, make_tag, make_trapdoor, test, AdminKeyPair, AdminPublicKey,
    ClassificationTag, KeywordSlot, TrapdoorEntry, UserPublicKey,
};
use crate::Error;

/// Answers trapdoor queries and remembers every fragment asked for.
pub struct TrapdoorOracle<'a, S: PairingSuite> {
    suite: &'a S,
    admin: &'a AdminKeyPair<S>,
    queried: BTreeSet<Vec<u8>>,
}

impl<'a, S: PairingSuite> TrapdoorOracle<'a, S> {
    pub fn query(&mut self, fragment: &[u8]) -> TrapdoorEntry<S> {
        self.queried.insert(fragment.to_vec());
        make_trapdoor(self.suite, self.admin.secret(), fragment, KeywordSlot(0))
    }

    pub fn queried(&self) -> &BTreeSet<Vec<u8>> {
        &self.queried
    }
}

/// Everything an attacker sees during one trial.
pub struct AttackContext<'a, S: PairingSuite> {
    pub suite: &'a S,
    pub admin: &'a AdminPublicKey<S>,
    pub user: &'a UserPublicKey<S>,
    pub oracle: TrapdoorOracle<'a, S>,
    /// The attacker's own randomness, independent of the challenger's.
    pub rng: ChaCha20Rng,
    leaked: Option<TrapdoorEntry<S>>,
}

impl<S: PairingSuite> AttackContext<'_, S> {
    /// Trapdoor for `P0` handed over outside the oracle. Only present for
    /// attackers whose [`AttackerStrategy::requests_leak`] returns `true`.
    pub fn leaked_trapdoor(&self) -> Option<&TrapdoorEntry<S>> {
        self.leaked.as_ref()
    }
}

pub trait AttackerStrategy<S: PairingSuite> {
    fn name(&self) -> &str;

    /// Test-only bypass: when `true` the challenger hands the attacker the
    /// trapdoor for `P0` without recording a query.
    fn requests_leak(&self) -> bool {
        false
    }

    /// Steps 2 and 3: optional oracle queries, then the challenge pair.
    fn choose_fragments(&mut self, ctx: &mut AttackContext<'_, S>) -> (Vec<u8>, Vec<u8>);

    /// Steps 5 and 6: optional oracle queries, then the guess for `b`
    /// (`false` for `P0`, `true` for `P1`).
    fn guess(&mut self, ctx: &mut AttackContext<'_, S>, challenge: &ClassificationTag<S>) -> bool;
}

const DEFAULT_P0: &[u8] = b"RecordedBy(Test,Nurse)";
const DEFAULT_P1: &[u8] = b"DiagnosedBy(Report,Doctor)";

/// Ignores the challenge and flips a coin.
#[derive(Debug, Default, Clone)]
pub struct RandomGuess;

impl<S: PairingSuite> AttackerStrategy<S> for RandomGuess {
    fn name(&self) -> &str {
        "random-guess"
    }

    fn choose_fragments(&mut self, _ctx: &mut AttackContext<'_, S>) -> (Vec<u8>, Vec<u8>) {
        (DEFAULT_P0.to_vec(), DEFAULT_P1.to_vec())
    }

    fn guess(&mut self, ctx: &mut AttackContext<'_, S>, _challenge: &ClassificationTag<S>) -> bool {
        ctx.rng.next_u32() & 1 == 1
    }
}

/// Queries trapdoors for unrelated fragments and tests the challenge against
/// them before falling back to a coin flip. Shows that trapdoors for other
/// fragments carry no information about the challenge.
#[derive(Debug, Default, Clone)]
pub struct OracleProber;

impl<S: PairingSuite> AttackerStrategy<S> for OracleProber {
    fn name(&self) -> &str {
        "oracle-prober"
    }

    fn choose_fragments(&mut self, ctx: &mut AttackContext<'_, S>) -> (Vec<u8>, Vec<u8>) {
        ctx.oracle.query(b"Used(Sample,Lab)");
        (DEFAULT_P0.to_vec(), DEFAULT_P1.to_vec())
    }

    fn guess(&mut self, ctx: &mut AttackContext<'_, S>, challenge: &ClassificationTag<S>) -> bool {
        for probe in [&b"RecordedBy(Test,Doctor)"[..], b"DiagnosedBy(Report,Nurse)", b"Used(Sample,Lab)"] {
            let td = ctx.oracle.query(probe);
            if test(ctx.suite, ctx.admin, ctx.user, &td, challenge) {
                // cannot happen for a sound scheme
                return probe.starts_with(b"Diagnosed");
            }
        }
        ctx.rng.next_u32() & 1 == 1
    }
}

/// Receives the trapdoor for `P0` out of band and tests the challenge with it.
#[derive(Debug, Default, Clone)]
pub struct TrapdoorEquipped;

impl<S: PairingSuite> AttackerStrategy<S> for TrapdoorEquipped {
    fn name(&self) -> &str {
        "trapdoor-equipped"
    }

    fn requests_leak(&self) -> bool {
        true
    }

    fn choose_fragments(&mut self, _ctx: &mut AttackContext<'_, S>) -> (Vec<u8>, Vec<u8>) {
        (DEFAULT_P0.to_vec(), DEFAULT_P1.to_vec())
    }

    fn guess(&mut self, ctx: &mut AttackContext<'_, S>, challenge: &ClassificationTag<S>) -> bool {
        match ctx.leaked_trapdoor() {
            Some(td) => !test(ctx.suite, ctx.admin, ctx.user, td, challenge),
            None => ctx.rng.next_u32() & 1 == 1,
        }
    }
}

/// Breaks the rules by asking the oracle for `P0` after the challenge.
#[derive(Debug, Default, Clone)]
pub struct ChallengeQuerier {
    p0: Vec<u8>,
}

impl<S: PairingSuite> AttackerStrategy<S> for ChallengeQuerier {
    fn name(&self) -> &str {
        "challenge-querier"
    }

    fn choose_fragments(&mut self, _ctx: &mut AttackContext<'_, S>) -> (Vec<u8>, Vec<u8>) {
        self.p0 = DEFAULT_P0.to_vec();
        (self.p0.clone(), DEFAULT_P1.to_vec())
    }

    fn guess(&mut self, ctx: &mut AttackContext<'_, S>, challenge: &ClassificationTag<S>) -> bool {
        let td = ctx.oracle.query(&self.p0);
        !test(ctx.suite, ctx.admin, ctx.user, &td, challenge)
    }
}

pub const ATTACKER_NAMES: [&str; 4] = ["random-guess", "oracle-prober", "trapdoor-equipped", "challenge-querier"];

pub fn attacker_by_name<S: PairingSuite>(name: &str) -> Option<Box<dyn AttackerStrategy<S>>> {
    Some(match name {
        "random-guess" => Box::new(RandomGuess),
        "oracle-prober" => Box::new(OracleProber),
        "trapdoor-equipped" => Box::new(TrapdoorEquipped),
        "challenge-querier" => Box::new(ChallengeQuerier::default()),
        _ => return None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrialRecord {
    pub index: u64,
    pub b: bool,
    pub guess: bool,
    pub voided: bool,
    pub challenge: (Vec<u8>, Vec<u8>),
    pub queried: BTreeSet<Vec<u8>>,
}

impl TrialRecord {
    pub fn won(&self) -> bool {
        !self.voided && self.b == self.guess
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameTranscript {
    pub attacker_id: String,
    pub trials: u64,
    pub wins: u64,
    pub voided: u64,
    pub leaked: bool,
    /// Every fragment queried in a counted (non-voided) trial.
    pub queried_fragments: BTreeSet<Vec<u8>>,
    pub records: Vec<TrialRecord>,
}

impl GameTranscript {
    fn new(attacker_id: &str, leaked: bool) -> Self {
        Self {
            attacker_id: attacker_id.into(),
            trials: 0,
            wins: 0,
            voided: 0,
            leaked,
            queried_fragments: BTreeSet::new(),
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, record: TrialRecord) {
        self.trials += 1;
        if record.voided {
            self.voided += 1;
        } else {
            if record.won() {
                self.wins += 1;
            }
            self.queried_fragments.extend(record.queried.iter().cloned());
        }
        self.records.push(record);
    }

    /// Wins over all trials, voided ones included.
    pub fn win_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.wins as f64 / self.trials as f64
        }
    }

    /// `|win_rate - 1/2|`.
    pub fn advantage(&self) -> f64 {
        (self.win_rate() - 0.5).abs()
    }

    /// No counted trial queried one of its own challenge fragments.
    pub fn rules_respected(&self) -> bool {
        self.records
            .iter()
            .filter(|r| !r.voided)
            .all(|r| !r.queried.contains(&r.challenge.0) && !r.queried.contains(&r.challenge.1))
    }
}

fn trial_rng(seed: u64, index: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_mul(2).wrapping_add(stream));
    rng
}

/// Runs trial `index` of the game seeded by `seed`.
pub fn run_trial<S: PairingSuite>(
    suite: &S,
    attacker: &mut dyn AttackerStrategy<S>,
    seed: u64,
    index: u64,
) -> Result<TrialRecord, Error> {
    let mut rng = trial_rng(seed, index, 0);
    let admin = keygen_admin(suite, &mut rng)?;
    let user = keygen_user(suite, &mut rng)?;
    let mut ctx = AttackContext {
        suite,
        admin: admin.public(),
        user: user.public(),
        oracle: TrapdoorOracle { suite, admin: &admin, queried: BTreeSet::new() },
        rng: trial_rng(seed, index, 1),
        leaked: None,
    };
    let (p0, p1) = attacker.choose_fragments(&mut ctx);
    let b = rng.next_u32() & 1 == 1;
    let challenge = make_tag(suite, admin.public(), &user, if b { &p1 } else { &p0 }, &mut rng)?;
    if attacker.requests_leak() {
        ctx.leaked = Some(make_trapdoor(suite, admin.secret(), &p0, KeywordSlot(0)));
    }
    let guess = attacker.guess(&mut ctx, &challenge);
    let queried = ctx.oracle.queried;
    let voided = queried.contains(&p0) || queried.contains(&p1);
    Ok(TrialRecord { index, b, guess, voided, challenge: (p0, p1), queried })
}

pub fn run_game<S: PairingSuite>(
    suite: &S,
    attacker: &mut dyn AttackerStrategy<S>,
    trials: u64,
    seed: u64,
) -> Result<GameTranscript, Error> {
    if trials == 0 {
        return Err(Error::InvalidArgument("a game needs at least one trial"));
    }
    let mut transcript = GameTranscript::new(attacker.name(), attacker.requests_leak());
    for index in 0..trials {
        transcript.push(run_trial(suite, attacker, seed, index)?);
    }
    Ok(transcript)
}

/// Assembles a transcript from independently computed trial records, e.g.
/// from a parallel runner. Records are ordered by trial index.
pub fn transcript_from_records(
    attacker_id: &str,
    leaked: bool,
    mut records: Vec<TrialRecord>,
) -> Result<GameTranscript, Error> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("a game needs at least one trial"));
    }
    records.sort_by_key(|r| r.index);
    let mut transcript = GameTranscript::new(attacker_id, leaked);
    for r in records {
        transcript.push(r);
    }
    Ok(transcript)
}

#[cfg(feature = "mock")]
pub use oracle::*;

#[cfg(feature = "mock")]
mod oracle {
    use super::*;
    use crate::mock::{MockScalar, MockSuite, MOCK_ORDER};
    use crate::scheme::{keyword_matches, make_tag_with_blinding, verify_authenticator, UserKeyPair};

    /// Tag construction under test, given the blinding factor.
    pub type TagBuilder<'f> = dyn Fn(
            &MockSuite,
            &AdminPublicKey<MockSuite>,
            &UserKeyPair<MockSuite>,
            &[u8],
            &MockScalar,
        ) -> ClassificationTag<MockSuite>
        + 'f;

    /// The scheme's own tag construction.
    pub fn honest_builder(
        suite: &MockSuite,
        admin: &AdminPublicKey<MockSuite>,
        user: &UserKeyPair<MockSuite>,
        fragment: &[u8],
        r: &MockScalar,
    ) -> ClassificationTag<MockSuite> {
        make_tag_with_blinding(suite, admin, user.secret(), user.public(), fragment, r)
    }

    fn mulp(a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % MOCK_ORDER as u128) as u64
    }

    /// One set of exponents to check.
    #[derive(Debug, Clone, PartialEq, Eq)]
    pub struct IdentityDraw {
        pub alpha: u64,
        pub beta: u64,
        /// A second user key standing in for an impostor.
        pub impostor_beta: u64,
        pub r: u64,
        pub fragment: Vec<u8>,
        pub other_fragment: Vec<u8>,
        /// Exponents for the bilinearity check.
        pub a: u64,
        pub b: u64,
    }

    #[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
    pub struct DrawOutcome {
        pub authenticity_ok: bool,
        pub keyword_ok: bool,
        pub bilinearity_ok: bool,
    }

    #[derive(Debug, Clone, Default, PartialEq, Eq)]
    pub struct OracleReport {
        pub draws: u64,
        pub authenticity_failures: u64,
        pub keyword_failures: u64,
        pub bilinearity_failures: u64,
        pub failed_draws: Vec<IdentityDraw>,
    }

    impl OracleReport {
        pub fn failures(&self) -> u64 {
            self.authenticity_failures + self.keyword_failures + self.bilinearity_failures
        }
    }

    fn nonzero(rng: &mut ChaCha20Rng) -> u64 {
        loop {
            let v = rng.next_u64() % MOCK_ORDER;
            if v != 0 {
                return v;
            }
        }
    }

    pub fn random_draw(rng: &mut ChaCha20Rng, index: u64) -> IdentityDraw {
        let alpha = nonzero(rng);
        let beta = nonzero(rng);
        let mut impostor_beta = nonzero(rng);
        while impostor_beta == beta {
            impostor_beta = nonzero(rng);
        }
        IdentityDraw {
            alpha,
            beta,
            impostor_beta,
            r: nonzero(rng),
            fragment: alloc::format!("Rel{index}(a{},b)", rng.next_u32()).into_bytes(),
            other_fragment: alloc::format!("Other{index}(c{},d)", rng.next_u32()).into_bytes(),
            a: rng.next_u64() % MOCK_ORDER,
            b: rng.next_u64() % MOCK_ORDER,
        }
    }

    /// Checks that each test equation accepts exactly when its exponent
    /// identity, computed directly from the draw's secrets, holds.
    ///
    /// - authenticity: `alpha * beta == alpha * beta_signer`
    /// - keyword: `alpha * beta * r * h(P) == alpha * r * h(P') * beta`
    /// - bilinearity: `log e(gA^a, gB^b) == a * b`
    pub fn check_draw(suite: &MockSuite, draw: &IdentityDraw, build: &TagBuilder<'_>) -> DrawOutcome {
        let admin = AdminKeyPair::from_secret(suite, suite.scalar(draw.alpha)).expect("nonzero alpha");
        let user = UserKeyPair::from_secret(suite, suite.scalar(draw.beta)).expect("nonzero beta");
        let impostor = UserKeyPair::from_secret(suite, suite.scalar(draw.impostor_beta)).expect("nonzero beta");
        let r = suite.scalar(draw.r);

        let h = |m: &[u8]| suite.hash_to_group_a(m).exponent();
        let (alpha, beta, rr) = (draw.alpha, draw.beta, draw.r);

        let tag = build(suite, admin.public(), &user, &draw.fragment, &r);
        let forged = build(suite, admin.public(), &impostor, &draw.fragment, &r);

        // Authenticity: signer beta vs registered beta.
        let mut authenticity_ok = true;
        for (t, signer_beta) in [(&tag, beta), (&forged, draw.impostor_beta)] {
            let predicted = mulp(alpha, beta) == mulp(alpha, signer_beta);
            let actual = verify_authenticator(suite, admin.public(), user.public(), &t.x);
            authenticity_ok &= predicted == actual;
        }

        // Keyword: trapdoor fragment P' against tagged fragment P.
        let mut keyword_ok = true;
        for probe in [&draw.fragment, &draw.other_fragment] {
            let predicted = mulp(mulp(mulp(alpha, beta), rr), h(&draw.fragment))
                == mulp(mulp(mulp(alpha, rr), h(probe)), beta);
            let td = make_trapdoor(suite, admin.secret(), probe, KeywordSlot(0));
            let actual = keyword_matches(suite, &td, &tag);
            keyword_ok &= predicted == actual;
        }

        let lhs = suite.pairing(
            &suite.exp_a(&suite.gen_a(), &suite.scalar(draw.a)),
            &suite.exp_b(&suite.gen_b(), &suite.scalar(draw.b)),
        );
        let rhs = suite.exp_t(&suite.pairing(&suite.gen_a(), &suite.gen_b()), &suite.scalar(mulp(draw.a, draw.b)));
        let bilinearity_ok = lhs.exponent() == mulp(draw.a, draw.b) && lhs == rhs;

        DrawOutcome { authenticity_ok, keyword_ok, bilinearity_ok }
    }

    pub fn oracle_check_identities_with(
        suite: &MockSuite,
        draws: u64,
        rng: &mut ChaCha20Rng,
        build: &TagBuilder<'_>,
    ) -> OracleReport {
        let mut report = OracleReport { draws, ..OracleReport::default() };
        for i in 0..draws {
            let draw = random_draw(rng, i);
            let out = check_draw(suite, &draw, build);
            report.authenticity_failures += u64::from(!out.authenticity_ok);
            report.keyword_failures += u64::from(!out.keyword_ok);
            report.bilinearity_failures += u64::from(!out.bilinearity_ok);
            if out != (DrawOutcome { authenticity_ok: true, keyword_ok: true, bilinearity_ok: true }) {
                report.failed_draws.push(draw);
            }
        }
        report
    }

    pub fn oracle_check_identities(suite: &MockSuite, draws: u64, rng: &mut ChaCha20Rng) -> OracleReport {
        oracle_check_identities_with(suite, draws, rng, &honest_builder)
    }
}
