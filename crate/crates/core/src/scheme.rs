//! Key generation, classification tags, trapdoors and the test procedure.
//!
//! With administrator key `alpha`, user key `beta`, a fresh blinding `r` and
//! `h = hash_to_group_a(fragment)`:
//!
//! ```text
//! admin public   pk_a = gA^alpha            pk_b = gB^alpha
//! user public    pk_u = gB^beta
//! tag            X = pk_b^beta   Y = pk_u^r   Z = H2(e(h^beta, pk_b^r))
//! trapdoor       token = h^alpha
//! test           e(gA, X) == e(pk_a, pk_u)          (authenticity)
//!                H2(e(token, Y)) == Z                (keyword match)
//! ```
//!
//! Both sides of each equation carry the exponent `alpha * beta` and
//! `alpha * beta * r * log(h)` respectively.
//!
//! `X` depends only on the key pair, not on the fragment or file. It proves
//! possession of `beta`; it does not bind the tag payload.

use core::fmt;

use rand_core::{CryptoRng, RngCore};

use crate::pairing::PairingSuite;
use crate::{Error, DIGEST_LEN};

/// Administrator public key, published in both source groups.
#[derive(Clone, PartialEq, Eq)]
pub struct AdminPublicKey<S: PairingSuite> {
    pub pk_a: S::A,
    pub pk_b: S::B,
}

impl<S: PairingSuite> fmt::Debug for AdminPublicKey<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdminPublicKey").field("pk_a", &self.pk_a).field("pk_b", &self.pk_b).finish()
    }
}

impl<S: PairingSuite> AdminPublicKey<S> {
    /// Builds a public key from externally supplied components, checking that
    /// both share the same exponent and are not the identity.
    pub fn new(suite: &S, pk_a: S::A, pk_b: S::B) -> Result<Self, Error> {
        if pk_a == suite.identity_a() || pk_b == suite.identity_b() {
            return Err(Error::InconsistentKey("administrator public key is the identity"));
        }
        if !suite.pairings_equal(&pk_a, &suite.gen_b(), &suite.gen_a(), &pk_b) {
            return Err(Error::InconsistentKey(
                "administrator public key components have different exponents",
            ));
        }
        Ok(Self { pk_a, pk_b })
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct AdminKeyPair<S: PairingSuite> {
    secret: S::Scalar,
    public: AdminPublicKey<S>,
}

impl<S: PairingSuite> fmt::Debug for AdminKeyPair<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AdminKeyPair")
            .field("secret", &"<redacted>")
            .field("public", &self.public)
            .finish()
    }
}

impl<S: PairingSuite> AdminKeyPair<S> {
    pub fn generate<R: RngCore + CryptoRng + ?Sized>(suite: &S, rng: &mut R) -> Result<Self, Error> {
        let alpha = suite.random_scalar(rng)?;
        Self::from_secret(suite, alpha)
    }

    pub fn from_secret(suite: &S, alpha: S::Scalar) -> Result<Self, Error> {
        if suite.scalar_is_zero(&alpha) {
            return Err(Error::InconsistentKey("secret key is zero"));
        }
        let public = AdminPublicKey {
            pk_a: suite.exp_a(&suite.gen_a(), &alpha),
            pk_b: suite.exp_b(&suite.gen_b(), &alpha),
        };
        Ok(Self { secret: alpha, public })
    }

    pub fn secret(&self) -> &S::Scalar {
        &self.secret
    }

    pub fn public(&self) -> &AdminPublicKey<S> {
        &self.public
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct UserPublicKey<S: PairingSuite> {
    pub pk_b: S::B,
}

impl<S: PairingSuite> fmt::Debug for UserPublicKey<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserPublicKey").field("pk_b", &self.pk_b).finish()
    }
}

impl<S: PairingSuite> UserPublicKey<S> {
    pub fn new(suite: &S, pk_b: S::B) -> Result<Self, Error> {
        if pk_b == suite.identity_b() {
            return Err(Error::InconsistentKey("user public key is the identity"));
        }
        Ok(Self { pk_b })
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct UserKeyPair<S: PairingSuite> {
    secret: S::Scalar,
    public: UserPublicKey<S>,
}

impl<S: PairingSuite> fmt::Debug for UserKeyPair<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserKeyPair")
            .field("secret", &"<redacted>")
            .field("public", &self.public)
            .finish()
    }
}

impl<S: PairingSuite> UserKeyPair<S> {
    pub fn generate<R: RngCore + CryptoRng + ?Sized>(suite: &S, rng: &mut R) -> Result<Self, Error> {
        let beta = suite.random_scalar(rng)?;
        Self::from_secret(suite, beta)
    }

    pub fn from_secret(suite: &S, beta: S::Scalar) -> Result<Self, Error> {
        if suite.scalar_is_zero(&beta) {
            return Err(Error::InconsistentKey("secret key is zero"));
        }
        let public = UserPublicKey { pk_b: suite.exp_b(&suite.gen_b(), &beta) };
        Ok(Self { secret: beta, public })
    }

    pub fn secret(&self) -> &S::Scalar {
        &self.secret
    }

    pub fn public(&self) -> &UserPublicKey<S> {
        &self.public
    }
}

pub fn keygen_admin<S: PairingSuite, R: RngCore + CryptoRng + ?Sized>(
    suite: &S,
    rng: &mut R,
) -> Result<AdminKeyPair<S>, Error> {
    AdminKeyPair::generate(suite, rng)
}

pub fn keygen_user<S: PairingSuite, R: RngCore + CryptoRng + ?Sized>(
    suite: &S,
    rng: &mut R,
) -> Result<UserKeyPair<S>, Error> {
    UserKeyPair::generate(suite, rng)
}

/// A provenance-based classification tag `[X, Y, Z]` for one fragment.
#[derive(Clone, PartialEq, Eq)]
pub struct ClassificationTag<S: PairingSuite> {
    /// Authenticator `X`, identical for every tag of one user.
    pub x: S::B,
    /// Randomizer `Y`.
    pub y: S::B,
    /// Digest `Z` of the blinded target element.
    pub z: [u8; DIGEST_LEN],
}

impl<S: PairingSuite> fmt::Debug for ClassificationTag<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClassificationTag")
            .field("x", &self.x)
            .field("y", &self.y)
            .field("z", &self.z)
            .finish()
    }
}

/// Position of a trapdoor inside a compiled policy. Carries no keyword text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct KeywordSlot(pub u32);

#[derive(Clone, PartialEq, Eq)]
pub struct TrapdoorEntry<S: PairingSuite> {
    pub token: S::A,
    pub slot: KeywordSlot,
}

impl<S: PairingSuite> fmt::Debug for TrapdoorEntry<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TrapdoorEntry").field("token", &self.token).field("slot", &self.slot).finish()
    }
}

/// Computes the authenticator `X = pk_b^beta`.
pub fn authenticator<S: PairingSuite>(suite: &S, admin: &AdminPublicKey<S>, user_sk: &S::Scalar) -> S::B {
    suite.exp_b(&admin.pk_b, user_sk)
}

/// Builds a tag with a caller-supplied blinding factor. The blinding must be
/// fresh and uniform in `[1, p-1]`; [`make_tag`] draws it for you.
pub fn make_tag_with_blinding<S: PairingSuite>(
    suite: &S,
    admin: &AdminPublicKey<S>,
    user_sk: &S::Scalar,
    user_pub: &UserPublicKey<S>,
    fragment: &[u8],
    r: &S::Scalar,
) -> ClassificationTag<S> {
    let x = authenticator(suite, admin, user_sk);
    blinded_tag(suite, admin, user_sk, user_pub, fragment, r, x)
}

fn blinded_tag<S: PairingSuite>(
    suite: &S,
    admin: &AdminPublicKey<S>,
    user_sk: &S::Scalar,
    user_pub: &UserPublicKey<S>,
    fragment: &[u8],
    r: &S::Scalar,
    x: S::B,
) -> ClassificationTag<S> {
    let h = suite.hash_to_group_a(fragment);
    let t = suite.pairing(&suite.exp_a(&h, user_sk), &suite.exp_b(&admin.pk_b, r));
    ClassificationTag { x, y: suite.exp_b(&user_pub.pk_b, r), z: suite.hash_to_bits(&t) }
}

/// Tags a canonical fragment under the user's secret key with a fresh
/// blinding factor.
pub fn make_tag<S: PairingSuite, R: RngCore + CryptoRng + ?Sized>(
    suite: &S,
    admin: &AdminPublicKey<S>,
    user: &UserKeyPair<S>,
    fragment: &[u8],
    rng: &mut R,
) -> Result<ClassificationTag<S>, Error> {
    let r = suite.random_scalar(rng)?;
    Ok(make_tag_with_blinding(suite, admin, user.secret(), user.public(), fragment, &r))
}

/// Tags many fragments for one user, computing the authenticator once.
#[derive(Clone)]
pub struct Tagger<'a, S: PairingSuite> {
    suite: &'a S,
    admin: &'a AdminPublicKey<S>,
    user: &'a UserKeyPair<S>,
    x: S::B,
}

impl<'a, S: PairingSuite> Tagger<'a, S> {
    pub fn new(suite: &'a S, admin: &'a AdminPublicKey<S>, user: &'a UserKeyPair<S>) -> Self {
        let x = authenticator(suite, admin, user.secret());
        Self { suite, admin, user, x }
    }

    pub fn authenticator(&self) -> &S::B {
        &self.x
    }

    pub fn tag<R: RngCore + CryptoRng + ?Sized>(
        &self,
        fragment: &[u8],
        rng: &mut R,
    ) -> Result<ClassificationTag<S>, Error> {
        let r = self.suite.random_scalar(rng)?;
        Ok(blinded_tag(
            self.suite,
            self.admin,
            self.user.secret(),
            self.user.public(),
            fragment,
            &r,
            self.x.clone(),
        ))
    }
}

/// `token = hash_to_group_a(fragment)^alpha`. Deterministic.
pub fn make_trapdoor<S: PairingSuite>(
    suite: &S,
    admin_sk: &S::Scalar,
    fragment: &[u8],
    slot: KeywordSlot,
) -> TrapdoorEntry<S> {
    TrapdoorEntry { token: suite.exp_a(&suite.hash_to_group_a(fragment), admin_sk), slot }
}

/// Authenticity equation: `e(gA, X) == e(pk_a, pk_u)`.
pub fn verify_authenticator<S: PairingSuite>(
    suite: &S,
    admin: &AdminPublicKey<S>,
    user: &UserPublicKey<S>,
    x: &S::B,
) -> bool {
    suite.pairings_equal(&suite.gen_a(), x, &admin.pk_a, &user.pk_b)
}

/// Keyword equation: `H2(e(token, Y)) == Z`.
pub fn keyword_matches<S: PairingSuite>(
    suite: &S,
    trapdoor: &TrapdoorEntry<S>,
    tag: &ClassificationTag<S>,
) -> bool {
    suite.hash_to_bits(&suite.pairing(&trapdoor.token, &tag.y)) == tag.z
}

/// Returns `true` iff both the authenticity and the keyword equation hold.
/// Authenticity is checked first; a forged authenticator never reaches the
/// keyword test.
pub fn test<S: PairingSuite>(
    suite: &S,
    admin: &AdminPublicKey<S>,
    user: &UserPublicKey<S>,
    trapdoor: &TrapdoorEntry<S>,
    tag: &ClassificationTag<S>,
) -> bool {
    verify_authenticator(suite, admin, user, &tag.x) && keyword_matches(suite, trapdoor, tag)
}

#[cfg(all(test, feature = "mock"))]
mod tests {
    use super::*;
    use crate::mock::{MockSuite, MOCK_ORDER};
    use crate::pairing::Bls12Suite;
    use alloc::collections::BTreeSet;
    use alloc::format;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const MOCK: MockSuite = MockSuite;

    // Independent modular arithmetic for the oracle side.
    fn mulp(a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % MOCK_ORDER as u128) as u64
    }

    fn rng(seed: u64) -> ChaCha20Rng {
        ChaCha20Rng::seed_from_u64(seed)
    }

    #[test]
    fn admin_keys_satisfy_dual_representation() {
        let suite = Bls12Suite;
        let admin = keygen_admin(&suite, &mut rng(1)).unwrap();
        let p = admin.public();
        assert_eq!(
            suite.pairing(&p.pk_a, &suite.gen_b()),
            suite.pairing(&suite.gen_a(), &p.pk_b)
        );
        assert!(AdminPublicKey::new(&suite, p.pk_a, p.pk_b).is_ok());
        let other = keygen_admin(&suite, &mut rng(2)).unwrap();
        assert!(AdminPublicKey::new(&suite, p.pk_a, other.public().pk_b).is_err());
    }

    #[test]
    fn admin_keygen_draws_distinct_secrets() {
        let mut r = rng(3);
        let mut seen = BTreeSet::new();
        for _ in 0..100 {
            let k = keygen_admin(&MOCK, &mut r).unwrap();
            assert!(seen.insert(k.secret().exponent()));
        }
    }

    #[test]
    fn mock_keys_expose_their_exponents() {
        let admin = keygen_admin(&MOCK, &mut rng(4)).unwrap();
        assert_eq!(admin.public().pk_a.exponent(), admin.secret().exponent());
        assert_eq!(admin.public().pk_b.exponent(), admin.secret().exponent());
        let user = keygen_user(&MOCK, &mut rng(5)).unwrap();
        assert_eq!(user.public().pk_b.exponent(), user.secret().exponent());
        assert_ne!(user.public().pk_b, MOCK.identity_b());
    }

    #[test]
    fn zero_secrets_are_refused() {
        assert!(AdminKeyPair::from_secret(&MOCK, MOCK.scalar(0)).is_err());
        assert!(UserKeyPair::from_secret(&MOCK, MOCK.scalar(0)).is_err());
        assert!(UserPublicKey::new(&MOCK, MOCK.identity_b()).is_err());
    }

    #[test]
    fn honest_tag_passes_and_mismatched_fragment_fails_on_production() {
        let suite = Bls12Suite;
        let mut r = rng(6);
        let admin = keygen_admin(&suite, &mut r).unwrap();
        let user = keygen_user(&suite, &mut r).unwrap();
        let tag = make_tag(&suite, admin.public(), &user, b"RecordedBy(Test,Nurse)", &mut r).unwrap();
        let td = make_trapdoor(&suite, admin.secret(), b"RecordedBy(Test,Nurse)", KeywordSlot(0));
        let other = make_trapdoor(&suite, admin.secret(), b"DiagnosedBy(Report,Doctor)", KeywordSlot(1));
        assert!(test(&suite, admin.public(), user.public(), &td, &tag));
        assert!(!test(&suite, admin.public(), user.public(), &other, &tag));
    }

    #[test]
    fn foreign_user_key_fails_authenticity() {
        let suite = Bls12Suite;
        let mut r = rng(7);
        let admin = keygen_admin(&suite, &mut r).unwrap();
        let registered = keygen_user(&suite, &mut r).unwrap();
        let impostor = keygen_user(&suite, &mut r).unwrap();
        let tag = make_tag(&suite, admin.public(), &impostor, b"RecordedBy(Test,Nurse)", &mut r).unwrap();
        let td = make_trapdoor(&suite, admin.secret(), b"RecordedBy(Test,Nurse)", KeywordSlot(0));
        assert!(!verify_authenticator(&suite, admin.public(), registered.public(), &tag.x));
        assert!(!test(&suite, admin.public(), registered.public(), &td, &tag));
    }

    #[test]
    fn tag_target_exponent_is_alpha_beta_r_hash() {
        let mut r = rng(8);
        let admin = keygen_admin(&MOCK, &mut r).unwrap();
        let user = keygen_user(&MOCK, &mut r).unwrap();
        for i in 0..200u32 {
            let fragment = format!("Rel{i}(a,b)");
            let blinding = MOCK.random_scalar(&mut r).unwrap();
            let tag = make_tag_with_blinding(
                &MOCK,
                admin.public(),
                user.secret(),
                user.public(),
                fragment.as_bytes(),
                &blinding,
            );
            let h = MOCK.hash_to_group_a(fragment.as_bytes()).exponent();
            let (a, b, rr) = (admin.secret().exponent(), user.secret().exponent(), blinding.exponent());
            let expected_t = MOCK.t_from_exponent(mulp(mulp(mulp(a, b), rr), h));
            assert_eq!(tag.z, MOCK.hash_to_bits(&expected_t));
            assert_eq!(tag.x.exponent(), mulp(a, b));
            assert_eq!(tag.y.exponent(), mulp(b, rr));
        }
    }

    #[test]
    fn trapdoor_is_deterministic_and_carries_alpha_times_hash() {
        let admin = keygen_admin(&MOCK, &mut rng(9)).unwrap();
        let t1 = make_trapdoor(&MOCK, admin.secret(), b"RecordedBy(Test,Nurse)", KeywordSlot(0));
        let t2 = make_trapdoor(&MOCK, admin.secret(), b"RecordedBy(Test,Nurse)", KeywordSlot(0));
        assert_eq!(t1, t2);
        let h = MOCK.hash_to_group_a(b"RecordedBy(Test,Nurse)").exponent();
        assert_eq!(t1.token.exponent(), mulp(admin.secret().exponent(), h));
        let t3 = make_trapdoor(&MOCK, admin.secret(), b"DiagnosedBy(Report,Doctor)", KeywordSlot(0));
        assert_ne!(t1.token, t3.token);

        let suite = Bls12Suite;
        let admin = keygen_admin(&suite, &mut rng(9)).unwrap();
        let p1 = make_trapdoor(&suite, admin.secret(), b"RecordedBy(Test,Nurse)", KeywordSlot(0));
        let p2 = make_trapdoor(&suite, admin.secret(), b"RecordedBy(Test,Nurse)", KeywordSlot(0));
        let p3 = make_trapdoor(&suite, admin.secret(), b"DiagnosedBy(Report,Doctor)", KeywordSlot(0));
        assert_eq!(suite.encode_a(&p1.token), suite.encode_a(&p2.token));
        assert_ne!(suite.encode_a(&p1.token), suite.encode_a(&p3.token));
    }

    #[test]
    fn tags_for_the_same_fragment_are_randomized() {
        let mut r = rng(10);
        let admin = keygen_admin(&MOCK, &mut r).unwrap();
        let user = keygen_user(&MOCK, &mut r).unwrap();
        let tagger = Tagger::new(&MOCK, admin.public(), &user);
        for _ in 0..1000 {
            let a = tagger.tag(b"RecordedBy(Test,Nurse)", &mut r).unwrap();
            let b = tagger.tag(b"RecordedBy(Test,Nurse)", &mut r).unwrap();
            assert_eq!(a.x, b.x);
            assert_ne!(a.y, b.y);
            assert_ne!(a.z, b.z);
        }
    }

    #[test]
    fn tagger_and_make_tag_agree_for_equal_randomness() {
        let suite = Bls12Suite;
        let mut r = rng(11);
        let admin = keygen_admin(&suite, &mut r).unwrap();
        let user = keygen_user(&suite, &mut r).unwrap();
        let tagger = Tagger::new(&suite, admin.public(), &user);
        let a = tagger.tag(b"f", &mut rng(12)).unwrap();
        let b = make_tag(&suite, admin.public(), &user, b"f", &mut rng(12)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn keyword_equation_holds_exactly_when_exponents_agree() {
        // Exhaustive over a small fragment universe in the mock suite.
        let mut r = rng(13);
        let admin = keygen_admin(&MOCK, &mut r).unwrap();
        let user = keygen_user(&MOCK, &mut r).unwrap();
        let fragments: alloc::vec::Vec<_> = (0..20).map(|i| format!("R{i}(x,y)")).collect();
        for p in &fragments {
            let tag = make_tag(&MOCK, admin.public(), &user, p.as_bytes(), &mut r).unwrap();
            for q in &fragments {
                let td = make_trapdoor(&MOCK, admin.secret(), q.as_bytes(), KeywordSlot(0));
                let hp = MOCK.hash_to_group_a(p.as_bytes()).exponent();
                let hq = MOCK.hash_to_group_a(q.as_bytes()).exponent();
                assert_eq!(test(&MOCK, admin.public(), user.public(), &td, &tag), hp == hq);
                assert_eq!(hp == hq, p == q);
            }
        }
    }
}
