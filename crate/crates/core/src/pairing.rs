//! Bilinear pairing environment.
//!
//! A [`PairingSuite`] provides two source groups `A` and `B` of prime order
//! `p`, a target group `T` of the same order, fixed generators, the pairing
//! `e: A x B -> T`, a hash from byte strings into `A`, and a 32-byte digest of
//! target-group elements. All groups are written multiplicatively in the
//! method names (`exp_*` raises to a scalar power).
//!
//! Fragments are hashed into `A`, trapdoors live in `A`, tag randomizers live
//! in `B`, and the administrator publishes its public key in both source
//! groups so that both test equations stay computable on an asymmetric curve.
//!
//! # Canonical encodings
//!
//! | suite        | A        | B        | T         | scalar              |
//! |--------------|----------|----------|-----------|---------------------|
//! | `production` | 48 bytes | 96 bytes | 576 bytes | 32 bytes, LE        |
//! | `mock`       | 8 bytes  | 8 bytes  | 8 bytes   | 8 bytes, BE         |
//!
//! Production source-group points use the compressed big-endian encoding of
//! the zcash BLS12-381 serialization (flag bits in the top three bits of the
//! first byte). Target elements are the twelve `Fq` coefficients of the
//! `Fq12` value, each 48 bytes, in arkworks canonical order.

use alloc::vec::Vec;
use core::fmt;

use ark_bls12_381::{g1, Bls12_381, Fr, G1Affine, G1Projective, G2Affine};
use ark_ec::hashing::curve_maps::wb::WBMap;
use ark_ec::hashing::map_to_curve_hasher::MapToCurveBasedHasher;
use ark_ec::hashing::HashToCurve;
use ark_ec::pairing::{Pairing, PairingOutput};
use ark_ec::{AffineRepr, CurveGroup};
use ark_ff::field_hashers::DefaultFieldHasher;
use ark_ff::{BigInteger, PrimeField, Zero};
use ark_serialize::{CanonicalDeserialize, CanonicalSerialize};
use num_bigint::BigUint;
use rand_core::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::{Error, DIGEST_LEN, HASH_TO_GROUP_DST};

/// Which of the three groups an element inhabits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    A,
    B,
    T,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::A => "A",
            Group::B => "B",
            Group::T => "T",
        })
    }
}

/// An abstract type-3 bilinear group environment.
pub trait PairingSuite: Clone + fmt::Debug + Send + Sync {
    type Scalar: Clone + PartialEq + Eq + fmt::Debug + Send + Sync;
    type A: Clone + PartialEq + Eq + fmt::Debug + Send + Sync;
    type B: Clone + PartialEq + Eq + fmt::Debug + Send + Sync;
    type T: Clone + PartialEq + Eq + fmt::Debug + Send + Sync;

    /// Name used in file headers and on the command line.
    const NAME: &'static str;

    /// The prime order shared by all three groups.
    fn order(&self) -> BigUint;

    fn gen_a(&self) -> Self::A;
    fn gen_b(&self) -> Self::B;
    fn identity_a(&self) -> Self::A;
    fn identity_b(&self) -> Self::B;
    fn identity_t(&self) -> Self::T;

    fn exp_a(&self, x: &Self::A, k: &Self::Scalar) -> Self::A;
    fn exp_b(&self, y: &Self::B, k: &Self::Scalar) -> Self::B;
    fn exp_t(&self, t: &Self::T, k: &Self::Scalar) -> Self::T;
    /// Group operation in `T`.
    fn mul_t(&self, t: &Self::T, u: &Self::T) -> Self::T;

    fn pairing(&self, x: &Self::A, y: &Self::B) -> Self::T;

    /// Whether `e(x1, y1) == e(x2, y2)`.
    fn pairings_equal(&self, x1: &Self::A, y1: &Self::B, x2: &Self::A, y2: &Self::B) -> bool {
        self.pairing(x1, y1) == self.pairing(x2, y2)
    }

    /// Deterministic hash of an arbitrary byte string into group `A`.
    fn hash_to_group_a(&self, message: &[u8]) -> Self::A;

    /// Collision-resistant 32-byte digest of a target-group element: SHA-256
    /// of its canonical encoding.
    fn hash_to_bits(&self, t: &Self::T) -> [u8; DIGEST_LEN] {
        Sha256::digest(self.encode_t(t)).into()
    }

    fn scalar_from_u64(&self, v: u64) -> Self::Scalar;
    fn scalar_mul(&self, a: &Self::Scalar, b: &Self::Scalar) -> Self::Scalar;
    fn scalar_is_zero(&self, k: &Self::Scalar) -> bool;
    /// Reduce 64 uniform bytes modulo `p`.
    fn scalar_from_wide_bytes(&self, bytes: &[u8; 64]) -> Self::Scalar;

    /// Uniform scalar in `[1, p-1]`. Zero is rejection-sampled away.
    fn random_scalar<R: RngCore + CryptoRng + ?Sized>(
        &self,
        rng: &mut R,
    ) -> Result<Self::Scalar, Error> {
        let mut wide = [0u8; 64];
        loop {
            rng.try_fill_bytes(&mut wide).map_err(|_| Error::Rng)?;
            let k = self.scalar_from_wide_bytes(&wide);
            if !self.scalar_is_zero(&k) {
                return Ok(k);
            }
        }
    }

    fn encode_a(&self, x: &Self::A) -> Vec<u8>;
    fn encode_b(&self, y: &Self::B) -> Vec<u8>;
    fn encode_t(&self, t: &Self::T) -> Vec<u8>;
    fn encode_scalar(&self, k: &Self::Scalar) -> Vec<u8>;

    /// Decoding rejects anything that is not the canonical encoding of an
    /// element of the prime-order subgroup.
    fn decode_a(&self, bytes: &[u8]) -> Result<Self::A, Error>;
    fn decode_b(&self, bytes: &[u8]) -> Result<Self::B, Error>;
    fn decode_t(&self, bytes: &[u8]) -> Result<Self::T, Error>;
    fn decode_scalar(&self, bytes: &[u8]) -> Result<Self::Scalar, Error>;
}

/// A group element in its tagged canonical byte form.
///
/// Two elements are equal iff their group tags and canonical encodings are.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupElement {
    group: Group,
    bytes: Vec<u8>,
}

impl GroupElement {
    pub fn from_a<S: PairingSuite>(suite: &S, x: &S::A) -> Self {
        Self { group: Group::A, bytes: suite.encode_a(x) }
    }

    pub fn from_b<S: PairingSuite>(suite: &S, y: &S::B) -> Self {
        Self { group: Group::B, bytes: suite.encode_b(y) }
    }

    pub fn from_t<S: PairingSuite>(suite: &S, t: &S::T) -> Self {
        Self { group: Group::T, bytes: suite.encode_t(t) }
    }

    /// Tag and bytes as read from an external source; validated on conversion.
    pub fn from_parts(group: Group, bytes: Vec<u8>) -> Self {
        Self { group, bytes }
    }

    pub fn group(&self) -> Group {
        self.group
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    fn expect(&self, group: Group) -> Result<(), Error> {
        if self.group == group {
            Ok(())
        } else {
            Err(Error::GroupMismatch { expected: group, found: self.group })
        }
    }

    pub fn to_a<S: PairingSuite>(&self, suite: &S) -> Result<S::A, Error> {
        self.expect(Group::A)?;
        suite.decode_a(&self.bytes)
    }

    pub fn to_b<S: PairingSuite>(&self, suite: &S) -> Result<S::B, Error> {
        self.expect(Group::B)?;
        suite.decode_b(&self.bytes)
    }

    pub fn to_t<S: PairingSuite>(&self, suite: &S) -> Result<S::T, Error> {
        self.expect(Group::T)?;
        suite.decode_t(&self.bytes)
    }
}

/// Pairing over tagged elements. Fails with [`Error::GroupMismatch`] when the
/// arguments are not in groups `A` and `B` respectively.
pub fn pair_elements<S: PairingSuite>(
    suite: &S,
    x: &GroupElement,
    y: &GroupElement,
) -> Result<GroupElement, Error> {
    let x = x.to_a(suite)?;
    let y = y.to_b(suite)?;
    Ok(GroupElement::from_t(suite, &suite.pairing(&x, &y)))
}

type G1Hasher = MapToCurveBasedHasher<G1Projective, DefaultFieldHasher<Sha256, 128>, WBMap<g1::Config>>;

/// BLS12-381 with `A = G1`, `B = G2`, `T = Gt`.
///
/// Hashing into `A` is the `BLS12381G1_XMD:SHA-256_SSWU_RO_` construction with
/// domain-separation tag [`HASH_TO_GROUP_DST`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Bls12Suite;

impl Bls12Suite {
    /// Hash to G1 under an explicit domain-separation tag.
    pub fn hash_to_g1_with_dst(&self, dst: &[u8], message: &[u8]) -> G1Affine {
        // Only fails for an empty or oversized DST.
        let hasher = G1Hasher::new(dst).expect("valid hash-to-curve domain separation tag");
        hasher.hash(message).expect("hash-to-curve is total for a valid DST")
    }
}

type Gt = PairingOutput<Bls12_381>;

fn serialize<T: CanonicalSerialize>(value: &T) -> Vec<u8> {
    let mut out = Vec::with_capacity(value.compressed_size());
    value
        .serialize_compressed(&mut out)
        .expect("serializing into a Vec cannot fail");
    out
}

fn deserialize<T: CanonicalDeserialize>(bytes: &[u8], group: Group, len: usize) -> Result<T, Error> {
    if bytes.len() != len {
        return Err(Error::Decode { group, reason: "wrong length" });
    }
    T::deserialize_compressed(bytes)
        .map_err(|_| Error::Decode { group, reason: "not a canonical prime-order subgroup element" })
}

impl PairingSuite for Bls12Suite {
    type Scalar = Fr;
    type A = G1Affine;
    type B = G2Affine;
    type T = Gt;

    const NAME: &'static str = "production";

    fn order(&self) -> BigUint {
        BigUint::from_bytes_be(&Fr::MODULUS.to_bytes_be())
    }

    fn gen_a(&self) -> G1Affine {
        G1Affine::generator()
    }

    fn gen_b(&self) -> G2Affine {
        G2Affine::generator()
    }

    fn identity_a(&self) -> G1Affine {
        G1Affine::zero()
    }

    fn identity_b(&self) -> G2Affine {
        G2Affine::zero()
    }

    fn identity_t(&self) -> Gt {
        Gt::zero()
    }

    fn exp_a(&self, x: &G1Affine, k: &Fr) -> G1Affine {
        (*x * k).into_affine()
    }

    fn exp_b(&self, y: &G2Affine, k: &Fr) -> G2Affine {
        (*y * k).into_affine()
    }

    fn exp_t(&self, t: &Gt, k: &Fr) -> Gt {
        *t * k
    }

    fn mul_t(&self, t: &Gt, u: &Gt) -> Gt {
        *t + u
    }

    fn pairing(&self, x: &G1Affine, y: &G2Affine) -> Gt {
        Bls12_381::pairing(x, y)
    }

    fn pairings_equal(&self, x1: &G1Affine, y1: &G2Affine, x2: &G1Affine, y2: &G2Affine) -> bool {
        // e(x1, y1) * e(-x2, y2) == 1 with a single final exponentiation.
        let neg_x2 = -*x2;
        Bls12_381::multi_pairing([*x1, neg_x2], [*y1, *y2]).is_zero()
    }

    fn hash_to_group_a(&self, message: &[u8]) -> G1Affine {
        self.hash_to_g1_with_dst(HASH_TO_GROUP_DST, message)
    }

    fn scalar_from_u64(&self, v: u64) -> Fr {
        Fr::from(v)
    }

    fn scalar_mul(&self, a: &Fr, b: &Fr) -> Fr {
        *a * b
    }

    fn scalar_is_zero(&self, k: &Fr) -> bool {
        k.is_zero()
    }

    fn scalar_from_wide_bytes(&self, bytes: &[u8; 64]) -> Fr {
        Fr::from_le_bytes_mod_order(bytes)
    }

    fn encode_a(&self, x: &G1Affine) -> Vec<u8> {
        serialize(x)
    }

    fn encode_b(&self, y: &G2Affine) -> Vec<u8> {
        serialize(y)
    }

    fn encode_t(&self, t: &Gt) -> Vec<u8> {
        serialize(t)
    }

    fn encode_scalar(&self, k: &Fr) -> Vec<u8> {
        serialize(k)
    }

    fn decode_a(&self, bytes: &[u8]) -> Result<G1Affine, Error> {
        deserialize(bytes, Group::A, 48)
    }

    fn decode_b(&self, bytes: &[u8]) -> Result<G2Affine, Error> {
        deserialize(bytes, Group::B, 96)
    }

    fn decode_t(&self, bytes: &[u8]) -> Result<Gt, Error> {
        deserialize(bytes, Group::T, 576)
    }

    fn decode_scalar(&self, bytes: &[u8]) -> Result<Fr, Error> {
        if bytes.len() != 32 {
            return Err(Error::DecodeScalar("wrong length"));
        }
        Fr::deserialize_compressed(bytes).map_err(|_| Error::DecodeScalar("not reduced modulo p"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    const SUITE: Bls12Suite = Bls12Suite;

    #[test]
    fn target_encoding_is_twelve_little_endian_coefficients() {
        let t = SUITE.pairing(&SUITE.gen_a(), &SUITE.gen_b());
        let f = t.0;
        let coeffs = [
            f.c0.c0.c0, f.c0.c0.c1, f.c0.c1.c0, f.c0.c1.c1, f.c0.c2.c0, f.c0.c2.c1,
            f.c1.c0.c0, f.c1.c0.c1, f.c1.c1.c0, f.c1.c1.c1, f.c1.c2.c0, f.c1.c2.c1,
        ];
        let bytes = SUITE.encode_t(&t);
        for (chunk, c) in bytes.chunks(48).zip(coeffs) {
            assert_eq!(chunk, c.into_bigint().to_bytes_le().as_slice());
        }
    }

    #[test]
    fn hash_to_curve_matches_rfc9380_vector() {
        // BLS12381G1_XMD:SHA-256_SSWU_RO_, msg = "", RFC 9380 appendix J.9.1.
        let p = SUITE.hash_to_g1_with_dst(b"QUUX-V01-CS02-with-BLS12381G1_XMD:SHA-256_SSWU_RO_", b"");
        let mut expected = hex::decode(
            "052926add2207b76ca4fa57a8734416c8dc95e24501772c814278700eed6d1e4e8cf62d9c09db0fac349612b759e79a1",
        )
        .unwrap();
        // compressed flag; y = 08ba...a265 is the lexicographically smaller root
        expected[0] |= 0x80;
        assert_eq!(SUITE.encode_a(&p), expected);
    }

    #[test]
    fn hash_to_group_a_is_deterministic_and_separates_fragments() {
        let a = SUITE.hash_to_group_a(b"RecordedBy(Test,Nurse)");
        assert_eq!(a, SUITE.hash_to_group_a(b"RecordedBy(Test,Nurse)"));
        let b = SUITE.hash_to_group_a(b"DiagnosedBy(Report,Doctor)");
        assert_ne!(SUITE.encode_a(&a), SUITE.encode_a(&b));
        assert!(a.is_in_correct_subgroup_assuming_on_curve() && a.is_on_curve());
    }

    #[test]
    fn bilinearity_with_small_exponents() {
        let two = SUITE.scalar_from_u64(2);
        let three = SUITE.scalar_from_u64(3);
        let six = SUITE.scalar_from_u64(6);
        let lhs = SUITE.pairing(&SUITE.exp_a(&SUITE.gen_a(), &two), &SUITE.exp_b(&SUITE.gen_b(), &three));
        let rhs = SUITE.exp_t(&SUITE.pairing(&SUITE.gen_a(), &SUITE.gen_b()), &six);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn pairing_is_non_degenerate_and_identity_maps_to_identity() {
        assert_ne!(SUITE.pairing(&SUITE.gen_a(), &SUITE.gen_b()), SUITE.identity_t());
        let y = SUITE.exp_b(&SUITE.gen_b(), &SUITE.scalar_from_u64(12345));
        assert_eq!(SUITE.pairing(&SUITE.identity_a(), &y), SUITE.identity_t());
    }

    #[test]
    fn bilinearity_on_random_exponents() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let base = SUITE.pairing(&SUITE.gen_a(), &SUITE.gen_b());
        for _ in 0..100 {
            let a = SUITE.random_scalar(&mut rng).unwrap();
            let b = SUITE.random_scalar(&mut rng).unwrap();
            let lhs = SUITE.pairing(&SUITE.exp_a(&SUITE.gen_a(), &a), &SUITE.exp_b(&SUITE.gen_b(), &b));
            assert_eq!(lhs, SUITE.exp_t(&base, &SUITE.scalar_mul(&a, &b)));
        }
    }

    #[test]
    fn pairings_equal_agrees_with_direct_comparison() {
        let mut rng = ChaCha20Rng::seed_from_u64(8);
        let a = SUITE.random_scalar(&mut rng).unwrap();
        let b = SUITE.random_scalar(&mut rng).unwrap();
        let ga = SUITE.exp_a(&SUITE.gen_a(), &a);
        let gb = SUITE.exp_b(&SUITE.gen_b(), &b);
        assert!(SUITE.pairings_equal(&ga, &SUITE.gen_b(), &SUITE.gen_a(), &SUITE.exp_b(&SUITE.gen_b(), &a)));
        assert!(!SUITE.pairings_equal(&ga, &SUITE.gen_b(), &SUITE.gen_a(), &gb));
    }

    #[test]
    fn encoding_lengths_and_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(9);
        for _ in 0..100 {
            let k = SUITE.random_scalar(&mut rng).unwrap();
            let x = SUITE.exp_a(&SUITE.gen_a(), &k);
            let y = SUITE.exp_b(&SUITE.gen_b(), &k);
            let t = SUITE.pairing(&x, &SUITE.gen_b());
            assert_eq!(SUITE.decode_a(&SUITE.encode_a(&x)).unwrap(), x);
            assert_eq!(SUITE.decode_b(&SUITE.encode_b(&y)).unwrap(), y);
            assert_eq!(SUITE.decode_t(&SUITE.encode_t(&t)).unwrap(), t);
            assert_eq!(SUITE.decode_scalar(&SUITE.encode_scalar(&k)).unwrap(), k);
            assert_eq!(SUITE.encode_a(&x).len(), 48);
            assert_eq!(SUITE.encode_b(&y).len(), 96);
            assert_eq!(SUITE.encode_t(&t).len(), 576);
            assert_eq!(SUITE.encode_scalar(&k).len(), 32);
        }
    }

    #[test]
    fn scalar_decoding_rejects_unreduced_values() {
        assert!(SUITE.decode_scalar(&[0xff; 32]).is_err());
        assert!(SUITE.decode_scalar(&[0x01; 31]).is_err());
    }

    #[test]
    fn hash_to_bits_of_identity_is_reproducible() {
        let d = SUITE.hash_to_bits(&SUITE.identity_t());
        assert_eq!(d, SUITE.hash_to_bits(&SUITE.identity_t()));
        assert_eq!(d.len(), 32);
    }

    #[test]
    fn hash_to_bits_has_no_collisions_over_random_draws() {
        let mut rng = ChaCha20Rng::seed_from_u64(10);
        let base = SUITE.pairing(&SUITE.gen_a(), &SUITE.gen_b());
        let mut t = base;
        let mut seen = alloc::collections::BTreeSet::new();
        // Walking base^k for a random start avoids 10^4 full exponentiations.
        t = SUITE.exp_t(&t, &SUITE.random_scalar(&mut rng).unwrap());
        for _ in 0..10_000 {
            assert!(seen.insert(SUITE.hash_to_bits(&t)));
            t = SUITE.mul_t(&t, &base);
        }
    }

    #[test]
    fn random_scalar_is_reproducible_under_a_seed_and_never_repeats() {
        let mut r1 = ChaCha20Rng::seed_from_u64(11);
        let mut r2 = ChaCha20Rng::seed_from_u64(11);
        let mut seen = alloc::collections::BTreeSet::new();
        for _ in 0..1000 {
            let a = SUITE.random_scalar(&mut r1).unwrap();
            assert_eq!(a, SUITE.random_scalar(&mut r2).unwrap());
            assert!(!a.is_zero());
            assert!(seen.insert(SUITE.encode_scalar(&a)));
        }
    }

    #[test]
    fn tagged_pairing_rejects_group_mismatch() {
        let a = GroupElement::from_a(&SUITE, &SUITE.gen_a());
        let b = GroupElement::from_b(&SUITE, &SUITE.gen_b());
        let t = pair_elements(&SUITE, &a, &b).unwrap();
        assert_eq!(t.group(), Group::T);
        assert_eq!(t.to_t(&SUITE).unwrap(), SUITE.pairing(&SUITE.gen_a(), &SUITE.gen_b()));
        assert_eq!(
            pair_elements(&SUITE, &b, &a),
            Err(Error::GroupMismatch { expected: Group::A, found: Group::B })
        );
    }

    #[test]
    fn order_is_the_bls12_381_scalar_field_modulus() {
        let p = SUITE.order();
        assert_eq!(
            p.to_str_radix(16),
            "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001"
        );
    }

    fn prime_order_check_g1(p: &G1Affine) -> bool {
        p.mul_bigint(Fr::MODULUS).is_zero()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn random_bytes_decode_only_into_the_prime_order_subgroup(
            a in proptest::collection::vec(any::<u8>(), 48),
            b in proptest::collection::vec(any::<u8>(), 96),
            s in proptest::collection::vec(any::<u8>(), 32),
        ) {
            if let Ok(p) = SUITE.decode_a(&a) {
                prop_assert!(prime_order_check_g1(&p));
            }
            if let Ok(q) = SUITE.decode_b(&b) {
                prop_assert!(q.mul_bigint(Fr::MODULUS).is_zero());
            }
            let _ = SUITE.decode_scalar(&s);
        }

        #[test]
        fn valid_points_survive_random_bit_flips_only_if_still_in_subgroup(
            k in 1u64.., bit in 0usize..384,
        ) {
            let mut bytes = SUITE.encode_a(&SUITE.exp_a(&SUITE.gen_a(), &SUITE.scalar_from_u64(k)));
            bytes[bit / 8] ^= 1 << (bit % 8);
            if let Ok(p) = SUITE.decode_a(&bytes) {
                prop_assert!(prime_order_check_g1(&p));
                prop_assert_eq!(G1Projective::from(p).into_affine(), p);
            }
        }
    }
}
