//! Transparent pairing suite for oracle testing.
//!
//! Every element is stored as its discrete logarithm to the group generator,
//! modulo the Mersenne prime `2^61 - 1`. The pairing multiplies exponents.
//! This gives an exact brute-force oracle for every algebraic identity the
//! scheme relies on. It offers no security whatsoever.

use alloc::vec::Vec;

use num_bigint::BigUint;
use sha2::{Digest, Sha256};

use crate::pairing::{Group, PairingSuite};
use crate::Error;

/// `2^61 - 1`.
pub const MOCK_ORDER: u64 = (1 << 61) - 1;

fn reduce(v: u128) -> u64 {
    // 2^61 == 1 (mod p)
    let p = MOCK_ORDER as u128;
    let folded = (v & p) + (v >> 61);
    let folded = (folded & p) + (folded >> 61);
    let r = folded as u64;
    if r >= MOCK_ORDER {
        r - MOCK_ORDER
    } else {
        r
    }
}

pub(crate) fn mul_mod(a: u64, b: u64) -> u64 {
    reduce(a as u128 * b as u128)
}

pub(crate) fn add_mod(a: u64, b: u64) -> u64 {
    reduce(a as u128 + b as u128)
}

macro_rules! exponent_wrapper {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(u64);

        impl $name {
            /// The element's discrete logarithm.
            pub fn exponent(self) -> u64 {
                self.0
            }
        }
    };
}

exponent_wrapper!(
    /// Scalar modulo [`MOCK_ORDER`].
    MockScalar
);
exponent_wrapper!(
    /// `gen_a^e`, stored as `e`.
    MockA
);
exponent_wrapper!(
    /// `gen_b^e`, stored as `e`.
    MockB
);
exponent_wrapper!(
    /// `e(gen_a, gen_b)^e`, stored as `e`.
    MockT
);

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MockSuite;

impl MockSuite {
    pub fn scalar(&self, v: u64) -> MockScalar {
        MockScalar(v % MOCK_ORDER)
    }

    pub fn a_from_exponent(&self, e: u64) -> MockA {
        MockA(e % MOCK_ORDER)
    }

    pub fn b_from_exponent(&self, e: u64) -> MockB {
        MockB(e % MOCK_ORDER)
    }

    pub fn t_from_exponent(&self, e: u64) -> MockT {
        MockT(e % MOCK_ORDER)
    }
}

fn decode_u64(bytes: &[u8]) -> Option<u64> {
    let arr: [u8; 8] = bytes.try_into().ok()?;
    let v = u64::from_be_bytes(arr);
    (v < MOCK_ORDER).then_some(v)
}

fn decode_element(bytes: &[u8], group: Group) -> Result<u64, Error> {
    if bytes.len() != 8 {
        return Err(Error::Decode { group, reason: "wrong length" });
    }
    decode_u64(bytes).ok_or(Error::Decode { group, reason: "exponent not reduced" })
}

impl PairingSuite for MockSuite {
    type Scalar = MockScalar;
    type A = MockA;
    type B = MockB;
    type T = MockT;

    const NAME: &'static str = "mock";

    fn order(&self) -> BigUint {
        BigUint::from(MOCK_ORDER)
    }

    fn gen_a(&self) -> MockA {
        MockA(1)
    }

    fn gen_b(&self) -> MockB {
        MockB(1)
    }

    fn identity_a(&self) -> MockA {
        MockA(0)
    }

    fn identity_b(&self) -> MockB {
        MockB(0)
    }

    fn identity_t(&self) -> MockT {
        MockT(0)
    }

    fn exp_a(&self, x: &MockA, k: &MockScalar) -> MockA {
        MockA(mul_mod(x.0, k.0))
    }

    fn exp_b(&self, y: &MockB, k: &MockScalar) -> MockB {
        MockB(mul_mod(y.0, k.0))
    }

    fn exp_t(&self, t: &MockT, k: &MockScalar) -> MockT {
        MockT(mul_mod(t.0, k.0))
    }

    fn mul_t(&self, t: &MockT, u: &MockT) -> MockT {
        MockT(add_mod(t.0, u.0))
    }

    fn pairing(&self, x: &MockA, y: &MockB) -> MockT {
        MockT(mul_mod(x.0, y.0))
    }

    /// `gen_a^(int(SHA-256(m)[..8]) mod p)`.
    fn hash_to_group_a(&self, message: &[u8]) -> MockA {
        let digest = Sha256::digest(message);
        let head: [u8; 8] = digest[..8].try_into().expect("SHA-256 output is 32 bytes");
        MockA(u64::from_be_bytes(head) % MOCK_ORDER)
    }

    fn scalar_from_u64(&self, v: u64) -> MockScalar {
        self.scalar(v)
    }

    fn scalar_mul(&self, a: &MockScalar, b: &MockScalar) -> MockScalar {
        MockScalar(mul_mod(a.0, b.0))
    }

    fn scalar_is_zero(&self, k: &MockScalar) -> bool {
        k.0 == 0
    }

    fn scalar_from_wide_bytes(&self, bytes: &[u8; 64]) -> MockScalar {
        let hi = u128::from_be_bytes(bytes[..16].try_into().unwrap());
        let lo = u128::from_be_bytes(bytes[16..32].try_into().unwrap());
        // 2^128 == 2^6 (mod p); the remaining 32 bytes are not needed for
        // statistical uniformity over a 61-bit modulus.
        let hi = reduce(hi) as u128;
        MockScalar(reduce(hi * 64 + reduce(lo) as u128))
    }

    fn encode_a(&self, x: &MockA) -> Vec<u8> {
        x.0.to_be_bytes().to_vec()
    }

    fn encode_b(&self, y: &MockB) -> Vec<u8> {
        y.0.to_be_bytes().to_vec()
    }

    fn encode_t(&self, t: &MockT) -> Vec<u8> {
        t.0.to_be_bytes().to_vec()
    }

    fn encode_scalar(&self, k: &MockScalar) -> Vec<u8> {
        k.0.to_be_bytes().to_vec()
    }

    fn decode_a(&self, bytes: &[u8]) -> Result<MockA, Error> {
        decode_element(bytes, Group::A).map(MockA)
    }

    fn decode_b(&self, bytes: &[u8]) -> Result<MockB, Error> {
        decode_element(bytes, Group::B).map(MockB)
    }

    fn decode_t(&self, bytes: &[u8]) -> Result<MockT, Error> {
        decode_element(bytes, Group::T).map(MockT)
    }

    fn decode_scalar(&self, bytes: &[u8]) -> Result<MockScalar, Error> {
        if bytes.len() != 8 {
            return Err(Error::DecodeScalar("wrong length"));
        }
        decode_u64(bytes).map(MockScalar).ok_or(Error::DecodeScalar("not reduced modulo p"))
    }
}
