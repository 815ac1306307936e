//! Modular arithmetic over `Z_q^*` for the no-key exponentiation cipher.
//!
//! Everything here works on [`BigUint`]. A [`GroupParams`] fixes the prime
//! modulus `q`; a [`BlindingExponent`] is an exponent `e` together with its
//! inverse modulo `q - 1`, so that `(m^e)^(e^-1) = m` for every unit `m`.

use std::fmt;

use num_bigint::{BigInt, BigUint, RandBigInt, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::RngCore;
use thiserror::Error;

/// Smallest modulus size accepted by [`generate_group`].
pub const MIN_GROUP_BITS: u64 = 64;

/// Miller-Rabin rounds; error probability below 4^-40 = 2^-80.
pub const MILLER_RABIN_ROUNDS: usize = 40;

/// Upper bound on rejection-sampling draws before giving up.
pub const MAX_SAMPLING_DRAWS: u32 = 1_000_000;

/// Default candidate budget for prime search in [`generate_group`].
pub const DEFAULT_PRIME_BUDGET: u64 = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: BigUint, modulus: BigUint },
    #[error("entropy source failed: {0}")]
    Entropy(String),
    #[error("gave up after {0} draws")]
    Timeout(u64),
    #[error("malformed group encoding: {0}")]
    Format(String),
}

/// How `q` was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupProfile {
    /// `q = 2r + 1` with `r` prime.
    SafePrime,
    PlainPrime,
}

impl GroupProfile {
    /// One-character tag used in the text encoding.
    pub fn tag(self) -> char {
        match self {
            GroupProfile::SafePrime => 's',
            GroupProfile::PlainPrime => 'p',
        }
    }

    pub fn from_tag(tag: char) -> Option<Self> {
        match tag {
            's' => Some(GroupProfile::SafePrime),
            'p' => Some(GroupProfile::PlainPrime),
            _ => None,
        }
    }
}

// RFC 2409 / RFC 3526 MODP primes. All three are safe primes.
const MODP_768_HEX: &str = "ffffffffffffffffc90fdaa22168c234c4c6628b80dc1cd129024e088a67cc74020bbea63b139b22514a08798e3404ddef9519b3cd3a431b302b0a6df25f14374fe1356d6d51c245e485b576625e7ec6f44c42e9a63a3620ffffffffffffffff";
const MODP_1024_HEX: &str = "ffffffffffffffffc90fdaa22168c234c4c6628b80dc1cd129024e088a67cc74020bbea63b139b22514a08798e3404ddef9519b3cd3a431b302b0a6df25f14374fe1356d6d51c245e485b576625e7ec6f44c42e9a637ed6b0bff5cb6f406b7edee386bfb5a899fa5ae9f24117c4b1fe649286651ece65381ffffffffffffffff";
const MODP_2048_HEX: &str = "ffffffffffffffffc90fdaa22168c234c4c6628b80dc1cd129024e088a67cc74020bbea63b139b22514a08798e3404ddef9519b3cd3a431b302b0a6df25f14374fe1356d6d51c245e485b576625e7ec6f44c42e9a637ed6b0bff5cb6f406b7edee386bfb5a899fa5ae9f24117c4b1fe649286651ece45b3dc2007cb8a163bf0598da48361c55d39a69163fa8fd24cf5f83655d23dca3ad961c62f356208552bb9ed529077096966d670c354e4abc9804f1746c08ca18217c32905e462e36ce3be39e772c180e86039b2783a2ec07a28fb5c55df06f4c52c9de2bcbf6955817183995497cea956ae515d2261898fa051015728e5a8aacaa68ffffffffffffffff";

/// A prime modulus `q` and the constants derived from it.
#[derive(Clone, PartialEq, Eq)]
pub struct GroupParams {
    q: BigUint,
    q_minus_1: BigUint,
    subgroup_order: BigUint,
    profile: GroupProfile,
}

impl fmt::Debug for GroupParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupParams")
            .field("bits", &self.bit_length())
            .field("profile", &self.profile)
            .finish()
    }
}

impl GroupParams {
    /// Validates `q` (probabilistic primality, and primality of `(q-1)/2` for
    /// the safe-prime profile).
    pub fn new(q: BigUint, profile: GroupProfile) -> Result<Self, NumError> {
        if q < BigUint::from(5u8) {
            return Err(NumError::Domain(format!("modulus {q} is too small")));
        }
        let mut rng = rand::thread_rng();
        if !is_probable_prime(&q, MILLER_RABIN_ROUNDS, &mut rng) {
            return Err(NumError::Domain(format!("modulus {q} is not prime")));
        }
        if profile == GroupProfile::SafePrime {
            let r = (&q - 1u8) >> 1;
            if !is_probable_prime(&r, MILLER_RABIN_ROUNDS, &mut rng) {
                return Err(NumError::Domain("(q-1)/2 is not prime".into()));
            }
        }
        Ok(Self::from_trusted(q, profile))
    }

    fn from_trusted(q: BigUint, profile: GroupProfile) -> Self {
        let q_minus_1 = &q - 1u8;
        let subgroup_order = match profile {
            GroupProfile::SafePrime => &q_minus_1 >> 1,
            GroupProfile::PlainPrime => q_minus_1.clone(),
        };
        GroupParams {
            q,
            q_minus_1,
            subgroup_order,
            profile,
        }
    }

    fn from_hex_constant(hex: &str) -> Self {
        let q = BigUint::parse_bytes(hex.as_bytes(), 16).expect("valid constant");
        Self::from_trusted(q, GroupProfile::SafePrime)
    }

    /// 768-bit MODP safe prime (RFC 2409 group 1). Test profile.
    pub fn modp768() -> Self {
        Self::from_hex_constant(MODP_768_HEX)
    }

    /// 1024-bit MODP safe prime (RFC 2409 group 2).
    pub fn modp1024() -> Self {
        Self::from_hex_constant(MODP_1024_HEX)
    }

    /// 2048-bit MODP safe prime (RFC 3526 group 14). Production default.
    pub fn modp2048() -> Self {
        Self::from_hex_constant(MODP_2048_HEX)
    }

    /// Looks up a named group: `modp768`, `modp1024` or `modp2048`.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "modp768" => Some(Self::modp768()),
            "modp1024" => Some(Self::modp1024()),
            "modp2048" => Some(Self::modp2048()),
            _ => None,
        }
    }

    pub fn q(&self) -> &BigUint {
        &self.q
    }

    pub fn q_minus_1(&self) -> &BigUint {
        &self.q_minus_1
    }

    pub fn subgroup_order(&self) -> &BigUint {
        &self.subgroup_order
    }

    pub fn profile(&self) -> GroupProfile {
        self.profile
    }

    pub fn bit_length(&self) -> u64 {
        self.q.bits()
    }

    /// Euler's criterion: `x^((q-1)/2) = 1`.
    pub fn is_quadratic_residue(&self, x: &BigUint) -> bool {
        let x = x % &self.q;
        if x.is_zero() {
            return false;
        }
        x.modpow(&(&self.q_minus_1 >> 1), &self.q).is_one()
    }

    /// `<tag>:<lowercase hex>`, e.g. `s:17` for q = 23.
    pub fn to_text(&self) -> String {
        format!("{}:{}", self.profile.tag(), self.q.to_str_radix(16))
    }

    /// Parses [`GroupParams::to_text`] output. The number may also carry a
    /// `0x` prefix, or be given in decimal after `#` (`s:#23`).
    pub fn from_text(text: &str) -> Result<Self, NumError> {
        let text = text.trim();
        let mut chars = text.chars();
        let tag = chars
            .next()
            .ok_or_else(|| NumError::Format("empty".into()))?;
        let profile = GroupProfile::from_tag(tag)
            .ok_or_else(|| NumError::Format(format!("unknown profile tag {tag:?}")))?;
        let rest = chars
            .as_str()
            .strip_prefix(':')
            .ok_or_else(|| NumError::Format("missing ':' after profile tag".into()))?;
        let q = if let Some(dec) = rest.strip_prefix('#') {
            BigUint::parse_bytes(dec.as_bytes(), 10)
        } else {
            let hex = rest.strip_prefix("0x").unwrap_or(rest);
            if hex.chars().any(|c| c.is_ascii_uppercase()) {
                return Err(NumError::Format("hex must be lowercase".into()));
            }
            BigUint::parse_bytes(hex.as_bytes(), 16)
        }
        .ok_or_else(|| NumError::Format(format!("bad modulus {rest:?}")))?;
        Self::new(q, profile)
    }
}

/// `base^exp mod q`.
pub fn mod_exp(base: &BigUint, exp: &BigUint, params: &GroupParams) -> Result<BigUint, NumError> {
    if base >= params.q() {
        return Err(NumError::Domain(format!(
            "base must be below the modulus ({} bits)",
            params.bit_length()
        )));
    }
    Ok(base.modpow(exp, params.q()))
}

/// Multiplicative inverse of `x` modulo `modulus` via extended Euclid.
pub fn mod_inverse(x: &BigUint, modulus: &BigUint) -> Result<BigUint, NumError> {
    if modulus < &BigUint::from(2u8) {
        return Err(NumError::Domain("modulus must be at least 2".into()));
    }
    let m = BigInt::from_biguint(Sign::Plus, modulus.clone());
    let a = BigInt::from_biguint(Sign::Plus, x % modulus);
    let ext = a.extended_gcd(&m);
    if !ext.gcd.is_one() {
        return Err(NumError::NotInvertible {
            value: x.clone(),
            modulus: modulus.clone(),
        });
    }
    let y = ext.x.mod_floor(&m);
    Ok(y.to_biguint()
        .expect("mod_floor of positive modulus is non-negative"))
}

/// A secret exponent `e` with `gcd(e, q-1) = 1` and its inverse mod `q-1`.
#[derive(Clone, PartialEq, Eq)]
pub struct BlindingExponent {
    e: BigUint,
    e_inv: BigUint,
}

impl fmt::Debug for BlindingExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("BlindingExponent(..)")
    }
}

impl BlindingExponent {
    /// Accepts `e` in `[2, q-2]` coprime to `q-1`.
    pub fn new(e: BigUint, params: &GroupParams) -> Result<Self, NumError> {
        let upper = params.q() - 2u8;
        if e < BigUint::from(2u8) || e > upper {
            return Err(NumError::Domain("exponent must lie in [2, q-2]".into()));
        }
        let e_inv = mod_inverse(&e, params.q_minus_1())?;
        Ok(BlindingExponent { e, e_inv })
    }

    /// Rejection-samples `e` uniformly from the units of `Z_{q-1}` in `[2, q-2]`.
    pub fn sample<R: RngCore + ?Sized>(
        params: &GroupParams,
        rng: &mut R,
    ) -> Result<Self, NumError> {
        let low = BigUint::from(2u8);
        let high = params.q() - 1u8; // exclusive
        for _ in 0..MAX_SAMPLING_DRAWS {
            let e = random_below_range(&low, &high, rng)?;
            if e.gcd(params.q_minus_1()).is_one() {
                return Self::new(e, params);
            }
        }
        Err(NumError::Timeout(MAX_SAMPLING_DRAWS as u64))
    }

    pub fn exponent(&self) -> &BigUint {
        &self.e
    }

    pub fn inverse(&self) -> &BigUint {
        &self.e_inv
    }
}

/// Uniform integer in `[low, high)`, reading entropy through `try_fill_bytes`
/// so that a failing source surfaces as [`NumError::Entropy`].
pub fn random_below_range<R: RngCore + ?Sized>(
    low: &BigUint,
    high: &BigUint,
    rng: &mut R,
) -> Result<BigUint, NumError> {
    if high <= low {
        return Err(NumError::Domain("empty sampling range".into()));
    }
    let span = high - low;
    let bits = span.bits();
    let nbytes = bits.div_ceil(8) as usize;
    let excess = (nbytes as u64 * 8) - bits;
    let mut buf = vec![0u8; nbytes];
    for _ in 0..MAX_SAMPLING_DRAWS {
        rng.try_fill_bytes(&mut buf)
            .map_err(|e| NumError::Entropy(e.to_string()))?;
        if excess > 0 {
            buf[0] &= 0xff >> excess;
        }
        let candidate = BigUint::from_bytes_be(&buf);
        if candidate < span {
            return Ok(candidate + low);
        }
    }
    Err(NumError::Timeout(MAX_SAMPLING_DRAWS as u64))
}

const SMALL_PRIMES: [u32; 54] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227, 229, 233, 239, 241, 251,
];

fn small_factor(n: &BigUint) -> Option<u32> {
    SMALL_PRIMES
        .iter()
        .copied()
        .find(|&p| (n % p).is_zero() && *n != BigUint::from(p))
}

/// Trial division followed by `rounds` Miller-Rabin rounds with random bases.
pub fn is_probable_prime<R: RngCore + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    if n < &BigUint::from(2u8) {
        return false;
    }
    if let Some(small) = n.to_u32() {
        if SMALL_PRIMES.contains(&small) {
            return true;
        }
    }
    if small_factor(n).is_some() {
        return false;
    }
    if n < &BigUint::from(257u32 * 257) {
        // no factor up to 251 and below 257^2 means prime
        return true;
    }
    let n_minus_1 = n - 1u8;
    let s = n_minus_1.trailing_zeros().expect("n - 1 is nonzero");
    let d = &n_minus_1 >> s;
    let two = BigUint::from(2u8);
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Searches for a prime modulus of exactly `bit_length` bits.
pub fn generate_group<R: RngCore + ?Sized>(
    bit_length: u64,
    profile: GroupProfile,
    rng: &mut R,
) -> Result<GroupParams, NumError> {
    generate_group_with_budget(bit_length, profile, DEFAULT_PRIME_BUDGET, rng)
}

/// [`generate_group`] with an explicit cap on candidate draws.
pub fn generate_group_with_budget<R: RngCore + ?Sized>(
    bit_length: u64,
    profile: GroupProfile,
    budget: u64,
    rng: &mut R,
) -> Result<GroupParams, NumError> {
    if bit_length < MIN_GROUP_BITS {
        return Err(NumError::Domain(format!(
            "bit length {bit_length} is below the minimum of {MIN_GROUP_BITS}"
        )));
    }
    let nbytes = bit_length.div_ceil(8) as usize;
    let excess = nbytes as u64 * 8 - bit_length;
    let mut buf = vec![0u8; nbytes];
    for _ in 0..budget {
        rng.try_fill_bytes(&mut buf)
            .map_err(|e| NumError::Entropy(e.to_string()))?;
        buf[0] &= 0xff >> excess;
        buf[0] |= 0x80 >> excess; // exact bit length
                                  // q = 3 mod 4 for the safe profile, q odd otherwise
        buf[nbytes - 1] |= match profile {
            GroupProfile::SafePrime => 0b11,
            GroupProfile::PlainPrime => 0b01,
        };
        let q = BigUint::from_bytes_be(&buf);
        if small_factor(&q).is_some() {
            continue;
        }
        match profile {
            GroupProfile::PlainPrime => {
                if is_probable_prime(&q, MILLER_RABIN_ROUNDS, rng) {
                    return Ok(GroupParams::from_trusted(q, profile));
                }
            }
            GroupProfile::SafePrime => {
                let r = (&q - 1u8) >> 1;
                if small_factor(&r).is_some() {
                    continue;
                }
                // cheap screens first
                if !is_probable_prime(&r, 1, rng) || !is_probable_prime(&q, 1, rng) {
                    continue;
                }
                if is_probable_prime(&r, MILLER_RABIN_ROUNDS, rng)
                    && is_probable_prime(&q, MILLER_RABIN_ROUNDS, rng)
                {
                    return Ok(GroupParams::from_trusted(q, profile));
                }
            }
        }
    }
    Err(NumError::Timeout(budget))
}
