//! Offline password guessing against a recorded no-key exchange.
//!
//! For each candidate password the attacker unwraps the three passes to
//! `v1, v2, v3`, takes discrete logs with a full lookup table, solves
//! `v1^b' = v2` and `v3^a' = v2` for unit exponents, and reconstructs the
//! payload twice as `v1^(1/a')` and `v3^(1/b')`. Equality of the two is
//! implied by the equations themselves, so it rejects nothing once the
//! exponents exist; a candidate is accepted only if the reconstruction also
//! decodes as a well-formed payload.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rand::RngCore;

use super::SecurityError;
use crate::crypto::{decode_payload, encode_payload, ep_unwrap, Password};
use crate::enk::{EnkMessage, EnkSession};
use crate::numtheory::GroupParams;

/// Safe prime `2 * 5321633 + 1`, small enough for a full log table and wide
/// enough for a one-octet payload.
pub const DEMO_GROUP_Q: u64 = 10_643_267;

pub fn demo_group() -> GroupParams {
    GroupParams::new(
        BigUint::from(DEMO_GROUP_Q),
        crate::numtheory::GroupProfile::SafePrime,
    )
    .expect("demo modulus is a safe prime")
}

/// The three recorded passes of one exchange.
#[derive(Debug, Clone)]
pub struct EnkTranscript {
    pub params: GroupParams,
    pub hops: [EnkMessage; 3],
}

/// Runs one honest exchange carrying `data` and records the wire traffic.
pub fn record_transcript<R: RngCore + ?Sized>(
    params: &GroupParams,
    password: &Password,
    data: &[u8],
    rng: &mut R,
) -> Result<(EnkTranscript, BigUint), SecurityError> {
    let m = encode_payload(data, params)?;
    let mut alice = EnkSession::initiator(params.clone(), password.clone(), rng)?;
    let mut bob = EnkSession::responder(params.clone(), password.clone(), rng)?;
    let h1 = alice.start(&m, rng)?;
    let h2 = bob.blind(&h1, rng)?;
    let h3 = alice.unblind(&h2, rng)?;
    let got = bob.finish(&h3)?;
    debug_assert_eq!(got, m);
    Ok((
        EnkTranscript {
            params: params.clone(),
            hops: [h1, h2, h3],
        },
        m,
    ))
}

/// Brute-force discrete logarithms in `Z_q^*` by table lookup.
pub struct DlogOracle {
    q: u64,
    generator: u64,
    log: Vec<u32>,
}

impl std::fmt::Debug for DlogOracle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DlogOracle(q={}, g={})", self.q, self.generator)
    }
}

impl DlogOracle {
    pub fn new(params: &GroupParams) -> Result<Self, SecurityError> {
        let q = params
            .q()
            .to_u64()
            .filter(|&q| q < 1 << 32)
            .ok_or(SecurityError::OracleTooLarge)?;
        let n = q - 1;
        let factors = distinct_prime_factors(n);
        let generator = (2..q)
            .find(|&g| factors.iter().all(|&p| pow_mod(g, n / p, q) != 1))
            .ok_or_else(|| SecurityError::Domain("no generator found".into()))?;
        let mut log = vec![0u32; q as usize];
        let mut x = 1u64;
        for e in 0..n {
            log[x as usize] = e as u32;
            x = x * generator % q;
        }
        Ok(DlogOracle { q, generator, log })
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    /// `log_g(x)` for `x` in `[1, q-1]`.
    pub fn log(&self, x: u64) -> Option<u64> {
        (x != 0 && x < self.q).then(|| self.log[x as usize] as u64)
    }
}

fn distinct_prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            out.push(p);
            while n.is_multiple_of(p) {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

fn inv_mod(x: u64, m: u64) -> Option<u64> {
    let e = (x as i64).extended_gcd(&(m as i64));
    (e.gcd == 1).then(|| e.x.rem_euclid(m as i64) as u64)
}

/// Unit solutions of `l * x = r (mod n)`. Degenerate equations with more
/// than two solutions (only reachable from elements of order at most two)
/// yield none.
fn unit_solutions(l: u64, r: u64, n: u64) -> Vec<u64> {
    let d = l.gcd(&n);
    if d > 2 || !r.is_multiple_of(d) {
        return Vec::new();
    }
    let step = n / d;
    let Some(inv) = inv_mod(l / d % step, step) else {
        return Vec::new();
    };
    let x0 = ((r / d) as u128 * inv as u128 % step as u128) as u64;
    (0..d)
        .map(|k| x0 + k * step)
        .filter(|x| x.gcd(&n) == 1)
        .collect()
}

/// Steps 1 to 3 for one candidate. Returns the reconstructed payload
/// element when the candidate is accepted.
pub fn test_candidate(
    transcript: &EnkTranscript,
    candidate: &Password,
    oracle: &DlogOracle,
) -> Option<u64> {
    let params = &transcript.params;
    let q = oracle.q;
    let n = q - 1;
    let mut v = [0u64; 3];
    for (slot, hop) in v.iter_mut().zip(&transcript.hops) {
        *slot = ep_unwrap(candidate, &hop.ct, params).ok()?.to_u64()?;
    }
    let [l1, l2, l3] = [oracle.log(v[0])?, oracle.log(v[1])?, oracle.log(v[2])?];
    for b in unit_solutions(l1, l2, n) {
        for a in unit_solutions(l3, l2, n) {
            let m1 = pow_mod(v[0], inv_mod(a, n)?, q);
            let m2 = pow_mod(v[2], inv_mod(b, n)?, q);
            if m1 == m2 && decode_payload(&BigUint::from(m1), params).is_ok() {
                return Some(m1);
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessResult {
    pub password: Password,
    pub guesses: u64,
    pub payload: u64,
}

/// Tries passwords `0, 1, 2, ...` of a `password_bits`-bit space and
/// returns the first accepted one.
pub fn attack_password_guess(
    transcript: &EnkTranscript,
    password_bits: u32,
    oracle: &DlogOracle,
) -> Result<Option<GuessResult>, SecurityError> {
    check_space(transcript, password_bits, oracle)?;
    for index in 0..1u64 << password_bits {
        let candidate = Password::from_index(index, password_bits)?;
        if let Some(payload) = test_candidate(transcript, &candidate, oracle) {
            return Ok(Some(GuessResult {
                password: candidate,
                guesses: index + 1,
                payload,
            }));
        }
    }
    Ok(None)
}

/// Every accepted password in the space, for checking that no wrong
/// candidate slips through.
pub fn sweep_password_space(
    transcript: &EnkTranscript,
    password_bits: u32,
    oracle: &DlogOracle,
) -> Result<Vec<Password>, SecurityError> {
    check_space(transcript, password_bits, oracle)?;
    let mut accepted = Vec::new();
    for index in 0..1u64 << password_bits {
        let candidate = Password::from_index(index, password_bits)?;
        if test_candidate(transcript, &candidate, oracle).is_some() {
            accepted.push(candidate);
        }
    }
    Ok(accepted)
}

fn check_space(
    transcript: &EnkTranscript,
    password_bits: u32,
    oracle: &DlogOracle,
) -> Result<(), SecurityError> {
    if transcript.params.q().to_u64() != Some(oracle.q) {
        return Err(SecurityError::Domain(
            "oracle built for another group".into(),
        ));
    }
    if password_bits == 0 || password_bits > 16 {
        return Err(SecurityError::Domain(format!(
            "password space of {password_bits} bits is outside 1..=16"
        )));
    }
    Ok(())
}

/// Summary of repeated guessing trials with random passwords.
#[derive(Debug, Clone, PartialEq)]
pub struct GuessTrials {
    pub trials: usize,
    pub recovered: usize,
    pub mean_guesses: f64,
    pub false_accepts: usize,
}

/// `trials` fresh exchanges, each under a uniform password from the space
/// and carrying a random octet. Each transcript is attacked and then swept.
pub fn run_guess_trials<R: RngCore + ?Sized>(
    oracle: &DlogOracle,
    params: &GroupParams,
    password_bits: u32,
    trials: usize,
    rng: &mut R,
) -> Result<GuessTrials, SecurityError> {
    let mut recovered = 0;
    let mut total = 0u64;
    let mut false_accepts = 0;
    for _ in 0..trials {
        let secret = rng.next_u64() & ((1u64 << password_bits) - 1);
        let password = Password::from_index(secret, password_bits)?;
        let data = [rng.next_u32() as u8];
        let (transcript, _) = record_transcript(params, &password, &data, rng)?;
        if let Some(hit) = attack_password_guess(&transcript, password_bits, oracle)? {
            total += hit.guesses;
            if hit.password == password {
                recovered += 1;
            }
        }
        false_accepts += sweep_password_space(&transcript, password_bits, oracle)?
            .iter()
            .filter(|p| **p != password)
            .count();
    }
    Ok(GuessTrials {
        trials,
        recovered,
        mean_guesses: total as f64 / trials.max(1) as f64,
        false_accepts,
    })
}
