//! `E_P`: verification-free password wrapping.
//!
//! A group element `x` is lifted to `x + k*q` for a uniform `k` that keeps the
//! sum inside a fixed-width body, then XOR-masked with a ChaCha20 keystream
//! keyed by the password. Unmasking with any password yields some integer and
//! reducing it mod `q` yields some residue, so a wrong password is never
//! signalled; rejecting a guess requires working in the group.

use chacha20::cipher::{KeyIvInit, StreamCipher};
use chacha20::ChaCha20;
use num_bigint::BigUint;
use rand::RngCore;
use sha2::{Digest, Sha256};

use super::{fill_random, CryptoError, Nonce, Password, NONCE_LEN};
use crate::numtheory::{random_below_range, GroupParams};

const ELEMENT_DOMAIN: &[u8] = b"enkvote/ep-wrap/element/v1";
const LAYER_DOMAIN: &[u8] = b"enkvote/ep-wrap/layer/v1";

/// Body width in octets: `ceil((bits(q) + 64) / 8)`.
pub fn body_width(params: &GroupParams) -> usize {
    (params.bit_length() + 64).div_ceil(8) as usize
}

/// A password-wrapped group element. Wire form: `pad_nonce || body`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupCiphertext {
    pub pad_nonce: Nonce,
    pub body: Vec<u8>,
}

impl GroupCiphertext {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(NONCE_LEN + self.body.len());
        out.extend_from_slice(&self.pad_nonce);
        out.extend_from_slice(&self.body);
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &GroupParams) -> Result<Self, CryptoError> {
        let expected = NONCE_LEN + body_width(params);
        if bytes.len() != expected {
            return Err(CryptoError::Format(format!(
                "group ciphertext is {} octets, expected {expected}",
                bytes.len()
            )));
        }
        let mut pad_nonce = [0u8; NONCE_LEN];
        pad_nonce.copy_from_slice(&bytes[..NONCE_LEN]);
        Ok(GroupCiphertext {
            pad_nonce,
            body: bytes[NONCE_LEN..].to_vec(),
        })
    }

    /// Total wire length for `params`.
    pub fn wire_len(params: &GroupParams) -> usize {
        NONCE_LEN + body_width(params)
    }
}

fn keystream_xor(domain: &[u8], password: &Password, nonce: &Nonce, buf: &mut [u8]) {
    let key = Sha256::new()
        .chain_update(domain)
        .chain_update(password.bits().to_be_bytes())
        .chain_update(password.expose_secret())
        .finalize();
    let mut cipher = ChaCha20::new(&key, nonce.into());
    cipher.apply_keystream(buf);
}

/// Wraps `element` (which must lie in `[2, q-2]`) under `password`.
pub fn ep_wrap<R: RngCore + ?Sized>(
    password: &Password,
    element: &BigUint,
    params: &GroupParams,
    rng: &mut R,
) -> Result<GroupCiphertext, CryptoError> {
    let two = BigUint::from(2u8);
    if element < &two || element > &(params.q() - 2u8) {
        return Err(CryptoError::Domain("element must lie in [2, q-2]".into()));
    }
    wrap_residue(password, element, params, rng)
}

/// Like [`ep_wrap`] but accepts any residue in `[1, q-1]`, for relaying values
/// a session has already flagged as anomalous.
pub(crate) fn wrap_residue<R: RngCore + ?Sized>(
    password: &Password,
    element: &BigUint,
    params: &GroupParams,
    rng: &mut R,
) -> Result<GroupCiphertext, CryptoError> {
    if element == &BigUint::from(0u8) || element >= params.q() {
        return Err(CryptoError::Domain("not a unit residue".into()));
    }
    let width = body_width(params);
    // k uniform in [0, floor(2^(8w) / q)) keeps element + k*q below 2^(8w)
    let multipliers = (BigUint::from(1u8) << (8 * width)) / params.q();
    let k = random_below_range(&BigUint::from(0u8), &multipliers, rng)
        .map_err(|e| CryptoError::Entropy(e.to_string()))?;
    let lifted = element + k * params.q();
    let mut body = to_fixed_width(&lifted, width);
    let mut pad_nonce = [0u8; NONCE_LEN];
    fill_random(rng, &mut pad_nonce)?;
    keystream_xor(ELEMENT_DOMAIN, password, &pad_nonce, &mut body);
    Ok(GroupCiphertext { pad_nonce, body })
}

/// Unmasks and reduces mod `q`. Only the width is checked, never the content.
pub fn ep_unwrap(
    password: &Password,
    ct: &GroupCiphertext,
    params: &GroupParams,
) -> Result<BigUint, CryptoError> {
    let width = body_width(params);
    if ct.body.len() != width {
        return Err(CryptoError::Format(format!(
            "body is {} octets, expected {width}",
            ct.body.len()
        )));
    }
    let mut body = ct.body.clone();
    keystream_xor(ELEMENT_DOMAIN, password, &ct.pad_nonce, &mut body);
    Ok(BigUint::from_bytes_be(&body) % params.q())
}

/// Outer password layer over arbitrary octets: `nonce || data XOR keystream`.
pub fn layer_wrap<R: RngCore + ?Sized>(
    password: &Password,
    data: &[u8],
    rng: &mut R,
) -> Result<Vec<u8>, CryptoError> {
    let mut nonce = [0u8; NONCE_LEN];
    fill_random(rng, &mut nonce)?;
    let mut out = Vec::with_capacity(NONCE_LEN + data.len());
    out.extend_from_slice(&nonce);
    out.extend_from_slice(data);
    keystream_xor(LAYER_DOMAIN, password, &nonce, &mut out[NONCE_LEN..]);
    Ok(out)
}

/// Inverse of [`layer_wrap`]. Like `ep_unwrap`, never detects a wrong password.
pub fn layer_unwrap(password: &Password, wrapped: &[u8]) -> Result<Vec<u8>, CryptoError> {
    if wrapped.len() < NONCE_LEN {
        return Err(CryptoError::Format("layer shorter than its nonce".into()));
    }
    let mut nonce = [0u8; NONCE_LEN];
    nonce.copy_from_slice(&wrapped[..NONCE_LEN]);
    let mut data = wrapped[NONCE_LEN..].to_vec();
    keystream_xor(LAYER_DOMAIN, password, &nonce, &mut data);
    Ok(data)
}

#[cfg(test)]
pub(crate) fn element_keystream(password: &Password, nonce: &Nonce, len: usize) -> Vec<u8> {
    let mut buf = vec![0u8; len];
    keystream_xor(ELEMENT_DOMAIN, password, nonce, &mut buf);
    buf
}

pub(crate) fn to_fixed_width(value: &BigUint, width: usize) -> Vec<u8> {
    let raw = value.to_bytes_be();
    debug_assert!(raw.len() <= width);
    let mut out = vec![0u8; width - raw.len()];
    out.extend_from_slice(&raw);
    out
}
