//! `h_K`: Carter-Wegman message authentication.
//!
//! The universal hash is polynomial evaluation over GF(2^130 - 5) (Poly1305)
//! under a hash subkey `r`; the result is masked by a pad `s` tied to the
//! nonce. Two pad sources exist:
//!
//! * PRF mode ([`mac_tag`]): `r` is derived once from the shared key and
//!   `s = PRF(key, nonce)`. Computationally secure.
//! * One-time mode ([`mac_tag_one_time`]): both `r` and `s` are read from a
//!   pre-distributed [`PadBook`] at the position named by the nonce, and each
//!   position is spent once. Unconditionally secure while the book lasts.

use std::fmt;

use poly1305::universal_hash::KeyInit;
use poly1305::Poly1305;
use rand::RngCore;
use sha2::{Digest, Sha256};
use subtle::ConstantTimeEq;

use super::{fill_random, CryptoError, Nonce, NonceLedger, NoncePurpose, SymmetricKey, NONCE_LEN};

pub const TAG_LEN: usize = 16;

/// A MAC tag and the nonce it was computed under.
/// Wire form: `nonce (12) || tag (16)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MacTag {
    pub nonce: Nonce,
    pub tag: [u8; TAG_LEN],
}

impl MacTag {
    pub const WIRE_LEN: usize = NONCE_LEN + TAG_LEN;

    pub fn to_bytes(&self) -> [u8; Self::WIRE_LEN] {
        let mut out = [0u8; Self::WIRE_LEN];
        out[..NONCE_LEN].copy_from_slice(&self.nonce);
        out[NONCE_LEN..].copy_from_slice(&self.tag);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, CryptoError> {
        if bytes.len() != Self::WIRE_LEN {
            return Err(CryptoError::Format(format!(
                "MAC tag is {} octets, expected {}",
                bytes.len(),
                Self::WIRE_LEN
            )));
        }
        let mut nonce = [0u8; NONCE_LEN];
        let mut tag = [0u8; TAG_LEN];
        nonce.copy_from_slice(&bytes[..NONCE_LEN]);
        tag.copy_from_slice(&bytes[NONCE_LEN..]);
        Ok(MacTag { nonce, tag })
    }
}

fn poly1305_tag(r: &[u8; 16], s: &[u8; 16], message: &[u8]) -> [u8; TAG_LEN] {
    let mut key = [0u8; 32];
    key[..16].copy_from_slice(r);
    key[16..].copy_from_slice(s);
    let tag = Poly1305::new((&key).into()).compute_unpadded(message);
    tag.into()
}

fn derive16(label: &[u8], key: &[u8], nonce: Option<&Nonce>) -> [u8; 16] {
    let mut h = Sha256::new().chain_update(label).chain_update(key);
    if let Some(n) = nonce {
        h.update(n);
    }
    let digest = h.finalize();
    let mut out = [0u8; 16];
    out.copy_from_slice(&digest[..16]);
    out
}

fn prf_tag(key: &SymmetricKey, message: &[u8], nonce: &Nonce) -> [u8; TAG_LEN] {
    let secret = key.expose_secret();
    let r = derive16(b"enkvote/mac/hash-subkey/v1", secret, None);
    let s = derive16(b"enkvote/mac/pad/v1", secret, Some(nonce));
    poly1305_tag(&r, &s, message)
}

/// Tags `message` under `key` and `nonce`, recording the nonce in `ledger`.
pub fn mac_tag(
    key: &SymmetricKey,
    message: &[u8],
    nonce: &Nonce,
    ledger: &NonceLedger,
) -> Result<MacTag, CryptoError> {
    ledger.claim(key.expose_secret(), NoncePurpose::Mac, nonce)?;
    Ok(MacTag {
        nonce: *nonce,
        tag: prf_tag(key, message, nonce),
    })
}

/// Constant-time comparison against a recomputed tag.
pub fn mac_verify(key: &SymmetricKey, message: &[u8], tag: &MacTag) -> bool {
    let expected = prf_tag(key, message, &tag.nonce);
    expected.ct_eq(&tag.tag).into()
}

/// Pre-distributed one-time MAC key material: 32 octets (`r || s`) per
/// message slot. A nonce names slot `i` as 4 zero octets then `i` big-endian.
#[derive(Clone, PartialEq, Eq)]
pub struct PadBook {
    id: [u8; 16],
    material: Vec<u8>,
}

impl fmt::Debug for PadBook {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PadBook({} slots)", self.slots())
    }
}

impl PadBook {
    pub const SLOT_LEN: usize = 32;

    pub fn random<R: RngCore + ?Sized>(slots: usize, rng: &mut R) -> Result<Self, CryptoError> {
        let mut id = [0u8; 16];
        fill_random(rng, &mut id)?;
        let mut material = vec![0u8; slots * Self::SLOT_LEN];
        fill_random(rng, &mut material)?;
        Ok(PadBook { id, material })
    }

    pub fn slots(&self) -> usize {
        self.material.len() / Self::SLOT_LEN
    }

    pub fn nonce_for_slot(slot: u64) -> Nonce {
        let mut nonce = [0u8; NONCE_LEN];
        nonce[4..].copy_from_slice(&slot.to_be_bytes());
        nonce
    }

    fn slot(&self, nonce: &Nonce) -> Result<([u8; 16], [u8; 16]), CryptoError> {
        if nonce[..4] != [0; 4] {
            return Err(CryptoError::PadExhausted);
        }
        let index = u64::from_be_bytes(nonce[4..].try_into().expect("8 octets"));
        let index = usize::try_from(index).map_err(|_| CryptoError::PadExhausted)?;
        if index >= self.slots() {
            return Err(CryptoError::PadExhausted);
        }
        let start = index * Self::SLOT_LEN;
        let mut r = [0u8; 16];
        let mut s = [0u8; 16];
        r.copy_from_slice(&self.material[start..start + 16]);
        s.copy_from_slice(&self.material[start + 16..start + 32]);
        Ok((r, s))
    }
}

pub fn mac_tag_one_time(
    book: &PadBook,
    message: &[u8],
    nonce: &Nonce,
    ledger: &NonceLedger,
) -> Result<MacTag, CryptoError> {
    let (r, s) = book.slot(nonce)?;
    ledger.claim(&book.id, NoncePurpose::Mac, nonce)?;
    Ok(MacTag {
        nonce: *nonce,
        tag: poly1305_tag(&r, &s, message),
    })
}

pub fn mac_verify_one_time(book: &PadBook, message: &[u8], tag: &MacTag) -> bool {
    match book.slot(&tag.nonce) {
        Ok((r, s)) => poly1305_tag(&r, &s, message).ct_eq(&tag.tag).into(),
        Err(_) => false,
    }
}
