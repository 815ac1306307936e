//! The symbol families the election messages are built from: the
//! password-wrapping cipher `E_P`, the authenticated cipher `E*` for identity
//! fields, and the Carter-Wegman MAC `h_K`. Also the octet-string to group
//! element embedding used to carry ballots through the no-key exchange.

mod ep;
mod ledger;
mod mac;
mod password;
mod payload;
mod sym;

pub(crate) use ep::wrap_residue;
pub use ep::{body_width, ep_unwrap, ep_wrap, layer_unwrap, layer_wrap, GroupCiphertext};
#[cfg(test)]
pub(crate) use ep::{element_keystream, to_fixed_width};
pub use ledger::{NonceLedger, NoncePurpose};
pub use mac::{mac_tag, mac_tag_one_time, mac_verify, mac_verify_one_time, MacTag, PadBook};
pub use password::{Password, DEFAULT_PASSWORD_BITS};
pub use payload::{decode_payload, encode_payload, payload_capacity};
pub use sym::{sealed_len, sym_decrypt, sym_encrypt, KeyRole, SymmetricKey, MAX_SYM_PLAINTEXT};

use thiserror::Error;

/// Width of every nonce in the crate (pad nonces, MAC nonces, AEAD nonces).
pub const NONCE_LEN: usize = 12;

pub type Nonce = [u8; NONCE_LEN];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CryptoError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("authentication failed")]
    AuthFail,
    #[error("nonce already used with this key")]
    NonceReuse,
    #[error("payload of {len} octets exceeds capacity of {capacity}")]
    PayloadTooLarge { len: usize, capacity: usize },
    #[error("decoded element carries no valid payload")]
    Decode,
    #[error("entropy source failed: {0}")]
    Entropy(String),
    #[error("one-time pad book exhausted or index out of range")]
    PadExhausted,
}

pub(crate) fn fill_random<R: rand::RngCore + ?Sized>(
    rng: &mut R,
    buf: &mut [u8],
) -> Result<(), CryptoError> {
    rng.try_fill_bytes(buf)
        .map_err(|e| CryptoError::Entropy(e.to_string()))
}
