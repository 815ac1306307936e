use std::fmt;

use rand::RngCore;

use super::{fill_random, CryptoError};

/// Default password length in bits.
pub const DEFAULT_PASSWORD_BITS: u32 = 88;

/// A pre-shared low-entropy secret of a fixed bit length.
///
/// Stored big-endian in `ceil(bits / 8)` octets with the unused high bits of
/// the first octet cleared. `Debug` never prints the value.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Password {
    bytes: Vec<u8>,
    bits: u32,
}

impl fmt::Debug for Password {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Password(<{} bits>)", self.bits)
    }
}

impl Password {
    pub fn random<R: RngCore + ?Sized>(bits: u32, rng: &mut R) -> Result<Self, CryptoError> {
        check_bits(bits)?;
        let mut bytes = vec![0u8; byte_len(bits)];
        fill_random(rng, &mut bytes)?;
        mask_high(&mut bytes, bits);
        Ok(Password { bytes, bits })
    }

    pub fn from_bytes(bytes: Vec<u8>, bits: u32) -> Result<Self, CryptoError> {
        check_bits(bits)?;
        if bytes.len() != byte_len(bits) {
            return Err(CryptoError::Format(format!(
                "a {bits}-bit password needs {} octets, got {}",
                byte_len(bits),
                bytes.len()
            )));
        }
        let mut masked = bytes.clone();
        mask_high(&mut masked, bits);
        if masked != bytes {
            return Err(CryptoError::Format(
                "password has bits above its length".into(),
            ));
        }
        Ok(Password { bytes, bits })
    }

    /// Password number `value` in a space of at most 64 bits. Used to
    /// enumerate small password spaces.
    pub fn from_index(value: u64, bits: u32) -> Result<Self, CryptoError> {
        if bits > 64 || (bits < 64 && value >> bits != 0) {
            return Err(CryptoError::Domain(format!(
                "{value} does not fit in {bits} bits"
            )));
        }
        let full = value.to_be_bytes();
        Self::from_bytes(full[8 - byte_len(bits)..].to_vec(), bits)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Raw octets. Only for key derivation and credential files.
    pub fn expose_secret(&self) -> &[u8] {
        &self.bytes
    }

    /// `<bits>:<hex>` form for credential files.
    pub fn to_labeled_hex(&self) -> String {
        format!("{}:{}", self.bits, hex::encode(&self.bytes))
    }

    pub fn from_labeled_hex(text: &str) -> Result<Self, CryptoError> {
        let (bits, hex_part) = text
            .trim()
            .split_once(':')
            .ok_or_else(|| CryptoError::Format("expected <bits>:<hex>".into()))?;
        let bits: u32 = bits
            .parse()
            .map_err(|_| CryptoError::Format(format!("bad bit length {bits:?}")))?;
        let bytes = hex::decode(hex_part).map_err(|e| CryptoError::Format(e.to_string()))?;
        Self::from_bytes(bytes, bits)
    }
}

fn check_bits(bits: u32) -> Result<(), CryptoError> {
    if bits == 0 || bits > 4096 {
        return Err(CryptoError::Domain(format!(
            "unsupported password length {bits}"
        )));
    }
    Ok(())
}

fn byte_len(bits: u32) -> usize {
    bits.div_ceil(8) as usize
}

fn mask_high(bytes: &mut [u8], bits: u32) {
    let excess = (bytes.len() as u32 * 8) - bits;
    if excess > 0 {
        bytes[0] &= 0xff >> excess;
    }
}
