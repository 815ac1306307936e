//! `E*`: authenticated symmetric encryption for identity fields.

use std::fmt;

use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::ChaCha20Poly1305;
use rand::RngCore;

use super::{fill_random, CryptoError, Nonce, NonceLedger, NoncePurpose, NONCE_LEN};

/// Largest plaintext accepted by [`sym_encrypt`].
pub const MAX_SYM_PLAINTEXT: usize = 1 << 16;

const TAG_LEN: usize = 16;

/// Which pair of parties shares a key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KeyRole {
    /// All voters and the administrator.
    Va,
    /// Administrator and counter (also written `K_a`).
    Ac,
    /// All voters and the counter.
    Vc,
}

impl KeyRole {
    pub fn label(self) -> &'static str {
        match self {
            KeyRole::Va => "va",
            KeyRole::Ac => "ac",
            KeyRole::Vc => "vc",
        }
    }
}

/// A 256-bit pre-shared key.
#[derive(Clone, PartialEq, Eq)]
pub struct SymmetricKey {
    key: [u8; 32],
    role: KeyRole,
}

impl fmt::Debug for SymmetricKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymmetricKey({}, ..)", self.role.label())
    }
}

impl SymmetricKey {
    pub fn new(key: [u8; 32], role: KeyRole) -> Self {
        SymmetricKey { key, role }
    }

    pub fn random<R: RngCore + ?Sized>(role: KeyRole, rng: &mut R) -> Result<Self, CryptoError> {
        let mut key = [0u8; 32];
        fill_random(rng, &mut key)?;
        Ok(SymmetricKey { key, role })
    }

    pub fn from_hex(text: &str, role: KeyRole) -> Result<Self, CryptoError> {
        let bytes = hex::decode(text.trim()).map_err(|e| CryptoError::Format(e.to_string()))?;
        let key: [u8; 32] = bytes
            .try_into()
            .map_err(|_| CryptoError::Format("symmetric keys are 32 octets".into()))?;
        Ok(SymmetricKey { key, role })
    }

    pub fn role(&self) -> KeyRole {
        self.role
    }

    pub fn expose_secret(&self) -> &[u8; 32] {
        &self.key
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.key)
    }
}

/// Encrypts to `nonce || ciphertext || tag`. The nonce is fresh and recorded in
/// `ledger`; an unlikely collision is redrawn.
pub fn sym_encrypt<R: RngCore + ?Sized>(
    key: &SymmetricKey,
    plaintext: &[u8],
    ledger: &NonceLedger,
    rng: &mut R,
) -> Result<Vec<u8>, CryptoError> {
    if plaintext.len() > MAX_SYM_PLAINTEXT {
        return Err(CryptoError::Domain(format!(
            "plaintext of {} octets exceeds {MAX_SYM_PLAINTEXT}",
            plaintext.len()
        )));
    }
    let mut nonce: Nonce = [0u8; NONCE_LEN];
    let mut claimed = false;
    for _ in 0..8 {
        fill_random(rng, &mut nonce)?;
        if ledger.claim(&key.key, NoncePurpose::Sym, &nonce).is_ok() {
            claimed = true;
            break;
        }
    }
    if !claimed {
        return Err(CryptoError::NonceReuse);
    }
    let cipher = ChaCha20Poly1305::new((&key.key).into());
    let sealed = cipher
        .encrypt((&nonce).into(), plaintext)
        .map_err(|_| CryptoError::Domain("encryption failed".into()))?;
    let mut out = Vec::with_capacity(NONCE_LEN + sealed.len());
    out.extend_from_slice(&nonce);
    out.extend_from_slice(&sealed);
    Ok(out)
}

/// Verifies the tag before releasing any plaintext.
pub fn sym_decrypt(key: &SymmetricKey, sealed: &[u8]) -> Result<Vec<u8>, CryptoError> {
    if sealed.len() < NONCE_LEN + TAG_LEN {
        return Err(CryptoError::Format(
            "sealed message shorter than nonce and tag".into(),
        ));
    }
    let (nonce, body) = sealed.split_at(NONCE_LEN);
    let cipher = ChaCha20Poly1305::new((&key.key).into());
    cipher
        .decrypt(nonce.into(), body)
        .map_err(|_| CryptoError::AuthFail)
}

/// Sealed length for a plaintext of `len` octets.
pub fn sealed_len(len: usize) -> usize {
    NONCE_LEN + len + TAG_LEN
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let ledger = NonceLedger::new();
        let key = SymmetricKey::random(KeyRole::Va, &mut rng).unwrap();
        let sealed = sym_encrypt(&key, b"ID_0007", &ledger, &mut rng).unwrap();
        assert_eq!(sealed.len(), sealed_len(7));
        assert_eq!(sym_decrypt(&key, &sealed).unwrap(), b"ID_0007");
        assert_eq!(ledger.len(), 1);
    }

    #[test]
    fn every_bit_flip_is_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let ledger = NonceLedger::new();
        let key = SymmetricKey::random(KeyRole::Ac, &mut rng).unwrap();
        let sealed = sym_encrypt(&key, &[0x42; 16], &ledger, &mut rng).unwrap();
        for bit in 0..sealed.len() * 8 {
            let mut tampered = sealed.clone();
            tampered[bit / 8] ^= 0x80 >> (bit % 8);
            assert_eq!(
                sym_decrypt(&key, &tampered),
                Err(CryptoError::AuthFail),
                "bit {bit}"
            );
        }
    }

    #[test]
    fn wrong_keys_are_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let ledger = NonceLedger::new();
        let key = SymmetricKey::random(KeyRole::Vc, &mut rng).unwrap();
        let sealed = sym_encrypt(&key, b"routing data", &ledger, &mut rng).unwrap();
        for _ in 0..1000 {
            let other = SymmetricKey::random(KeyRole::Vc, &mut rng).unwrap();
            assert_eq!(sym_decrypt(&other, &sealed), Err(CryptoError::AuthFail));
        }
    }

    #[test]
    fn short_input_is_format_error() {
        let key = SymmetricKey::new([7; 32], KeyRole::Va);
        assert!(matches!(
            sym_decrypt(&key, &[0u8; 27]),
            Err(CryptoError::Format(_))
        ));
    }

    #[test]
    fn oversize_plaintext_rejected() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let key = SymmetricKey::new([7; 32], KeyRole::Va);
        let big = vec![0u8; MAX_SYM_PLAINTEXT + 1];
        assert!(sym_encrypt(&key, &big, &NonceLedger::new(), &mut rng).is_err());
    }

    /// An rng that repeats the same stream forever.
    struct StuckRng;
    impl RngCore for StuckRng {
        fn next_u32(&mut self) -> u32 {
            7
        }
        fn next_u64(&mut self) -> u64 {
            7
        }
        fn fill_bytes(&mut self, dest: &mut [u8]) {
            dest.fill(7);
        }
        fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
            dest.fill(7);
            Ok(())
        }
    }

    #[test]
    fn repeated_nonce_source_is_caught() {
        let key = SymmetricKey::new([1; 32], KeyRole::Va);
        let ledger = NonceLedger::new();
        sym_encrypt(&key, b"a", &ledger, &mut StuckRng).unwrap();
        assert_eq!(
            sym_encrypt(&key, b"b", &ledger, &mut StuckRng),
            Err(CryptoError::NonceReuse)
        );
    }
}
