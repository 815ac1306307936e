use std::collections::HashSet;
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use super::{CryptoError, Nonce};

/// What a nonce was spent on. MAC and AEAD nonces live in separate spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NoncePurpose {
    Mac,
    Sym,
}

type Fingerprint = [u8; 16];

/// Record of `(key, purpose, nonce)` triples already spent in one election.
#[derive(Debug, Default)]
pub struct NonceLedger {
    seen: Mutex<HashSet<(Fingerprint, NoncePurpose, Nonce)>>,
}

impl Clone for NonceLedger {
    fn clone(&self) -> Self {
        NonceLedger {
            seen: Mutex::new(self.seen.lock().expect("ledger lock").clone()),
        }
    }
}

impl NonceLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Marks `nonce` as spent under `key_material`. Fails if it already was.
    pub fn claim(
        &self,
        key_material: &[u8],
        purpose: NoncePurpose,
        nonce: &Nonce,
    ) -> Result<(), CryptoError> {
        let fp = fingerprint(key_material);
        let mut seen = self.seen.lock().expect("ledger lock");
        if seen.insert((fp, purpose, *nonce)) {
            Ok(())
        } else {
            Err(CryptoError::NonceReuse)
        }
    }

    pub fn contains(&self, key_material: &[u8], purpose: NoncePurpose, nonce: &Nonce) -> bool {
        let fp = fingerprint(key_material);
        self.seen
            .lock()
            .expect("ledger lock")
            .contains(&(fp, purpose, *nonce))
    }

    pub fn len(&self) -> usize {
        self.seen.lock().expect("ledger lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Starts a new election epoch.
    pub fn reset(&self) {
        self.seen.lock().expect("ledger lock").clear();
    }
}

fn fingerprint(key_material: &[u8]) -> Fingerprint {
    let digest = Sha256::new()
        .chain_update(b"enkvote/ledger-fingerprint")
        .chain_update(key_material)
        .finalize();
    let mut fp = [0u8; 16];
    fp.copy_from_slice(&digest[..16]);
    fp
}
