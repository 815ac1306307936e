use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// Independent deterministic stream for one party or purpose under a run seed.
///
/// Every party draws from its own stream, so the bytes a party produces do
/// not depend on how its work interleaves with anyone else's.
pub fn party_rng(seed: u64, label: &str) -> ChaCha20Rng {
    let digest: [u8; 32] = Sha256::new()
        .chain_update(b"enkvote/party-rng/v1")
        .chain_update(seed.to_be_bytes())
        .chain_update(label.as_bytes())
        .finalize()
        .into();
    ChaCha20Rng::from_seed(digest)
}
