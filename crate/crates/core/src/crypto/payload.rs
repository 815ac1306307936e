//! Embedding of short octet strings as group elements.
//!
//! A payload `m` becomes the integer `x = 0x01 || m || len(m)`, which is below
//! `q / 2`. Under the safe-prime profile the element is `x^2 mod q`, a
//! quadratic residue; decoding takes the smaller square root. Under the
//! plain-prime profile `x` is used directly.

use num_bigint::BigUint;
use num_traits::One;

use super::CryptoError;
use crate::numtheory::{GroupParams, GroupProfile};

const GUARD: u8 = 0x01;

/// Largest payload, in octets, that fits the group.
pub fn payload_capacity(params: &GroupParams) -> usize {
    let bits = params.bit_length() as usize;
    (bits.saturating_sub(16) / 8).min(255)
}

pub fn encode_payload(data: &[u8], params: &GroupParams) -> Result<BigUint, CryptoError> {
    let capacity = payload_capacity(params);
    if data.len() > capacity {
        return Err(CryptoError::PayloadTooLarge {
            len: data.len(),
            capacity,
        });
    }
    let mut raw = Vec::with_capacity(data.len() + 2);
    raw.push(GUARD);
    raw.extend_from_slice(data);
    raw.push(data.len() as u8);
    let x = BigUint::from_bytes_be(&raw);
    let q = params.q();
    let element = match params.profile() {
        GroupProfile::SafePrime => (&x * &x) % q,
        GroupProfile::PlainPrime => x,
    };
    if element <= BigUint::one() || element >= q - 1u32 {
        return Err(CryptoError::Domain(
            "payload maps to a degenerate element".into(),
        ));
    }
    Ok(element)
}

pub fn decode_payload(element: &BigUint, params: &GroupParams) -> Result<Vec<u8>, CryptoError> {
    let q = params.q();
    if element >= q {
        return Err(CryptoError::Decode);
    }
    let x = match params.profile() {
        GroupProfile::SafePrime => {
            let exp = (q + 1u32) >> 2;
            let c = element.modpow(&exp, q);
            let other = q - &c;
            let root = if c < other { c } else { other };
            if (&root * &root) % q != *element {
                return Err(CryptoError::Decode);
            }
            root
        }
        GroupProfile::PlainPrime => element.clone(),
    };
    let raw = x.to_bytes_be();
    if raw.len() < 2 || raw[0] != GUARD {
        return Err(CryptoError::Decode);
    }
    let len = raw[raw.len() - 1] as usize;
    if len != raw.len() - 2 || len > payload_capacity(params) {
        return Err(CryptoError::Decode);
    }
    Ok(raw[1..raw.len() - 1].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn small_safe() -> GroupParams {
        GroupParams::new(BigUint::from(10_643_267u32), GroupProfile::SafePrime).unwrap()
    }

    #[test]
    fn capacities() {
        assert_eq!(payload_capacity(&small_safe()), 1);
        assert_eq!(payload_capacity(&GroupParams::modp768()), 94);
        assert_eq!(payload_capacity(&GroupParams::modp2048()), 254);
        let tiny = GroupParams::new(BigUint::from(23u32), GroupProfile::SafePrime).unwrap();
        assert_eq!(payload_capacity(&tiny), 0);
    }

    #[test]
    fn every_one_octet_payload_round_trips() {
        let params = small_safe();
        for b in 0..=255u8 {
            let e = encode_payload(&[b], &params).unwrap();
            assert!(params.is_quadratic_residue(&e));
            assert_eq!(decode_payload(&e, &params).unwrap(), vec![b]);
        }
        let e = encode_payload(&[], &params).unwrap();
        assert_eq!(decode_payload(&e, &params).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn random_payloads_round_trip_at_each_size() {
        let mut rng = ChaCha20Rng::seed_from_u64(21);
        let sized = [
            GroupParams::new(
                BigUint::from(14_799_178_233_674_913_383u64),
                GroupProfile::SafePrime,
            )
            .unwrap(),
            GroupParams::modp768(),
            GroupParams::modp1024(),
            GroupParams::modp2048(),
        ];
        for params in &sized {
            let cap = payload_capacity(params);
            for _ in 0..1000 {
                let len = rng.gen_range(0..=cap);
                let data: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
                let e = encode_payload(&data, params).unwrap();
                assert!(params.is_quadratic_residue(&e));
                assert_eq!(decode_payload(&e, params).unwrap(), data);
            }
        }
    }

    #[test]
    fn empty_payload_is_not_degenerate() {
        for params in [small_safe(), GroupParams::modp2048()] {
            let e = encode_payload(&[], &params).unwrap();
            assert!(e > BigUint::one() && e < params.q() - 1u32);
        }
    }

    #[test]
    fn plain_profile_round_trips() {
        let params =
            GroupParams::new(BigUint::from(10_643_267u32), GroupProfile::PlainPrime).unwrap();
        let e = encode_payload(&[0x7f], &params).unwrap();
        assert_eq!(e, BigUint::from(0x01_7f_01u32));
        assert_eq!(decode_payload(&e, &params).unwrap(), vec![0x7f]);
    }

    #[test]
    fn oversize_rejected() {
        let params = small_safe();
        assert_eq!(
            encode_payload(&[1, 2], &params),
            Err(CryptoError::PayloadTooLarge {
                len: 2,
                capacity: 1
            })
        );
        let big = GroupParams::modp768();
        assert!(matches!(
            encode_payload(&[0u8; 96], &big),
            Err(CryptoError::PayloadTooLarge { .. })
        ));
    }

    #[test]
    fn random_elements_rarely_decode() {
        let params = small_safe();
        let q = 10_643_267u32;
        let mut rng = ChaCha20Rng::seed_from_u64(22);
        let mut decoded = 0;
        for _ in 0..20_000 {
            let y = BigUint::from(rng.gen_range(2..q - 1));
            if decode_payload(&y, &params).is_ok() {
                decoded += 1;
            }
        }
        // 257 valid encodings among ~10.6 million elements
        assert!(decoded <= 5, "{decoded}");
    }

    #[test]
    fn non_residues_fail() {
        let params = small_safe();
        let q = BigUint::from(10_643_267u32);
        let e = encode_payload(&[9], &params).unwrap();
        assert!(decode_payload(&(&q - &e), &params).is_err());
    }
}
