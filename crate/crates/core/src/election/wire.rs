use super::ElectionError;
use crate::crypto::{GroupCiphertext, NONCE_LEN};
use crate::enk::EnkMessage;
use crate::numtheory::GroupParams;

/// One relayed message: an `E*`-sealed ID next to a double-encrypted ENK pass.
///
/// Wire form: `u16 len(sealed_id) || sealed_id || seq || layered`, where
/// `layered` is the outer password layer over the inner `GroupCiphertext`
/// (itself wrapped under the voter-counter password).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopMessage {
    pub sealed_id: Vec<u8>,
    pub seq: u8,
    pub layered: Vec<u8>,
}

impl HopMessage {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(3 + self.sealed_id.len() + self.layered.len());
        out.extend_from_slice(&(self.sealed_id.len() as u16).to_be_bytes());
        out.extend_from_slice(&self.sealed_id);
        out.push(self.seq);
        out.extend_from_slice(&self.layered);
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &GroupParams) -> Result<Self, ElectionError> {
        if bytes.len() < 2 {
            return Err(ElectionError::Format("hop message truncated".into()));
        }
        let id_len = u16::from_be_bytes([bytes[0], bytes[1]]) as usize;
        let rest = &bytes[2..];
        if rest.len() < id_len + 1 {
            return Err(ElectionError::Format("hop message truncated".into()));
        }
        let (sealed_id, rest) = rest.split_at(id_len);
        let (&seq, layered) = rest.split_first().expect("length checked");
        if layered.len() != Self::layered_len(params) {
            return Err(ElectionError::Format(format!(
                "layered ciphertext is {} octets, expected {}",
                layered.len(),
                Self::layered_len(params)
            )));
        }
        Ok(HopMessage {
            sealed_id: sealed_id.to_vec(),
            seq,
            layered: layered.to_vec(),
        })
    }

    pub fn layered_len(params: &GroupParams) -> usize {
        NONCE_LEN + GroupCiphertext::wire_len(params)
    }
}

/// Rebuilds the inner ENK message from a seq octet and unlayered octets.
pub(crate) fn inner_message(
    seq: u8,
    inner: &[u8],
    params: &GroupParams,
) -> Result<EnkMessage, ElectionError> {
    Ok(EnkMessage {
        seq,
        ct: GroupCiphertext::from_bytes(inner, params)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numtheory::GroupProfile;
    use num_bigint::BigUint;

    #[test]
    fn round_trip_and_truncation() {
        let params = GroupParams::new(BigUint::from(23u8), GroupProfile::SafePrime).unwrap();
        let msg = HopMessage {
            sealed_id: vec![1; 44],
            seq: 2,
            layered: vec![9; HopMessage::layered_len(&params)],
        };
        let bytes = msg.to_bytes();
        assert_eq!(HopMessage::from_bytes(&bytes, &params).unwrap(), msg);
        for cut in 0..bytes.len() {
            assert!(HopMessage::from_bytes(&bytes[..cut], &params).is_err());
        }
        let mut long = bytes.clone();
        long.push(0);
        assert!(HopMessage::from_bytes(&long, &params).is_err());
    }
}
