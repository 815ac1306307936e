use std::io::{Read, Write};

use super::HarnessError;

/// Frame type octet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MsgType {
    Submit = 0x01,
    RelayAc = 0x02,
    RelayCa = 0x03,
    RelayAv = 0x04,
    RelayVa = 0x05,
    RelayAcFinal = 0x06,
    Announce = 0x10,
    BoardExport = 0x11,
}

impl MsgType {
    pub fn from_octet(b: u8) -> Option<Self> {
        use MsgType::*;
        Some(match b {
            0x01 => Submit,
            0x02 => RelayAc,
            0x03 => RelayCa,
            0x04 => RelayAv,
            0x05 => RelayVa,
            0x06 => RelayAcFinal,
            0x10 => Announce,
            0x11 => BoardExport,
            _ => return None,
        })
    }
}

/// Largest body accepted from the network.
pub const MAX_BODY: usize = 1 << 24;

pub const HEADER_LEN: usize = 5;

/// `type(1) || length(4, big-endian) || body`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Envelope {
    pub msg_type: MsgType,
    pub body: Vec<u8>,
}

impl Envelope {
    pub fn new(msg_type: MsgType, body: Vec<u8>) -> Self {
        Envelope { msg_type, body }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.body.len());
        out.push(self.msg_type as u8);
        out.extend_from_slice(&(self.body.len() as u32).to_be_bytes());
        out.extend_from_slice(&self.body);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, HarnessError> {
        if bytes.len() < HEADER_LEN {
            return Err(HarnessError::Protocol(
                "frame shorter than its header".into(),
            ));
        }
        let msg_type = MsgType::from_octet(bytes[0]).ok_or_else(|| {
            HarnessError::Protocol(format!("unknown message type {:#04x}", bytes[0]))
        })?;
        let len = u32::from_be_bytes(bytes[1..5].try_into().expect("4 octets")) as usize;
        if bytes.len() - HEADER_LEN != len {
            return Err(HarnessError::Protocol(format!(
                "length field says {len}, body has {}",
                bytes.len() - HEADER_LEN
            )));
        }
        Ok(Envelope {
            msg_type,
            body: bytes[HEADER_LEN..].to_vec(),
        })
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self, HarnessError> {
        let mut header = [0u8; HEADER_LEN];
        r.read_exact(&mut header)?;
        let msg_type = MsgType::from_octet(header[0]).ok_or_else(|| {
            HarnessError::Protocol(format!("unknown message type {:#04x}", header[0]))
        })?;
        let len = u32::from_be_bytes(header[1..].try_into().expect("4 octets")) as usize;
        if len > MAX_BODY {
            return Err(HarnessError::Protocol(format!(
                "{len}-octet body is too large"
            )));
        }
        let mut body = vec![0u8; len];
        r.read_exact(&mut body)?;
        Ok(Envelope { msg_type, body })
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<(), HarnessError> {
        w.write_all(&self.to_bytes())?;
        w.flush()?;
        Ok(())
    }

    /// Reads one frame and checks its type.
    pub fn expect<R: Read>(r: &mut R, want: MsgType) -> Result<Self, HarnessError> {
        let env = Self::read_from(r)?;
        if env.msg_type != want {
            return Err(HarnessError::Protocol(format!(
                "expected {want:?}, got {:?}",
                env.msg_type
            )));
        }
        Ok(env)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout() {
        let e = Envelope::new(MsgType::Announce, vec![0xaa, 0xbb]);
        assert_eq!(e.to_bytes(), vec![0x10, 0, 0, 0, 2, 0xaa, 0xbb]);
    }

    #[test]
    fn rejects_unknown_types_and_bad_lengths() {
        assert!(Envelope::from_bytes(&[0x07, 0, 0, 0, 0]).is_err());
        assert!(Envelope::from_bytes(&[0x01, 0, 0, 0, 2, 9]).is_err());
        assert!(Envelope::from_bytes(&[0x01, 0, 0]).is_err());
        let mut huge: &[u8] = &[0x01, 0xff, 0xff, 0xff, 0xff];
        assert!(matches!(
            Envelope::read_from(&mut huge),
            Err(HarnessError::Protocol(_))
        ));
        let mut cursor: &[u8] = &[0x02, 0, 0, 0, 0];
        assert!(Envelope::expect(&mut cursor, MsgType::Submit).is_err());
    }

    proptest! {
        #[test]
        fn round_trips(t in prop::sample::select(vec![0x01u8, 0x02, 0x03, 0x04, 0x05, 0x06, 0x10, 0x11]),
                       body in prop::collection::vec(any::<u8>(), 0..300)) {
            let e = Envelope::new(MsgType::from_octet(t).unwrap(), body);
            let bytes = e.to_bytes();
            prop_assert_eq!(Envelope::from_bytes(&bytes).unwrap(), e.clone());
            let mut r = &bytes[..];
            prop_assert_eq!(Envelope::read_from(&mut r).unwrap(), e);
        }

        #[test]
        fn only_listed_types_parse(t in any::<u8>()) {
            let known = [0x01u8, 0x02, 0x03, 0x04, 0x05, 0x06, 0x10, 0x11].contains(&t);
            prop_assert_eq!(Envelope::from_bytes(&[t, 0, 0, 0, 0]).is_ok(), known);
        }
    }
}
