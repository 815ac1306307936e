use std::collections::HashSet;
use std::fmt;

use rand::RngCore;

use super::ElectionError;
use crate::crypto::{MacTag, Password, SymmetricKey};
use crate::numtheory::GroupParams;

/// Opaque 16-octet identity token, both for roster IDs and replaced IDs.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IdToken(pub [u8; 16]);

impl IdToken {
    pub const LEN: usize = 16;

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut b = [0u8; 16];
        rng.fill_bytes(&mut b);
        IdToken(b)
    }

    /// Draws until the token is outside `taken`.
    pub fn random_fresh<R: RngCore + ?Sized>(rng: &mut R, taken: &HashSet<IdToken>) -> Self {
        loop {
            let t = Self::random(rng);
            if !taken.contains(&t) {
                return t;
            }
        }
    }

    pub fn from_slice(bytes: &[u8]) -> Result<Self, ElectionError> {
        let b: [u8; 16] = bytes
            .try_into()
            .map_err(|_| ElectionError::Format(format!("ID token of {} octets", bytes.len())))?;
        Ok(IdToken(b))
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(text: &str) -> Result<Self, ElectionError> {
        let raw = hex::decode(text.trim()).map_err(|e| ElectionError::Format(e.to_string()))?;
        Self::from_slice(&raw)
    }
}

impl fmt::Debug for IdToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Id({})", &self.to_hex()[..8])
    }
}

/// The announced candidate list `ℓ`: distinct `s`-bit codes with labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateSet {
    bits: u32,
    codes: Vec<Vec<u8>>,
    labels: Vec<String>,
}

impl CandidateSet {
    pub const DEFAULT_BITS: u32 = 64;

    pub fn new(bits: u32, codes: Vec<Vec<u8>>, labels: Vec<String>) -> Result<Self, ElectionError> {
        if bits == 0 || !bits.is_multiple_of(8) {
            return Err(ElectionError::Config(format!(
                "candidate width {bits} is not whole octets"
            )));
        }
        let m = labels.len();
        if m < 2 {
            return Err(ElectionError::Config(
                "at least two candidates are required".into(),
            ));
        }
        if codes.len() != m {
            return Err(ElectionError::Config("one code per candidate label".into()));
        }
        // a random s-bit string hits one of m codes with probability m / 2^s
        let log2_m = usize::BITS - (m - 1).leading_zeros();
        if bits <= 40 + log2_m {
            return Err(ElectionError::Config(format!(
                "{bits}-bit codes are too short for {m} candidates"
            )));
        }
        let mut seen_labels = HashSet::new();
        for label in &labels {
            if label.is_empty()
                || label
                    .chars()
                    .any(|c| c.is_whitespace() || c == '=' || c == ',')
            {
                return Err(ElectionError::Config(format!(
                    "unusable candidate label {label:?}"
                )));
            }
            if !seen_labels.insert(label) {
                return Err(ElectionError::Config(format!(
                    "duplicate candidate label {label:?}"
                )));
            }
        }
        let mut seen_codes = HashSet::new();
        for code in &codes {
            if code.len() != (bits / 8) as usize {
                return Err(ElectionError::Config(
                    "candidate code has the wrong width".into(),
                ));
            }
            if !seen_codes.insert(code) {
                return Err(ElectionError::Config("duplicate candidate code".into()));
            }
        }
        Ok(CandidateSet {
            bits,
            codes,
            labels,
        })
    }

    /// Random distinct codes for `labels`.
    pub fn random<R: RngCore + ?Sized>(
        labels: &[String],
        bits: u32,
        rng: &mut R,
    ) -> Result<Self, ElectionError> {
        let width = (bits / 8) as usize;
        let mut codes: Vec<Vec<u8>> = Vec::with_capacity(labels.len());
        while codes.len() < labels.len() {
            let mut code = vec![0u8; width];
            rng.fill_bytes(&mut code);
            if !codes.contains(&code) {
                codes.push(code);
            }
        }
        Self::new(bits, codes, labels.to_vec())
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn code_len(&self) -> usize {
        (self.bits / 8) as usize
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn codes(&self) -> &[Vec<u8>] {
        &self.codes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Code for a 1-based choice.
    pub fn code(&self, choice: usize) -> Result<&[u8], ElectionError> {
        if choice == 0 || choice > self.len() {
            return Err(ElectionError::ChoiceOutOfRange {
                choice,
                candidates: self.len(),
            });
        }
        Ok(&self.codes[choice - 1])
    }

    /// 0-based position of `code`, if it is a candidate.
    pub fn position(&self, code: &[u8]) -> Option<usize> {
        self.codes.iter().position(|c| c == code)
    }
}

/// Everything every party may know.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PublicParams {
    pub group: GroupParams,
    pub candidates: CandidateSet,
    pub voters: usize,
    pub password_bits: u32,
}

impl PublicParams {
    /// Octet length of `Y = B || S || tag_va || tag_vc`.
    pub fn y_len(&self) -> usize {
        BallotPackage::y_len(self.candidates.code_len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoterCredential {
    pub index: usize,
    pub id: IdToken,
    pub p_av: Password,
    pub p_vc: Password,
    pub k_va: SymmetricKey,
    pub k_vc: SymmetricKey,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RosterEntry {
    pub index: usize,
    pub id: IdToken,
    pub p_av: Password,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdminCredential {
    pub k_va: SymmetricKey,
    pub k_ac: SymmetricKey,
    pub p_ac: Password,
    pub roster: Vec<RosterEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterCredential {
    pub k_ac: SymmetricKey,
    pub k_vc: SymmetricKey,
    pub p_ac: Password,
    pub p_vc: Password,
}

pub const VERIF_LEN: usize = 16;

/// A voter's ballot `B`, verification string `S` and the two MACs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BallotPackage {
    pub ballot: Vec<u8>,
    pub verif: [u8; VERIF_LEN],
    pub tag_va: MacTag,
    pub tag_vc: MacTag,
}

impl BallotPackage {
    pub fn y_len(code_len: usize) -> usize {
        code_len + VERIF_LEN + 2 * MacTag::WIRE_LEN
    }

    pub fn ballot_and_verif(ballot: &[u8], verif: &[u8; VERIF_LEN]) -> Vec<u8> {
        let mut out = ballot.to_vec();
        out.extend_from_slice(verif);
        out
    }

    /// `X = B || S || tag_va`.
    pub fn x_bytes(&self) -> Vec<u8> {
        let mut out = Self::ballot_and_verif(&self.ballot, &self.verif);
        out.extend_from_slice(&self.tag_va.to_bytes());
        out
    }

    /// `Y = X || tag_vc`.
    pub fn y_bytes(&self) -> Vec<u8> {
        let mut out = self.x_bytes();
        out.extend_from_slice(&self.tag_vc.to_bytes());
        out
    }

    pub fn from_y_bytes(y: &[u8], code_len: usize) -> Result<Self, ElectionError> {
        if y.len() != Self::y_len(code_len) {
            return Err(ElectionError::Format(format!(
                "Y is {} octets, expected {}",
                y.len(),
                Self::y_len(code_len)
            )));
        }
        let (ballot, rest) = y.split_at(code_len);
        let (verif, rest) = rest.split_at(VERIF_LEN);
        let (tag_va, tag_vc) = rest.split_at(MacTag::WIRE_LEN);
        Ok(BallotPackage {
            ballot: ballot.to_vec(),
            verif: verif.try_into().expect("split at VERIF_LEN"),
            tag_va: MacTag::from_bytes(tag_va)?,
            tag_vc: MacTag::from_bytes(tag_vc)?,
        })
    }
}
