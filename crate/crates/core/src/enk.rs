//! Encrypted no-key transport: Shamir's three-pass exchange with each pass
//! wrapped under a shared password.
//!
//! ```text
//! initiator                                   responder
//!   start(M)    --- 1: E_P(M^a) --->
//!                                  <--- 2: E_P(M^ab) ---   blind
//!   unblind     --- 3: E_P(M^b) --->
//!                                                          finish -> M
//! ```
//!
//! Each session carries one payload and one fresh exponent. The sequence
//! octet of every incoming message is checked before any arithmetic, and any
//! failure moves the session to [`Phase::Aborted`] for good.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::RngCore;
use thiserror::Error;

use crate::crypto::{ep_unwrap, wrap_residue, CryptoError, GroupCiphertext, Password};
use crate::numtheory::{mod_exp, BlindingExponent, GroupParams, NumError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnkError {
    #[error("state error: {0}")]
    State(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("malformed message: {0}")]
    Format(String),
    #[error("entropy source failed: {0}")]
    Entropy(String),
}

impl From<CryptoError> for EnkError {
    fn from(e: CryptoError) -> Self {
        match e {
            CryptoError::Format(m) => EnkError::Format(m),
            CryptoError::Entropy(m) => EnkError::Entropy(m),
            other => EnkError::Domain(other.to_string()),
        }
    }
}

impl From<NumError> for EnkError {
    fn from(e: NumError) -> Self {
        match e {
            NumError::Entropy(m) => EnkError::Entropy(m),
            other => EnkError::Domain(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Initiator,
    Responder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Created,
    SentFirst,
    SentSecond,
    SentThird,
    Complete,
    Aborted,
}

/// One pass on the wire: `seq || GroupCiphertext`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnkMessage {
    pub seq: u8,
    pub ct: GroupCiphertext,
}

impl EnkMessage {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![self.seq];
        out.extend_from_slice(&self.ct.to_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8], params: &GroupParams) -> Result<Self, EnkError> {
        let (&seq, rest) = bytes
            .split_first()
            .ok_or_else(|| EnkError::Format("empty message".into()))?;
        Ok(EnkMessage {
            seq,
            ct: GroupCiphertext::from_bytes(rest, params)?,
        })
    }

    pub fn wire_len(params: &GroupParams) -> usize {
        1 + GroupCiphertext::wire_len(params)
    }
}

#[derive(Debug, Clone)]
pub struct EnkSession {
    role: Role,
    params: GroupParams,
    password: Password,
    exponent: BlindingExponent,
    phase: Phase,
    payload: Option<BigUint>,
    anomalies: u32,
    require_qr: bool,
}

impl EnkSession {
    pub fn initiator<R: RngCore + ?Sized>(
        params: GroupParams,
        password: Password,
        rng: &mut R,
    ) -> Result<Self, EnkError> {
        let exponent = BlindingExponent::sample(&params, rng)?;
        Ok(Self::with_exponent(
            Role::Initiator,
            params,
            password,
            exponent,
        ))
    }

    pub fn responder<R: RngCore + ?Sized>(
        params: GroupParams,
        password: Password,
        rng: &mut R,
    ) -> Result<Self, EnkError> {
        let exponent = BlindingExponent::sample(&params, rng)?;
        Ok(Self::with_exponent(
            Role::Responder,
            params,
            password,
            exponent,
        ))
    }

    /// A session with a caller-chosen exponent, for scripted traces.
    pub fn with_exponent(
        role: Role,
        params: GroupParams,
        password: Password,
        exponent: BlindingExponent,
    ) -> Self {
        EnkSession {
            role,
            params,
            password,
            exponent,
            phase: Phase::Created,
            payload: None,
            anomalies: 0,
            require_qr: false,
        }
    }

    /// Makes [`start`](Self::start) reject payloads outside the quadratic
    /// residues.
    pub fn require_quadratic_residue(mut self) -> Self {
        self.require_qr = true;
        self
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn params(&self) -> &GroupParams {
        &self.params
    }

    /// Count of received values that were 1 or q-1. Such values are
    /// algebraically valid but never occur in an honest run.
    pub fn anomalies(&self) -> u32 {
        self.anomalies
    }

    /// The payload: what the initiator sent, or what the responder recovered.
    pub fn payload(&self) -> Option<&BigUint> {
        self.payload.as_ref()
    }

    pub fn start<R: RngCore + ?Sized>(
        &mut self,
        message: &BigUint,
        rng: &mut R,
    ) -> Result<EnkMessage, EnkError> {
        self.guard(Role::Initiator, Phase::Created, None)?;
        let q = self.params.q();
        if message <= &BigUint::one() || message >= &(q - 1u8) {
            return self.abort(EnkError::Domain("payload must lie in [2, q-2]".into()));
        }
        if self.require_qr && !self.params.is_quadratic_residue(message) {
            return self.abort(EnkError::Domain(
                "payload is not a quadratic residue".into(),
            ));
        }
        let sent = mod_exp(message, self.exponent.exponent(), &self.params)?;
        let out = self.emit(1, &sent, rng)?;
        self.payload = Some(message.clone());
        self.phase = Phase::SentFirst;
        Ok(out)
    }

    pub fn blind<R: RngCore + ?Sized>(
        &mut self,
        msg1: &EnkMessage,
        rng: &mut R,
    ) -> Result<EnkMessage, EnkError> {
        self.guard(Role::Responder, Phase::Created, Some(msg1.seq))?;
        let value = self.receive(msg1)?;
        let sent = mod_exp(&value, self.exponent.exponent(), &self.params)?;
        let out = self.emit(2, &sent, rng)?;
        self.phase = Phase::SentSecond;
        Ok(out)
    }

    pub fn unblind<R: RngCore + ?Sized>(
        &mut self,
        msg2: &EnkMessage,
        rng: &mut R,
    ) -> Result<EnkMessage, EnkError> {
        self.guard(Role::Initiator, Phase::SentFirst, Some(msg2.seq))?;
        let value = self.receive(msg2)?;
        let sent = mod_exp(&value, self.exponent.inverse(), &self.params)?;
        let out = self.emit(3, &sent, rng)?;
        self.phase = Phase::SentThird;
        Ok(out)
    }

    pub fn finish(&mut self, msg3: &EnkMessage) -> Result<BigUint, EnkError> {
        self.guard(Role::Responder, Phase::SentSecond, Some(msg3.seq))?;
        let value = self.receive(msg3)?;
        let recovered = mod_exp(&value, self.exponent.inverse(), &self.params)?;
        self.payload = Some(recovered.clone());
        self.phase = Phase::Complete;
        Ok(recovered)
    }

    fn expected_seq(phase: Phase, role: Role) -> u8 {
        match (role, phase) {
            (Role::Responder, Phase::Created) => 1,
            (Role::Initiator, Phase::SentFirst) => 2,
            (Role::Responder, Phase::SentSecond) => 3,
            _ => 0,
        }
    }

    fn guard(&mut self, role: Role, phase: Phase, seq: Option<u8>) -> Result<(), EnkError> {
        if self.role != role || self.phase != phase {
            let msg = format!("{:?} in phase {:?} cannot do this", self.role, self.phase);
            return self.abort(EnkError::State(msg));
        }
        if let Some(seq) = seq {
            let want = Self::expected_seq(phase, role);
            if seq != want {
                return self.abort(EnkError::State(format!("expected seq {want}, got {seq}")));
            }
        }
        Ok(())
    }

    fn receive(&mut self, msg: &EnkMessage) -> Result<BigUint, EnkError> {
        let value = match ep_unwrap(&self.password, &msg.ct, &self.params) {
            Ok(v) => v,
            Err(e) => return self.abort(e.into()),
        };
        if value.is_zero() {
            return self.abort(EnkError::Domain("received zero".into()));
        }
        if value.is_one() || value == self.params.q() - 1u8 {
            self.anomalies += 1;
        }
        Ok(value)
    }

    fn emit<R: RngCore + ?Sized>(
        &mut self,
        seq: u8,
        value: &BigUint,
        rng: &mut R,
    ) -> Result<EnkMessage, EnkError> {
        match wrap_residue(&self.password, value, &self.params, rng) {
            Ok(ct) => Ok(EnkMessage { seq, ct }),
            Err(e) => self.abort(e.into()),
        }
    }

    fn abort<T>(&mut self, err: EnkError) -> Result<T, EnkError> {
        self.phase = Phase::Aborted;
        Err(err)
    }
}
