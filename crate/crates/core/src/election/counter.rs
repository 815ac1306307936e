use std::collections::HashMap;

use rand_chacha::ChaCha20Rng;

use super::board::{BoardStatus, BulletinBoard};
use super::types::{BallotPackage, CounterCredential, IdToken, PublicParams, VERIF_LEN};
use super::wire::{inner_message, HopMessage};
use super::ElectionError;
use crate::crypto::{
    decode_payload, layer_unwrap, layer_wrap, mac_verify, sym_decrypt, sym_encrypt, NonceLedger,
};
use crate::enk::EnkSession;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InvalidReason {
    /// `Y` has the wrong length for the layout.
    Malformed,
    /// `tag_vc` does not verify.
    MacMismatch,
    DuplicateVerificationString,
    BallotNotInSet,
    BoardClosed,
}

impl InvalidReason {
    /// Whether a round ending this way is published as failed (and so gets a
    /// revote). Rejections caused by the ballot's content are final.
    pub fn is_transport_failure(self) -> bool {
        matches!(self, InvalidReason::Malformed | InvalidReason::MacMismatch)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validation {
    Valid {
        entry: usize,
        ballot: Vec<u8>,
        verif: [u8; VERIF_LEN],
    },
    Invalid(InvalidReason),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RoundOutcome {
    Pending,
    Blinded,
    Validated(Validation),
    Failed(String),
}

impl RoundOutcome {
    fn is_resolved(&self) -> bool {
        matches!(self, RoundOutcome::Validated(_) | RoundOutcome::Failed(_))
    }

    fn is_failed(&self) -> bool {
        match self {
            RoundOutcome::Failed(_) => true,
            RoundOutcome::Validated(Validation::Invalid(r)) => r.is_transport_failure(),
            _ => false,
        }
    }
}

/// Result of closing a round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Published {
    pub tally: Vec<(String, usize)>,
    pub failed_ids: Vec<IdToken>,
}

#[derive(Debug, Clone)]
pub struct Counter {
    cred: CounterCredential,
    public: PublicParams,
    rng: ChaCha20Rng,
    ledger: NonceLedger,
    board: BulletinBoard,
    expected: Vec<IdToken>,
    rounds: HashMap<IdToken, (RoundOutcome, Option<EnkSession>)>,
}

impl Counter {
    pub fn new(cred: CounterCredential, public: PublicParams, rng: ChaCha20Rng) -> Self {
        Counter {
            cred,
            public,
            rng,
            ledger: NonceLedger::new(),
            board: BulletinBoard::new(),
            expected: Vec::new(),
            rounds: HashMap::new(),
        }
    }

    pub fn credential(&self) -> &CounterCredential {
        &self.cred
    }

    pub fn board(&self) -> &BulletinBoard {
        &self.board
    }

    /// Direct access to the board, for a dishonest counter.
    pub fn board_mut(&mut self) -> &mut BulletinBoard {
        &mut self.board
    }

    pub fn outcome(&self, replaced: &IdToken) -> Option<&RoundOutcome> {
        self.rounds.get(replaced).map(|(o, _)| o)
    }

    /// Registers the replaced IDs the administrator will deliver this round.
    pub fn on_announce(&mut self, replaced: &[IdToken]) -> Result<(), ElectionError> {
        if self.board.status() != BoardStatus::Open {
            return Err(ElectionError::State("board is closed".into()));
        }
        for id in replaced {
            if !self.rounds.contains_key(id) {
                self.expected.push(*id);
                self.rounds.insert(*id, (RoundOutcome::Pending, None));
            }
        }
        Ok(())
    }

    fn open_round(&self, id: &IdToken, want: &RoundOutcome) -> Result<(), ElectionError> {
        match self.rounds.get(id) {
            Some((o, _)) if o == want => Ok(()),
            Some((o, _)) => Err(ElectionError::Hop(format!("round is {o:?}"))),
            None => Err(ElectionError::Hop("replaced ID was not announced".into())),
        }
    }

    fn fail(&mut self, id: &IdToken, err: ElectionError) -> ElectionError {
        if let Some(entry) = self.rounds.get_mut(id) {
            *entry = (RoundOutcome::Failed(err.to_string()), None);
        }
        err
    }

    /// First hop: unwrap `P_ac` and `P_vc`, apply `b`, rewrap.
    pub fn on_hop1(&mut self, hop: &HopMessage) -> Result<HopMessage, ElectionError> {
        let id = IdToken::from_slice(&sym_decrypt(&self.cred.k_ac, &hop.sealed_id)?)?;
        self.open_round(&id, &RoundOutcome::Pending)?;
        match self.blind(&id, hop) {
            Ok(out) => Ok(out),
            Err(e) => Err(self.fail(&id, e)),
        }
    }

    fn blind(&mut self, id: &IdToken, hop: &HopMessage) -> Result<HopMessage, ElectionError> {
        let group = self.public.group.clone();
        let inner = layer_unwrap(&self.cred.p_ac, &hop.layered)?;
        let first = inner_message(hop.seq, &inner, &group)?;
        let mut session = EnkSession::responder(group, self.cred.p_vc.clone(), &mut self.rng)?;
        let second = session.blind(&first, &mut self.rng)?;
        let layered = layer_wrap(&self.cred.p_ac, &second.ct.to_bytes(), &mut self.rng)?;
        let sealed_id = sym_encrypt(&self.cred.k_ac, &id.0, &self.ledger, &mut self.rng)?;
        self.rounds
            .insert(*id, (RoundOutcome::Blinded, Some(session)));
        Ok(HopMessage {
            sealed_id,
            seq: second.seq,
            layered,
        })
    }

    /// Final hop: remove `b`, decode `Y`, validate.
    pub fn on_hop5(&mut self, hop: &HopMessage) -> Result<Validation, ElectionError> {
        let id = IdToken::from_slice(&sym_decrypt(&self.cred.k_ac, &hop.sealed_id)?)?;
        self.open_round(&id, &RoundOutcome::Blinded)?;
        let y = match self.unblind(&id, hop) {
            Ok(y) => y,
            Err(e) => return Err(self.fail(&id, e)),
        };
        let v = self.validate(&y);
        self.rounds
            .insert(id, (RoundOutcome::Validated(v.clone()), None));
        Ok(v)
    }

    fn unblind(&mut self, id: &IdToken, hop: &HopMessage) -> Result<Vec<u8>, ElectionError> {
        let group = self.public.group.clone();
        let mut session = self
            .rounds
            .get_mut(id)
            .and_then(|(_, s)| s.take())
            .ok_or_else(|| ElectionError::State("no session for round".into()))?;
        let inner = layer_unwrap(&self.cred.p_ac, &hop.layered)?;
        let third = inner_message(hop.seq, &inner, &group)?;
        let element = session.finish(&third)?;
        Ok(decode_payload(&element, &group)?)
    }

    /// Checks a decoded `Y` and, if valid, appends a board row. Order:
    /// `tag_vc`, fresh `S`, `B` in the candidate set.
    pub fn validate(&mut self, y: &[u8]) -> Validation {
        use InvalidReason::*;
        if self.board.status() != BoardStatus::Open {
            return Validation::Invalid(BoardClosed);
        }
        let package = match BallotPackage::from_y_bytes(y, self.public.candidates.code_len()) {
            Ok(p) => p,
            Err(_) => return Validation::Invalid(Malformed),
        };
        if !mac_verify(&self.cred.k_vc, &package.x_bytes(), &package.tag_vc) {
            return Validation::Invalid(MacMismatch);
        }
        if self.board.contains_verif(&package.verif) {
            return Validation::Invalid(DuplicateVerificationString);
        }
        if self.public.candidates.position(&package.ballot).is_none() {
            return Validation::Invalid(BallotNotInSet);
        }
        let entry = self
            .board
            .append(package.ballot.clone(), package.verif, package.tag_va)
            .expect("board open and S fresh");
        Validation::Valid {
            entry,
            ballot: package.ballot,
            verif: package.verif,
        }
    }

    /// Marks every announced round that has not resolved as failed.
    pub fn expire_unresolved(&mut self) -> usize {
        let mut n = 0;
        for (o, s) in self.rounds.values_mut() {
            if !o.is_resolved() {
                *o = RoundOutcome::Failed("timed out".into());
                *s = None;
                n += 1;
            }
        }
        n
    }

    pub fn outstanding(&self) -> usize {
        self.rounds
            .values()
            .filter(|(o, _)| !o.is_resolved())
            .count()
    }

    /// Closes the board and publishes the tally and failed replaced IDs.
    pub fn publish(&mut self) -> Result<Published, ElectionError> {
        if self.board.status() != BoardStatus::Open {
            return Err(ElectionError::State("board already closed".into()));
        }
        if self.outstanding() > 0 {
            return Err(ElectionError::State(format!(
                "{} rounds outstanding",
                self.outstanding()
            )));
        }
        let failed_ids: Vec<IdToken> = self
            .expected
            .iter()
            .filter(|id| self.rounds[*id].0.is_failed())
            .copied()
            .collect();
        self.board.close(failed_ids.clone());
        Ok(Published {
            tally: self.board.tally(&self.public.candidates)?,
            failed_ids,
        })
    }

    pub fn tally(&self) -> Result<Vec<(String, usize)>, ElectionError> {
        self.board.tally(&self.public.candidates)
    }

    pub fn export(&self) -> Result<String, ElectionError> {
        self.board.export(&self.public.candidates)
    }

    /// Reopens the board for a revote round.
    pub fn begin_round(&mut self) -> Result<(), ElectionError> {
        self.board.reopen()?;
        self.expected.clear();
        self.rounds.clear();
        Ok(())
    }
}
