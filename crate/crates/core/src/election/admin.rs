use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand_chacha::ChaCha20Rng;

use super::board::BulletinBoard;
use super::types::{AdminCredential, BallotPackage, IdToken, PublicParams};
use super::voter::RevoteGrant;
use super::wire::HopMessage;
use super::ElectionError;
use crate::crypto::{
    layer_unwrap, layer_wrap, mac_verify, sym_decrypt, sym_encrypt, CryptoError, NonceLedger,
    Password,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuthEntry {
    pub entry: usize,
    pub id: IdToken,
    pub voter_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    /// The sealed ID failed authentication.
    Tampered,
    Duplicate,
    Ineligible,
    Malformed,
    /// Authentication for this round is already closed.
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AuthOutcome {
    Accepted { entry: usize },
    Rejected(RejectReason),
}

/// Published when authentication closes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Announcement {
    pub authenticated: Vec<IdToken>,
    /// Roster positions that were eligible this round and never authenticated.
    pub absent: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutionRow {
    /// 1-based delivery order.
    pub slot: usize,
    pub voter_index: usize,
    pub original: IdToken,
    pub replaced: IdToken,
}

/// The administrator's private bijection between authenticated IDs and
/// replaced tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubstitutionTable {
    rows: Vec<SubstitutionRow>,
}

impl SubstitutionTable {
    pub fn rows(&self) -> &[SubstitutionRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn by_replaced(&self, id: &IdToken) -> Option<&SubstitutionRow> {
        self.rows.iter().find(|r| &r.replaced == id)
    }

    pub fn by_voter(&self, voter_index: usize) -> Option<&SubstitutionRow> {
        self.rows.iter().find(|r| r.voter_index == voter_index)
    }

    /// Replaced tokens in delivery order.
    pub fn replaced_ids(&self) -> Vec<IdToken> {
        self.rows.iter().map(|r| r.replaced).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Authenticating,
    Closed,
    Substituted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RelayStep {
    AwaitSecond,
    AwaitFourth,
    Delivered,
}

#[derive(Debug, Clone)]
pub struct Administrator {
    cred: AdminCredential,
    public: PublicParams,
    wrap_rng: ChaCha20Rng,
    table_rng: ChaCha20Rng,
    ledger: NonceLedger,
    phase: Phase,
    round: u32,
    ids: HashMap<IdToken, usize>,
    passwords: HashMap<usize, Password>,
    eligible: HashSet<usize>,
    used_tokens: HashSet<IdToken>,
    auth: Vec<AuthEntry>,
    pending: HashMap<usize, (u8, Vec<u8>)>,
    substitution: Option<SubstitutionTable>,
    relay: HashMap<IdToken, RelayStep>,
}

impl Administrator {
    /// `wrap_rng` feeds ciphertext randomness; `table_rng` feeds the
    /// substitution permutation, replaced tokens and revote grants.
    pub fn new(
        cred: AdminCredential,
        public: PublicParams,
        wrap_rng: ChaCha20Rng,
        table_rng: ChaCha20Rng,
    ) -> Self {
        let ids = cred.roster.iter().map(|r| (r.id, r.index)).collect();
        let passwords = cred
            .roster
            .iter()
            .map(|r| (r.index, r.p_av.clone()))
            .collect();
        let eligible = cred.roster.iter().map(|r| r.index).collect();
        let used_tokens = cred.roster.iter().map(|r| r.id).collect();
        Administrator {
            cred,
            public,
            wrap_rng,
            table_rng,
            ledger: NonceLedger::new(),
            phase: Phase::Authenticating,
            round: 1,
            ids,
            passwords,
            eligible,
            used_tokens,
            auth: Vec::new(),
            pending: HashMap::new(),
            substitution: None,
            relay: HashMap::new(),
        }
    }

    pub fn credential(&self) -> &AdminCredential {
        &self.cred
    }

    /// Replaces the stream behind substitutions and grants.
    pub fn set_table_rng(&mut self, rng: ChaCha20Rng) {
        self.table_rng = rng;
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn auth_table(&self) -> &[AuthEntry] {
        &self.auth
    }

    pub fn substitution(&self) -> Option<&SubstitutionTable> {
        self.substitution.as_ref()
    }

    /// Current pairwise password for a roster position.
    pub fn voter_password(&self, voter_index: usize) -> Option<&Password> {
        self.passwords.get(&voter_index)
    }

    /// Checks a submission in the order: sealed ID intact, not yet
    /// authenticated, on the roster. On acceptance the outer layer is removed
    /// and the inner ciphertext held for relay.
    pub fn authenticate(&mut self, submission: &HopMessage) -> AuthOutcome {
        use RejectReason::*;
        if self.phase != Phase::Authenticating {
            return AuthOutcome::Rejected(Closed);
        }
        let id = match sym_decrypt(&self.cred.k_va, &submission.sealed_id) {
            Ok(raw) => match IdToken::from_slice(&raw) {
                Ok(id) => id,
                Err(_) => return AuthOutcome::Rejected(Malformed),
            },
            Err(CryptoError::AuthFail) => return AuthOutcome::Rejected(Tampered),
            Err(_) => return AuthOutcome::Rejected(Malformed),
        };
        if self.auth.iter().any(|e| e.id == id) {
            return AuthOutcome::Rejected(Duplicate);
        }
        let voter_index = match self.ids.get(&id) {
            Some(&i) if self.eligible.contains(&i) => i,
            _ => return AuthOutcome::Rejected(Ineligible),
        };
        if submission.seq != 1 {
            return AuthOutcome::Rejected(Malformed);
        }
        let inner = match layer_unwrap(&self.passwords[&voter_index], &submission.layered) {
            Ok(inner) => inner,
            Err(_) => return AuthOutcome::Rejected(Malformed),
        };
        let entry = self.auth.len() + 1;
        self.auth.push(AuthEntry {
            entry,
            id,
            voter_index,
        });
        self.pending.insert(voter_index, (submission.seq, inner));
        AuthOutcome::Accepted { entry }
    }

    pub fn close_authentication(&mut self) -> Result<Announcement, ElectionError> {
        if self.phase != Phase::Authenticating {
            return Err(ElectionError::State("authentication already closed".into()));
        }
        self.phase = Phase::Closed;
        let done: HashSet<usize> = self.auth.iter().map(|e| e.voter_index).collect();
        let mut absent: Vec<usize> = self.eligible.difference(&done).copied().collect();
        absent.sort_unstable();
        Ok(Announcement {
            authenticated: self.auth.iter().map(|e| e.id).collect(),
            absent,
        })
    }

    /// Draws a uniform delivery order and fresh replaced tokens.
    pub fn substitute(&mut self) -> Result<&SubstitutionTable, ElectionError> {
        let mut order = self.authenticated_in_roster_order()?;
        order.shuffle(&mut self.table_rng);
        self.substitute_with(&order)
    }

    /// Substitution with a caller-chosen delivery order of roster positions.
    pub fn substitute_with(
        &mut self,
        order: &[usize],
    ) -> Result<&SubstitutionTable, ElectionError> {
        let mut expected = self.authenticated_in_roster_order()?;
        let mut given = order.to_vec();
        given.sort_unstable();
        expected.sort_unstable();
        if given != expected {
            return Err(ElectionError::State(
                "order is not a permutation of authenticated voters".into(),
            ));
        }
        let mut rows = Vec::with_capacity(order.len());
        for (k, &voter_index) in order.iter().enumerate() {
            let original = self
                .auth
                .iter()
                .find(|e| e.voter_index == voter_index)
                .expect("authenticated")
                .id;
            let replaced = IdToken::random_fresh(&mut self.table_rng, &self.used_tokens);
            self.used_tokens.insert(replaced);
            rows.push(SubstitutionRow {
                slot: k + 1,
                voter_index,
                original,
                replaced,
            });
        }
        self.phase = Phase::Substituted;
        self.relay = rows
            .iter()
            .map(|r| (r.replaced, RelayStep::AwaitSecond))
            .collect();
        Ok(self.substitution.insert(SubstitutionTable { rows }))
    }

    fn authenticated_in_roster_order(&self) -> Result<Vec<usize>, ElectionError> {
        if self.phase != Phase::Closed {
            return Err(ElectionError::State(
                "substitution needs closed authentication".into(),
            ));
        }
        let mut v: Vec<usize> = self.auth.iter().map(|e| e.voter_index).collect();
        v.sort_unstable();
        Ok(v)
    }

    fn table(&self) -> Result<&SubstitutionTable, ElectionError> {
        self.substitution
            .as_ref()
            .ok_or_else(|| ElectionError::State("no substitution table yet".into()))
    }

    /// Replaced IDs in delivery order, announced to the counter.
    pub fn replaced_ids(&self) -> Result<Vec<IdToken>, ElectionError> {
        Ok(self.table()?.replaced_ids())
    }

    /// First relay hop for delivery slot `slot` (1-based):
    /// `E*_{K_ac}[ID_j]` with the inner ciphertext rewrapped under `P_ac`.
    pub fn hop1(&mut self, slot: usize) -> Result<HopMessage, ElectionError> {
        let row = self
            .table()?
            .rows
            .get(slot.wrapping_sub(1))
            .cloned()
            .ok_or_else(|| ElectionError::State(format!("no delivery slot {slot}")))?;
        let (seq, inner) = self
            .pending
            .get(&row.voter_index)
            .cloned()
            .ok_or_else(|| ElectionError::State("no held ciphertext".into()))?;
        self.forward(
            &self.cred.p_ac.clone(),
            &self.cred.k_ac.clone(),
            &row.replaced,
            seq,
            &inner,
        )
    }

    /// Second hop back from the counter. Returns the roster position to
    /// deliver the third hop to, and that hop.
    pub fn on_hop2(&mut self, hop: &HopMessage) -> Result<(usize, HopMessage), ElectionError> {
        let replaced = IdToken::from_slice(&sym_decrypt(&self.cred.k_ac, &hop.sealed_id)?)?;
        self.advance(&replaced, RelayStep::AwaitSecond, RelayStep::AwaitFourth)?;
        let row = self
            .table()?
            .by_replaced(&replaced)
            .cloned()
            .expect("relay entry has a row");
        let inner = layer_unwrap(&self.cred.p_ac, &hop.layered)?;
        let p_av = self.passwords[&row.voter_index].clone();
        let k_va = self.cred.k_va.clone();
        let out = self.forward(&p_av, &k_va, &row.original, hop.seq, &inner)?;
        Ok((row.voter_index, out))
    }

    /// Fourth hop from a voter; returns the final hop to the counter.
    pub fn on_hop4(&mut self, hop: &HopMessage) -> Result<HopMessage, ElectionError> {
        let id = IdToken::from_slice(&sym_decrypt(&self.cred.k_va, &hop.sealed_id)?)?;
        let row = self
            .table()?
            .rows
            .iter()
            .find(|r| r.original == id)
            .cloned()
            .ok_or_else(|| {
                ElectionError::Hop("fourth hop from a voter not in this round".into())
            })?;
        self.advance(&row.replaced, RelayStep::AwaitFourth, RelayStep::Delivered)?;
        let inner = layer_unwrap(&self.passwords[&row.voter_index], &hop.layered)?;
        self.forward(
            &self.cred.p_ac.clone(),
            &self.cred.k_ac.clone(),
            &row.replaced,
            hop.seq,
            &inner,
        )
    }

    fn advance(
        &mut self,
        id: &IdToken,
        from: RelayStep,
        to: RelayStep,
    ) -> Result<(), ElectionError> {
        match self.relay.get_mut(id) {
            Some(step) if *step == from => {
                *step = to;
                Ok(())
            }
            Some(step) => Err(ElectionError::Hop(format!(
                "relay is at {step:?}, not {from:?}"
            ))),
            None => Err(ElectionError::Hop("unknown replaced ID".into())),
        }
    }

    fn forward(
        &mut self,
        password: &Password,
        key: &crate::crypto::SymmetricKey,
        id: &IdToken,
        seq: u8,
        inner: &[u8],
    ) -> Result<HopMessage, ElectionError> {
        let layered = layer_wrap(password, inner, &mut self.wrap_rng)?;
        let sealed_id = sym_encrypt(key, &id.0, &self.ledger, &mut self.wrap_rng)?;
        Ok(HopMessage {
            sealed_id,
            seq,
            layered,
        })
    }

    /// Entry numbers of rows whose `tag_va` does not verify under `K_va`.
    pub fn audit(&self, board: &BulletinBoard) -> Vec<usize> {
        admin_audit(&self.cred.k_va, board)
    }

    /// Roster positions behind published failed replaced IDs.
    pub fn voters_for_failed(&self, failed: &[IdToken]) -> Result<Vec<usize>, ElectionError> {
        let table = self.table()?;
        failed
            .iter()
            .map(|id| {
                table.by_replaced(id).map(|r| r.voter_index).ok_or_else(|| {
                    ElectionError::State(format!("{id:?} was not issued this round"))
                })
            })
            .collect()
    }

    /// Starts a new round for the voters behind `failed`, issuing each a
    /// fresh ID and pairwise password.
    pub fn revote(&mut self, failed: &[IdToken]) -> Result<Vec<RevoteGrant>, ElectionError> {
        if failed.is_empty() {
            return Err(ElectionError::State("no failed voters to revote".into()));
        }
        if self.phase != Phase::Substituted {
            return Err(ElectionError::State(
                "the current round has not been relayed".into(),
            ));
        }
        let mut voters = self.voters_for_failed(failed)?;
        voters.sort_unstable();
        voters.dedup();
        let mut grants = Vec::with_capacity(voters.len());
        for &voter_index in &voters {
            let id = IdToken::random_fresh(&mut self.table_rng, &self.used_tokens);
            self.used_tokens.insert(id);
            let p_av = Password::random(self.public.password_bits, &mut self.table_rng)?;
            self.ids.retain(|_, &mut i| i != voter_index);
            self.ids.insert(id, voter_index);
            self.passwords.insert(voter_index, p_av.clone());
            grants.push(RevoteGrant {
                voter_index,
                id,
                p_av,
            });
        }
        self.round += 1;
        self.eligible = voters.into_iter().collect();
        self.auth.clear();
        self.pending.clear();
        self.substitution = None;
        self.relay.clear();
        self.phase = Phase::Authenticating;
        Ok(grants)
    }
}

/// Rows whose `tag_va` fails under `k_va`.
pub fn admin_audit(k_va: &crate::crypto::SymmetricKey, board: &BulletinBoard) -> Vec<usize> {
    board
        .rows()
        .iter()
        .filter(|r| {
            !mac_verify(
                k_va,
                &BallotPackage::ballot_and_verif(&r.ballot, &r.verif),
                &r.tag_va,
            )
        })
        .map(|r| r.entry)
        .collect()
}
