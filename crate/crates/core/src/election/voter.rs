use rand::RngCore;
use rand_chacha::ChaCha20Rng;

use super::board::{BoardRow, BulletinBoard};
use super::types::{
    BallotPackage, CandidateSet, IdToken, PublicParams, VoterCredential, VERIF_LEN,
};
use super::wire::{inner_message, HopMessage};
use super::ElectionError;
use crate::crypto::{
    encode_payload, layer_unwrap, layer_wrap, mac_tag, mac_verify, sym_decrypt, sym_encrypt,
    NonceLedger, Password, NONCE_LEN,
};
use crate::enk::EnkSession;

/// Builds `B`, a fresh `S`, and the two MACs for a 1-based `choice`.
pub fn voter_build_ballot<R: RngCore + ?Sized>(
    cred: &VoterCredential,
    candidates: &CandidateSet,
    choice: usize,
    ledger: &NonceLedger,
    rng: &mut R,
) -> Result<BallotPackage, ElectionError> {
    let ballot = candidates.code(choice)?.to_vec();
    build_with_ballot(cred, ballot, ledger, rng)
}

/// Same as [`voter_build_ballot`] but with an arbitrary ballot string, which
/// is what a dishonest voter does.
pub fn build_with_ballot<R: RngCore + ?Sized>(
    cred: &VoterCredential,
    ballot: Vec<u8>,
    ledger: &NonceLedger,
    rng: &mut R,
) -> Result<BallotPackage, ElectionError> {
    let mut verif = [0u8; VERIF_LEN];
    rng.fill_bytes(&mut verif);
    let mut nonce_va = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce_va);
    let tag_va = mac_tag(
        &cred.k_va,
        &BallotPackage::ballot_and_verif(&ballot, &verif),
        &nonce_va,
        ledger,
    )?;
    let mut nonce_vc = [0u8; NONCE_LEN];
    rng.fill_bytes(&mut nonce_vc);
    let mut x = BallotPackage::ballot_and_verif(&ballot, &verif);
    x.extend_from_slice(&tag_va.to_bytes());
    let tag_vc = mac_tag(&cred.k_vc, &x, &nonce_vc, ledger)?;
    Ok(BallotPackage {
        ballot,
        verif,
        tag_va,
        tag_vc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyOutcome {
    Counted,
    Missing,
    Altered,
}

/// Looks up the voter's `S` on the board and compares `B` and `tag_va`.
pub fn voter_verify(package: &BallotPackage, board: &BulletinBoard) -> VerifyOutcome {
    match board.rows().iter().find(|r| r.verif == package.verif) {
        None => VerifyOutcome::Missing,
        Some(BoardRow { ballot, tag_va, .. })
            if *ballot == package.ballot && *tag_va == package.tag_va =>
        {
            VerifyOutcome::Counted
        }
        Some(_) => VerifyOutcome::Altered,
    }
}

/// Fresh identity and pairwise password for a revote round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevoteGrant {
    pub voter_index: usize,
    pub id: IdToken,
    pub p_av: Password,
}

#[derive(Debug, Clone)]
pub struct Voter {
    cred: VoterCredential,
    public: PublicParams,
    rng: ChaCha20Rng,
    ledger: NonceLedger,
    package: Option<BallotPackage>,
    session: Option<EnkSession>,
    choice: Option<usize>,
}

impl Voter {
    pub fn new(cred: VoterCredential, public: PublicParams, rng: ChaCha20Rng) -> Self {
        Voter {
            cred,
            public,
            rng,
            ledger: NonceLedger::new(),
            package: None,
            session: None,
            choice: None,
        }
    }

    pub fn credential(&self) -> &VoterCredential {
        &self.cred
    }

    pub fn index(&self) -> usize {
        self.cred.index
    }

    pub fn package(&self) -> Option<&BallotPackage> {
        self.package.as_ref()
    }

    pub fn choice(&self) -> Option<usize> {
        self.choice
    }

    /// Builds a ballot for `choice` and returns the submission to the
    /// administrator: `E*_{K_va}[ID]` with `E_{P_av}[E_{P_vc}[Y^a]]`.
    pub fn submit(&mut self, choice: usize) -> Result<HopMessage, ElectionError> {
        let package = voter_build_ballot(
            &self.cred,
            &self.public.candidates,
            choice,
            &self.ledger,
            &mut self.rng,
        )?;
        self.choice = Some(choice);
        self.submit_package(package)
    }

    /// Submits an already built package.
    pub fn submit_package(&mut self, package: BallotPackage) -> Result<HopMessage, ElectionError> {
        let group = &self.public.group;
        let element = encode_payload(&package.y_bytes(), group)?;
        let mut session =
            EnkSession::initiator(group.clone(), self.cred.p_vc.clone(), &mut self.rng)?;
        let first = session.start(&element, &mut self.rng)?;
        let layered = layer_wrap(&self.cred.p_av, &first.ct.to_bytes(), &mut self.rng)?;
        let sealed_id = sym_encrypt(
            &self.cred.k_va,
            &self.cred.id.0,
            &self.ledger,
            &mut self.rng,
        )?;
        self.package = Some(package);
        self.session = Some(session);
        Ok(HopMessage {
            sealed_id,
            seq: first.seq,
            layered,
        })
    }

    /// Third hop (from the administrator): strip `a`, return the fourth hop.
    pub fn on_hop3(&mut self, hop: &HopMessage) -> Result<HopMessage, ElectionError> {
        let id = sym_decrypt(&self.cred.k_va, &hop.sealed_id)?;
        if id != self.cred.id.0 {
            return Err(ElectionError::Hop(
                "relay addressed to another voter".into(),
            ));
        }
        let session = self
            .session
            .as_mut()
            .ok_or_else(|| ElectionError::State("no exchange in progress".into()))?;
        let group = &self.public.group;
        let inner = layer_unwrap(&self.cred.p_av, &hop.layered)?;
        let second = inner_message(hop.seq, &inner, group)?;
        let third = session.unblind(&second, &mut self.rng)?;
        let layered = layer_wrap(&self.cred.p_av, &third.ct.to_bytes(), &mut self.rng)?;
        let sealed_id = sym_encrypt(
            &self.cred.k_va,
            &self.cred.id.0,
            &self.ledger,
            &mut self.rng,
        )?;
        Ok(HopMessage {
            sealed_id,
            seq: third.seq,
            layered,
        })
    }

    /// Switches to the identity issued for a revote round. The previous
    /// package is kept until the next submission replaces it.
    pub fn apply_grant(&mut self, grant: &RevoteGrant) -> Result<(), ElectionError> {
        if grant.voter_index != self.cred.index {
            return Err(ElectionError::State("grant issued to another voter".into()));
        }
        self.cred.id = grant.id;
        self.cred.p_av = grant.p_av.clone();
        self.session = None;
        Ok(())
    }

    pub fn verify(&self, board: &BulletinBoard) -> VerifyOutcome {
        match &self.package {
            Some(p) => voter_verify(p, board),
            None => VerifyOutcome::Missing,
        }
    }
}

/// True if `package` carries valid MACs under the voter's keys.
pub fn package_is_consistent(cred: &VoterCredential, package: &BallotPackage) -> bool {
    mac_verify(
        &cred.k_va,
        &BallotPackage::ballot_and_verif(&package.ballot, &package.verif),
        &package.tag_va,
    ) && mac_verify(&cred.k_vc, &package.x_bytes(), &package.tag_vc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::setup::{setup_election, ElectionConfig};
    use crate::numtheory::GroupParams;
    use rand::SeedableRng;
    use std::collections::HashSet;

    #[test]
    fn ballots_are_self_consistent_and_fresh() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let setup = setup_election(
            &ElectionConfig::new(&["a", "b"], 1, GroupParams::modp768()),
            &mut rng,
        )
        .unwrap();
        let cred = &setup.voters[0];
        let ledger = NonceLedger::new();
        let mut verifs = HashSet::new();
        for i in 0..1000 {
            let p =
                voter_build_ballot(cred, &setup.public.candidates, 1 + i % 2, &ledger, &mut rng)
                    .unwrap();
            assert!(package_is_consistent(cred, &p));
            assert!(verifs.insert(p.verif));
            assert_eq!(BallotPackage::from_y_bytes(&p.y_bytes(), 8).unwrap(), p);
        }
        assert!(matches!(
            voter_build_ballot(cred, &setup.public.candidates, 3, &ledger, &mut rng),
            Err(ElectionError::ChoiceOutOfRange {
                choice: 3,
                candidates: 2
            })
        ));
        assert!(voter_build_ballot(cred, &setup.public.candidates, 0, &ledger, &mut rng).is_err());
    }
}
