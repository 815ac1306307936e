use std::collections::HashSet;

use rand::RngCore;

use super::types::{
    AdminCredential, CandidateSet, CounterCredential, IdToken, PublicParams, RosterEntry,
    VoterCredential,
};
use super::ElectionError;
use crate::crypto::{payload_capacity, KeyRole, Password, SymmetricKey, DEFAULT_PASSWORD_BITS};
use crate::numtheory::GroupParams;

#[derive(Debug, Clone)]
pub struct ElectionConfig {
    pub labels: Vec<String>,
    pub voters: usize,
    pub group: GroupParams,
    pub password_bits: u32,
    pub candidate_bits: u32,
}

impl ElectionConfig {
    pub fn new(labels: &[&str], voters: usize, group: GroupParams) -> Self {
        ElectionConfig {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            voters,
            group,
            password_bits: DEFAULT_PASSWORD_BITS,
            candidate_bits: CandidateSet::DEFAULT_BITS,
        }
    }
}

/// Output of the preparation phase: the public announcement and one
/// credential bundle per party.
#[derive(Debug, Clone)]
pub struct ElectionSetup {
    pub public: PublicParams,
    pub admin: AdminCredential,
    pub counter: CounterCredential,
    pub voters: Vec<VoterCredential>,
}

pub fn setup_election<R: RngCore + ?Sized>(
    config: &ElectionConfig,
    rng: &mut R,
) -> Result<ElectionSetup, ElectionError> {
    if config.voters == 0 {
        return Err(ElectionError::Config(
            "an election needs at least one voter".into(),
        ));
    }
    let candidates = CandidateSet::random(&config.labels, config.candidate_bits, rng)?;
    let public = PublicParams {
        group: config.group.clone(),
        candidates,
        voters: config.voters,
        password_bits: config.password_bits,
    };
    let capacity = payload_capacity(&public.group);
    if public.y_len() > capacity {
        return Err(ElectionError::Config(format!(
            "a {}-octet ballot package does not fit a {}-bit group (capacity {capacity})",
            public.y_len(),
            public.group.bit_length()
        )));
    }

    let k_va = SymmetricKey::random(KeyRole::Va, rng)?;
    let k_ac = SymmetricKey::random(KeyRole::Ac, rng)?;
    let k_vc = SymmetricKey::random(KeyRole::Vc, rng)?;
    let p_ac = Password::random(config.password_bits, rng)?;
    let p_vc = Password::random(config.password_bits, rng)?;

    let mut ids = HashSet::new();
    let mut passwords = HashSet::new();
    let mut roster = Vec::with_capacity(config.voters);
    let mut voters = Vec::with_capacity(config.voters);
    for index in 0..config.voters {
        let id = IdToken::random_fresh(rng, &ids);
        ids.insert(id);
        let p_av = loop {
            let p = Password::random(config.password_bits, rng)?;
            if passwords.insert(p.clone()) {
                break p;
            }
        };
        roster.push(RosterEntry {
            index,
            id,
            p_av: p_av.clone(),
        });
        voters.push(VoterCredential {
            index,
            id,
            p_av,
            p_vc: p_vc.clone(),
            k_va: k_va.clone(),
            k_vc: k_vc.clone(),
        });
    }

    Ok(ElectionSetup {
        public,
        admin: AdminCredential {
            k_va,
            k_ac: k_ac.clone(),
            p_ac: p_ac.clone(),
            roster,
        },
        counter: CounterCredential {
            k_ac,
            k_vc,
            p_ac,
            p_vc,
        },
        voters,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn three_voters_two_candidates() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let setup = setup_election(
            &ElectionConfig::new(&["alice", "bob"], 3, GroupParams::modp768()),
            &mut rng,
        )
        .unwrap();
        assert_eq!(setup.voters.len(), 3);
        assert_eq!(setup.admin.roster.len(), 3);
        let ids: HashSet<_> = setup.voters.iter().map(|v| v.id).collect();
        let pws: HashSet<_> = setup.voters.iter().map(|v| v.p_av.clone()).collect();
        assert_eq!((ids.len(), pws.len()), (3, 3));
        for (v, r) in setup.voters.iter().zip(&setup.admin.roster) {
            assert_eq!((v.id, &v.p_av), (r.id, &r.p_av));
        }
        let codes = setup.public.candidates.codes();
        assert_ne!(codes[0], codes[1]);
        assert!(codes.iter().all(|c| c.len() == 8));
        assert_eq!(setup.public.y_len(), 80);
    }

    #[test]
    fn bad_configs() {
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        let g = GroupParams::modp768();
        for cfg in [
            ElectionConfig::new(&["a", "b"], 0, g.clone()),
            ElectionConfig::new(&["a"], 3, g.clone()),
            ElectionConfig::new(&["a", "a"], 3, g.clone()),
        ] {
            assert!(matches!(
                setup_election(&cfg, &mut rng),
                Err(ElectionError::Config(_))
            ));
        }
        let small = GroupParams::new(
            num_bigint::BigUint::from(14_799_178_233_674_913_383u64),
            crate::numtheory::GroupProfile::SafePrime,
        )
        .unwrap();
        assert!(matches!(
            setup_election(&ElectionConfig::new(&["a", "b"], 1, small), &mut rng),
            Err(ElectionError::Config(_))
        ));
    }
}
