//! What curious insiders and outsiders can learn from recorded traffic.

use num_traits::{ToPrimitive, Zero};
use rand::RngCore;

use super::guess::record_transcript;
use super::SecurityError;
use crate::crypto::{
    decode_payload, ep_unwrap, layer_unwrap, sym_decrypt, GroupCiphertext, Password, SymmetricKey,
};
use crate::election::{
    AdminCredential, ElectionError, HopMessage, IdToken, LocalElection, Published,
};
use crate::numtheory::GroupParams;

/// Every message of one round as it crossed the wire.
#[derive(Debug, Clone)]
pub struct RecordedRound {
    pub submissions: Vec<HopMessage>,
    pub announced: Vec<IdToken>,
    /// The five relay hops of each delivery slot, in slot order.
    pub relays: Vec<Vec<HopMessage>>,
    pub published: Published,
}

/// Runs one round of `election` with the relay hops captured. `order`
/// fixes the delivery order (roster positions); `None` lets the
/// administrator shuffle.
pub fn record_round(
    election: &mut LocalElection,
    choices: &[Option<usize>],
    order: Option<&[usize]>,
) -> Result<RecordedRound, SecurityError> {
    let mut submissions = Vec::new();
    for (voter, choice) in election.voters.iter_mut().zip(choices) {
        if let Some(c) = choice {
            let sub = voter.submit(*c)?;
            election.admin.authenticate(&sub);
            submissions.push(sub);
        }
    }
    election.admin.close_authentication()?;
    match order {
        Some(o) => election.admin.substitute_with(o)?,
        None => election.admin.substitute()?,
    };
    let announced = election.admin.replaced_ids()?;
    election.counter.on_announce(&announced)?;
    let mut relays = Vec::new();
    for slot in 1..=announced.len() {
        let mut hops = Vec::with_capacity(5);
        let h1 = election.admin.hop1(slot)?;
        hops.push(h1.clone());
        let h2 = election.counter.on_hop1(&h1)?;
        hops.push(h2.clone());
        let (v, h3) = election.admin.on_hop2(&h2)?;
        hops.push(h3.clone());
        let voter = election
            .voters
            .iter_mut()
            .find(|x| x.index() == v)
            .ok_or_else(|| ElectionError::State(format!("no voter {v}")))?;
        let h4 = voter.on_hop3(&h3)?;
        hops.push(h4.clone());
        let h5 = election.admin.on_hop4(&h4)?;
        hops.push(h5.clone());
        election.counter.on_hop5(&h5)?;
        relays.push(hops);
    }
    let published = election.close()?;
    Ok(RecordedRound {
        submissions,
        announced,
        relays,
        published,
    })
}

/// Everything the counter sends, receives or publishes in one round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CounterView {
    pub announced: Vec<IdToken>,
    pub traffic: Vec<Vec<u8>>,
    pub export: String,
}

pub fn counter_view(round: &RecordedRound, export: String) -> CounterView {
    let traffic = round
        .relays
        .iter()
        .flat_map(|hops| [&hops[0], &hops[1], &hops[4]])
        .map(HopMessage::to_bytes)
        .collect();
    CounterView {
        announced: round.announced.clone(),
        traffic,
        export,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepReport {
    pub messages: usize,
    pub attempts: usize,
    /// Key combinations under which something decoded as a payload.
    pub decoded: usize,
    /// Decoded payloads equal to a submitted `Y`.
    pub ballots_recovered: usize,
}

/// Tries every key the administrator holds against every recorded message:
/// each pair of its passwords as outer and inner layer, and each symmetric
/// key against the layered octets.
pub fn admin_key_sweep(
    admin: &AdminCredential,
    group: &GroupParams,
    rounds: &[RecordedRound],
    ballots: &[Vec<u8>],
) -> SweepReport {
    let mut passwords: Vec<&Password> = admin.roster.iter().map(|r| &r.p_av).collect();
    passwords.push(&admin.p_ac);
    let keys: [&SymmetricKey; 2] = [&admin.k_va, &admin.k_ac];
    let mut report = SweepReport {
        messages: 0,
        attempts: 0,
        decoded: 0,
        ballots_recovered: 0,
    };
    let record = |plain: &[u8], report: &mut SweepReport| {
        report.decoded += 1;
        if ballots.iter().any(|y| y == plain) {
            report.ballots_recovered += 1;
        }
    };
    for hop in rounds
        .iter()
        .flat_map(|r| r.submissions.iter().chain(r.relays.iter().flatten()))
    {
        report.messages += 1;
        for key in keys {
            report.attempts += 1;
            if let Ok(plain) = sym_decrypt(key, &hop.layered) {
                record(&plain, &mut report);
            }
        }
        for outer in &passwords {
            let Ok(inner) = layer_unwrap(outer, &hop.layered) else {
                continue;
            };
            for key in keys {
                report.attempts += 1;
                if let Ok(plain) = sym_decrypt(key, &inner) {
                    record(&plain, &mut report);
                }
            }
            let Ok(ct) = GroupCiphertext::from_bytes(&inner, group) else {
                continue;
            };
            for inner_pw in &passwords {
                report.attempts += 1;
                let Ok(element) = ep_unwrap(inner_pw, &ct, group) else {
                    continue;
                };
                if let Ok(plain) = decode_payload(&element, group) {
                    record(&plain, &mut report);
                }
            }
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct EkeReport {
    pub candidates: usize,
    pub unwraps: usize,
    /// Unwraps that a receiver would refuse outright (value zero).
    pub rejectable: usize,
    /// Unwraps landing outside the quadratic residues. A true unwrap never
    /// does, so this fraction is the known residue-symbol leak.
    pub non_residues: usize,
    /// Chi-square of unwrapped values over 16 equal ranges of `[0, q)`.
    pub chi_square: f64,
}

pub const EKE_BUCKETS: usize = 16;

/// Unwraps a recorded exchange under every password of a
/// `password_bits`-bit space and checks the results look like group
/// elements.
pub fn eke_uniformity<R: RngCore + ?Sized>(
    params: &GroupParams,
    password_bits: u32,
    rng: &mut R,
) -> Result<EkeReport, SecurityError> {
    if password_bits == 0 || password_bits > 20 {
        return Err(SecurityError::Domain(
            "password space must be 1..=20 bits".into(),
        ));
    }
    let q = params
        .q()
        .to_u64()
        .ok_or_else(|| SecurityError::Domain("uniformity sweep needs a 64-bit group".into()))?;
    let secret = rng.next_u64() & ((1 << password_bits) - 1);
    let password = Password::from_index(secret, password_bits)?;
    let (transcript, _) = record_transcript(params, &password, &[rng.next_u32() as u8], rng)?;
    let mut buckets = [0u64; EKE_BUCKETS];
    let mut unwraps = 0;
    let mut rejectable = 0;
    let mut non_residues = 0;
    for index in 0..1u64 << password_bits {
        let candidate = Password::from_index(index, password_bits)?;
        for hop in &transcript.hops {
            unwraps += 1;
            let element = match ep_unwrap(&candidate, &hop.ct, params) {
                Ok(e) if !e.is_zero() => e,
                _ => {
                    rejectable += 1;
                    continue;
                }
            };
            if !params.is_quadratic_residue(&element) {
                non_residues += 1;
            }
            let v = element.to_u64().expect("below q");
            buckets[(v as u128 * EKE_BUCKETS as u128 / q as u128) as usize] += 1;
        }
    }
    let total: u64 = buckets.iter().sum();
    let expected = total as f64 / EKE_BUCKETS as f64;
    let chi_square = buckets
        .iter()
        .map(|&b| (b as f64 - expected).powi(2) / expected)
        .sum();
    Ok(EkeReport {
        candidates: 1 << password_bits,
        unwraps,
        rejectable,
        non_residues,
        chi_square,
    })
}
