use std::path::Path;

use super::bus::{Bus, Endpoint, FaultRule, RunLog};
use super::envelope::{Envelope, MsgType};
use super::files::{load_setup, parse_choices};
use super::HarnessError;
use crate::election::{
    BallotPackage, ElectionError, ElectionSetup, HopMessage, IdToken, LocalElection, RoundReport,
    Schedule,
};

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub faults: Vec<FaultRule>,
    pub round_cap: u32,
    pub schedule: Schedule,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            faults: Vec::new(),
            round_cap: 5,
            schedule: Schedule::Interleaved,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimRun {
    pub export: String,
    pub log: RunLog,
    pub rounds: Vec<RoundReport>,
    /// What each voter last submitted, by roster position.
    pub receipts: Vec<Option<BallotPackage>>,
    pub election: LocalElection,
}

pub fn ids_to_bytes(ids: &[IdToken]) -> Vec<u8> {
    ids.iter().flat_map(|id| id.0).collect()
}

pub fn ids_from_bytes(bytes: &[u8]) -> Result<Vec<IdToken>, HarnessError> {
    if !bytes.len().is_multiple_of(16) {
        return Err(HarnessError::Protocol(
            "announce body is not a list of IDs".into(),
        ));
    }
    Ok(bytes
        .chunks(16)
        .map(|c| IdToken(c.try_into().expect("16 octets")))
        .collect())
}

/// Simulated election over the bus: every message between parties is an
/// envelope, faults are applied in transit, and revote rounds run until
/// nothing fails or `round_cap` rounds have run.
pub fn simulate(
    setup: ElectionSetup,
    choices: &[Option<usize>],
    seed: u64,
    options: &SimOptions,
) -> Result<SimRun, HarnessError> {
    if choices.len() != setup.public.voters {
        return Err(HarnessError::Choices(format!(
            "{} choices for {} voters",
            choices.len(),
            setup.public.voters
        )));
    }
    let mut e = LocalElection::new(setup, seed);
    e.schedule = options.schedule;
    let mut bus = Bus::new(options.faults.clone());
    bus.register(Endpoint::Admin);
    bus.register(Endpoint::Counter);
    for i in 0..e.voters.len() {
        bus.register(Endpoint::Voter(i));
    }

    let mut rounds = Vec::new();
    let mut active: Vec<Option<usize>> = choices.to_vec();
    loop {
        rounds.push(sim_round(&mut e, &mut bus, &active)?);
        let failed = rounds
            .last()
            .expect("one round")
            .published
            .failed_ids
            .clone();
        if failed.is_empty() {
            break;
        }
        if rounds.len() as u32 >= options.round_cap {
            return Err(HarnessError::RoundCapExceeded(options.round_cap));
        }
        let again = e.start_revote(&failed)?;
        active = (0..choices.len())
            .map(|i| if again.contains(&i) { choices[i] } else { None })
            .collect();
    }
    let export = e.counter.export()?;
    Ok(SimRun {
        export,
        log: bus.into_log(),
        rounds,
        receipts: e.voters.iter().map(|v| v.package().cloned()).collect(),
        election: e,
    })
}

fn sim_round(
    e: &mut LocalElection,
    bus: &mut Bus,
    choices: &[Option<usize>],
) -> Result<RoundReport, HarnessError> {
    for (i, (voter, choice)) in e.voters.iter_mut().zip(choices).enumerate() {
        if let Some(c) = *choice {
            let sub = voter.submit(c)?;
            bus.send(
                Endpoint::Voter(i),
                Endpoint::Admin,
                Envelope::new(MsgType::Submit, sub.to_bytes()),
            )?;
        }
    }
    pump(e, bus)?;
    let announcement = e.admin.close_authentication()?;
    e.admin.substitute()?;
    let ids = e.admin.replaced_ids()?;
    bus.send(
        Endpoint::Admin,
        Endpoint::Counter,
        Envelope::new(MsgType::Announce, ids_to_bytes(&ids)),
    )?;
    pump(e, bus)?;
    match e.schedule {
        Schedule::Interleaved => {
            for slot in 1..=ids.len() {
                send_hop1(e, bus, slot)?;
                pump(e, bus)?;
            }
        }
        Schedule::Batched => {
            for slot in 1..=ids.len() {
                send_hop1(e, bus, slot)?;
            }
            pump(e, bus)?;
        }
    }
    let published = e.close()?;
    let export = e.counter.export()?;
    bus.send(
        Endpoint::Counter,
        Endpoint::Admin,
        Envelope::new(MsgType::BoardExport, export.into_bytes()),
    )?;
    pump(e, bus)?;
    Ok(RoundReport {
        announcement,
        published,
    })
}

fn send_hop1(e: &mut LocalElection, bus: &mut Bus, slot: usize) -> Result<(), HarnessError> {
    let h1 = e.admin.hop1(slot)?;
    bus.send(
        Endpoint::Admin,
        Endpoint::Counter,
        Envelope::new(MsgType::RelayAc, h1.to_bytes()),
    )?;
    Ok(())
}

/// Delivers until the bus is idle. A message its receiver refuses is
/// dropped there; the round-level bookkeeping surfaces the loss.
fn pump(e: &mut LocalElection, bus: &mut Bus) -> Result<(), HarnessError> {
    while let Some((from, to, env)) = bus.next_delivery() {
        match dispatch(e, from, to, &env) {
            Ok(Some((next_to, reply))) => {
                bus.send(to, next_to, reply)?;
            }
            Ok(None) => {}
            Err(HarnessError::Election(_)) | Err(HarnessError::Protocol(_)) => {}
            Err(other) => return Err(other),
        }
    }
    Ok(())
}

fn dispatch(
    e: &mut LocalElection,
    from: Endpoint,
    to: Endpoint,
    env: &Envelope,
) -> Result<Option<(Endpoint, Envelope)>, HarnessError> {
    let group = e.public.group.clone();
    let hop = || HopMessage::from_bytes(&env.body, &group).map_err(HarnessError::from);
    Ok(match (to, env.msg_type) {
        (Endpoint::Admin, MsgType::Submit) => {
            e.admin.authenticate(&hop()?);
            None
        }
        (Endpoint::Counter, MsgType::Announce) => {
            e.counter.on_announce(&ids_from_bytes(&env.body)?)?;
            None
        }
        (Endpoint::Counter, MsgType::RelayAc) => {
            let h2 = e.counter.on_hop1(&hop()?)?;
            Some((
                Endpoint::Admin,
                Envelope::new(MsgType::RelayCa, h2.to_bytes()),
            ))
        }
        (Endpoint::Admin, MsgType::RelayCa) => {
            let (v, h3) = e.admin.on_hop2(&hop()?)?;
            Some((
                Endpoint::Voter(v),
                Envelope::new(MsgType::RelayAv, h3.to_bytes()),
            ))
        }
        (Endpoint::Voter(i), MsgType::RelayAv) => {
            let voter = e
                .voters
                .get_mut(i)
                .ok_or_else(|| HarnessError::UnknownEndpoint(to.to_string()))?;
            let h4 = voter.on_hop3(&hop()?)?;
            Some((
                Endpoint::Admin,
                Envelope::new(MsgType::RelayVa, h4.to_bytes()),
            ))
        }
        (Endpoint::Admin, MsgType::RelayVa) => {
            let h5 = e.admin.on_hop4(&hop()?)?;
            Some((
                Endpoint::Counter,
                Envelope::new(MsgType::RelayAcFinal, h5.to_bytes()),
            ))
        }
        (Endpoint::Counter, MsgType::RelayAcFinal) => {
            e.counter.on_hop5(&hop()?)?;
            None
        }
        (Endpoint::Admin, MsgType::BoardExport) => None,
        (to, t) => {
            return Err(HarnessError::Protocol(format!("{from} sent {t:?} to {to}")));
        }
    })
}

/// Loads the manifest and credentials, parses the choices script and runs
/// the simulated election.
pub fn run_election(
    manifest: &Path,
    choices_script: &str,
    seed: u64,
) -> Result<SimRun, HarnessError> {
    run_election_with(manifest, choices_script, seed, &SimOptions::default())
}

pub fn run_election_with(
    manifest: &Path,
    choices_script: &str,
    seed: u64,
    options: &SimOptions,
) -> Result<SimRun, HarnessError> {
    let (_, setup) = load_setup(manifest)?;
    let choices = parse_choices(choices_script, &setup.public)?;
    simulate(setup, &choices, seed, options)
}

impl From<ElectionError> for HarnessError {
    fn from(e: ElectionError) -> Self {
        match e {
            ElectionError::RoundCapExceeded(n) => HarnessError::RoundCapExceeded(n),
            other => HarnessError::Election(other),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::{setup_election, ElectionConfig, VerifyOutcome};
    use crate::harness::bus::FaultPlan;
    use crate::numtheory::GroupParams;
    use crate::seeded::party_rng;

    fn setup(n: usize, seed: u64) -> ElectionSetup {
        let cfg = ElectionConfig::new(&["ada", "bo"], n, GroupParams::modp768());
        setup_election(&cfg, &mut party_rng(seed, "setup")).unwrap()
    }

    fn split(n: usize, first: usize) -> Vec<Option<usize>> {
        (0..n)
            .map(|i| Some(if i < first { 1 } else { 2 }))
            .collect()
    }

    #[test]
    fn bus_run_matches_direct_run() {
        let s = setup(6, 20);
        let run = simulate(s.clone(), &split(6, 4), 20, &SimOptions::default()).unwrap();
        let mut direct = LocalElection::new(s, 20);
        direct.run_round(&split(6, 4)).unwrap();
        assert_eq!(run.export, direct.counter.export().unwrap());
        assert!(run.export.contains("TALLY ada=4\nTALLY bo=2\n"));
    }

    #[test]
    fn repeated_runs_are_identical() {
        let s = setup(4, 21);
        let a = simulate(s.clone(), &split(4, 2), 21, &SimOptions::default()).unwrap();
        let b = simulate(s, &split(4, 2), 21, &SimOptions::default()).unwrap();
        assert_eq!(a.export, b.export);
        assert_eq!(a.log, b.log);
    }

    #[test]
    fn duplicated_submission_is_rejected_once() {
        let s = setup(3, 22);
        let opts = SimOptions {
            faults: vec![FaultRule {
                msg_type: MsgType::Submit,
                occurrence: 1,
                plan: FaultPlan::Duplicate,
            }],
            ..SimOptions::default()
        };
        let run = simulate(s, &split(3, 1), 22, &opts).unwrap();
        assert_eq!(run.rounds.len(), 1);
        assert_eq!(run.election.counter.board().rows().len(), 3);
        assert_eq!(run.election.admin.auth_table().len(), 3);
    }

    #[test]
    fn tampered_relay_fails_the_round_and_revote_recovers() {
        let s = setup(3, 23);
        let opts = SimOptions {
            faults: vec![FaultRule {
                msg_type: MsgType::RelayAc,
                occurrence: 0,
                plan: FaultPlan::Tamper { bit: 7 },
            }],
            ..SimOptions::default()
        };
        let run = simulate(s, &split(3, 2), 23, &opts).unwrap();
        assert_eq!(run.rounds.len(), 2);
        assert_eq!(run.rounds[0].published.failed_ids.len(), 1);
        assert!(run.rounds[1].published.failed_ids.is_empty());
        let board = run.election.counter.board();
        assert_eq!(board.rows().len(), 3);
        for v in &run.election.voters {
            assert_eq!(v.verify(board), VerifyOutcome::Counted);
        }
    }

    #[test]
    fn persistent_faults_hit_the_round_cap() {
        let s = setup(2, 24);
        let opts = SimOptions {
            faults: (0..10)
                .map(|k| FaultRule {
                    msg_type: MsgType::RelayAv,
                    occurrence: k,
                    plan: FaultPlan::Drop,
                })
                .collect(),
            round_cap: 3,
            ..SimOptions::default()
        };
        assert!(matches!(
            simulate(s, &split(2, 1), 24, &opts),
            Err(HarnessError::RoundCapExceeded(3))
        ));
    }

    #[test]
    fn delay_changes_time_not_outcome() {
        let s = setup(3, 25);
        let plain = simulate(s.clone(), &split(3, 1), 25, &SimOptions::default()).unwrap();
        let opts = SimOptions {
            faults: vec![FaultRule {
                msg_type: MsgType::RelayVa,
                occurrence: 1,
                plan: FaultPlan::Delay { ticks: 50 },
            }],
            ..SimOptions::default()
        };
        let delayed = simulate(s, &split(3, 1), 25, &opts).unwrap();
        assert_eq!(plain.export, delayed.export);
        assert_ne!(plain.log, delayed.log);
    }
}
