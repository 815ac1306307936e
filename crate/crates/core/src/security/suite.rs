//! Scripted attacks, each checked against the response the scheme claims.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::guess::{demo_group, run_guess_trials, DlogOracle};
use super::privacy::{admin_key_sweep, counter_view, record_round};
use super::SecurityError;
use crate::crypto::{layer_wrap, NonceLedger};
use crate::election::{
    build_with_ballot, relay_round, setup_election, AuthOutcome, BulletinBoard, ElectionConfig,
    HopMessage, IdToken, InvalidReason, LocalElection, RejectReason, RoundOutcome, Validation,
    VerifyOutcome, Voter,
};
use crate::numtheory::GroupParams;
use crate::seeded::party_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    Completeness,
    Robustness,
    Privacy,
    Eligibility,
    Unreusability,
    Fairness,
    Verifiability,
}

impl Property {
    pub const ALL: [Property; 7] = [
        Property::Completeness,
        Property::Robustness,
        Property::Privacy,
        Property::Eligibility,
        Property::Unreusability,
        Property::Fairness,
        Property::Verifiability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Completeness => "completeness",
            Property::Robustness => "robustness",
            Property::Privacy => "privacy",
            Property::Eligibility => "eligibility",
            Property::Unreusability => "unreusability",
            Property::Fairness => "fairness",
            Property::Verifiability => "verifiability",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Honest,
    InvalidBallot,
    StallVoter,
    TamperAdmin,
    TamperCounter,
    TamperOutsider,
    Drop,
    Replay,
    Impersonate,
    AdminSweep,
    CounterLink,
    PasswordGuess,
    EarlyTally,
    Verify,
}

impl Scenario {
    pub const ALL: [Scenario; 14] = [
        Scenario::Honest,
        Scenario::InvalidBallot,
        Scenario::StallVoter,
        Scenario::TamperAdmin,
        Scenario::TamperCounter,
        Scenario::TamperOutsider,
        Scenario::Drop,
        Scenario::Replay,
        Scenario::Impersonate,
        Scenario::AdminSweep,
        Scenario::CounterLink,
        Scenario::PasswordGuess,
        Scenario::EarlyTally,
        Scenario::Verify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Honest => "honest",
            Scenario::InvalidBallot => "invalid-ballot",
            Scenario::StallVoter => "stall-voter",
            Scenario::TamperAdmin => "tamper-admin",
            Scenario::TamperCounter => "tamper-counter",
            Scenario::TamperOutsider => "tamper-outsider",
            Scenario::Drop => "drop",
            Scenario::Replay => "replay",
            Scenario::Impersonate => "impersonate",
            Scenario::AdminSweep => "admin-sweep",
            Scenario::CounterLink => "counter-link",
            Scenario::PasswordGuess => "password-guess",
            Scenario::EarlyTally => "early-tally",
            Scenario::Verify => "verify",
        }
    }

    pub fn property(self) -> Property {
        match self {
            Scenario::Honest => Property::Completeness,
            Scenario::InvalidBallot
            | Scenario::StallVoter
            | Scenario::TamperAdmin
            | Scenario::TamperOutsider
            | Scenario::Drop => Property::Robustness,
            Scenario::AdminSweep | Scenario::CounterLink | Scenario::PasswordGuess => {
                Property::Privacy
            }
            Scenario::Impersonate => Property::Eligibility,
            Scenario::Replay => Property::Unreusability,
            Scenario::EarlyTally => Property::Fairness,
            Scenario::TamperCounter | Scenario::Verify => Property::Verifiability,
        }
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|x| x.name()).collect();
                format!(
                    "unknown scenario {s:?}; expected one of {}",
                    names.join(", ")
                )
            })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub property: Property,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for ScenarioReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<16} {:<14} {}  {}",
            self.scenario.name(),
            self.property.name(),
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

/// Election shape shared by every scenario.
#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub group: GroupParams,
    pub voters: usize,
    pub seed: u64,
    pub guess_trials: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            group: GroupParams::modp768(),
            voters: 5,
            seed: 1,
            guess_trials: 50,
        }
    }
}

impl SuiteConfig {
    fn election(&self, voters: usize) -> Result<LocalElection, SecurityError> {
        let mut rng = party_rng(self.seed, "setup");
        let cfg = ElectionConfig::new(&["ada", "bo"], voters, self.group.clone());
        Ok(LocalElection::new(
            setup_election(&cfg, &mut rng)?,
            self.seed,
        ))
    }

    fn choices(&self, voters: usize) -> Vec<Option<usize>> {
        (0..voters).map(|i| Some(1 + i % 2)).collect()
    }
}

/// Runs every scenario. Scenario errors are reported as failures.
pub fn attack_suite(config: &SuiteConfig) -> Vec<ScenarioReport> {
    Scenario::ALL
        .iter()
        .map(|&s| run_scenario(s, config))
        .collect()
}

pub fn run_scenario(scenario: Scenario, config: &SuiteConfig) -> ScenarioReport {
    let result = match scenario {
        Scenario::Honest => honest(config),
        Scenario::InvalidBallot => invalid_ballot(config),
        Scenario::StallVoter => stall_voter(config),
        Scenario::TamperAdmin => tamper_admin(config),
        Scenario::TamperCounter => tamper_counter(config),
        Scenario::TamperOutsider => tamper_outsider(config),
        Scenario::Drop => drop_hop(config),
        Scenario::Replay => replay(config),
        Scenario::Impersonate => impersonate(config),
        Scenario::AdminSweep => admin_sweep(config),
        Scenario::CounterLink => counter_link(config),
        Scenario::PasswordGuess => password_guess(config),
        Scenario::EarlyTally => early_tally(config),
        Scenario::Verify => verify(config),
    };
    let (passed, detail) = result.unwrap_or_else(|e| (false, format!("error: {e}")));
    ScenarioReport {
        scenario,
        property: scenario.property(),
        passed,
        detail,
    }
}

type Outcome = Result<(bool, String), SecurityError>;

fn honest(c: &SuiteConfig) -> Outcome {
    let mut e = c.election(c.voters)?;
    let choices = c.choices(c.voters);
    let report = e.run_round(&choices)?;
    let first = choices.iter().filter(|x| **x == Some(1)).count();
    let want = vec![
        ("ada".to_string(), first),
        ("bo".to_string(), c.voters - first),
    ];
    let board = e.counter.board();
    let ok = report.published.tally == want
        && report.published.failed_ids.is_empty()
        && board.rows().len() == c.voters;
    Ok((
        ok,
        format!(
            "{} rows, tally {:?}",
            board.rows().len(),
            report.published.tally
        ),
    ))
}

fn invalid_ballot(c: &SuiteConfig) -> Outcome {
    let mut e = c.election(c.voters)?;
    let mut rng = party_rng(c.seed, "attack/invalid-ballot");
    let mut bogus = vec![0u8; e.public.candidates.code_len()];
    while bogus.iter().all(|&b| b == 0) || e.public.candidates.position(&bogus).is_some() {
        rng.fill(&mut bogus[..]);
    }
    let cred = e.voters[0].credential().clone();
    let package = build_with_ballot(&cred, bogus, &NonceLedger::new(), &mut rng)?;
    let sub = e.voters[0].submit_package(package)?;
    e.admin.authenticate(&sub);
    let mut choices = c.choices(c.voters);
    choices[0] = None;
    e.authenticate(&choices)?;
    e.relay()?;
    let published = e.close()?;
    let id = e
        .admin
        .substitution()
        .and_then(|t| t.by_voter(0))
        .map(|r| r.replaced);
    let outcome = id.and_then(|id| e.counter.outcome(&id).cloned());
    let rejected = outcome
        == Some(RoundOutcome::Validated(Validation::Invalid(
            InvalidReason::BallotNotInSet,
        )));
    let ok = rejected
        && e.counter.board().rows().len() == c.voters - 1
        && published.failed_ids.is_empty();
    Ok((ok, format!("counter: {outcome:?}")))
}

fn stall_voter(c: &SuiteConfig) -> Outcome {
    let mut e = c.election(c.voters)?;
    let mut choices = c.choices(c.voters);
    choices[0] = None;
    let report = e.run_round(&choices)?;
    let ok = report.announcement.absent == vec![0]
        && report.announcement.authenticated.len() == c.voters - 1
        && e.counter.board().rows().len() == c.voters - 1;
    Ok((
        ok,
        format!(
            "flagged absent before relay: {:?}",
            report.announcement.absent
        ),
    ))
}

fn tamper_admin(c: &SuiteConfig) -> Outcome {
    let mut e = c.election(c.voters)?;
    e.authenticate(&c.choices(c.voters))?;
    e.admin.substitute()?;
    let ids = e.admin.replaced_ids()?;
    e.counter.on_announce(&ids)?;
    let mut rng = party_rng(c.seed, "attack/tamper-admin");
    let p_ac = e.admin.credential().p_ac.clone();
    let mut h1 = e.admin.hop1(1)?;
    let mut junk = vec![0u8; h1.layered.len() - crate::crypto::NONCE_LEN];
    rng.fill(&mut junk[..]);
    h1.layered = layer_wrap(&p_ac, &junk, &mut rng)?;
    let _ = e.counter.on_hop1(&h1).and_then(|h2| {
        let (v, h3) = e.admin.on_hop2(&h2)?;
        let voter = e
            .voters
            .iter_mut()
            .find(|x| x.index() == v)
            .expect("known voter");
        let h4 = voter.on_hop3(&h3)?;
        let h5 = e.admin.on_hop4(&h4)?;
        e.counter.on_hop5(&h5)
    });
    for slot in 2..=ids.len() {
        let _ = relay_round(&mut e.admin, &mut e.counter, &mut e.voters, slot);
    }
    let published = e.close()?;
    let ok = published.failed_ids == vec![ids[0]] && e.counter.board().rows().len() == c.voters - 1;
    Ok((
        ok,
        format!(
            "{}: substituted ciphertext, round {:?}",
            if ok { "detected" } else { "undetected" },
            e.counter.outcome(&ids[0])
        ),
    ))
}

fn tamper_counter(c: &SuiteConfig) -> Outcome {
    let mut e = c.election(c.voters)?;
    e.run_round(&c.choices(c.voters))?;
    let codes = e.public.candidates.codes().to_vec();
    let row = &mut e.counter.board_mut().rows_mut()[1];
    row.ballot = if row.ballot == codes[0] {
        codes[1].clone()
    } else {
        codes[0].clone()
    };
    let flagged = e.admin.audit(e.counter.board());
    let altered = e
        .voters
        .iter()
        .filter(|v| v.verify(e.counter.board()) == VerifyOutcome::Altered)
        .count();
    let ok = flagged == vec![2] && altered == 1;
    Ok((
        ok,
        format!("audit flags rows {flagged:?}; {altered} voter sees altered"),
    ))
}

/// Counts of single-bit flips over one relay round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FlipReport {
    pub flips: usize,
    pub detected: usize,
}

/// Flips every bit of every message in the target voter's round (the
/// submission and the five relay hops), one flip per run, and counts runs
/// in which the tampering surfaced: the submission was refused, or the
/// round was published as failed. Any run that puts a row on the board that
/// no honest voter built is a miss.
pub fn exhaustive_flips(group: &GroupParams, seed: u64) -> Result<FlipReport, SecurityError> {
    let config = SuiteConfig {
        group: group.clone(),
        voters: 2,
        seed,
        guess_trials: 0,
    };
    let mut base = config.election(2)?;
    let target = 0usize;
    let mut report = FlipReport::default();

    // stage 0: the submission
    let sub = base.voters[target].submit(1)?;
    let sub_bytes = sub.to_bytes();
    for bit in 0..sub_bytes.len() * 8 {
        let mut e = base.clone();
        report.flips += 1;
        let tampered = flip(&sub_bytes, bit);
        let accepted = HopMessage::from_bytes(&tampered, &e.public.group)
            .map(|h| e.admin.authenticate(&h))
            .map(|o| matches!(o, AuthOutcome::Accepted { .. }))
            .unwrap_or(false);
        if !accepted {
            report.detected += 1;
            continue;
        }
        let sub2 = e.voters[1].submit(2)?;
        e.admin.authenticate(&sub2);
        e.admin.close_authentication()?;
        e.admin.substitute_with(&[1, target])?;
        e.deliver()?;
        if round_surfaced(&mut e, target)? {
            report.detected += 1;
        }
    }

    // stages 1 to 5: the relay hops, target delivered last
    base.admin.authenticate(&sub);
    let sub2 = base.voters[1].submit(2)?;
    base.admin.authenticate(&sub2);
    base.admin.close_authentication()?;
    base.admin.substitute_with(&[1, target])?;
    base.counter.on_announce(&base.admin.replaced_ids()?)?;
    relay_round(&mut base.admin, &mut base.counter, &mut base.voters, 1)?;

    let mut state = base;
    let mut hop = state.admin.hop1(2)?;
    for stage in 1..=5 {
        let bytes = hop.to_bytes();
        for bit in 0..bytes.len() * 8 {
            let mut e = state.clone();
            report.flips += 1;
            if let Ok(h) = HopMessage::from_bytes(&flip(&bytes, bit), &e.public.group) {
                let _ = finish_round(&mut e, stage, h);
            }
            if round_surfaced(&mut e, target)? {
                report.detected += 1;
            }
        }
        if stage < 5 {
            hop = step(&mut state, stage, &hop)?.expect("honest hop continues");
        }
    }
    Ok(report)
}

fn flip(bytes: &[u8], bit: usize) -> Vec<u8> {
    let mut out = bytes.to_vec();
    out[bit / 8] ^= 0x80 >> (bit % 8);
    out
}

/// Delivers `hop` as relay message number `stage` and returns the next one.
/// Third hops go to voter 0, the target of the flip runs.
fn step(
    e: &mut LocalElection,
    stage: usize,
    hop: &HopMessage,
) -> Result<Option<HopMessage>, SecurityError> {
    Ok(match stage {
        1 => Some(e.counter.on_hop1(hop)?),
        2 => Some(e.admin.on_hop2(hop)?.1),
        3 => Some(e.voters[0].on_hop3(hop)?),
        4 => Some(e.admin.on_hop4(hop)?),
        5 => {
            e.counter.on_hop5(hop)?;
            None
        }
        _ => unreachable!("five relay messages"),
    })
}

fn finish_round(
    e: &mut LocalElection,
    stage: usize,
    first: HopMessage,
) -> Result<(), SecurityError> {
    let mut hop = first;
    for s in stage..=5 {
        match step(e, s, &hop)? {
            Some(next) => hop = next,
            None => break,
        }
    }
    Ok(())
}

/// Closes the round and says whether the target's tampering is visible:
/// its replaced ID is published as failed or it never got a slot. Errors
/// if the board holds a row that no honest voter built.
fn round_surfaced(e: &mut LocalElection, target: usize) -> Result<bool, SecurityError> {
    let published = e.close()?;
    for row in e.counter.board().rows() {
        let honest = e.voters.iter().any(|v| {
            v.package().is_some_and(|p| {
                p.ballot == row.ballot && p.verif == row.verif && p.tag_va == row.tag_va
            })
        });
        if !honest {
            return Err(SecurityError::Domain(format!(
                "forged row {} reached the board",
                row.entry
            )));
        }
    }
    let replaced = e
        .admin
        .substitution()
        .and_then(|t| t.by_voter(target))
        .map(|r| r.replaced);
    Ok(match replaced {
        None => true,
        Some(id) => published.failed_ids.contains(&id),
    })
}

fn tamper_outsider(c: &SuiteConfig) -> Outcome {
    let r = exhaustive_flips(&c.group, c.seed)?;
    let ok = r.flips > 0 && r.detected == r.flips;
    Ok((
        ok,
        format!(
            "{}: {}/{} single-bit flips",
            if ok { "detected" } else { "undetected" },
            r.detected,
            r.flips
        ),
    ))
}

fn drop_hop(c: &SuiteConfig) -> Outcome {
    let mut e = c.election(c.voters)?;
    let choices = c.choices(c.voters);
    e.authenticate(&choices)?;
    e.admin.substitute()?;
    let ids = e.admin.replaced_ids()?;
    e.counter.on_announce(&ids)?;
    let dropped = e.admin.substitution().expect("substituted").rows()[0].voter_index;
    let h1 = e.admin.hop1(1)?;
    let h2 = e.counter.on_hop1(&h1)?;
    let _ = e.admin.on_hop2(&h2)?;
    for slot in 2..=ids.len() {
        relay_round(&mut e.admin, &mut e.counter, &mut e.voters, slot)?;
    }
    let first = e.close()?;
    let missing = e.voters[dropped].verify(e.counter.board()) == VerifyOutcome::Missing;
    let again = e.start_revote(&first.failed_ids)?;
    let next: Vec<_> = (0..c.voters)
        .map(|i| if again.contains(&i) { choices[i] } else { None })
        .collect();
    let second = e.run_round(&next)?;
    let counted = e
        .voters
        .iter()
        .all(|v| v.verify(e.counter.board()) == VerifyOutcome::Counted);
    let ok = first.failed_ids == vec![ids[0]]
        && missing
        && second.published.failed_ids.is_empty()
        && counted;
    Ok((
        ok,
        format!("dropped third hop published as failed; revote of {again:?} counted"),
    ))
}

fn replay(c: &SuiteConfig) -> Outcome {
    let mut e = c.election(c.voters)?;
    let mut subs = Vec::new();
    for (v, ch) in e.voters.iter_mut().zip(c.choices(c.voters)) {
        subs.push(v.submit(ch.expect("everyone votes"))?);
    }
    for s in &subs {
        e.admin.authenticate(s);
    }
    let replayed = e.admin.authenticate(&subs[0]);
    e.admin.close_authentication()?;
    e.admin.substitute()?;
    let ids = e.admin.replaced_ids()?;
    e.counter.on_announce(&ids)?;
    let mut last = None;
    for slot in 1..=ids.len() {
        let h1 = e.admin.hop1(slot)?;
        let h2 = e.counter.on_hop1(&h1)?;
        let (v, h3) = e.admin.on_hop2(&h2)?;
        let h4 = e.voters[v].on_hop3(&h3)?;
        let h5 = e.admin.on_hop4(&h4)?;
        e.counter.on_hop5(&h5)?;
        last = Some(h5);
    }
    let before = e.counter.board().clone();
    let hop5_replay = e
        .counter
        .on_hop5(&last.expect("at least one slot"))
        .is_err();
    let duplicate_s = {
        let y = e.voters[0].package().expect("submitted").y_bytes();
        e.counter.validate(&y)
    };
    let unchanged = *e.counter.board() == before;
    let ok = replayed == AuthOutcome::Rejected(RejectReason::Duplicate)
        && hop5_replay
        && duplicate_s == Validation::Invalid(InvalidReason::DuplicateVerificationString)
        && unchanged;
    Ok((
        ok,
        format!("submission replay {replayed:?}; ballot replay {duplicate_s:?}"),
    ))
}

fn impersonate(c: &SuiteConfig) -> Outcome {
    let mut e = c.election(c.voters)?;
    let mut rng = party_rng(c.seed, "attack/impersonate");
    let mut cred = e.voters[0].credential().clone();
    cred.index = c.voters;
    cred.id = IdToken::random(&mut rng);
    let mut fake = Voter::new(
        cred,
        e.public.clone(),
        ChaCha20Rng::from_rng(&mut rng).expect("rng"),
    );
    let outcome = e.admin.authenticate(&fake.submit(1)?);
    let ok = outcome == AuthOutcome::Rejected(RejectReason::Ineligible)
        && e.admin.auth_table().is_empty();
    Ok((ok, format!("invented ID: {outcome:?}")))
}

fn admin_sweep(c: &SuiteConfig) -> Outcome {
    let mut e = c.election(c.voters)?;
    let round = record_round(&mut e, &c.choices(c.voters), None)?;
    let ballots: Vec<Vec<u8>> = e
        .voters
        .iter()
        .filter_map(|v| v.package().map(|p| p.y_bytes()))
        .collect();
    let r = admin_key_sweep(e.admin.credential(), &e.public.group, &[round], &ballots);
    let ok = r.ballots_recovered == 0 && r.messages > 0;
    Ok((
        ok,
        format!(
            "{} messages, {} key trials, {} ballots recovered",
            r.messages, r.attempts, r.ballots_recovered
        ),
    ))
}

fn counter_link(c: &SuiteConfig) -> Outcome {
    if c.voters < 2 {
        return Err(SecurityError::Domain("need two voters".into()));
    }
    let base = c.election(c.voters)?;
    let mut choices = c.choices(c.voters);
    choices[0] = Some(1);
    choices[1] = Some(2);
    let order: Vec<usize> = (0..c.voters).rev().collect();

    let mut a = base.clone();
    let ra = record_round(&mut a, &choices, Some(&order))?;
    let view_a = counter_view(&ra, a.counter.export()?);

    let mut b = base.clone();
    for (i, j) in [(0usize, 1usize), (1, 0)] {
        let cred = base.voters[i].credential().clone();
        b.voters[i] = Voter::new(
            cred,
            b.public.clone(),
            party_rng(c.seed, &format!("voter/{j}")),
        );
    }
    choices.swap(0, 1);
    let swap = |v: usize| match v {
        0 => 1,
        1 => 0,
        x => x,
    };
    let order_b: Vec<usize> = order.iter().map(|&v| swap(v)).collect();
    let rb = record_round(&mut b, &choices, Some(&order_b))?;
    let view_b = counter_view(&rb, b.counter.export()?);
    let ok = view_a == view_b;
    Ok((
        ok,
        "counter view identical after swapping two voters' ballots".into(),
    ))
}

fn password_guess(c: &SuiteConfig) -> Outcome {
    let params = demo_group();
    let oracle = DlogOracle::new(&params)?;
    let mut rng = party_rng(c.seed, "attack/password-guess");
    let t = run_guess_trials(&oracle, &params, 8, c.guess_trials, &mut rng)?;
    let ok =
        t.recovered == t.trials && t.false_accepts == 0 && (64.0..=160.0).contains(&t.mean_guesses);
    Ok((
        ok,
        format!(
            "8-bit space, {} trials: recovered {}, mean guesses {:.1}, false accepts {}",
            t.trials, t.recovered, t.mean_guesses, t.false_accepts
        ),
    ))
}

fn early_tally(c: &SuiteConfig) -> Outcome {
    let mut e = c.election(c.voters)?;
    e.authenticate(&c.choices(c.voters))?;
    e.relay()?;
    let early = e.counter.tally().is_err() && e.counter.export().is_err();
    let published = e.close()?;
    let late = e.counter.tally().is_ok();
    Ok((
        early && late,
        format!("no tally before close; published {:?}", published.tally),
    ))
}

fn verify(c: &SuiteConfig) -> Outcome {
    let mut e = c.election(c.voters)?;
    e.run_round(&c.choices(c.voters))?;
    let board = e.counter.board();
    let counted = e
        .voters
        .iter()
        .filter(|v| v.verify(board) == VerifyOutcome::Counted)
        .count();
    let audit = e.admin.audit(board);
    let export = e.counter.export()?;
    let reparsed = BulletinBoard::from_export(&export, &e.public.candidates)?;
    let ok = counted == c.voters && audit.is_empty() && reparsed.rows() == board.rows();
    Ok((
        ok,
        format!("{counted}/{} voters counted, audit {:?}", c.voters, audit),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn names_round_trip_and_cover_every_property() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert!("nope".parse::<Scenario>().is_err());
        let covered: HashSet<_> = Scenario::ALL.iter().map(|s| s.property()).collect();
        assert_eq!(covered.len(), Property::ALL.len());
    }

    #[test]
    fn quick_scenarios_pass() {
        let config = SuiteConfig {
            voters: 4,
            guess_trials: 5,
            ..SuiteConfig::default()
        };
        for s in Scenario::ALL {
            if matches!(s, Scenario::TamperOutsider | Scenario::PasswordGuess) {
                continue;
            }
            let r = run_scenario(s, &config);
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn tamper_admin_line_says_detected() {
        let r = run_scenario(Scenario::TamperAdmin, &SuiteConfig::default());
        assert!(r.to_string().contains("detected"), "{r}");
    }
}
