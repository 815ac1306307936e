use super::admin::{Administrator, Announcement, AuthOutcome};
use super::counter::{Counter, Published, Validation};
use super::setup::ElectionSetup;
use super::types::PublicParams;
use super::voter::Voter;
use super::ElectionError;
use crate::seeded::party_rng;

/// Order in which the administrator drives the five-message rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Each round finishes before the next starts.
    #[default]
    Interleaved,
    /// Every first hop goes out before any second hop is handled, and so on.
    Batched,
}

/// The five messages for delivery slot `slot`, with no network in between.
pub fn relay_round(
    admin: &mut Administrator,
    counter: &mut Counter,
    voters: &mut [Voter],
    slot: usize,
) -> Result<Validation, ElectionError> {
    let h1 = admin.hop1(slot)?;
    let h2 = counter.on_hop1(&h1)?;
    let (v, h3) = admin.on_hop2(&h2)?;
    let voter = voters
        .iter_mut()
        .find(|x| x.index() == v)
        .ok_or_else(|| ElectionError::State(format!("no voter {v}")))?;
    let h4 = voter.on_hop3(&h3)?;
    let h5 = admin.on_hop4(&h4)?;
    counter.on_hop5(&h5)
}

/// All three roles in one process, wired by direct calls.
#[derive(Debug, Clone)]
pub struct LocalElection {
    pub public: PublicParams,
    pub voters: Vec<Voter>,
    pub admin: Administrator,
    pub counter: Counter,
    pub schedule: Schedule,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundReport {
    pub announcement: Announcement,
    pub published: Published,
}

impl LocalElection {
    pub fn new(setup: ElectionSetup, seed: u64) -> Self {
        let voters = setup
            .voters
            .into_iter()
            .map(|c| {
                let rng = party_rng(seed, &format!("voter/{}", c.index));
                Voter::new(c, setup.public.clone(), rng)
            })
            .collect();
        LocalElection {
            admin: Administrator::new(
                setup.admin,
                setup.public.clone(),
                party_rng(seed, "admin/wrap"),
                party_rng(seed, "admin/substitution"),
            ),
            counter: Counter::new(
                setup.counter,
                setup.public.clone(),
                party_rng(seed, "counter"),
            ),
            public: setup.public,
            voters,
            schedule: Schedule::default(),
        }
    }

    /// Submits for every voter with `Some(choice)` (1-based) and closes
    /// authentication. Voters with `None` stall.
    pub fn authenticate(
        &mut self,
        choices: &[Option<usize>],
    ) -> Result<(Vec<AuthOutcome>, Announcement), ElectionError> {
        let mut outcomes = Vec::new();
        for (voter, choice) in self.voters.iter_mut().zip(choices) {
            if let Some(c) = choice {
                let sub = voter.submit(*c)?;
                outcomes.push(self.admin.authenticate(&sub));
            }
        }
        let announcement = self.admin.close_authentication()?;
        Ok((outcomes, announcement))
    }

    /// Substitutes, announces replaced IDs to the counter and relays every
    /// slot. Hop errors are left for the counter to expire.
    pub fn relay(&mut self) -> Result<(), ElectionError> {
        self.admin.substitute()?;
        self.deliver()
    }

    /// As [`relay`](Self::relay) but after a caller-made substitution.
    pub fn deliver(&mut self) -> Result<(), ElectionError> {
        let ids = self.admin.replaced_ids()?;
        self.counter.on_announce(&ids)?;
        match self.schedule {
            Schedule::Interleaved => {
                for slot in 1..=ids.len() {
                    let _ = relay_round(&mut self.admin, &mut self.counter, &mut self.voters, slot);
                }
            }
            Schedule::Batched => {
                let h1: Vec<_> = (1..=ids.len())
                    .filter_map(|s| self.admin.hop1(s).ok())
                    .collect();
                let h2: Vec<_> = h1
                    .iter()
                    .filter_map(|h| self.counter.on_hop1(h).ok())
                    .collect();
                let h3: Vec<_> = h2
                    .iter()
                    .filter_map(|h| self.admin.on_hop2(h).ok())
                    .collect();
                let mut h4 = Vec::new();
                for (v, h) in &h3 {
                    if let Some(voter) = self.voters.iter_mut().find(|x| x.index() == *v) {
                        if let Ok(out) = voter.on_hop3(h) {
                            h4.push(out);
                        }
                    }
                }
                let h5: Vec<_> = h4
                    .iter()
                    .filter_map(|h| self.admin.on_hop4(h).ok())
                    .collect();
                for h in &h5 {
                    let _ = self.counter.on_hop5(h);
                }
            }
        }
        Ok(())
    }

    pub fn close(&mut self) -> Result<Published, ElectionError> {
        self.counter.expire_unresolved();
        self.counter.publish()
    }

    pub fn run_round(&mut self, choices: &[Option<usize>]) -> Result<RoundReport, ElectionError> {
        let (_, announcement) = self.authenticate(choices)?;
        self.relay()?;
        let published = self.close()?;
        Ok(RoundReport {
            announcement,
            published,
        })
    }

    /// Issues revote grants for `failed`, hands them to the voters and
    /// reopens the board. Returns the roster positions that revote.
    pub fn start_revote(
        &mut self,
        failed: &[super::types::IdToken],
    ) -> Result<Vec<usize>, ElectionError> {
        let grants = self.admin.revote(failed)?;
        for g in &grants {
            let voter = self
                .voters
                .iter_mut()
                .find(|v| v.index() == g.voter_index)
                .expect("grant for a known voter");
            voter.apply_grant(g)?;
        }
        self.counter.begin_round()?;
        Ok(grants.iter().map(|g| g.voter_index).collect())
    }

    /// Runs rounds until nothing fails or `round_cap` rounds have run.
    /// Returns the report of every round.
    pub fn run(
        &mut self,
        choices: &[Option<usize>],
        round_cap: u32,
    ) -> Result<Vec<RoundReport>, ElectionError> {
        let mut reports = vec![self.run_round(choices)?];
        loop {
            let failed = reports
                .last()
                .expect("one round")
                .published
                .failed_ids
                .clone();
            if failed.is_empty() {
                return Ok(reports);
            }
            if reports.len() as u32 >= round_cap {
                return Err(ElectionError::RoundCapExceeded(round_cap));
            }
            let again = self.start_revote(&failed)?;
            let next: Vec<Option<usize>> = (0..self.voters.len())
                .map(|i| if again.contains(&i) { choices[i] } else { None })
                .collect();
            reports.push(self.run_round(&next)?);
        }
    }
}
