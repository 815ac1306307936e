use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap};
use std::fmt;

use sha2::{Digest, Sha256};

use super::envelope::{Envelope, MsgType};
use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Endpoint {
    Admin,
    Counter,
    Voter(usize),
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::Admin => f.write_str("admin"),
            Endpoint::Counter => f.write_str("counter"),
            Endpoint::Voter(i) => write!(f, "voter/{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FaultPlan {
    #[default]
    None,
    Drop,
    /// Flip body bit `bit` (0 is the most significant bit of the first
    /// body octet).
    Tamper {
        bit: usize,
    },
    Delay {
        ticks: u64,
    },
    Duplicate,
}

/// Applies `plan` to the `occurrence`-th message (0-based) of `msg_type`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaultRule {
    pub msg_type: MsgType,
    pub occurrence: usize,
    pub plan: FaultPlan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeliveryOutcome {
    Queued { at: u64 },
    Dropped,
    Duplicated { at: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub tick: u64,
    pub sender: Endpoint,
    pub receiver: Endpoint,
    pub msg_type: MsgType,
    pub digest: [u8; 32],
}

/// Append-only record of every delivery.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RunLog {
    entries: Vec<LogEntry>,
}

impl RunLog {
    pub fn entries(&self) -> &[LogEntry] {
        &self.entries
    }

    fn push(&mut self, entry: LogEntry) {
        self.entries.push(entry);
    }

    /// One line per delivery: `tick sender receiver type digest`.
    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|e| {
                format!(
                    "{} {} {} {:02x} {}\n",
                    e.tick,
                    e.sender,
                    e.receiver,
                    e.msg_type as u8,
                    hex::encode(e.digest)
                )
            })
            .collect()
    }
}

type Pending = (Endpoint, Endpoint, Envelope);

/// Deterministic in-process transport with virtual time. Each send takes
/// one tick unless delayed; equal times deliver in send order.
#[derive(Debug, Clone, Default)]
pub struct Bus {
    now: u64,
    sent: u64,
    endpoints: BTreeSet<Endpoint>,
    queue: BinaryHeap<Reverse<(u64, u64)>>,
    pending: HashMap<u64, Pending>,
    rules: Vec<FaultRule>,
    seen: HashMap<MsgType, usize>,
    log: RunLog,
}

impl Bus {
    pub fn new(rules: Vec<FaultRule>) -> Self {
        Bus {
            rules,
            ..Bus::default()
        }
    }

    pub fn register(&mut self, endpoint: Endpoint) {
        self.endpoints.insert(endpoint);
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn log(&self) -> &RunLog {
        &self.log
    }

    pub fn into_log(self) -> RunLog {
        self.log
    }

    pub fn is_idle(&self) -> bool {
        self.queue.is_empty()
    }

    fn plan_for(&mut self, msg_type: MsgType) -> FaultPlan {
        let n = self.seen.entry(msg_type).or_insert(0);
        let index = *n;
        *n += 1;
        self.rules
            .iter()
            .find(|r| r.msg_type == msg_type && r.occurrence == index)
            .map(|r| r.plan)
            .unwrap_or_default()
    }

    fn enqueue(&mut self, at: u64, item: Pending) {
        let id = self.sent;
        self.sent += 1;
        self.queue.push(Reverse((at, id)));
        self.pending.insert(id, item);
    }

    pub fn send(
        &mut self,
        from: Endpoint,
        to: Endpoint,
        mut env: Envelope,
    ) -> Result<DeliveryOutcome, HarnessError> {
        for e in [from, to] {
            if !self.endpoints.contains(&e) {
                return Err(HarnessError::UnknownEndpoint(e.to_string()));
            }
        }
        let at = self.now + 1;
        Ok(match self.plan_for(env.msg_type) {
            FaultPlan::None => {
                self.enqueue(at, (from, to, env));
                DeliveryOutcome::Queued { at }
            }
            FaultPlan::Drop => DeliveryOutcome::Dropped,
            FaultPlan::Tamper { bit } => {
                if let Some(b) = env.body.get_mut(bit / 8) {
                    *b ^= 0x80 >> (bit % 8);
                }
                self.enqueue(at, (from, to, env));
                DeliveryOutcome::Queued { at }
            }
            FaultPlan::Delay { ticks } => {
                self.enqueue(at + ticks, (from, to, env));
                DeliveryOutcome::Queued { at: at + ticks }
            }
            FaultPlan::Duplicate => {
                self.enqueue(at, (from, to, env.clone()));
                self.enqueue(at, (from, to, env));
                DeliveryOutcome::Duplicated { at }
            }
        })
    }

    /// Next delivery in time order, advancing the clock and logging it.
    pub fn next_delivery(&mut self) -> Option<Pending> {
        let Reverse((at, id)) = self.queue.pop()?;
        self.now = self.now.max(at);
        let (from, to, env) = self.pending.remove(&id).expect("queued item");
        self.log.push(LogEntry {
            tick: self.now,
            sender: from,
            receiver: to,
            msg_type: env.msg_type,
            digest: Sha256::digest(env.to_bytes()).into(),
        });
        Some((from, to, env))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bus(rules: Vec<FaultRule>) -> Bus {
        let mut b = Bus::new(rules);
        b.register(Endpoint::Admin);
        b.register(Endpoint::Counter);
        b
    }

    fn env(n: u8) -> Envelope {
        Envelope::new(MsgType::RelayAc, vec![n])
    }

    #[test]
    fn delivers_once_in_order() {
        let mut b = bus(vec![]);
        for n in 0..3 {
            b.send(Endpoint::Admin, Endpoint::Counter, env(n)).unwrap();
        }
        let got: Vec<u8> = std::iter::from_fn(|| b.next_delivery())
            .map(|(_, _, e)| e.body[0])
            .collect();
        assert_eq!(got, vec![0, 1, 2]);
        assert_eq!(b.log().entries().len(), 3);
    }

    #[test]
    fn unknown_endpoint() {
        let mut b = bus(vec![]);
        assert!(matches!(
            b.send(Endpoint::Admin, Endpoint::Voter(3), env(0)),
            Err(HarnessError::UnknownEndpoint(_))
        ));
    }

    #[test]
    fn faults() {
        let rule = |occurrence, plan| FaultRule {
            msg_type: MsgType::RelayAc,
            occurrence,
            plan,
        };
        let mut b = bus(vec![
            rule(0, FaultPlan::Drop),
            rule(1, FaultPlan::Tamper { bit: 7 }),
            rule(2, FaultPlan::Delay { ticks: 10 }),
            rule(3, FaultPlan::Duplicate),
        ]);
        assert_eq!(
            b.send(Endpoint::Admin, Endpoint::Counter, env(0)).unwrap(),
            DeliveryOutcome::Dropped
        );
        b.send(Endpoint::Admin, Endpoint::Counter, env(0)).unwrap();
        b.send(Endpoint::Admin, Endpoint::Counter, env(2)).unwrap();
        b.send(Endpoint::Admin, Endpoint::Counter, env(3)).unwrap();
        let got: Vec<u8> = std::iter::from_fn(|| b.next_delivery())
            .map(|(_, _, e)| e.body[0])
            .collect();
        assert_eq!(got, vec![1, 3, 3, 2]);
        assert_eq!(b.now(), 11);
    }

    #[test]
    fn identical_runs_log_identically() {
        let run = || {
            let mut b = bus(vec![]);
            b.send(Endpoint::Admin, Endpoint::Counter, env(5)).unwrap();
            b.send(Endpoint::Counter, Endpoint::Admin, env(6)).unwrap();
            while b.next_delivery().is_some() {}
            b.into_log()
        };
        assert_eq!(run(), run());
        assert!(run().to_text().starts_with("1 admin counter 02 "));
    }
}
