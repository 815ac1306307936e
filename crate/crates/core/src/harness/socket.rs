//! TCP transport: one process (or thread) per party, framed envelopes,
//! wall-clock timeouts. A socket election runs a single round.

use std::collections::HashMap;
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::thread;
use std::time::{Duration, Instant};

use super::envelope::{Envelope, MsgType};
use super::sim::{ids_from_bytes, ids_to_bytes};
use super::HarnessError;
use crate::election::{
    AdminCredential, Administrator, Announcement, AuthOutcome, BallotPackage, BulletinBoard,
    Counter, CounterCredential, ElectionSetup, HopMessage, PublicParams, VerifyOutcome, Voter,
    VoterCredential,
};
use crate::seeded::party_rng;

pub const SOCKET_TIMEOUT: Duration = Duration::from_secs(30);

fn prepare(stream: &TcpStream) -> Result<(), HarnessError> {
    stream.set_read_timeout(Some(SOCKET_TIMEOUT))?;
    stream.set_write_timeout(Some(SOCKET_TIMEOUT))?;
    stream.set_nodelay(true)?;
    Ok(())
}

fn connect(addr: SocketAddr) -> Result<TcpStream, HarnessError> {
    let deadline = Instant::now() + SOCKET_TIMEOUT;
    loop {
        match TcpStream::connect_timeout(&addr, SOCKET_TIMEOUT) {
            Ok(s) => {
                prepare(&s)?;
                return Ok(s);
            }
            Err(e) if Instant::now() < deadline => {
                let _ = e;
                thread::sleep(Duration::from_millis(20));
            }
            Err(e) => return Err(e.into()),
        }
    }
}

/// Counter: serves one administrator connection until it asks for the
/// board, then publishes and returns the export.
pub fn serve_counter(
    listener: TcpListener,
    public: PublicParams,
    cred: CounterCredential,
    seed: u64,
) -> Result<String, HarnessError> {
    let mut counter = Counter::new(cred, public.clone(), party_rng(seed, "counter"));
    let (mut stream, _) = listener.accept()?;
    prepare(&stream)?;
    loop {
        let env = Envelope::read_from(&mut stream)?;
        match env.msg_type {
            MsgType::Announce => counter.on_announce(&ids_from_bytes(&env.body)?)?,
            MsgType::RelayAc => {
                let reply = HopMessage::from_bytes(&env.body, &public.group)
                    .and_then(|h| counter.on_hop1(&h))
                    .map(|h2| h2.to_bytes())
                    .unwrap_or_default();
                Envelope::new(MsgType::RelayCa, reply).write_to(&mut stream)?;
            }
            MsgType::RelayAcFinal => {
                if let Ok(h) = HopMessage::from_bytes(&env.body, &public.group) {
                    let _ = counter.on_hop5(&h);
                }
            }
            MsgType::BoardExport => {
                counter.expire_unresolved();
                counter.publish()?;
                let export = counter.export()?;
                Envelope::new(MsgType::BoardExport, export.clone().into_bytes())
                    .write_to(&mut stream)?;
                return Ok(export);
            }
            other => {
                return Err(HarnessError::Protocol(format!(
                    "counter cannot handle {other:?}"
                )));
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct AdminRun {
    pub announcement: Announcement,
    pub export: String,
}

/// Administrator: accepts voter connections until `expected` voters have
/// authenticated or `window` passes, then relays every ballot through the
/// counter at `counter_addr` and sends the final board to every voter.
pub fn serve_admin(
    listener: TcpListener,
    counter_addr: SocketAddr,
    public: PublicParams,
    cred: AdminCredential,
    seed: u64,
    expected: usize,
    window: Duration,
) -> Result<AdminRun, HarnessError> {
    let group = public.group.clone();
    let mut admin = Administrator::new(
        cred,
        public,
        party_rng(seed, "admin/wrap"),
        party_rng(seed, "admin/substitution"),
    );
    let mut voters: HashMap<usize, TcpStream> = HashMap::new();
    listener.set_nonblocking(true)?;
    let deadline = Instant::now() + window;
    while voters.len() < expected && Instant::now() < deadline {
        match listener.accept() {
            Ok((mut stream, _)) => {
                stream.set_nonblocking(false)?;
                prepare(&stream)?;
                let Ok(env) = Envelope::expect(&mut stream, MsgType::Submit) else {
                    continue;
                };
                let Ok(sub) = HopMessage::from_bytes(&env.body, &group) else {
                    continue;
                };
                if let AuthOutcome::Accepted { entry } = admin.authenticate(&sub) {
                    let v = admin.auth_table()[entry - 1].voter_index;
                    voters.insert(v, stream);
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                thread::sleep(Duration::from_millis(5));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let announcement = admin.close_authentication()?;
    admin.substitute()?;
    let ids = admin.replaced_ids()?;

    let mut counter = connect(counter_addr)?;
    Envelope::new(MsgType::Announce, ids_to_bytes(&ids)).write_to(&mut counter)?;
    for slot in 1..=ids.len() {
        let h1 = admin.hop1(slot)?;
        Envelope::new(MsgType::RelayAc, h1.to_bytes()).write_to(&mut counter)?;
        let reply = Envelope::expect(&mut counter, MsgType::RelayCa)?;
        let Ok(h2) = HopMessage::from_bytes(&reply.body, &group) else {
            continue;
        };
        let Ok((v, h3)) = admin.on_hop2(&h2) else {
            continue;
        };
        let Some(stream) = voters.get_mut(&v) else {
            continue;
        };
        if Envelope::new(MsgType::RelayAv, h3.to_bytes())
            .write_to(stream)
            .is_err()
        {
            continue;
        }
        let Ok(env) = Envelope::expect(stream, MsgType::RelayVa) else {
            continue;
        };
        let Ok(h5) = HopMessage::from_bytes(&env.body, &group)
            .map_err(HarnessError::from)
            .and_then(|h4| Ok(admin.on_hop4(&h4)?))
        else {
            continue;
        };
        Envelope::new(MsgType::RelayAcFinal, h5.to_bytes()).write_to(&mut counter)?;
    }
    Envelope::new(MsgType::BoardExport, Vec::new()).write_to(&mut counter)?;
    let board = Envelope::expect(&mut counter, MsgType::BoardExport)?;
    let export = String::from_utf8(board.body)
        .map_err(|_| HarnessError::Protocol("board export is not text".into()))?;
    let mut order: Vec<_> = voters.keys().copied().collect();
    order.sort_unstable();
    for v in order {
        let stream = voters.get_mut(&v).expect("listed key");
        let _ = Envelope::new(MsgType::BoardExport, export.clone().into_bytes()).write_to(stream);
    }
    Ok(AdminRun {
        announcement,
        export,
    })
}

#[derive(Debug, Clone)]
pub struct VoteResult {
    pub package: BallotPackage,
    pub export: String,
    pub outcome: VerifyOutcome,
}

/// Voter: submits `choice`, answers the relay and checks the final board.
pub fn vote(
    admin_addr: SocketAddr,
    public: PublicParams,
    cred: VoterCredential,
    choice: usize,
    seed: u64,
) -> Result<VoteResult, HarnessError> {
    let rng = party_rng(seed, &format!("voter/{}", cred.index));
    let candidates = public.candidates.clone();
    let group = public.group.clone();
    let mut voter = Voter::new(cred, public, rng);
    let sub = voter.submit(choice)?;
    let package = voter.package().cloned().expect("just submitted");
    let mut stream = connect(admin_addr)?;
    Envelope::new(MsgType::Submit, sub.to_bytes()).write_to(&mut stream)?;
    let mut env = Envelope::read_from(&mut stream)?;
    if env.msg_type == MsgType::RelayAv {
        let h3 = HopMessage::from_bytes(&env.body, &group)?;
        let h4 = voter.on_hop3(&h3)?;
        Envelope::new(MsgType::RelayVa, h4.to_bytes()).write_to(&mut stream)?;
        env = Envelope::read_from(&mut stream)?;
    }
    if env.msg_type != MsgType::BoardExport {
        return Err(HarnessError::Protocol(format!(
            "voter cannot handle {:?}",
            env.msg_type
        )));
    }
    let export = String::from_utf8(env.body)
        .map_err(|_| HarnessError::Protocol("board export is not text".into()))?;
    let board = BulletinBoard::from_export(&export, &candidates)?;
    let outcome = voter.verify(&board);
    Ok(VoteResult {
        package,
        export,
        outcome,
    })
}

#[derive(Debug, Clone)]
pub struct SocketRun {
    pub export: String,
    pub votes: Vec<Option<VoteResult>>,
}

/// All parties on loopback sockets, one thread each.
pub fn run_socket_election(
    setup: ElectionSetup,
    choices: &[Option<usize>],
    seed: u64,
) -> Result<SocketRun, HarnessError> {
    let counter_listener = TcpListener::bind("127.0.0.1:0")?;
    let admin_listener = TcpListener::bind("127.0.0.1:0")?;
    let counter_addr = counter_listener.local_addr()?;
    let admin_addr = admin_listener.local_addr()?;
    let expected = choices.iter().filter(|c| c.is_some()).count();

    let public = setup.public.clone();
    let counter_cred = setup.counter.clone();
    let counter =
        thread::spawn(move || serve_counter(counter_listener, public, counter_cred, seed));
    let public = setup.public.clone();
    let admin_cred = setup.admin.clone();
    let admin = thread::spawn(move || {
        serve_admin(
            admin_listener,
            counter_addr,
            public,
            admin_cred,
            seed,
            expected,
            SOCKET_TIMEOUT,
        )
    });
    let voters: Vec<_> = setup
        .voters
        .iter()
        .zip(choices)
        .map(|(cred, choice)| {
            choice.map(|c| {
                let public = setup.public.clone();
                let cred = cred.clone();
                thread::spawn(move || vote(admin_addr, public, cred, c, seed))
            })
        })
        .collect();
    let mut votes = Vec::new();
    for handle in voters {
        votes.push(match handle {
            Some(h) => Some(
                h.join()
                    .map_err(|_| HarnessError::Protocol("voter thread panicked".into()))??,
            ),
            None => None,
        });
    }
    let admin_run = admin
        .join()
        .map_err(|_| HarnessError::Protocol("administrator thread panicked".into()))??;
    let counter_export = counter
        .join()
        .map_err(|_| HarnessError::Protocol("counter thread panicked".into()))??;
    if counter_export != admin_run.export {
        return Err(HarnessError::Protocol(
            "administrator received a different board".into(),
        ));
    }
    Ok(SocketRun {
        export: admin_run.export,
        votes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::{setup_election, ElectionConfig};
    use crate::harness::sim::{simulate, SimOptions};
    use crate::numtheory::GroupParams;

    #[test]
    fn socket_and_simulated_exports_match() {
        let cfg = ElectionConfig::new(&["ada", "bo"], 5, GroupParams::modp768());
        let setup = setup_election(&cfg, &mut party_rng(30, "setup")).unwrap();
        let choices = vec![Some(1), Some(2), Some(2), Some(1), Some(1)];
        let sock = run_socket_election(setup.clone(), &choices, 30).unwrap();
        let sim = simulate(setup, &choices, 30, &SimOptions::default()).unwrap();
        assert_eq!(sock.export, sim.export);
        assert!(sock
            .votes
            .iter()
            .all(|v| v.as_ref().unwrap().outcome == VerifyOutcome::Counted));
    }

    #[test]
    fn unknown_frame_type_ends_the_session() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let cfg = ElectionConfig::new(&["ada", "bo"], 1, GroupParams::modp768());
        let setup = setup_election(&cfg, &mut party_rng(31, "setup")).unwrap();
        let server =
            thread::spawn(move || serve_counter(listener, setup.public, setup.counter, 31));
        let mut s = connect(addr).unwrap();
        use std::io::Write;
        s.write_all(&[0x7f, 0, 0, 0, 0]).unwrap();
        assert!(matches!(
            server.join().unwrap(),
            Err(HarnessError::Protocol(_))
        ));
    }
}
