//! Acceptance criteria, one line each. Runs as its own binary so the lines
//! are always printed; any failure makes the process exit nonzero.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use enkvote::crypto::{
    mac_tag, mac_tag_one_time, mac_verify, mac_verify_one_time, sym_decrypt, sym_encrypt,
    CryptoError, KeyRole, MacTag, NonceLedger, PadBook, Password, SymmetricKey,
};
use enkvote::election::{
    admin_audit, setup_election, voter_verify, AuthOutcome, BallotPackage, BulletinBoard,
    CandidateSet, ElectionConfig, IdToken, InvalidReason, LocalElection, RejectReason, Validation,
    VerifyOutcome,
};
use enkvote::enk::{EnkSession, Role};
use enkvote::harness::{run_socket_election, simulate, SimOptions};
use enkvote::numtheory::{
    mod_exp, random_below_range, BlindingExponent, GroupParams, GroupProfile,
};
use enkvote::security::{
    admin_key_sweep, demo_group, eke_uniformity, generic_gate_bound, generic_rows, ion_trap_bound,
    ion_trap_rows, planetary_surface_bounds, record_round, run_guess_trials, run_scenario,
    DlogOracle, Scenario, SuiteConfig, GENERIC_MARGIN_BITS, ION_TRAP_CHOSEN_BITS,
    ION_TRAP_COMPUTER_CAP_LOG2,
};
use enkvote::seeded::party_rng;

type Outcome = Result<String, String>;

type Criterion = (&'static str, fn() -> Outcome, Duration);

macro_rules! check {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn n(v: u64) -> BigUint {
    BigUint::from(v)
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn pow2(k: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(1) << k)
}

const Q64: u64 = 14_799_178_233_674_913_383;

fn three_pass(params: &GroupParams, m: &BigUint, pw: &Password, rng: &mut ChaCha20Rng) -> BigUint {
    let mut alice = EnkSession::initiator(params.clone(), pw.clone(), rng).unwrap();
    let mut bob = EnkSession::responder(params.clone(), pw.clone(), rng).unwrap();
    let m1 = alice.start(m, rng).unwrap();
    let m2 = bob.blind(&m1, rng).unwrap();
    let m3 = alice.unblind(&m2, rng).unwrap();
    bob.finish(&m3).unwrap()
}

fn commutes(params: &GroupParams, m: &BigUint, rng: &mut ChaCha20Rng) -> bool {
    let a = BlindingExponent::sample(params, rng).unwrap();
    let b = BlindingExponent::sample(params, rng).unwrap();
    let e = |x: &BigUint, k: &BigUint| mod_exp(x, k, params).unwrap();
    let ab = e(&e(m, a.exponent()), b.exponent());
    let ba = e(&e(m, b.exponent()), a.exponent());
    let back = e(&e(&ab, a.inverse()), b.inverse());
    ab == ba && &back == m
}

fn criterion_1() -> Outcome {
    let q23 = GroupParams::new(n(23), GroupProfile::SafePrime).unwrap();
    let e = |x: u64, k: u64| mod_exp(&n(x), &n(k), &q23).unwrap();
    let chain = [e(5, 3), e(10, 7), e(14, 15), e(17, 19)];
    check!(
        chain == [n(10), n(14), n(17), n(5)],
        "q=23 chain gave {chain:?}"
    );

    let mut rng = ChaCha20Rng::seed_from_u64(101);
    let pw = Password::from_index(0x5a, 8).unwrap();
    let mut alice = EnkSession::with_exponent(
        Role::Initiator,
        q23.clone(),
        pw.clone(),
        BlindingExponent::new(n(3), &q23).unwrap(),
    );
    let mut bob = EnkSession::with_exponent(
        Role::Responder,
        q23.clone(),
        pw,
        BlindingExponent::new(n(7), &q23).unwrap(),
    );
    let m1 = alice.start(&n(5), &mut rng).unwrap();
    let m2 = bob.blind(&m1, &mut rng).unwrap();
    let m3 = alice.unblind(&m2, &mut rng).unwrap();
    check!(
        bob.finish(&m3).unwrap() == n(5),
        "wrapped q=23 trace did not deliver 5"
    );

    let mut total = 0;
    for (params, count) in [
        (
            GroupParams::new(n(Q64), GroupProfile::SafePrime).unwrap(),
            1000,
        ),
        (GroupParams::modp2048(), 10),
    ] {
        let pw = Password::random(88, &mut rng).unwrap();
        for _ in 0..count {
            let m = random_below_range(&n(2), &(params.q() - 1u8), &mut rng).unwrap();
            check!(
                three_pass(&params, &m, &pw, &mut rng) == m,
                "round trip lost M at {} bits",
                params.bit_length()
            );
            check!(
                commutes(&params, &m, &mut rng),
                "exponents do not commute at {} bits",
                params.bit_length()
            );
            total += 1;
        }
    }
    Ok(format!(
        "trace 10 -> 14 -> 17 -> 5, {total} round trips exact"
    ))
}

fn criterion_2() -> Outcome {
    let g = generic_gate_bound();
    check!(
        g.per_guess_time_s == ratio(1, 10_000_000_000),
        "generic per-guess time"
    );
    check!(
        BigRational::from_integer(BigInt::from(g.guesses_within_budget.clone())) < pow2(66),
        "generic N >= 2^66"
    );
    check!(
        g.min_password_bits == 66,
        "generic min bits {}",
        g.min_password_bits
    );
    check!(
        g.min_password_bits + GENERIC_MARGIN_BITS == 68,
        "generic recommendation"
    );

    let t = ion_trap_bound().map_err(|e| e.to_string())?;
    check!(
        t.per_guess_time_s == ratio(285, 10_000),
        "ion-trap per-guess time"
    );
    let (low, high) = planetary_surface_bounds();
    check!(
        low > ratio(505_000_000_000_000, 1) && high < ratio(515_000_000_000_000, 1),
        "surface not ~5.1e14"
    );
    check!(
        high < pow2(ION_TRAP_COMPUTER_CAP_LOG2) && ION_TRAP_COMPUTER_CAP_LOG2 == 49,
        "surface above 2^49"
    );
    check!(
        BigRational::from_integer(BigInt::from(t.guesses_within_budget.clone())) < pow2(87),
        "ion-trap N >= 2^87"
    );
    check!(
        t.min_password_bits == 87 && ION_TRAP_CHOSEN_BITS == 88,
        "ion-trap bits {}",
        t.min_password_bits
    );

    let rows: Vec<_> = generic_rows().into_iter().chain(ion_trap_rows()).collect();
    let bad: Vec<_> = rows
        .iter()
        .filter(|r| !r.matches)
        .map(|r| r.parameter.clone())
        .collect();
    check!(bad.is_empty(), "table mismatches: {bad:?}");
    Ok(format!("{} table rows match", rows.len()))
}

fn criterion_3() -> Outcome {
    let cfg = ElectionConfig::new(&["ada", "bo"], 25, GroupParams::modp2048());
    let setup = setup_election(&cfg, &mut party_rng(3, "setup")).map_err(|e| e.to_string())?;
    let choices: Vec<_> = (0..25).map(|i| Some(if i < 13 { 1 } else { 2 })).collect();
    let run =
        simulate(setup.clone(), &choices, 3, &SimOptions::default()).map_err(|e| e.to_string())?;
    let board = BulletinBoard::from_export(&run.export, &setup.public.candidates)
        .map_err(|e| e.to_string())?;
    check!(board.rows().len() == 25, "{} rows", board.rows().len());
    let tally = board.tally(&setup.public.candidates).unwrap();
    check!(
        tally == vec![("ada".into(), 13), ("bo".into(), 12)],
        "tally {tally:?}"
    );
    check!(board.failed_ids().is_empty(), "failed ids on the board");
    for (i, r) in run.receipts.iter().enumerate() {
        let pkg = r.as_ref().ok_or(format!("voter {i} has no receipt"))?;
        check!(
            voter_verify(pkg, &board) == VerifyOutcome::Counted,
            "voter {i} not counted"
        );
    }
    let offending = admin_audit(&setup.admin.k_va, &board);
    check!(offending.is_empty(), "audit flagged {offending:?}");

    let again =
        simulate(setup.clone(), &choices, 3, &SimOptions::default()).map_err(|e| e.to_string())?;
    check!(
        again.export == run.export,
        "simulated export differs between runs"
    );
    check!(again.log == run.log, "run log differs between runs");
    let sock = run_socket_election(setup, &choices, 3).map_err(|e| e.to_string())?;
    check!(
        sock.export == run.export,
        "socket export differs from simulated export"
    );
    Ok("25 rows, 13/12, all counted, audit empty, socket = simulated".into())
}

fn criterion_4() -> Outcome {
    let config = SuiteConfig::default();
    let scenarios = [
        Scenario::InvalidBallot,
        Scenario::StallVoter,
        Scenario::TamperAdmin,
        Scenario::TamperCounter,
        Scenario::TamperOutsider,
        Scenario::Replay,
        Scenario::Impersonate,
    ];
    let mut names = Vec::new();
    for s in scenarios {
        let r = run_scenario(s, &config);
        check!(r.passed, "{r}");
        names.push(r.to_string());
    }
    Ok(format!(
        "{} scenarios pass; {}",
        names.len(),
        names[4]
            .split_whitespace()
            .skip(3)
            .collect::<Vec<_>>()
            .join(" ")
    ))
}

fn criterion_5() -> Outcome {
    let cfg = ElectionConfig::new(&["ada", "bo"], 6, GroupParams::modp768());
    let mut e = LocalElection::new(setup_election(&cfg, &mut party_rng(5, "setup")).unwrap(), 5);
    let choices: Vec<_> = (0..6).map(|i| Some(1 + i % 2)).collect();
    let round = record_round(&mut e, &choices, None).map_err(|x| x.to_string())?;
    let ballots: Vec<Vec<u8>> = e
        .voters
        .iter()
        .map(|v| v.package().unwrap().y_bytes())
        .collect();
    let sweep = admin_key_sweep(e.admin.credential(), &e.public.group, &[round], &ballots);
    check!(
        sweep.messages > 0 && sweep.attempts > 0,
        "sweep tried nothing"
    );
    check!(
        sweep.decoded == 0 && sweep.ballots_recovered == 0,
        "administrator sweep decoded {sweep:?}"
    );

    let group = demo_group();
    let oracle = DlogOracle::new(&group).map_err(|x| x.to_string())?;
    let mut rng = ChaCha20Rng::seed_from_u64(55);
    let trials = run_guess_trials(&oracle, &group, 8, 50, &mut rng).map_err(|x| x.to_string())?;
    check!(
        trials.recovered == 50,
        "recovered {} of 50",
        trials.recovered
    );
    check!(
        (64.0..=160.0).contains(&trials.mean_guesses),
        "mean guesses {}",
        trials.mean_guesses
    );
    check!(
        trials.false_accepts == 0,
        "{} false accepts",
        trials.false_accepts
    );

    let eke = eke_uniformity(&group, 16, &mut rng).map_err(|x| x.to_string())?;
    check!(eke.rejectable == 0, "{} rejectable unwraps", eke.rejectable);
    // 15 degrees of freedom, 0.999 quantile
    check!(
        (0.0..37.7).contains(&eke.chi_square),
        "chi-square {}",
        eke.chi_square
    );
    Ok(format!(
        "sweep {} attempts decode 0; guesses mean {:.1} over 50, 0 false; {} unwraps, 0 rejectable",
        sweep.attempts, trials.mean_guesses, eke.unwraps
    ))
}

/// Hands out the same octets forever.
struct StuckRng;

impl RngCore for StuckRng {
    fn next_u32(&mut self) -> u32 {
        7
    }
    fn next_u64(&mut self) -> u64 {
        7
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        dest.fill(7);
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.fill_bytes(dest);
        Ok(())
    }
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    let key = SymmetricKey::random(KeyRole::Vc, &mut rng).unwrap();
    let other = SymmetricKey::random(KeyRole::Vc, &mut rng).unwrap();
    let book = PadBook::random(4, &mut rng).unwrap();
    let ledger = NonceLedger::new();
    let msg = b"ballot and verification string".to_vec();
    let genuine = mac_tag(&key, &msg, &[1; 12], &ledger).unwrap();
    let one_time = mac_tag_one_time(&book, &msg, &PadBook::nonce_for_slot(0), &ledger).unwrap();
    check!(mac_verify(&key, &msg, &genuine), "genuine tag rejected");
    check!(
        mac_verify_one_time(&book, &msg, &one_time),
        "genuine one-time tag rejected"
    );

    let mut forgeries = 0;
    let attempts = 100_000;
    for i in 0..attempts {
        let mut m = msg.clone();
        let mut bytes = genuine.to_bytes();
        let accepted = match i % 5 {
            0 => {
                rng.fill(&mut bytes[..]);
                mac_verify(&key, &m, &MacTag::from_bytes(&bytes).unwrap())
            }
            1 => {
                let bit = rng.gen_range(0..bytes.len() * 8);
                bytes[bit / 8] ^= 0x80 >> (bit % 8);
                mac_verify(&key, &m, &MacTag::from_bytes(&bytes).unwrap())
            }
            2 => {
                let bit = rng.gen_range(0..m.len() * 8);
                m[bit / 8] ^= 0x80 >> (bit % 8);
                mac_verify(&key, &m, &genuine)
            }
            3 => mac_verify(&other, &m, &genuine),
            _ => {
                let bit = rng.gen_range(0..m.len() * 8);
                m[bit / 8] ^= 0x80 >> (bit % 8);
                mac_verify_one_time(&book, &m, &one_time)
            }
        };
        forgeries += accepted as usize;
    }
    check!(forgeries == 0, "{forgeries} forgeries accepted");

    let sealed = sym_encrypt(&key, &[0x42; 40], &ledger, &mut rng).unwrap();
    let mut undetected = 0;
    for bit in 0..sealed.len() * 8 {
        let mut c = sealed.clone();
        c[bit / 8] ^= 0x80 >> (bit % 8);
        undetected += sym_decrypt(&key, &c).is_ok() as usize;
    }
    check!(
        undetected == 0,
        "{undetected} of {} flips undetected",
        sealed.len() * 8
    );
    check!(
        sym_decrypt(&key, &sealed).unwrap() == vec![0x42; 40],
        "sealed message does not open"
    );

    for _ in 0..2 {
        let fresh = NonceLedger::new();
        mac_tag(&key, b"a", &[9; 12], &fresh).unwrap();
        check!(
            mac_tag(&key, b"b", &[9; 12], &fresh) == Err(CryptoError::NonceReuse),
            "MAC nonce reuse allowed"
        );
        let slot = PadBook::nonce_for_slot(1);
        mac_tag_one_time(&book, b"a", &slot, &fresh).unwrap();
        check!(
            mac_tag_one_time(&book, b"b", &slot, &fresh) == Err(CryptoError::NonceReuse),
            "pad slot reused"
        );
        sym_encrypt(&key, b"a", &fresh, &mut StuckRng).unwrap();
        check!(
            sym_encrypt(&key, b"b", &fresh, &mut StuckRng) == Err(CryptoError::NonceReuse),
            "AEAD nonce reuse allowed"
        );
    }
    Ok(format!(
        "0 of {attempts} forgeries, {} flips all detected, nonce reuse refused",
        sealed.len() * 8
    ))
}

fn snapshot(board: &BulletinBoard, candidates: &CandidateSet) -> String {
    let mut b = board.clone();
    b.close(Vec::new());
    b.export(candidates).unwrap()
}

fn criterion_7() -> Outcome {
    let cfg = ElectionConfig::new(&["ada", "bo"], 3, GroupParams::modp768());
    let setup = setup_election(&cfg, &mut party_rng(7, "setup")).unwrap();
    let choices = [Some(1), Some(2), Some(1)];
    let mut baseline = LocalElection::new(setup.clone(), 7);
    baseline.run_round(&choices).map_err(|e| e.to_string())?;
    let expected = baseline.counter.export().unwrap();

    let mut e = LocalElection::new(setup, 7);
    let cands = e.public.candidates.clone();
    let mut first = None;
    for (i, c) in choices.iter().enumerate() {
        let sub = e.voters[i].submit(c.unwrap()).unwrap();
        check!(
            matches!(e.admin.authenticate(&sub), AuthOutcome::Accepted { .. }),
            "voter {i} refused"
        );
        first.get_or_insert(sub);
    }
    let replay = first.unwrap();
    let before = e.admin.auth_table().to_vec();
    check!(
        e.admin.authenticate(&replay) == AuthOutcome::Rejected(RejectReason::Duplicate),
        "duplicate ID not rejected as duplicate"
    );
    let mut rng = ChaCha20Rng::seed_from_u64(77);
    let k_va = e.voters[1].credential().k_va.clone();
    let mut forged = replay.clone();
    let stranger = IdToken::random(&mut rng);
    forged.sealed_id = sym_encrypt(&k_va, &stranger.0, &NonceLedger::new(), &mut rng).unwrap();
    check!(
        e.admin.authenticate(&forged) == AuthOutcome::Rejected(RejectReason::Ineligible),
        "off-roster ID not rejected as ineligible"
    );
    check!(
        e.admin.auth_table() == &before[..],
        "authentication table changed"
    );

    e.admin.close_authentication().unwrap();
    e.relay().map_err(|x| x.to_string())?;
    let board_before = snapshot(e.counter.board(), &cands);
    let victim: BallotPackage = e.voters[0].package().unwrap().clone();
    let thief = e.voters[1].credential().clone();
    let ledger = NonceLedger::new();
    let ballot = cands.code(2).unwrap().to_vec();
    let tag_va = mac_tag(
        &thief.k_va,
        &BallotPackage::ballot_and_verif(&ballot, &victim.verif),
        &[0xdd; 12],
        &ledger,
    )
    .unwrap();
    let mut pkg = BallotPackage {
        ballot,
        verif: victim.verif,
        tag_va,
        tag_vc: tag_va,
    };
    pkg.tag_vc = mac_tag(&thief.k_vc, &pkg.x_bytes(), &[0xee; 12], &ledger).unwrap();
    check!(
        e.counter.validate(&pkg.y_bytes())
            == Validation::Invalid(InvalidReason::DuplicateVerificationString),
        "duplicate S not rejected as duplicate"
    );
    check!(
        snapshot(e.counter.board(), &cands) == board_before,
        "board changed after duplicate S"
    );
    e.close().map_err(|x| x.to_string())?;
    let got = e.counter.export().unwrap();
    check!(
        got == expected,
        "final export differs from the undisturbed election"
    );
    Ok("duplicate ID, off-roster ID and duplicate S rejected; export identical".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("three-pass algebra", criterion_1, Duration::from_secs(10)),
        ("cost model values", criterion_2, Duration::from_secs(1)),
        ("end-to-end election", criterion_3, Duration::from_secs(30)),
        ("security properties", criterion_4, Duration::from_secs(60)),
        ("privacy properties", criterion_5, Duration::from_secs(120)),
        ("mac and cipher", criterion_6, Duration::from_secs(60)),
        ("unreusability", criterion_7, Duration::from_secs(10)),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(detail) if elapsed > *limit => Err(format!("{detail}; over the {limit:?} limit")),
            other => other,
        };
        let (status, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!(
            "criterion {} {:<20} {status} {:>8.2?}  {detail}",
            i + 1,
            name,
            elapsed
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
