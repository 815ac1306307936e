use std::fs;
use std::net::{SocketAddr, TcpListener};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use enkvote::election::{
    admin_audit, setup_election, voter_verify, BulletinBoard, ElectionConfig, VerifyOutcome,
};
use enkvote::harness::files::{receipt_file, write_public};
use enkvote::harness::{
    parse_receipt, receipt_text, run_election, serve_admin, serve_counter, vote, write_setup,
    Credential, Manifest, Mode,
};
use enkvote::numtheory::GroupParams;
use enkvote::security::{
    attack_suite, generic_rows, ion_trap_rows, run_scenario, CheckRow, Scenario, SuiteConfig,
};
use enkvote::seeded::party_rng;

#[derive(Parser)]
#[command(
    name = "enkvote",
    version,
    about = "Anonymous voting over an encrypted no-key exchange"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Generic,
    IonTrap,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Simulated,
    Socket,
}

#[derive(Subcommand)]
enum Command {
    /// Write a manifest and one credential file per party.
    Setup {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        voters: usize,
        /// Comma-separated candidate labels.
        #[arg(long, value_delimiter = ',', default_value = "yes,no")]
        candidates: Vec<String>,
        /// modp768, modp1024 or modp2048.
        #[arg(long, default_value = "modp2048")]
        group: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "simulated")]
        mode: ModeArg,
    },
    /// Run a simulated election from a manifest and a choices script.
    Run {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        choices: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for board.txt, runlog.txt and receipts (default: next to the manifest).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Counter over TCP.
    ServeCounter {
        #[arg(long)]
        listen: SocketAddr,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        credential: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        board: Option<PathBuf>,
    },
    /// Administrator over TCP.
    ServeAdmin {
        #[arg(long)]
        listen: SocketAddr,
        /// Counter address.
        #[arg(long)]
        connect: SocketAddr,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        credential: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Voters to wait for (default: everyone on the roster).
        #[arg(long)]
        expect: Option<usize>,
        /// Seconds to keep authentication open.
        #[arg(long, default_value_t = 300)]
        window: u64,
        #[arg(long)]
        board: Option<PathBuf>,
    },
    /// Cast one ballot over TCP and check the published board.
    Vote {
        /// Administrator address.
        #[arg(long)]
        connect: SocketAddr,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        credential: PathBuf,
        /// Candidate label or 1-based number.
        #[arg(long)]
        choice: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        receipt: Option<PathBuf>,
    },
    /// List board rows whose administrator tag does not verify.
    Audit {
        #[arg(long)]
        board: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        /// Administrator credential.
        #[arg(long)]
        credential: PathBuf,
    },
    /// Check one voter's ballot on a board.
    Verify {
        #[arg(long)]
        board: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        credential: PathBuf,
        #[arg(long)]
        receipt: PathBuf,
    },
    /// Run an attack scenario, or `all`.
    Attack {
        #[arg(long)]
        scenario: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        voters: usize,
        #[arg(long, default_value = "modp768")]
        group: String,
    },
    /// Compare the password cost model against its reference values.
    Costmodel {
        #[arg(long, value_enum)]
        profile: Profile,
    },
}

fn group(name: &str) -> Result<GroupParams> {
    GroupParams::named(name)
        .ok_or_else(|| anyhow!("unknown group {name:?}; expected modp768, modp1024 or modp2048"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_board(path: &Path, manifest: &Manifest) -> Result<BulletinBoard> {
    Ok(BulletinBoard::from_export(
        &read(path)?,
        &manifest.public.candidates,
    )?)
}

fn choice_number(text: &str, manifest: &Manifest) -> Result<usize> {
    let labels = manifest.public.candidates.labels();
    if let Some(pos) = labels.iter().position(|l| l == text) {
        return Ok(pos + 1);
    }
    match text.parse::<usize>() {
        Ok(k) if (1..=labels.len()).contains(&k) => Ok(k),
        _ => bail!("{text:?} is not a candidate"),
    }
}

fn print_tally(export: &str, manifest: &Manifest) -> Result<()> {
    let board = BulletinBoard::from_export(export, &manifest.public.candidates)?;
    for (label, count) in board.tally(&manifest.public.candidates)? {
        println!("{label}: {count}");
    }
    Ok(())
}

fn outcome_name(o: VerifyOutcome) -> &'static str {
    match o {
        VerifyOutcome::Counted => "counted",
        VerifyOutcome::Altered => "altered",
        VerifyOutcome::Missing => "missing",
    }
}

fn print_rows(rows: &[CheckRow]) -> bool {
    println!(
        "{:<44} {:>16} {:>22}  match",
        "parameter", "reference", "computed"
    );
    for r in rows {
        println!("{r}");
    }
    rows.iter().all(|r| r.matches)
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Setup {
            out,
            voters,
            candidates,
            group: g,
            seed,
            mode,
        } => {
            let labels: Vec<&str> = candidates.iter().map(String::as_str).collect();
            let cfg = ElectionConfig::new(&labels, voters, group(&g)?);
            let setup = setup_election(&cfg, &mut party_rng(seed, "setup"))?;
            let mode = match mode {
                ModeArg::Simulated => Mode::Simulated,
                ModeArg::Socket => Mode::Socket,
            };
            let path = write_setup(&out, &setup, mode)?;
            println!(
                "wrote {} and {} credential files",
                path.display(),
                voters + 2
            );
        }
        Command::Run {
            manifest,
            choices,
            seed,
            out,
        } => {
            let run = run_election(&manifest, &read(&choices)?, seed)?;
            let dir =
                out.unwrap_or_else(|| manifest.parent().unwrap_or(Path::new(".")).to_path_buf());
            fs::create_dir_all(&dir)?;
            write_public(&dir.join("board.txt"), &run.export)?;
            write_public(&dir.join("runlog.txt"), &run.log.to_text())?;
            for (i, r) in run.receipts.iter().enumerate() {
                if let Some(p) = r {
                    write_public(&dir.join(receipt_file(i)), &receipt_text(p))?;
                }
            }
            println!("rounds: {}", run.rounds.len());
            print_tally(&run.export, &Manifest::load(&manifest)?)?;
        }
        Command::ServeCounter {
            listen,
            manifest,
            credential,
            seed,
            board,
        } => {
            let m = Manifest::load(&manifest)?;
            let cred = Credential::load(&credential)?.into_counter()?;
            let export = serve_counter(TcpListener::bind(listen)?, m.public.clone(), cred, seed)?;
            if let Some(path) = board {
                write_public(&path, &export)?;
            }
            print_tally(&export, &m)?;
        }
        Command::ServeAdmin {
            listen,
            connect,
            manifest,
            credential,
            seed,
            expect,
            window,
            board,
        } => {
            let m = Manifest::load(&manifest)?;
            let cred = Credential::load(&credential)?.into_admin()?;
            let expected = expect.unwrap_or(m.public.voters);
            let run = serve_admin(
                TcpListener::bind(listen)?,
                connect,
                m.public.clone(),
                cred,
                seed,
                expected,
                Duration::from_secs(window),
            )?;
            if let Some(path) = board {
                write_public(&path, &run.export)?;
            }
            print_tally(&run.export, &m)?;
        }
        Command::Vote {
            connect,
            manifest,
            credential,
            choice,
            seed,
            receipt,
        } => {
            let m = Manifest::load(&manifest)?;
            let cred = Credential::load(&credential)?.into_voter()?;
            let k = choice_number(&choice, &m)?;
            let result = vote(connect, m.public.clone(), cred, k, seed)?;
            if let Some(path) = receipt {
                write_public(&path, &receipt_text(&result.package))?;
            }
            println!("{}", outcome_name(result.outcome));
            if result.outcome != VerifyOutcome::Counted {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Audit {
            board,
            manifest,
            credential,
        } => {
            let m = Manifest::load(&manifest)?;
            let cred = Credential::load(&credential)?.into_admin()?;
            let offending = admin_audit(&cred.k_va, &load_board(&board, &m)?);
            if offending.is_empty() {
                println!("no offending rows");
            } else {
                for entry in &offending {
                    println!("offending row {entry}");
                }
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Verify {
            board,
            manifest,
            credential,
            receipt,
        } => {
            let m = Manifest::load(&manifest)?;
            let cred = Credential::load(&credential)?.into_voter()?;
            let package = parse_receipt(&read(&receipt)?, &m.public)?;
            if !enkvote::election::package_is_consistent(&cred, &package) {
                bail!("receipt MACs do not verify under this credential");
            }
            let outcome = voter_verify(&package, &load_board(&board, &m)?);
            println!("{}", outcome_name(outcome));
            if outcome != VerifyOutcome::Counted {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Attack {
            scenario,
            seed,
            voters,
            group: g,
        } => {
            let config = SuiteConfig {
                group: group(&g)?,
                voters,
                seed,
                ..SuiteConfig::default()
            };
            let reports = if scenario == "all" {
                attack_suite(&config)
            } else {
                let s: Scenario = scenario.parse().map_err(|e: String| anyhow!(e))?;
                vec![run_scenario(s, &config)]
            };
            for r in &reports {
                println!("{r}");
            }
            if !reports.iter().all(|r| r.passed) {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Costmodel { profile } => {
            let rows = match profile {
                Profile::Generic => generic_rows(),
                Profile::IonTrap => ion_trap_rows(),
            };
            if !print_rows(&rows) {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
