//! The four-phase voting scheme.
//!
//! Three roles exchange messages: [`Voter`], [`Administrator`] (authenticates
//! voters and relays ballots under substituted IDs) and [`Counter`] (recovers
//! ballots, validates them and keeps the [`BulletinBoard`]). Each role is a
//! plain state machine fed with [`HopMessage`]s, so the same code runs under
//! [`LocalElection`], the simulated bus and the socket transport.
//!
//! A ballot travels as `Y = B || S || h_va(B||S) || h_vc(X)` embedded in the
//! group and pushed through a no-key exchange between voter and counter. The
//! inner wrapping uses the voter-counter password, which the administrator
//! never holds; the outer layer is rekeyed at every hop through the
//! administrator.

mod admin;
mod board;
mod counter;
mod relay;
mod setup;
mod types;
mod voter;
mod wire;

pub use admin::{
    admin_audit, Administrator, Announcement, AuthEntry, AuthOutcome, RejectReason,
    SubstitutionRow, SubstitutionTable,
};
pub use board::{BoardRow, BoardStatus, BulletinBoard};
pub use counter::{Counter, InvalidReason, Published, RoundOutcome, Validation};
pub use relay::{relay_round, LocalElection, RoundReport, Schedule};
pub use setup::{setup_election, ElectionConfig, ElectionSetup};
pub use types::{
    AdminCredential, BallotPackage, CandidateSet, CounterCredential, IdToken, PublicParams,
    RosterEntry, VoterCredential, VERIF_LEN,
};
pub use voter::{
    build_with_ballot, package_is_consistent, voter_build_ballot, voter_verify, RevoteGrant,
    VerifyOutcome, Voter,
};
pub use wire::HopMessage;

use thiserror::Error;

use crate::crypto::CryptoError;
use crate::enk::EnkError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElectionError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("choice {choice} is outside 1..={candidates}")]
    ChoiceOutOfRange { choice: usize, candidates: usize },
    #[error("state error: {0}")]
    State(String),
    #[error("malformed input: {0}")]
    Format(String),
    #[error("relay error: {0}")]
    Hop(String),
    #[error("gave up after {0} rounds")]
    RoundCapExceeded(u32),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Enk(#[from] EnkError),
}
