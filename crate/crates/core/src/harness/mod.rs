//! Running elections: framing, a simulated bus with fault injection, a TCP
//! transport, and the files that carry an election between processes.

pub mod bus;
pub mod envelope;
pub mod files;
pub mod sim;
pub mod socket;

pub use bus::{Bus, DeliveryOutcome, Endpoint, FaultPlan, FaultRule, LogEntry, RunLog};
pub use envelope::{Envelope, MsgType};
pub use files::{
    load_setup, parse_choices, parse_receipt, receipt_text, write_setup, Credential, Manifest, Mode,
};
pub use sim::{run_election, run_election_with, simulate, SimOptions, SimRun};
pub use socket::{run_socket_election, serve_admin, serve_counter, vote, SocketRun, VoteResult};

use thiserror::Error;

use crate::election::ElectionError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("unknown endpoint {0}")]
    UnknownEndpoint(String),
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("credential error: {0}")]
    Credential(String),
    #[error("choices error: {0}")]
    Choices(String),
    #[error("gave up after {0} rounds")]
    RoundCapExceeded(u32),
    #[error("i/o error: {0}")]
    Io(String),
    #[error(transparent)]
    Election(ElectionError),
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}
