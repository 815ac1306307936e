//! Attack-cost arithmetic and executable attacks on the voting scheme.

pub mod costmodel;
pub mod guess;
pub mod privacy;
pub mod suite;

pub use costmodel::{
    attack_duration_years, cost_report, generic_gate_bound, generic_rows, ion_trap_bound,
    ion_trap_bound_with, ion_trap_rows, min_password_bits, planetary_surface_bounds, sci, CheckRow,
    CostError, CostModelReport, PhysicalParams, GENERIC_MARGIN_BITS, ION_TRAP_CHOSEN_BITS,
    ION_TRAP_COMPUTER_CAP_LOG2,
};
pub use guess::{
    attack_password_guess, demo_group, record_transcript, run_guess_trials, sweep_password_space,
    test_candidate, DlogOracle, EnkTranscript, GuessResult, GuessTrials,
};
pub use privacy::{
    admin_key_sweep, counter_view, eke_uniformity, record_round, CounterView, EkeReport,
    RecordedRound, SweepReport,
};
pub use suite::{
    attack_suite, exhaustive_flips, run_scenario, FlipReport, Property, Scenario, ScenarioReport,
    SuiteConfig,
};

use thiserror::Error;

use crate::crypto::CryptoError;
use crate::election::ElectionError;
use crate::enk::EnkError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SecurityError {
    #[error("discrete-log oracle needs q < 2^32")]
    OracleTooLarge,
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Crypto(#[from] CryptoError),
    #[error(transparent)]
    Enk(#[from] EnkError),
    #[error(transparent)]
    Election(#[from] ElectionError),
}
